#pragma once
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace catrag {

// Entity surface normalization: lowercase ASCII letters, collapse internal
// whitespace runs to a single space, trim ends. Non-ASCII bytes pass through
// unchanged; inputs are expected to be NFC-normalized UTF-8 upstream.
std::string normalize_surface(std::string_view s);

// Answer/metric normalization: lowercase, strip punctuation, collapse whitespace.
std::string normalize_answer(std::string_view s);

// Whitespace/punctuation word split after normalize_answer.
std::vector<std::string> tokenize(std::string_view s);

// FNV-1a 64-bit over raw bytes.
uint64_t fnv1a64(std::string_view bytes, uint64_t seed = 0xcbf29ce484222325ull);

// splitmix64 step; deterministic across platforms.
uint64_t splitmix64(uint64_t& state);

// Deterministic RNG used wherever reproducibility across standard libraries
// matters (std::uniform_*_distribution is implementation-defined).
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}
    uint64_t next_u64() { return splitmix64(state_); }
    // uniform in [0, bound)
    uint64_t next_below(uint64_t bound);
    // uniform in [0, 1)
    double next_double();
    // Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    uint64_t state_;
};

double cosine(std::span<const float> a, std::span<const float> b);
double l2_norm(std::span<const float> v);
void l2_normalize(std::vector<float>& v);

// Substitute ${name} slots in a template. Unknown slots are left intact.
std::string substitute_slots(std::string_view templ,
                             const std::vector<std::pair<std::string, std::string>>& slots);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view bytes);

std::string hex64(uint64_t v);

} // namespace catrag
