#include "catrag/providers.hpp"
#include "catrag/errors.hpp"
#include "catrag/util.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace catrag {

const char* tier_for_score(int score) {
    if (score < 0 || score > 10) throw Error::validation("tier score out of range: " + std::to_string(score));
    if (score <= 3) return "irrelevant";
    if (score <= 6) return "weak";
    if (score <= 9) return "high";
    return "direct";
}

Embedding EmbeddingProvider::embed_one(const std::string& text) {
    return embed({text}).front();
}

// ---- HashEmbedder ----

HashEmbedder::HashEmbedder(size_t dimension, uint64_t seed) : dimension_(dimension), seed_(seed) {
    if (dimension_ == 0) throw Error::validation("embedder dimension must be positive");
}

std::vector<Embedding> HashEmbedder::embed(const std::vector<std::string>& texts) {
    if (texts.empty()) throw Error::empty_input("embed: empty input list");
    std::vector<Embedding> out;
    out.reserve(texts.size());
    for (const auto& text : texts) {
        if (text.empty()) throw Error::empty_input("embed: empty text");
        std::vector<std::string> tokens = tokenize(text);
        if (tokens.empty()) tokens.push_back(text);
        Embedding v(dimension_, 0.0f);
        for (const auto& tok : tokens) {
            uint64_t h = fnv1a64(tok, seed_ * 0x9e3779b97f4a7c15ull + 0xcbf29ce484222325ull);
            size_t idx = static_cast<size_t>(h % dimension_);
            float sign = (h >> 63) ? -1.0f : 1.0f;
            v[idx] += sign;
        }
        l2_normalize(v);
        out.push_back(std::move(v));
    }
    return out;
}

// ---- DictionaryNer ----

namespace {

std::vector<std::string> split_words(const std::string& s) {
    std::vector<std::string> words;
    std::istringstream ss(s);
    std::string w;
    while (ss >> w) words.push_back(w);
    return words;
}

} // namespace

DictionaryNer::DictionaryNer(std::vector<std::string> surfaces) {
    surfaces_.reserve(surfaces.size());
    for (auto& s : surfaces) {
        std::string norm = normalize_surface(s);
        if (!norm.empty()) surfaces_.push_back(std::move(norm));
    }
    std::sort(surfaces_.begin(), surfaces_.end());
    surfaces_.erase(std::unique(surfaces_.begin(), surfaces_.end()), surfaces_.end());
    for (const auto& s : surfaces_) {
        max_words_ = std::max(max_words_, split_words(s).size());
    }
}

std::vector<std::string> DictionaryNer::extract_entities(const std::string& query) {
    // Match on punctuation-stripped keys so "Curie's" still hits "curie".
    std::unordered_map<std::string, std::string> by_key;
    for (const auto& s : surfaces_) {
        std::string key = normalize_answer(s);
        if (!key.empty() && !by_key.count(key)) by_key[key] = s;
    }

    std::vector<std::string> words = split_words(normalize_answer(query));
    std::vector<std::string> found;
    size_t i = 0;
    while (i < words.size()) {
        size_t longest = 0;
        std::string match;
        size_t cap = std::min(max_words_, words.size() - i);
        for (size_t n = cap; n >= 1; --n) {
            std::string span = words[i];
            for (size_t k = 1; k < n; ++k) span += " " + words[i + k];
            auto it = by_key.find(span);
            if (it != by_key.end()) {
                longest = n;
                match = it->second;
                break;
            }
        }
        if (longest > 0) {
            if (std::find(found.begin(), found.end(), match) == found.end()) found.push_back(match);
            i += longest;
        } else {
            ++i;
        }
    }
    return found;
}

// ---- ConcatSummarizer ----

std::string ConcatSummarizer::summarize_entity(const std::string& entity,
                                               const std::vector<Triple>& facts) {
    (void)entity;
    if (facts.empty()) throw Error::empty_input("summarize_entity: no facts given");
    std::string out;
    size_t n = std::min(max_facts_, facts.size());
    for (size_t i = 0; i < n; ++i) {
        if (i > 0) out += "; ";
        out += facts[i].text_form;
    }
    return out;
}

// ---- OracleScorer ----

namespace {
std::string pair_key(const std::string& a, const std::string& b) {
    std::string x = normalize_surface(a);
    std::string y = normalize_surface(b);
    if (y < x) std::swap(x, y);
    return x + "\x1f" + y;
}
} // namespace

bool OracleScorer::PairSet::contains(const std::string& a, const std::string& b) const {
    return std::binary_search(keys.begin(), keys.end(), pair_key(a, b));
}

void OracleScorer::add_chain(const std::string& query,
                             const std::vector<std::pair<std::string, std::string>>& pairs) {
    PairSet set;
    for (const auto& [a, b] : pairs) set.keys.push_back(pair_key(a, b));
    std::sort(set.keys.begin(), set.keys.end());
    by_query_[query] = std::move(set);
}

void OracleScorer::set_default_chain(
    const std::vector<std::pair<std::string, std::string>>& pairs) {
    default_pairs_.keys.clear();
    for (const auto& [a, b] : pairs) default_pairs_.keys.push_back(pair_key(a, b));
    std::sort(default_pairs_.keys.begin(), default_pairs_.keys.end());
}

std::vector<TierScore> OracleScorer::score_neighbors(const ScoreRequest& request) {
    if (request.neighbors.empty()) throw Error::empty_input("score_neighbors: no neighbors");
    const PairSet* pairs = &default_pairs_;
    auto it = by_query_.find(request.query);
    if (it != by_query_.end()) pairs = &it->second;
    std::vector<TierScore> out;
    out.reserve(request.neighbors.size());
    for (const auto& n : request.neighbors) {
        TierScore ts;
        ts.neighbor_id = n.neighbor_id;
        if (pairs->contains(request.seed_surface, n.neighbor_surface)) {
            ts.score = 10;
            ts.reasoning = "gold evidence chain edge";
        } else {
            ts.score = 0;
        }
        out.push_back(std::move(ts));
    }
    return out;
}

// ---- LexicalScorer ----

std::vector<TierScore> LexicalScorer::score_neighbors(const ScoreRequest& request) {
    if (request.neighbors.empty()) throw Error::empty_input("score_neighbors: no neighbors");
    std::vector<TierScore> out;
    out.reserve(request.neighbors.size());
    for (const auto& n : request.neighbors) {
        int s = static_cast<int>(std::lround(10.0 * n.query_similarity));
        s = std::clamp(s, 0, 10);
        TierScore ts;
        ts.neighbor_id = n.neighbor_id;
        ts.score = s;
        if (s >= 4) ts.reasoning = "similarity " + std::to_string(n.query_similarity);
        out.push_back(std::move(ts));
    }
    return out;
}

// ---- readers ----

namespace {

struct Sentence {
    std::string text;
    size_t passage_rank;
};

std::vector<Sentence> split_sentences(const std::vector<std::string>& passages) {
    std::vector<Sentence> out;
    for (size_t r = 0; r < passages.size(); ++r) {
        std::string cur;
        for (char c : passages[r]) {
            if (c == '.' || c == '!' || c == '?' || c == '\n') {
                if (!cur.empty()) out.push_back({cur, r});
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        if (!cur.empty()) out.push_back({cur, r});
    }
    return out;
}

// Original-cased words plus their lowercase forms.
std::vector<std::pair<std::string, std::string>> cased_words(const std::string& s) {
    std::vector<std::pair<std::string, std::string>> words;
    for (const auto& w : split_words(s)) {
        std::string trimmed;
        for (unsigned char c : w) {
            if (!std::ispunct(c)) trimmed.push_back(static_cast<char>(c));
        }
        if (trimmed.empty()) continue;
        std::string lower = trimmed;
        for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        words.emplace_back(trimmed, lower);
    }
    return words;
}

} // namespace

std::string ExtractiveReader::read_answer(const std::string& query,
                                          const std::vector<std::string>& passages) {
    if (passages.empty()) throw Error::empty_input("read_answer: no passages");
    std::vector<std::string> qtokens = tokenize(normalize_answer(query));
    auto in_query = [&](const std::string& lower) {
        return std::find(qtokens.begin(), qtokens.end(), lower) != qtokens.end();
    };

    std::vector<Sentence> sentences = split_sentences(passages);
    if (sentences.empty()) return "";

    size_t best = 0;
    int best_overlap = -1;
    for (size_t i = 0; i < sentences.size(); ++i) {
        int overlap = 0;
        for (const auto& [orig, lower] : cased_words(sentences[i].text)) {
            (void)orig;
            if (in_query(lower)) ++overlap;
        }
        if (overlap > best_overlap) {
            best_overlap = overlap;
            best = i;
        }
    }

    auto words = cased_words(sentences[best].text);
    // longest contiguous run of non-query tokens; later runs win ties, which
    // favors the object position in subject-predicate-object sentences
    size_t run_start = 0, run_len = 0, best_start = 0, best_len = 0;
    bool in_run = false;
    auto flush = [&]() {
        if (in_run && run_len >= best_len) {
            best_len = run_len;
            best_start = run_start;
        }
        in_run = false;
        run_len = 0;
    };
    for (size_t i = 0; i < words.size(); ++i) {
        if (!in_query(words[i].second)) {
            if (!in_run) {
                in_run = true;
                run_start = i;
            }
            ++run_len;
        } else {
            flush();
        }
    }
    flush();

    if (best_len == 0) {
        // every token also appears in the query: return the sentence itself
        std::string all;
        for (const auto& [orig, lower] : words) {
            (void)lower;
            if (!all.empty()) all += " ";
            all += orig;
        }
        return all;
    }
    std::string answer;
    for (size_t i = best_start; i < best_start + best_len; ++i) {
        if (!answer.empty()) answer += " ";
        answer += words[i].first;
    }
    return answer;
}

std::string ClaimReader::read_answer(const std::string& query,
                                     const std::vector<std::string>& passages) {
    if (passages.empty()) throw Error::empty_input("read_answer: no passages");
    std::string haystack;
    for (const auto& p : passages) {
        haystack += normalize_answer(p);
        haystack += ' ';
    }
    // every claim sentence must be present verbatim in the retrieved context
    std::vector<Sentence> sentences = split_sentences({query});
    for (const auto& s : sentences) {
        std::string needle = normalize_answer(s.text);
        if (needle.empty()) continue;
        if (haystack.find(needle) == std::string::npos) return "NOT_SUPPORTED";
    }
    return "SUPPORTED";
}

std::vector<size_t> PassthroughFilter::filter(const std::string& query,
                                              const std::vector<CandidateTriple>& candidates) {
    (void)query;
    std::vector<size_t> keep(candidates.size());
    for (size_t i = 0; i < keep.size(); ++i) keep[i] = i;
    return keep;
}

std::vector<size_t> LexicalRecognitionFilter::filter(const std::string& query,
                                                     const std::vector<CandidateTriple>& candidates) {
    std::vector<std::string> qtokens = tokenize(normalize_answer(query));
    std::vector<size_t> keep;
    for (size_t i = 0; i < candidates.size(); ++i) {
        const std::string& form = candidates[i].triple.text_form;
        for (const auto& tok : tokenize(normalize_answer(form))) {
            if (std::find(qtokens.begin(), qtokens.end(), tok) != qtokens.end()) {
                keep.push_back(i);
                break;
            }
        }
    }
    if (keep.empty()) {
        keep.resize(candidates.size());
        for (size_t i = 0; i < keep.size(); ++i) keep[i] = i;
    }
    return keep;
}

} // namespace catrag
