#include "catrag/providers_remote.hpp"
#include "catrag/errors.hpp"
#include "catrag/prompt_assets.hpp"
#include "catrag/util.hpp"

#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <condition_variable>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <thread>

namespace catrag {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::atomic<void (*)(const std::string&)> g_warning_sink{nullptr};

// Counting semaphore bounding in-flight requests per provider.
class Gate {
public:
    explicit Gate(int limit) : available_(limit > 0 ? limit : 1) {}
    void acquire() {
        std::unique_lock lk(m_);
        cv_.wait(lk, [&] { return available_ > 0; });
        --available_;
    }
    void release() {
        {
            std::lock_guard lk(m_);
            ++available_;
        }
        cv_.notify_one();
    }

private:
    std::mutex m_;
    std::condition_variable cv_;
    int available_;
};

struct GateGuard {
    Gate& gate;
    explicit GateGuard(Gate& g) : gate(g) { gate.acquire(); }
    ~GateGuard() { gate.release(); }
};

// Optional on-disk response cache keyed by request hash.
class FileCache {
public:
    explicit FileCache(std::string dir) : dir_(std::move(dir)) {
        if (!dir_.empty()) fs::create_directories(dir_);
    }
    bool enabled() const { return !dir_.empty(); }
    std::optional<std::string> get(const std::string& key) const {
        if (!enabled()) return std::nullopt;
        std::string path = path_for(key);
        if (!fs::exists(path)) return std::nullopt;
        return read_file(path);
    }
    void put(const std::string& key, const std::string& value) const {
        if (!enabled()) return;
        write_file(path_for(key), value);
    }

private:
    std::string path_for(const std::string& key) const {
        return dir_ + "/" + hex64(fnv1a64(key)) + ".json";
    }
    std::string dir_;
};

std::string api_key_from_env(const ProviderConfig& config) {
    if (config.api_key_env.empty()) return "";
    const char* v = std::getenv(config.api_key_env.c_str());
    return v ? v : "";
}

// POST with retry + exponential backoff. Retries transport errors and
// 429/5xx; other HTTP errors are terminal.
std::string post_json(httplib::Client& client, Gate& gate, const ProviderConfig& config,
                      const std::string& path, const std::string& body) {
    std::string last_error;
    for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
        if (attempt > 0) {
            auto delay = config.backoff_base * (1 << (attempt - 1));
            std::this_thread::sleep_for(delay);
        }
        httplib::Headers headers;
        std::string key = api_key_from_env(config);
        if (!key.empty()) headers.emplace("Authorization", "Bearer " + key);
        GateGuard guard(gate);
        auto res = client.Post(path, headers, body, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 200) return res->body;
        last_error = "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200);
        if (res->status != 429 && res->status < 500) break;
    }
    throw Error::provider_unavailable(config.endpoint + path + " failed after " +
                                      std::to_string(config.max_retries + 1) +
                                      " attempts: " + last_error);
}

} // namespace

void set_provider_warning_sink(void (*sink)(const std::string&)) { g_warning_sink = sink; }

void provider_warn(const std::string& message) {
    auto sink = g_warning_sink.load();
    if (sink) {
        sink(message);
    } else {
        std::fprintf(stderr, "warning: %s\n", message.c_str());
    }
}

// ---- RemoteChatClient ----

struct RemoteChatClient::Impl {
    Impl(const ProviderConfig& config)
        : client(config.endpoint), gate(config.max_concurrency), cache(config.cache_dir) {
        auto secs = std::chrono::duration_cast<std::chrono::seconds>(config.timeout);
        client.set_connection_timeout(secs.count() > 0 ? secs.count() : 1, 0);
        client.set_read_timeout(secs.count() > 0 ? secs.count() : 1, 0);
    }
    httplib::Client client;
    Gate gate;
    FileCache cache;
};

RemoteChatClient::RemoteChatClient(ProviderConfig config)
    : impl_(std::make_unique<Impl>(config)), config_(std::move(config)) {}

RemoteChatClient::~RemoteChatClient() = default;

std::string RemoteChatClient::complete(const std::string& system_prompt,
                                       const std::string& user_prompt) {
    json messages = json::array();
    if (!system_prompt.empty()) messages.push_back({{"role", "system"}, {"content", system_prompt}});
    messages.push_back({{"role", "user"}, {"content", user_prompt}});
    json body{{"model", config_.model_name},
              {"temperature", config_.temperature},
              {"messages", messages}};
    std::string payload = body.dump();

    std::string cache_key = "chat\x1f" + config_.model_name + "\x1f" + payload;
    if (auto hit = impl_->cache.get(cache_key)) return *hit;

    std::string raw = post_json(impl_->client, impl_->gate, config_, "/v1/chat/completions", payload);
    json reply = json::parse(raw, nullptr, false);
    if (reply.is_discarded() || !reply.contains("choices") || reply["choices"].empty()) {
        throw Error::provider_unavailable("chat reply malformed: " + raw.substr(0, 200));
    }
    std::string content = reply["choices"][0]["message"]["content"].get<std::string>();
    impl_->cache.put(cache_key, content);
    return content;
}

// ---- RemoteEmbeddingProvider ----

struct RemoteEmbeddingProvider::Impl {
    Impl(const ProviderConfig& config)
        : client(config.endpoint), gate(config.max_concurrency), cache(config.cache_dir),
          config(config) {
        auto secs = std::chrono::duration_cast<std::chrono::seconds>(config.timeout);
        client.set_connection_timeout(secs.count() > 0 ? secs.count() : 1, 0);
        client.set_read_timeout(secs.count() > 0 ? secs.count() : 1, 0);
    }
    httplib::Client client;
    Gate gate;
    FileCache cache;
    ProviderConfig config;
};

RemoteEmbeddingProvider::RemoteEmbeddingProvider(ProviderConfig config, size_t expected_dimension)
    : impl_(std::make_unique<Impl>(config)), dimension_(expected_dimension) {}

RemoteEmbeddingProvider::~RemoteEmbeddingProvider() = default;

std::vector<Embedding> RemoteEmbeddingProvider::embed(const std::vector<std::string>& texts) {
    if (texts.empty()) throw Error::empty_input("embed: empty input list");
    for (const auto& t : texts) {
        if (t.empty()) throw Error::empty_input("embed: empty text");
    }
    json body{{"model", impl_->config.model_name}, {"input", texts}};
    std::string payload = body.dump();
    std::string cache_key = "embed\x1f" + impl_->config.model_name + "\x1f" + payload;

    std::string raw;
    if (auto hit = impl_->cache.get(cache_key)) {
        raw = *hit;
    } else {
        raw = post_json(impl_->client, impl_->gate, impl_->config, "/v1/embeddings", payload);
        impl_->cache.put(cache_key, raw);
    }

    json reply = json::parse(raw, nullptr, false);
    if (reply.is_discarded() || !reply.contains("data")) {
        throw Error::provider_unavailable("embeddings reply malformed: " + raw.substr(0, 200));
    }
    std::vector<Embedding> out(texts.size());
    for (const auto& item : reply["data"]) {
        size_t index = item.at("index").get<size_t>();
        if (index >= out.size()) throw Error::provider_unavailable("embeddings reply index out of range");
        Embedding v = item.at("embedding").get<Embedding>();
        l2_normalize(v);
        out[index] = std::move(v);
    }
    for (const auto& v : out) {
        if (v.empty()) throw Error::provider_unavailable("embeddings reply missing a row");
    }
    {
        std::lock_guard lk(dim_mutex_);
        if (dimension_ == 0) dimension_ = out.front().size();
    }
    return out;
}

size_t RemoteEmbeddingProvider::dimension() const {
    std::lock_guard lk(dim_mutex_);
    return dimension_;
}

// ---- RemoteSummarizer ----

RemoteSummarizer::RemoteSummarizer(std::shared_ptr<RemoteChatClient> chat) : chat_(std::move(chat)) {}

std::string RemoteSummarizer::summarize_entity(const std::string& entity,
                                               const std::vector<Triple>& facts) {
    if (facts.empty()) throw Error::empty_input("summarize_entity: no facts given");
    json triplets = json::array();
    for (const auto& f : facts) triplets.push_back({f.subject, f.predicate, f.object});
    std::string prompt = substitute_slots(prompts::kEntitySummary,
                                          {{"entity", entity}, {"fact_triplets", triplets.dump()}});
    return chat_->complete("", prompt);
}

// ---- RemoteScorer ----

RemoteScorer::RemoteScorer(std::shared_ptr<RemoteChatClient> chat) : chat_(std::move(chat)) {}

std::vector<TierScore> RemoteScorer::parse_reply(const ScoreRequest& request,
                                                 const std::string& reply) {
    // One line per neighbor: `ID (Entity Name): Score` or `...: Score | reasoning`.
    std::vector<std::optional<TierScore>> parsed(request.neighbors.size());
    size_t start = 0;
    while (start < reply.size()) {
        size_t end = reply.find('\n', start);
        if (end == std::string::npos) end = reply.size();
        std::string_view line(reply.data() + start, end - start);
        start = end + 1;

        size_t i = 0;
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        size_t digits = i;
        while (digits < line.size() && std::isdigit(static_cast<unsigned char>(line[digits]))) ++digits;
        if (digits == i) continue;
        size_t id = 0;
        for (size_t k = i; k < digits; ++k) id = id * 10 + static_cast<size_t>(line[k] - '0');
        if (id < 1 || id > parsed.size()) continue;

        size_t colon = line.find(':', digits);
        if (colon == std::string_view::npos) continue;
        size_t s = colon + 1;
        while (s < line.size() && std::isspace(static_cast<unsigned char>(line[s]))) ++s;
        size_t sd = s;
        int sign = 1;
        if (sd < line.size() && line[sd] == '-') {
            sign = -1;
            ++sd;
        }
        size_t se = sd;
        while (se < line.size() && std::isdigit(static_cast<unsigned char>(line[se]))) ++se;
        if (se == sd) {
            provider_warn("scorer: unparseable score line, failing closed to 0: " + std::string(line));
            parsed[id - 1] = TierScore{request.neighbors[id - 1].neighbor_id, 0, std::nullopt};
            continue;
        }
        long score = 0;
        for (size_t k = sd; k < se; ++k) score = score * 10 + (line[k] - '0');
        score *= sign;
        if (score < 0 || score > 10) {
            provider_warn("scorer: score " + std::to_string(score) + " outside [0,10], clipping");
            score = std::clamp<long>(score, 0, 10);
        }
        TierScore ts;
        ts.neighbor_id = request.neighbors[id - 1].neighbor_id;
        ts.score = static_cast<int>(score);
        size_t bar = line.find('|', se);
        if (bar != std::string_view::npos) {
            std::string reason(line.substr(bar + 1));
            size_t b = reason.find_first_not_of(" \t");
            if (b != std::string::npos) ts.reasoning = reason.substr(b);
        }
        if (ts.score >= 4 && !ts.reasoning) ts.reasoning = "";
        parsed[id - 1] = std::move(ts);
    }

    std::vector<TierScore> out;
    out.reserve(parsed.size());
    for (size_t i = 0; i < parsed.size(); ++i) {
        if (parsed[i]) {
            out.push_back(std::move(*parsed[i]));
        } else {
            provider_warn("scorer: neighbor " + std::to_string(i + 1) +
                          " missing from reply, failing closed to 0");
            out.push_back(TierScore{request.neighbors[i].neighbor_id, 0, std::nullopt});
        }
    }
    return out;
}

std::vector<TierScore> RemoteScorer::score_neighbors(const ScoreRequest& request) {
    if (request.neighbors.empty()) throw Error::empty_input("score_neighbors: no neighbors");
    std::string neighbors_block;
    for (size_t i = 0; i < request.neighbors.size(); ++i) {
        const auto& n = request.neighbors[i];
        neighbors_block += std::to_string(i + 1) + " (" + n.neighbor_surface + ")\n";
        for (const auto& t : n.linking_triplets) {
            neighbors_block += "  LINKING TRIPLET: " + t + "\n";
        }
        if (!n.context.empty()) neighbors_block += "  SUMMARY: " + n.context + "\n";
    }
    std::string prompt = substitute_slots(prompts::kNeighborScoring,
                                          {{"query", request.query},
                                           {"current_entity", request.seed_surface},
                                           {"retrieved_facts", request.facts_context},
                                           {"neighbors", neighbors_block}});
    std::string reply = chat_->complete("", prompt);
    return parse_reply(request, reply);
}

// ---- RemoteReader ----

RemoteReader::RemoteReader(std::shared_ptr<RemoteChatClient> chat) : chat_(std::move(chat)) {}

std::string RemoteReader::read_answer(const std::string& query,
                                      const std::vector<std::string>& passages) {
    if (passages.empty()) throw Error::empty_input("read_answer: no passages");
    std::string prompt = "Answer the question using only the passages below. "
                         "Reply with the answer span only.\n\n";
    for (size_t i = 0; i < passages.size(); ++i) {
        prompt += "Passage " + std::to_string(i + 1) + ":\n" + passages[i] + "\n\n";
    }
    prompt += "Question: " + query + "\nAnswer:";
    return chat_->complete("", prompt);
}

// ---- RemoteNer ----

RemoteNer::RemoteNer(std::shared_ptr<RemoteChatClient> chat) : chat_(std::move(chat)) {}

std::vector<std::string> RemoteNer::extract_entities(const std::string& query) {
    std::string prompt = "List the named entities mentioned in the question, one per line, "
                         "with no extra text.\n\nQuestion: " + query;
    std::string reply = chat_->complete("", prompt);
    std::vector<std::string> out;
    size_t start = 0;
    while (start < reply.size()) {
        size_t end = reply.find('\n', start);
        if (end == std::string::npos) end = reply.size();
        std::string norm = normalize_surface(std::string_view(reply.data() + start, end - start));
        if (!norm.empty() && std::find(out.begin(), out.end(), norm) == out.end()) {
            out.push_back(norm);
        }
        start = end + 1;
    }
    return out;
}

} // namespace catrag
