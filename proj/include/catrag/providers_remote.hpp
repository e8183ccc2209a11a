#pragma once
#include "catrag/providers.hpp"

#include <memory>
#include <mutex>
#include <string>

namespace catrag {

// Chat-completions client speaking the OpenAI-compatible protocol. Retries
// transient failures with exponential backoff; terminal failures surface as
// ProviderUnavailable. In-flight requests are bounded by max_concurrency.
class RemoteChatClient {
public:
    explicit RemoteChatClient(ProviderConfig config);
    ~RemoteChatClient();
    std::string complete(const std::string& system_prompt, const std::string& user_prompt);
    const ProviderConfig& config() const { return config_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    ProviderConfig config_;
};

class RemoteEmbeddingProvider : public EmbeddingProvider {
public:
    explicit RemoteEmbeddingProvider(ProviderConfig config, size_t expected_dimension = 0);
    ~RemoteEmbeddingProvider();
    std::vector<Embedding> embed(const std::vector<std::string>& texts) override;
    size_t dimension() const override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    mutable std::mutex dim_mutex_;
    mutable size_t dimension_;
};

class RemoteSummarizer : public SummaryProvider {
public:
    explicit RemoteSummarizer(std::shared_ptr<RemoteChatClient> chat);
    std::string summarize_entity(const std::string& entity,
                                 const std::vector<Triple>& facts) override;

private:
    std::shared_ptr<RemoteChatClient> chat_;
};

// Builds the neighbor-scoring prompt, parses "ID (Entity Name): Score | ..."
// lines. Missing or unparseable neighbor lines fail closed to score 0; scores
// outside [0,10] are clipped. Both are reported through the warning log.
class RemoteScorer : public NeighborScorer {
public:
    explicit RemoteScorer(std::shared_ptr<RemoteChatClient> chat);
    std::vector<TierScore> score_neighbors(const ScoreRequest& request) override;

    // Exposed for tests: parse a raw reply against a request.
    static std::vector<TierScore> parse_reply(const ScoreRequest& request,
                                              const std::string& reply);

private:
    std::shared_ptr<RemoteChatClient> chat_;
};

class RemoteReader : public AnswerReader {
public:
    explicit RemoteReader(std::shared_ptr<RemoteChatClient> chat);
    std::string read_answer(const std::string& query,
                            const std::vector<std::string>& passages) override;

private:
    std::shared_ptr<RemoteChatClient> chat_;
};

class RemoteNer : public NerProvider {
public:
    explicit RemoteNer(std::shared_ptr<RemoteChatClient> chat);
    std::vector<std::string> extract_entities(const std::string& query) override;

private:
    std::shared_ptr<RemoteChatClient> chat_;
};

// Warnings from provider parsing/fallback paths (fail-closed scores etc.).
// Default sink writes to stderr.
void set_provider_warning_sink(void (*sink)(const std::string&));
void provider_warn(const std::string& message);

} // namespace catrag
