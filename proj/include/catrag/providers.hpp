#pragma once
#include "catrag/types.hpp"

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace catrag {

struct ProviderConfig {
    std::string endpoint;   // base URL, e.g. https://api.openai.com
    std::string model_name;
    double temperature = 0.0;
    std::chrono::milliseconds timeout{30000};
    int max_retries = 3;
    std::string api_key_env = "OPENAI_API_KEY";
    int max_concurrency = 4;
    std::chrono::milliseconds backoff_base{250};
    std::string cache_dir; // optional on-disk response cache
};

// One scored neighbor from the edge-relevance judgment.
struct TierScore {
    NodeId neighbor_id;
    int score = 0; // 0..10
    std::optional<std::string> reasoning; // required when score >= 4
};

// Semantic tier for a 0..10 score: irrelevant / weak / high / direct.
const char* tier_for_score(int score);

struct NeighborCandidate {
    NodeId neighbor_id;
    std::string neighbor_surface;
    std::vector<std::string> linking_triplets; // text forms connecting seed -> neighbor
    std::string context;                       // C(v)
    double query_similarity = 0.0;             // cosine(query, best fact embedding)
};

struct ScoreRequest {
    std::string query;
    NodeId seed_id;
    std::string seed_surface;
    std::string facts_context; // retrieved seed-triple evidence
    std::vector<NeighborCandidate> neighbors;
};

struct CandidateTriple {
    Triple triple;
    double similarity = 0.0;
};

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    // One unit vector per input text; fixed dimension.
    virtual std::vector<Embedding> embed(const std::vector<std::string>& texts) = 0;
    virtual size_t dimension() const = 0;
    Embedding embed_one(const std::string& text);
};

class NerProvider {
public:
    virtual ~NerProvider() = default;
    // Deduplicated, normalized entity surfaces found in the query.
    virtual std::vector<std::string> extract_entities(const std::string& query) = 0;
};

class SummaryProvider {
public:
    virtual ~SummaryProvider() = default;
    virtual std::string summarize_entity(const std::string& entity,
                                         const std::vector<Triple>& facts) = 0;
};

class NeighborScorer {
public:
    virtual ~NeighborScorer() = default;
    // Exactly one TierScore per request neighbor, in the same order.
    virtual std::vector<TierScore> score_neighbors(const ScoreRequest& request) = 0;
};

class AnswerReader {
public:
    virtual ~AnswerReader() = default;
    virtual std::string read_answer(const std::string& query,
                                    const std::vector<std::string>& passages) = 0;
};

// Recognition-memory filter slot for seed triples; passthrough by default.
class RecognitionFilter {
public:
    virtual ~RecognitionFilter() = default;
    // Returns indices of candidates to keep.
    virtual std::vector<size_t> filter(const std::string& query,
                                       const std::vector<CandidateTriple>& candidates) = 0;
};

// Extraction hook; the reference pipeline consumes pre-extracted triples.
class OpenIeProvider {
public:
    virtual ~OpenIeProvider() = default;
    virtual std::vector<Triple> extract_triples(const std::string& doc_id,
                                                const std::string& text) = 0;
};

// Non-owning bundle wired by the CLI / eval harness.
struct ProviderSet {
    EmbeddingProvider* embedder = nullptr;
    NerProvider* ner = nullptr;
    SummaryProvider* summarizer = nullptr;
    NeighborScorer* scorer = nullptr;
    AnswerReader* reader = nullptr;
    RecognitionFilter* recognition = nullptr;
};

// ---- deterministic offline suite ----

// Feature-hashing bag-of-words embedder. Pure function of (text, dimension,
// seed); preserves lexical overlap well enough for fixtures.
class HashEmbedder : public EmbeddingProvider {
public:
    explicit HashEmbedder(size_t dimension = 256, uint64_t seed = 17);
    std::vector<Embedding> embed(const std::vector<std::string>& texts) override;
    size_t dimension() const override { return dimension_; }

private:
    size_t dimension_;
    uint64_t seed_;
};

// Longest-match left-to-right dictionary NER over indexed entity surfaces.
class DictionaryNer : public NerProvider {
public:
    explicit DictionaryNer(std::vector<std::string> surfaces);
    std::vector<std::string> extract_entities(const std::string& query) override;

private:
    std::vector<std::string> surfaces_; // normalized
    size_t max_words_ = 1;
};

// Concat-style summary: first max_facts triple text forms joined with "; ".
class ConcatSummarizer : public SummaryProvider {
public:
    explicit ConcatSummarizer(size_t max_facts = 20) : max_facts_(max_facts) {}
    std::string summarize_entity(const std::string& entity,
                                 const std::vector<Triple>& facts) override;

private:
    size_t max_facts_;
};

// Gold-chain oracle: 10 for neighbors on a known evidence chain, 0 otherwise.
// Used by the eval harness to isolate traversal quality from model quality.
class OracleScorer : public NeighborScorer {
public:
    OracleScorer() = default;
    // Unordered surface pairs (chain edges) keyed by query; the default set
    // applies when no per-query chain is registered.
    void add_chain(const std::string& query,
                   const std::vector<std::pair<std::string, std::string>>& pairs);
    void set_default_chain(const std::vector<std::pair<std::string, std::string>>& pairs);
    std::vector<TierScore> score_neighbors(const ScoreRequest& request) override;

private:
    struct PairSet {
        std::vector<std::string> keys; // "a\x1fb" with a <= b, normalized
        bool contains(const std::string& a, const std::string& b) const;
    };
    std::unordered_map<std::string, PairSet> by_query_;
    PairSet default_pairs_;
};

// score = round(10 * cosine(query, fact embedding)), clipped to [0,10].
class LexicalScorer : public NeighborScorer {
public:
    std::vector<TierScore> score_neighbors(const ScoreRequest& request) override;
};

// Extractive fixture reader: picks the sentence with the highest query-token
// overlap among the ranked passages and returns its longest run of tokens not
// present in the query (later runs win ties).
class ExtractiveReader : public AnswerReader {
public:
    std::string read_answer(const std::string& query,
                            const std::vector<std::string>& passages) override;
};

// Claim-verification reader for synthetic SUPPORTED / NOT_SUPPORTED fixtures:
// SUPPORTED iff the claimed terminal fact sentence appears in retrieved text.
class ClaimReader : public AnswerReader {
public:
    std::string read_answer(const std::string& query,
                            const std::vector<std::string>& passages) override;
};

class PassthroughFilter : public RecognitionFilter {
public:
    std::vector<size_t> filter(const std::string& query,
                               const std::vector<CandidateTriple>& candidates) override;
};

// Deterministic recognition memory: a candidate fact is recognized when it
// shares at least one normalized token with the query. Falls back to keeping
// everything when nothing is recognized.
class LexicalRecognitionFilter : public RecognitionFilter {
public:
    std::vector<size_t> filter(const std::string& query,
                               const std::vector<CandidateTriple>& candidates) override;
};

} // namespace catrag
