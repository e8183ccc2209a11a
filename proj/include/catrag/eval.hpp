#pragma once
#include "catrag/graph.hpp"
#include "catrag/indexer.hpp"
#include "catrag/planner.hpp"
#include "catrag/ppr.hpp"
#include "catrag/providers.hpp"
#include "catrag/tuner.hpp"

#include <optional>
#include <string>
#include <vector>

namespace catrag {

struct EvalQuery {
    std::string qid;
    std::string question;
    std::vector<std::string> gold_docs; // supporting document set
    std::string gold_answer;
    int hops = 1;
    // Gold chain edges (surface pairs), present for synthetic sets; consumed
    // by the oracle scorer.
    std::vector<std::pair<std::string, std::string>> chain_pairs;
};

struct EvalRecord {
    std::string qid;
    std::vector<std::string> retrieved_docs; // ranked doc ids
    double recall_at_k = 0.0;
    bool fcr = false;
    std::string answer;
    bool answer_correct = false;
    bool jsr = false;
    double f1 = 0.0;
    std::optional<double> s_ppr;
    std::optional<double> super_hub_mass;
    bool excluded = false;
    std::string error;
};

struct MetricsReport {
    std::string mode;
    int k = 5;
    double recall_at_k = 0.0;
    double fcr = 0.0;
    double jsr = 0.0;
    double f1 = 0.0;
    double answer_accuracy = 0.0;
    std::optional<double> mean_s_ppr;
    std::optional<double> mean_super_hub_mass;
    std::vector<EvalRecord> per_query;
    std::vector<std::string> excluded_qids;
};

// --- metric primitives ---

// |top-k retrieved ∩ gold| / |gold|; throws on an empty gold set.
double recall_at_k(const std::vector<std::string>& retrieved,
                   const std::vector<std::string>& gold_docs, int k);

// true iff every gold doc appears in the top-k retrieved.
bool full_chain_retrieval(const std::vector<std::string>& retrieved,
                          const std::vector<std::string>& gold_docs, int k);

// Normalized containment of the gold answer in the generated answer.
bool answer_contains(const std::string& answer, const std::string& gold_answer);

bool joint_success(bool fcr, const std::string& answer, const std::string& gold_answer);

// Token-level F1 after normalization; 0 when either side is empty.
double token_f1(const std::string& answer, const std::string& gold_answer);

// --- synthetic planted-chain corpora ---

struct SyntheticSpec {
    int n_queries = 50;
    int hops_min = 2; // chains span [hops_min, hops_max], both in [2,4]
    int hops_max = 2;
    int n_distractor_passages = 100;
    int n_hub_entities = 2;
    int hub_degree = 20;
    uint64_t seed = 1;
    bool claim_mode = false; // SUPPORTED / NOT_SUPPORTED verification set
};

struct SyntheticData {
    std::vector<CorpusDocument> corpus;
    std::vector<TripleInput> triples;
    std::vector<EvalQuery> queries;
};

// Plants one evidence chain per query (each hop fact in its own gold passage)
// over a bed of distractor passages, with hub entities wired as topological
// sinks. Pure function of the spec.
SyntheticData generate_synthetic(const SyntheticSpec& spec);

void write_synthetic(const SyntheticData& data, const std::string& dir);
std::vector<EvalQuery> parse_queries_jsonl(const std::string& path);
void write_queries_jsonl(const std::vector<EvalQuery>& queries, const std::string& path);

// --- mode comparison ---

struct EvalOptions {
    std::string mode = "catrag"; // "static" disables anchors and the overlay
    int k = 5;
    PlannerConfig planner;
    TunerConfig tuner;
    PprConfig ppr;
    bool claim_mode = false; // answer correctness by exact normalized match
    int workers = 1;
    bool with_reader = true;
};

struct RetrievalOutcome {
    QueryPlan plan;
    WeightOverlay overlay;
    RankedResult result;
    std::vector<std::pair<NodeId, double>> top_passages;
    std::vector<std::string> diagnostics;
};

// Single-query pipeline: plan -> overlay -> PPR -> ranking. In static mode the
// plan carries no anchors and the overlay stays empty.
RetrievalOutcome run_retrieval(const std::string& query, const KnowledgeGraph& graph,
                               const ProviderSet& providers, const EvalOptions& options);

MetricsReport compare_modes(const KnowledgeGraph& graph, const std::vector<EvalQuery>& queries,
                            const ProviderSet& providers, const EvalOptions& options);

std::string report_to_json(const MetricsReport& report, bool include_per_query = true);
std::string report_to_table(const MetricsReport& report);
std::string report_delta_table(const MetricsReport& a, const MetricsReport& b);

} // namespace catrag
