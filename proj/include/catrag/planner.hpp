#pragma once
#include "catrag/graph.hpp"
#include "catrag/providers.hpp"

#include <map>
#include <string>
#include <vector>

namespace catrag {

struct PlannerConfig {
    int top_m_triples = 5;
    enum class FilterMode { passthrough, llm } filter_mode = FilterMode::passthrough;
    // Fraction of non-anchor mass granted to dense passage seeds (top-10).
    double passage_seed_fraction = 0.05;
    int passage_seed_top = 10;
    double epsilon = 0.2; // total symbolic-anchor reset mass
    bool use_anchors = true;
};

struct SeedTriple {
    int32_t triple_index = -1;
    double similarity = 0.0;
};

// Per-query retrieval plan: verified seed triples, the reset distribution
// e_s, and the symbolic anchors folded into it.
struct QueryPlan {
    std::string query;
    Embedding query_embedding;
    std::vector<SeedTriple> seed_triples;
    std::map<NodeId, double> reset;                    // e_s, sums to 1
    std::vector<std::pair<NodeId, double>> anchors;    // anchor-component masses (sum = epsilon)
    std::vector<std::pair<NodeId, double>> passage_seeds; // passage id -> final mass
    double epsilon = 0.2;
    std::vector<std::string> dropped_anchor_surfaces;  // NER surfaces not in the graph
};

// Dense query-to-triple retrieval followed by recognition filtering.
// Passthrough keeps all candidates. Throws EmptyGraph when no triples exist.
std::vector<SeedTriple> retrieve_seed_triples(const std::string& query,
                                              const Embedding& query_embedding,
                                              const KnowledgeGraph& graph,
                                              const PlannerConfig& config,
                                              RecognitionFilter* recognition);

// NER surfaces resolved to entity nodes by normalized exact match; duplicates
// collapse, unresolvable surfaces land in dropped_surfaces.
std::vector<NodeId> extract_anchors(const std::string& query, const KnowledgeGraph& graph,
                                    NerProvider& ner, std::vector<std::string>* dropped_surfaces);

struct ResetComposition {
    std::map<NodeId, double> reset;
    std::vector<std::pair<NodeId, double>> anchor_masses;
    std::vector<std::pair<NodeId, double>> passage_masses;
};

// Composes e_s: triple-derived entity seeds proportional to similarity
// (scaled to the non-anchor budget), dense passage seeds on their configured
// fraction, anchors splitting epsilon proportionally to inverse passage
// count. Overlapping anchor/seed entities accumulate both contributions.
ResetComposition build_reset(const KnowledgeGraph& graph,
                             const std::vector<SeedTriple>& seed_triples,
                             const std::vector<NodeId>& anchor_entities,
                             const std::vector<std::pair<NodeId, double>>& passage_candidates,
                             double epsilon, double passage_seed_fraction);

// Dense passage candidates: top-n by cosine similarity, raw scores.
std::vector<std::pair<NodeId, double>> select_passage_seeds(const KnowledgeGraph& graph,
                                                            const Embedding& query_embedding,
                                                            int top_n);

QueryPlan build_plan(const std::string& query, const KnowledgeGraph& graph,
                     const ProviderSet& providers, const PlannerConfig& config);

std::string plan_to_json(const QueryPlan& plan, const KnowledgeGraph& graph);

} // namespace catrag
