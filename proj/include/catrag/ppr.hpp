#pragma once
#include "catrag/graph.hpp"
#include "catrag/tuner.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace catrag {

struct PprConfig {
    double damping = 0.5;     // d
    double tolerance = 1e-8;  // L1 stopping threshold
    int max_iterations = 200;
};

struct HubDiagnostics {
    double s_ppr = 0.0;          // expected base strength of top retrieved entities
    double super_hub_mass = 0.0; // renormalized mass on global top-1% strength nodes
};

struct RankedResult {
    // Stationary distribution aligned with graph.finalized_ids().
    std::vector<double> distribution;
    std::vector<std::pair<NodeId, double>> passages; // ranked, score non-increasing
    int iterations_used = 0;
    bool converged = false;
    std::optional<HubDiagnostics> diagnostics;
    double probability(const KnowledgeGraph& graph, const NodeId& id) const;
};

// Effective transition row for one node: per-edge static weight times overlay
// multiplier, normalized. A zero row (dangling or fully pruned) is reported
// via `dangling` and stands for the reset distribution during iteration.
struct TransitionRow {
    std::vector<std::pair<size_t, double>> targets; // (dense index, probability)
    bool dangling = false;
};
TransitionRow effective_transition_row(const KnowledgeGraph& graph, const WeightOverlay& overlay,
                                       const NodeId& node);

// Power iteration for v = (1-d) e_s + d v T until the L1 step delta drops
// below tolerance. Deterministic: accumulation runs in node-id order.
RankedResult run_ppr(const KnowledgeGraph& graph, const WeightOverlay& overlay,
                     const std::map<NodeId, double>& reset, const PprConfig& config);

// Passage nodes only, by probability descending then id; k clamped.
std::vector<std::pair<NodeId, double>> rank_passages(const KnowledgeGraph& graph,
                                                     const RankedResult& result, int k);

// S_ppr and super-hub mass over the top_n retrieved entity nodes. Empty when
// no entity carries probability mass.
std::optional<HubDiagnostics> hub_diagnostics(const KnowledgeGraph& graph,
                                              const RankedResult& result, int top_n = 10);

} // namespace catrag
