#pragma once
#include "catrag/graph.hpp"
#include "catrag/planner.hpp"
#include "catrag/providers.hpp"

#include <string>
#include <unordered_map>
#include <vector>

namespace catrag {

struct TunerConfig {
    int n_seed = 5;    // max seed entities scored
    int k_edge = 15;   // max scored neighbors per seed
    int tau = 20;      // fact-density threshold for summarization
    double beta = 2.5; // key-fact passage boost factor
    double weak_default_weight = 0.2; // bypassed neighbors (bottom of the weak tier)
    bool enable_stage2 = true;
    bool enable_keyfact = true;
    bool summary_fallback_concat = false; // truncated concat when the summarizer is down
};

// Discrete relevance score -> edge-weight multiplier. Tier endpoints with
// linear interpolation inside the weak and high bands.
double phi(int score);

enum class OverlayProvenance { stage2_tier, stage1_weak, keyfact_boost };
const char* to_string(OverlayProvenance p);

struct OverlayEntry {
    NodeId src;
    NodeId dst;
    EdgeKind kind = EdgeKind::relation;
    double multiplier = 1.0;
    OverlayProvenance provenance = OverlayProvenance::stage2_tier;
    int score = -1; // stage-2 entries only
};

// Per-query sparse edge-multiplier map over the immutable base graph. At most
// one entry per (src, dst, kind); parallel relation edges share the entry.
class WeightOverlay {
public:
    void set(OverlayEntry entry);
    double multiplier_for(const NodeId& src, const NodeId& dst, EdgeKind kind) const;
    const OverlayEntry* find(const NodeId& src, const NodeId& dst, EdgeKind kind) const;
    bool empty() const { return entries_.empty(); }
    size_t size() const { return entries_.size(); }
    // Entries sorted by (src, dst, kind) for deterministic dumps.
    std::vector<OverlayEntry> sorted_entries() const;

private:
    static std::string key(const NodeId& src, const NodeId& dst, EdgeKind kind);
    std::vector<OverlayEntry> entries_;
    std::unordered_map<std::string, size_t> index_;
};

// Top-n_seed entity nodes by reset mass (passage seeds excluded), ties broken
// by entity id.
std::vector<NodeId> select_scoring_seeds(const KnowledgeGraph& graph, const QueryPlan& plan,
                                         int n_seed);

struct NeighborGroup {
    NodeId neighbor;
    double best_similarity = 0.0;       // max over parallel edges
    std::vector<int32_t> fact_ids;      // linking facts, id order
};

struct PruneResult {
    std::vector<NeighborGroup> scored;   // N_top(u)
    std::vector<NeighborGroup> bypassed; // assigned the minimal weak weight
};

// Coarse pruning: when a seed's outgoing relation-edge count exceeds k_edge,
// keep the top-k_edge neighbors by query/fact-embedding similarity.
PruneResult prune_candidates(const KnowledgeGraph& graph, const NodeId& seed,
                             const Embedding& query_embedding, int k_edge);

// C(v): summary when the entity's distinct fact count exceeds tau, plain
// "; "-joined concatenation otherwise.
std::string contextualize(const KnowledgeGraph& graph, const NodeId& entity, int tau,
                          SummaryProvider* summarizer, bool fallback_concat = false);

void apply_stage2(const KnowledgeGraph& graph, WeightOverlay& overlay, const QueryPlan& plan,
                  const std::vector<NodeId>& seeds, NeighborScorer& scorer,
                  SummaryProvider* summarizer, const TunerConfig& config,
                  std::vector<std::string>* diagnostics = nullptr);

void apply_keyfact_boost(const KnowledgeGraph& graph, WeightOverlay& overlay,
                         const std::vector<SeedTriple>& seed_triples, double beta);

WeightOverlay build_overlay(const KnowledgeGraph& graph, const QueryPlan& plan,
                            const ProviderSet& providers, const TunerConfig& config,
                            std::vector<std::string>* diagnostics = nullptr);

// Every entry must reference an existing base edge; throws on violation.
void validate_overlay(const KnowledgeGraph& graph, const WeightOverlay& overlay);

std::string overlay_to_json(const WeightOverlay& overlay);

} // namespace catrag
