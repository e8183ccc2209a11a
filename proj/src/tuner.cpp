#include "catrag/tuner.hpp"
#include "catrag/errors.hpp"
#include "catrag/util.hpp"

#include <json.hpp>

#include <algorithm>

namespace catrag {

using json = nlohmann::json;

double phi(int score) {
    // Exact tier endpoints; computing 0.2 + 0.05*(s-4) in floating point would
    // drift off the published 0.3 at s=6.
    static constexpr double kTable[11] = {0.0, 0.0, 0.0, 0.0, 0.2, 0.25,
                                          0.3, 2.0, 2.5,  3.0, 5.0};
    if (score < 0 || score > 10) {
        throw Error::validation("phi: score out of range: " + std::to_string(score));
    }
    return kTable[score];
}

const char* to_string(OverlayProvenance p) {
    switch (p) {
    case OverlayProvenance::stage2_tier: return "stage2_tier";
    case OverlayProvenance::stage1_weak: return "stage1_weak";
    case OverlayProvenance::keyfact_boost: return "keyfact_boost";
    }
    return "?";
}

std::string WeightOverlay::key(const NodeId& src, const NodeId& dst, EdgeKind kind) {
    std::string k;
    k.reserve(src.size() + dst.size() + 2);
    k += src;
    k += '\x1f';
    k += dst;
    k += '\x1f';
    k += static_cast<char>('0' + static_cast<int>(kind));
    return k;
}

void WeightOverlay::set(OverlayEntry entry) {
    if (entry.multiplier < 0.0) throw Error::internal("overlay multiplier negative");
    std::string k = key(entry.src, entry.dst, entry.kind);
    if (index_.count(k)) {
        throw Error::internal("overlay already holds an entry for edge " + entry.src + "->" +
                              entry.dst + " (" + to_string(entry.kind) + ")");
    }
    index_[k] = entries_.size();
    entries_.push_back(std::move(entry));
}

double WeightOverlay::multiplier_for(const NodeId& src, const NodeId& dst, EdgeKind kind) const {
    auto it = index_.find(key(src, dst, kind));
    return it == index_.end() ? 1.0 : entries_[it->second].multiplier;
}

const OverlayEntry* WeightOverlay::find(const NodeId& src, const NodeId& dst,
                                        EdgeKind kind) const {
    auto it = index_.find(key(src, dst, kind));
    return it == index_.end() ? nullptr : &entries_[it->second];
}

std::vector<OverlayEntry> WeightOverlay::sorted_entries() const {
    std::vector<OverlayEntry> out = entries_;
    std::sort(out.begin(), out.end(), [](const OverlayEntry& a, const OverlayEntry& b) {
        if (a.src != b.src) return a.src < b.src;
        if (a.dst != b.dst) return a.dst < b.dst;
        return a.kind < b.kind;
    });
    return out;
}

std::vector<NodeId> select_scoring_seeds(const KnowledgeGraph& graph, const QueryPlan& plan,
                                         int n_seed) {
    std::vector<std::pair<NodeId, double>> entities;
    for (const auto& [id, mass] : plan.reset) {
        if (graph.is_entity(id)) entities.emplace_back(id, mass);
    }
    std::sort(entities.begin(), entities.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    size_t keep = std::min<size_t>(static_cast<size_t>(std::max(n_seed, 1)), entities.size());
    std::vector<NodeId> out;
    out.reserve(keep);
    for (size_t i = 0; i < keep; ++i) out.push_back(entities[i].first);
    return out;
}

PruneResult prune_candidates(const KnowledgeGraph& graph, const NodeId& seed,
                             const Embedding& query_embedding, int k_edge) {
    if (!graph.is_entity(seed)) throw Error::unknown_node("prune_candidates: not an entity: " + seed);
    auto edges = graph.out_edges(seed, EdgeKind::relation);

    size_t edge_count = 0;
    std::vector<NeighborGroup> groups;
    for (const auto& e : edges) {
        if (e.dst == seed) continue; // self-loops are never scored
        ++edge_count;
        double sim = 0.0;
        if (e.fact_id >= 0 && !graph.fact(e.fact_id).embedding.empty()) {
            sim = cosine(query_embedding, graph.fact(e.fact_id).embedding);
        }
        auto it = std::find_if(groups.begin(), groups.end(),
                               [&](const NeighborGroup& g) { return g.neighbor == e.dst; });
        if (it == groups.end()) {
            groups.push_back({e.dst, sim, {e.fact_id}});
        } else {
            it->best_similarity = std::max(it->best_similarity, sim);
            if (e.fact_id >= 0) it->fact_ids.push_back(e.fact_id);
        }
    }

    PruneResult result;
    if (edge_count <= static_cast<size_t>(std::max(k_edge, 1))) {
        result.scored = std::move(groups);
        return result;
    }
    std::sort(groups.begin(), groups.end(), [](const NeighborGroup& a, const NeighborGroup& b) {
        if (a.best_similarity != b.best_similarity) return a.best_similarity > b.best_similarity;
        return a.neighbor < b.neighbor;
    });
    size_t keep = std::min<size_t>(static_cast<size_t>(k_edge), groups.size());
    result.scored.assign(groups.begin(), groups.begin() + static_cast<std::ptrdiff_t>(keep));
    result.bypassed.assign(groups.begin() + static_cast<std::ptrdiff_t>(keep), groups.end());
    // restore deterministic neighbor-id order for downstream prompts
    auto by_id = [](const NeighborGroup& a, const NeighborGroup& b) { return a.neighbor < b.neighbor; };
    std::sort(result.scored.begin(), result.scored.end(), by_id);
    std::sort(result.bypassed.begin(), result.bypassed.end(), by_id);
    return result;
}

namespace {

std::vector<Triple> facts_as_triples(const KnowledgeGraph& graph,
                                     const std::vector<int32_t>& fact_ids) {
    std::vector<Triple> out;
    out.reserve(fact_ids.size());
    for (int32_t id : fact_ids) {
        const Fact& f = graph.fact(id);
        Triple t;
        t.subject = f.subject;
        t.predicate = f.predicate;
        t.object = f.object;
        t.source_passage = f.source_passages.empty() ? NodeId{} : f.source_passages.front();
        t.text_form = f.text_form;
        out.push_back(std::move(t));
    }
    return out;
}

std::string concat_facts(const KnowledgeGraph& graph, const std::vector<int32_t>& fact_ids,
                         size_t limit) {
    std::string out;
    size_t n = std::min(limit, fact_ids.size());
    for (size_t i = 0; i < n; ++i) {
        if (i > 0) out += "; ";
        out += graph.fact(fact_ids[i]).text_form;
    }
    return out;
}

} // namespace

std::string contextualize(const KnowledgeGraph& graph, const NodeId& entity, int tau,
                          SummaryProvider* summarizer, bool fallback_concat) {
    if (!graph.is_entity(entity)) throw Error::unknown_node("contextualize: not an entity: " + entity);
    if (tau < 1) throw Error::validation("tau must be >= 1");
    std::vector<int32_t> fact_ids = graph.facts_of_entity(entity);
    if (fact_ids.empty()) return "";
    if (fact_ids.size() > static_cast<size_t>(tau)) {
        if (summarizer == nullptr) {
            if (fallback_concat) return concat_facts(graph, fact_ids, static_cast<size_t>(tau));
            throw Error::provider_unavailable("summarizer required for dense entity " + entity);
        }
        try {
            return summarizer->summarize_entity(graph.entity(entity).surface,
                                                facts_as_triples(graph, fact_ids));
        } catch (const Error& e) {
            if (e.code() == Errc::provider_unavailable && fallback_concat) {
                return concat_facts(graph, fact_ids, static_cast<size_t>(tau));
            }
            throw;
        }
    }
    return concat_facts(graph, fact_ids, fact_ids.size());
}

void apply_stage2(const KnowledgeGraph& graph, WeightOverlay& overlay, const QueryPlan& plan,
                  const std::vector<NodeId>& seeds, NeighborScorer& scorer,
                  SummaryProvider* summarizer, const TunerConfig& config,
                  std::vector<std::string>* diagnostics) {
    std::string facts_context;
    for (const auto& s : plan.seed_triples) {
        if (!facts_context.empty()) facts_context += "; ";
        facts_context += graph.triples().at(static_cast<size_t>(s.triple_index)).text_form;
    }

    for (const NodeId& seed : seeds) {
        PruneResult pruned = prune_candidates(graph, seed, plan.query_embedding, config.k_edge);
        if (pruned.scored.empty() && pruned.bypassed.empty()) continue;

        std::vector<TierScore> scores;
        if (!pruned.scored.empty()) {
            ScoreRequest request;
            request.query = plan.query;
            request.seed_id = seed;
            request.seed_surface = graph.entity(seed).surface;
            request.facts_context = facts_context;
            for (const auto& g : pruned.scored) {
                NeighborCandidate c;
                c.neighbor_id = g.neighbor;
                c.neighbor_surface = graph.entity(g.neighbor).surface;
                for (int32_t f : g.fact_ids) {
                    if (f >= 0) c.linking_triplets.push_back(graph.fact(f).text_form);
                }
                c.context = contextualize(graph, g.neighbor, config.tau, summarizer,
                                          config.summary_fallback_concat);
                c.query_similarity = g.best_similarity;
                request.neighbors.push_back(std::move(c));
            }
            try {
                scores = scorer.score_neighbors(request);
            } catch (const Error& e) {
                if (e.code() != Errc::provider_unavailable) throw;
                // scorer outage must not erase evidence paths: leave this
                // seed's edges at their static weights
                if (diagnostics) {
                    diagnostics->push_back("stage2: scorer unavailable for seed " + seed +
                                           ", edges left unmodulated: " + e.what());
                }
                continue;
            }
            if (scores.size() != pruned.scored.size()) {
                throw Error::internal("scorer returned " + std::to_string(scores.size()) +
                                      " scores for " + std::to_string(pruned.scored.size()) +
                                      " neighbors");
            }
        }

        for (size_t i = 0; i < scores.size(); ++i) {
            OverlayEntry entry;
            entry.src = seed;
            entry.dst = pruned.scored[i].neighbor;
            entry.kind = EdgeKind::relation;
            entry.multiplier = phi(scores[i].score);
            entry.provenance = OverlayProvenance::stage2_tier;
            entry.score = scores[i].score;
            overlay.set(std::move(entry));
        }
        for (const auto& g : pruned.bypassed) {
            OverlayEntry entry;
            entry.src = seed;
            entry.dst = g.neighbor;
            entry.kind = EdgeKind::relation;
            entry.multiplier = config.weak_default_weight;
            entry.provenance = OverlayProvenance::stage1_weak;
            overlay.set(std::move(entry));
        }
    }
}

void apply_keyfact_boost(const KnowledgeGraph& graph, WeightOverlay& overlay,
                         const std::vector<SeedTriple>& seed_triples, double beta) {
    if (beta < 0.0) throw Error::validation("beta must be non-negative");
    for (const auto& s : seed_triples) {
        const Triple& t = graph.triples().at(static_cast<size_t>(s.triple_index));
        if (t.source_passage.empty()) continue;
        for (const std::string* surface : {&t.subject, &t.object}) {
            auto entity = graph.find_entity(*surface);
            if (!entity) continue;
            // indicator semantics: several supporting triples do not stack
            if (overlay.find(*entity, t.source_passage, EdgeKind::context) != nullptr) continue;
            bool exists = false;
            for (const auto& e : graph.out_edges(*entity, EdgeKind::context)) {
                if (e.dst == t.source_passage) {
                    exists = true;
                    break;
                }
            }
            if (!exists) continue;
            OverlayEntry entry;
            entry.src = *entity;
            entry.dst = t.source_passage;
            entry.kind = EdgeKind::context;
            entry.multiplier = 1.0 + beta;
            entry.provenance = OverlayProvenance::keyfact_boost;
            overlay.set(std::move(entry));
        }
    }
}

WeightOverlay build_overlay(const KnowledgeGraph& graph, const QueryPlan& plan,
                            const ProviderSet& providers, const TunerConfig& config,
                            std::vector<std::string>* diagnostics) {
    WeightOverlay overlay;
    if (config.enable_stage2 && providers.scorer != nullptr) {
        std::vector<NodeId> seeds = select_scoring_seeds(graph, plan, config.n_seed);
        apply_stage2(graph, overlay, plan, seeds, *providers.scorer, providers.summarizer, config,
                     diagnostics);
    }
    if (config.enable_keyfact) {
        apply_keyfact_boost(graph, overlay, plan.seed_triples, config.beta);
    }
    return overlay;
}

void validate_overlay(const KnowledgeGraph& graph, const WeightOverlay& overlay) {
    for (const auto& entry : overlay.sorted_entries()) {
        bool found = false;
        for (const auto& e : graph.out_edges(entry.src, entry.kind)) {
            if (e.dst == entry.dst) {
                found = true;
                break;
            }
        }
        if (!found) {
            throw Error::internal("overlay entry references missing edge " + entry.src + "->" +
                                  entry.dst + " (" + to_string(entry.kind) + ")");
        }
    }
}

std::string overlay_to_json(const WeightOverlay& overlay) {
    json entries = json::array();
    for (const auto& e : overlay.sorted_entries()) {
        json j{{"src", e.src},
               {"dst", e.dst},
               {"kind", to_string(e.kind)},
               {"multiplier", e.multiplier},
               {"provenance", to_string(e.provenance)}};
        if (e.score >= 0) {
            j["score"] = e.score;
            j["tier"] = tier_for_score(e.score);
        }
        entries.push_back(std::move(j));
    }
    return json{{"entries", entries}}.dump(2);
}

} // namespace catrag
