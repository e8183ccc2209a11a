#include "catrag/planner.hpp"
#include "catrag/errors.hpp"
#include "catrag/util.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace catrag {

using json = nlohmann::json;

namespace {
constexpr double kScoreFloor = 1e-6; // keeps e_s a valid distribution
}

std::vector<SeedTriple> retrieve_seed_triples(const std::string& query,
                                              const Embedding& query_embedding,
                                              const KnowledgeGraph& graph,
                                              const PlannerConfig& config,
                                              RecognitionFilter* recognition) {
    if (graph.triple_count() == 0) {
        throw Error::empty_graph("no triples indexed; cannot seed query: " + query);
    }
    const auto& triples = graph.triples();
    std::vector<SeedTriple> scored;
    scored.reserve(triples.size());
    std::unordered_set<std::string> seen; // T_seed is a set: identical extractions collapse
    for (size_t i = 0; i < triples.size(); ++i) {
        if (!seen.insert(triples[i].text_form + '\x1f' + triples[i].source_passage).second) {
            continue;
        }
        auto fact_id = graph.find_fact(triples[i].text_form);
        double sim = 0.0;
        if (fact_id && !graph.fact(*fact_id).embedding.empty()) {
            sim = cosine(query_embedding, graph.fact(*fact_id).embedding);
        }
        scored.push_back({static_cast<int32_t>(i), sim});
    }
    std::sort(scored.begin(), scored.end(), [](const SeedTriple& a, const SeedTriple& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return a.triple_index < b.triple_index;
    });
    size_t keep = std::min<size_t>(static_cast<size_t>(std::max(config.top_m_triples, 1)),
                                   scored.size());
    scored.resize(keep);

    if (config.filter_mode == PlannerConfig::FilterMode::llm && recognition != nullptr) {
        std::vector<CandidateTriple> candidates;
        candidates.reserve(scored.size());
        for (const auto& s : scored) {
            candidates.push_back({triples[static_cast<size_t>(s.triple_index)], s.similarity});
        }
        std::vector<size_t> kept = recognition->filter(query, candidates);
        std::vector<SeedTriple> filtered;
        for (size_t idx : kept) {
            if (idx < scored.size()) filtered.push_back(scored[idx]);
        }
        scored = std::move(filtered);
    }
    return scored;
}

std::vector<NodeId> extract_anchors(const std::string& query, const KnowledgeGraph& graph,
                                    NerProvider& ner, std::vector<std::string>* dropped_surfaces) {
    std::vector<NodeId> anchors;
    for (const auto& surface : ner.extract_entities(query)) {
        auto id = graph.find_entity(surface);
        if (!id) {
            if (dropped_surfaces) dropped_surfaces->push_back(surface);
            continue;
        }
        if (std::find(anchors.begin(), anchors.end(), *id) == anchors.end()) {
            anchors.push_back(*id);
        }
    }
    return anchors;
}

std::vector<std::pair<NodeId, double>> select_passage_seeds(const KnowledgeGraph& graph,
                                                            const Embedding& query_embedding,
                                                            int top_n) {
    std::vector<std::pair<NodeId, double>> scored;
    for (const auto& p : graph.passages()) {
        if (p.embedding.empty()) continue;
        scored.emplace_back(p.id, cosine(query_embedding, p.embedding));
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (top_n >= 0 && scored.size() > static_cast<size_t>(top_n)) {
        scored.resize(static_cast<size_t>(top_n));
    }
    return scored;
}

ResetComposition build_reset(const KnowledgeGraph& graph,
                             const std::vector<SeedTriple>& seed_triples,
                             const std::vector<NodeId>& anchor_entities,
                             const std::vector<std::pair<NodeId, double>>& passage_candidates,
                             double epsilon, double passage_seed_fraction) {
    if (epsilon < 0.0 || epsilon >= 1.0) throw Error::validation("epsilon must be in [0,1)");
    if (seed_triples.empty() && anchor_entities.empty() && passage_candidates.empty()) {
        throw Error::no_seeds("no seed triples, anchors or passage seeds for this query");
    }

    ResetComposition out;

    // triple-derived entity seeds: mass proportional to similarity
    std::map<NodeId, double> entity_weights;
    for (const auto& s : seed_triples) {
        const Triple& t = graph.triples().at(static_cast<size_t>(s.triple_index));
        double w = std::max(s.similarity, kScoreFloor);
        auto subj = graph.find_entity(t.subject);
        auto obj = graph.find_entity(t.object);
        if (subj) entity_weights[*subj] += w;
        if (obj && (!subj || *obj != *subj)) entity_weights[*obj] += w;
    }

    std::map<NodeId, double> passage_weights;
    for (const auto& [id, sim] : passage_candidates) {
        passage_weights[id] += std::max(sim, kScoreFloor);
    }

    double eps_eff = anchor_entities.empty() ? 0.0 : epsilon;
    double frac_eff = passage_weights.empty() ? 0.0 : passage_seed_fraction;
    if (entity_weights.empty()) frac_eff = passage_weights.empty() ? 0.0 : 1.0;

    double entity_total = 0.0, passage_total = 0.0;
    for (const auto& [id, w] : entity_weights) entity_total += w;
    for (const auto& [id, w] : passage_weights) passage_total += w;

    double entity_budget = (1.0 - eps_eff) * (1.0 - frac_eff);
    double passage_budget = (1.0 - eps_eff) * frac_eff;
    if (entity_weights.empty() && passage_weights.empty()) {
        // anchors alone carry the full distribution
        eps_eff = 1.0;
    }

    std::map<NodeId, double> reset;
    if (entity_total > 0.0) {
        for (const auto& [id, w] : entity_weights) reset[id] += entity_budget * (w / entity_total);
    }
    if (passage_total > 0.0) {
        for (const auto& [id, w] : passage_weights) {
            double mass = passage_budget * (w / passage_total);
            reset[id] += mass;
            out.passage_masses.emplace_back(id, mass);
        }
    }

    // anchors: epsilon split proportional to inverse passage count
    if (!anchor_entities.empty()) {
        std::vector<NodeId> anchors = anchor_entities;
        std::sort(anchors.begin(), anchors.end());
        double inv_total = 0.0;
        std::vector<double> inv(anchors.size());
        for (size_t i = 0; i < anchors.size(); ++i) {
            int count = std::max(graph.entity(anchors[i]).passage_count, 1);
            inv[i] = 1.0 / static_cast<double>(count);
            inv_total += inv[i];
        }
        for (size_t i = 0; i < anchors.size(); ++i) {
            double mass = eps_eff * (inv[i] / inv_total);
            reset[anchors[i]] += mass;
            out.anchor_masses.emplace_back(anchors[i], mass);
        }
    }

    double total = 0.0;
    for (const auto& [id, w] : reset) total += w;
    if (total <= 0.0) throw Error::no_seeds("reset distribution degenerate");
    for (auto& [id, w] : reset) w /= total;

    out.reset = std::move(reset);
    return out;
}

QueryPlan build_plan(const std::string& query, const KnowledgeGraph& graph,
                     const ProviderSet& providers, const PlannerConfig& config) {
    if (providers.embedder == nullptr) throw Error::internal("build_plan: embedder missing");
    QueryPlan plan;
    plan.query = query;
    plan.epsilon = config.epsilon;
    plan.query_embedding = providers.embedder->embed_one(query);
    if (graph.embedding_dimension() != 0 &&
        plan.query_embedding.size() != graph.embedding_dimension()) {
        throw Error::validation(
            "query embedding dimension " + std::to_string(plan.query_embedding.size()) +
            " does not match the indexed graph (" + std::to_string(graph.embedding_dimension()) +
            "); use the embedding settings recorded in the graph's manifest.json");
    }
    plan.seed_triples =
        retrieve_seed_triples(query, plan.query_embedding, graph, config, providers.recognition);

    std::vector<NodeId> anchors;
    if (config.use_anchors && providers.ner != nullptr) {
        anchors = extract_anchors(query, graph, *providers.ner, &plan.dropped_anchor_surfaces);
    }

    std::vector<std::pair<NodeId, double>> passage_candidates;
    if (config.passage_seed_fraction > 0.0) {
        passage_candidates =
            select_passage_seeds(graph, plan.query_embedding, config.passage_seed_top);
    }

    ResetComposition comp = build_reset(graph, plan.seed_triples, anchors, passage_candidates,
                                        config.epsilon, config.passage_seed_fraction);
    plan.reset = std::move(comp.reset);
    plan.anchors = std::move(comp.anchor_masses);
    plan.passage_seeds = std::move(comp.passage_masses);
    return plan;
}

std::string plan_to_json(const QueryPlan& plan, const KnowledgeGraph& graph) {
    json seeds = json::array();
    for (const auto& s : plan.seed_triples) {
        const Triple& t = graph.triples().at(static_cast<size_t>(s.triple_index));
        seeds.push_back({{"triple", t.text_form},
                         {"source_passage", t.source_passage},
                         {"similarity", s.similarity}});
    }
    json reset = json::object();
    for (const auto& [id, w] : plan.reset) reset[id] = w;
    json anchors = json::array();
    for (const auto& [id, w] : plan.anchors) {
        anchors.push_back({{"entity", id}, {"surface", graph.entity(id).surface}, {"mass", w}});
    }
    json dropped = json::array();
    for (const auto& s : plan.dropped_anchor_surfaces) dropped.push_back(s);
    json j{{"query", plan.query}, {"epsilon", plan.epsilon}, {"seed_triples", seeds},
           {"reset", reset},      {"anchors", anchors},      {"dropped_anchor_surfaces", dropped}};
    return j.dump(2);
}

} // namespace catrag
