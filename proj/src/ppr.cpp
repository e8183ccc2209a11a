#include "catrag/ppr.hpp"
#include "catrag/errors.hpp"

#include <algorithm>
#include <cmath>

namespace catrag {

double RankedResult::probability(const KnowledgeGraph& graph, const NodeId& id) const {
    return distribution.at(graph.index_of(id));
}

TransitionRow effective_transition_row(const KnowledgeGraph& graph, const WeightOverlay& overlay,
                                       const NodeId& node) {
    size_t index = graph.index_of(node); // throws UnknownNode
    TransitionRow row;
    double sum = 0.0;
    for (const auto& e : graph.out_edges_at(index)) {
        double w = e.static_weight * overlay.multiplier_for(e.src, e.dst, e.kind);
        if (w <= 0.0) continue;
        size_t dst = graph.index_of(e.dst);
        // parallel edges to the same target merge
        if (!row.targets.empty() && row.targets.back().first == dst) {
            row.targets.back().second += w;
        } else {
            row.targets.emplace_back(dst, w);
        }
        sum += w;
    }
    if (sum <= 0.0) {
        row.targets.clear();
        row.dangling = true;
        return row;
    }
    for (auto& [dst, w] : row.targets) w /= sum;
    return row;
}

RankedResult run_ppr(const KnowledgeGraph& graph, const WeightOverlay& overlay,
                     const std::map<NodeId, double>& reset, const PprConfig& config) {
    if (config.damping <= 0.0 || config.damping >= 1.0) {
        throw Error::validation("damping must be in (0,1)");
    }
    if (config.tolerance <= 0.0) throw Error::validation("tolerance must be positive");

    const size_t n = graph.node_count();
    std::vector<double> e_s(n, 0.0);
    double reset_sum = 0.0;
    for (const auto& [id, w] : reset) {
        if (w < 0.0) throw Error::validation("reset distribution has a negative entry");
        e_s[graph.index_of(id)] += w;
        reset_sum += w;
    }
    if (std::abs(reset_sum - 1.0) > 1e-6) {
        throw Error::validation("reset distribution does not sum to 1");
    }

    // Per-query effective transition structure, built once.
    std::vector<TransitionRow> rows(n);
    for (size_t u = 0; u < n; ++u) {
        rows[u] = effective_transition_row(graph, overlay, graph.id_at(u));
    }

    const double d = config.damping;
    std::vector<double> x = e_s;
    std::vector<double> next(n, 0.0);

    RankedResult result;
    for (int iter = 1; iter <= config.max_iterations; ++iter) {
        std::fill(next.begin(), next.end(), 0.0);
        double dangling_mass = 0.0;
        for (size_t u = 0; u < n; ++u) {
            double mass = x[u];
            if (mass == 0.0) continue;
            const TransitionRow& row = rows[u];
            if (row.dangling) {
                dangling_mass += mass;
                continue;
            }
            for (const auto& [v, p] : row.targets) next[v] += mass * p;
        }
        double teleport = (1.0 - d) + d * dangling_mass;
        for (size_t v = 0; v < n; ++v) next[v] = teleport * e_s[v] + d * next[v];

        double delta = 0.0;
        for (size_t v = 0; v < n; ++v) delta += std::abs(next[v] - x[v]);
        x.swap(next);
        result.iterations_used = iter;
        if (delta < config.tolerance) {
            result.converged = true;
            break;
        }
    }

    result.distribution = std::move(x);
    result.passages = rank_passages(graph, result, static_cast<int>(graph.passage_count()));
    result.diagnostics = hub_diagnostics(graph, result);
    return result;
}

std::vector<std::pair<NodeId, double>> rank_passages(const KnowledgeGraph& graph,
                                                     const RankedResult& result, int k) {
    std::vector<std::pair<NodeId, double>> passages;
    for (size_t i = 0; i < result.distribution.size(); ++i) {
        if (!graph.index_is_entity(i)) passages.emplace_back(graph.id_at(i), result.distribution[i]);
    }
    std::sort(passages.begin(), passages.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (k >= 0 && passages.size() > static_cast<size_t>(k)) {
        passages.resize(static_cast<size_t>(k));
    }
    return passages;
}

std::optional<HubDiagnostics> hub_diagnostics(const KnowledgeGraph& graph,
                                              const RankedResult& result, int top_n) {
    std::vector<std::pair<size_t, double>> entities;
    for (size_t i = 0; i < result.distribution.size(); ++i) {
        if (graph.index_is_entity(i) && result.distribution[i] > 0.0) {
            entities.emplace_back(i, result.distribution[i]);
        }
    }
    if (entities.empty()) return std::nullopt;
    std::sort(entities.begin(), entities.end(), [&](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return graph.id_at(a.first) < graph.id_at(b.first);
    });
    if (top_n > 0 && entities.size() > static_cast<size_t>(top_n)) {
        entities.resize(static_cast<size_t>(top_n));
    }

    double mass = 0.0;
    for (const auto& [i, p] : entities) mass += p;
    if (mass <= 0.0) return std::nullopt;

    const auto& hubs = graph.super_hub_indices();
    HubDiagnostics diag;
    for (const auto& [i, p] : entities) {
        double renorm = p / mass;
        diag.s_ppr += renorm * graph.strength_at(i);
        if (std::binary_search(hubs.begin(), hubs.end(), i)) diag.super_hub_mass += renorm;
    }
    return diag;
}

} // namespace catrag
