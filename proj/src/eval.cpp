#include "catrag/eval.hpp"
#include "catrag/errors.hpp"
#include "catrag/util.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <thread>

namespace catrag {

using json = nlohmann::json;

double recall_at_k(const std::vector<std::string>& retrieved,
                   const std::vector<std::string>& gold_docs, int k) {
    if (gold_docs.empty()) throw Error::validation("recall_at_k: empty gold set");
    if (k < 1) throw Error::validation("recall_at_k: k must be >= 1");
    size_t cutoff = std::min(retrieved.size(), static_cast<size_t>(k));
    size_t hit = 0;
    for (const auto& g : gold_docs) {
        for (size_t i = 0; i < cutoff; ++i) {
            if (retrieved[i] == g) {
                ++hit;
                break;
            }
        }
    }
    return static_cast<double>(hit) / static_cast<double>(gold_docs.size());
}

bool full_chain_retrieval(const std::vector<std::string>& retrieved,
                          const std::vector<std::string>& gold_docs, int k) {
    if (gold_docs.empty()) throw Error::validation("full_chain_retrieval: empty gold set");
    size_t cutoff = std::min(retrieved.size(), static_cast<size_t>(std::max(k, 0)));
    for (const auto& g : gold_docs) {
        bool found = false;
        for (size_t i = 0; i < cutoff; ++i) {
            if (retrieved[i] == g) {
                found = true;
                break;
            }
        }
        if (!found) return false;
    }
    return true;
}

bool answer_contains(const std::string& answer, const std::string& gold_answer) {
    std::string a = normalize_answer(answer);
    std::string g = normalize_answer(gold_answer);
    if (g.empty()) return false;
    return a.find(g) != std::string::npos;
}

bool joint_success(bool fcr, const std::string& answer, const std::string& gold_answer) {
    return fcr && answer_contains(answer, gold_answer);
}

double token_f1(const std::string& answer, const std::string& gold_answer) {
    std::vector<std::string> pred = tokenize(normalize_answer(answer));
    std::vector<std::string> gold = tokenize(normalize_answer(gold_answer));
    if (pred.empty() || gold.empty()) return 0.0;
    std::map<std::string, int> gold_counts;
    for (const auto& t : gold) gold_counts[t] += 1;
    int common = 0;
    for (const auto& t : pred) {
        auto it = gold_counts.find(t);
        if (it != gold_counts.end() && it->second > 0) {
            ++common;
            --it->second;
        }
    }
    if (common == 0) return 0.0;
    double precision = static_cast<double>(common) / static_cast<double>(pred.size());
    double recall = static_cast<double>(common) / static_cast<double>(gold.size());
    return 2.0 * precision * recall / (precision + recall);
}

RetrievalOutcome run_retrieval(const std::string& query, const KnowledgeGraph& graph,
                               const ProviderSet& providers, const EvalOptions& options) {
    RetrievalOutcome outcome;
    bool dynamic = options.mode == "catrag";

    PlannerConfig planner = options.planner;
    if (!dynamic) planner.use_anchors = false;
    outcome.plan = build_plan(query, graph, providers, planner);

    if (dynamic) {
        outcome.overlay =
            build_overlay(graph, outcome.plan, providers, options.tuner, &outcome.diagnostics);
    }

    outcome.result = run_ppr(graph, outcome.overlay, outcome.plan.reset, options.ppr);
    outcome.top_passages = rank_passages(graph, outcome.result, options.k);
    return outcome;
}

namespace {

EvalRecord evaluate_one(const EvalQuery& query, const KnowledgeGraph& graph,
                        const ProviderSet& providers, const EvalOptions& options) {
    EvalRecord record;
    record.qid = query.qid;
    try {
        RetrievalOutcome outcome = run_retrieval(query.question, graph, providers, options);
        for (const auto& [id, score] : outcome.top_passages) {
            record.retrieved_docs.push_back(graph.passage(id).doc_id);
        }
        record.recall_at_k = recall_at_k(record.retrieved_docs, query.gold_docs, options.k);
        record.fcr = full_chain_retrieval(record.retrieved_docs, query.gold_docs, options.k);
        if (outcome.result.diagnostics) {
            record.s_ppr = outcome.result.diagnostics->s_ppr;
            record.super_hub_mass = outcome.result.diagnostics->super_hub_mass;
        }
        if (options.with_reader && providers.reader != nullptr && !outcome.top_passages.empty()) {
            std::vector<std::string> texts;
            texts.reserve(outcome.top_passages.size());
            for (const auto& [id, score] : outcome.top_passages) {
                texts.push_back(graph.passage(id).text);
            }
            record.answer = providers.reader->read_answer(query.question, texts);
            record.answer_correct = options.claim_mode
                                        ? normalize_answer(record.answer) ==
                                              normalize_answer(query.gold_answer)
                                        : answer_contains(record.answer, query.gold_answer);
            record.jsr = record.fcr && record.answer_correct;
            record.f1 = token_f1(record.answer, query.gold_answer);
        }
    } catch (const Error& e) {
        record.excluded = true;
        record.error = e.what();
    }
    return record;
}

} // namespace

MetricsReport compare_modes(const KnowledgeGraph& graph, const std::vector<EvalQuery>& queries,
                            const ProviderSet& providers, const EvalOptions& options) {
    MetricsReport report;
    report.mode = options.mode;
    report.k = options.k;
    report.per_query.resize(queries.size());

    int workers = std::max(1, options.workers);
    if (workers == 1 || queries.size() <= 1) {
        for (size_t i = 0; i < queries.size(); ++i) {
            report.per_query[i] = evaluate_one(queries[i], graph, providers, options);
        }
    } else {
        std::atomic<size_t> cursor{0};
        auto worker = [&]() {
            while (true) {
                size_t i = cursor.fetch_add(1);
                if (i >= queries.size()) break;
                report.per_query[i] = evaluate_one(queries[i], graph, providers, options);
            }
        };
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    // deterministic fold in query order
    size_t included = 0, with_diag = 0;
    double recall = 0.0, fcr = 0.0, jsr = 0.0, f1 = 0.0, acc = 0.0, s_ppr = 0.0, hub_mass = 0.0;
    for (const auto& r : report.per_query) {
        if (r.excluded) {
            report.excluded_qids.push_back(r.qid);
            continue;
        }
        ++included;
        recall += r.recall_at_k;
        fcr += r.fcr ? 1.0 : 0.0;
        jsr += r.jsr ? 1.0 : 0.0;
        f1 += r.f1;
        acc += r.answer_correct ? 1.0 : 0.0;
        if (r.s_ppr) {
            ++with_diag;
            s_ppr += *r.s_ppr;
            hub_mass += r.super_hub_mass.value_or(0.0);
        }
    }
    if (included > 0) {
        double n = static_cast<double>(included);
        report.recall_at_k = recall / n;
        report.fcr = fcr / n;
        report.jsr = jsr / n;
        report.f1 = f1 / n;
        report.answer_accuracy = acc / n;
    }
    if (with_diag > 0) {
        report.mean_s_ppr = s_ppr / static_cast<double>(with_diag);
        report.mean_super_hub_mass = hub_mass / static_cast<double>(with_diag);
    }
    return report;
}

std::string report_to_json(const MetricsReport& report, bool include_per_query) {
    json j{{"mode", report.mode},
           {"k", report.k},
           {"recall_at_k", report.recall_at_k},
           {"fcr", report.fcr},
           {"jsr", report.jsr},
           {"f1", report.f1},
           {"answer_accuracy", report.answer_accuracy},
           {"included_queries", report.per_query.size() - report.excluded_qids.size()},
           {"excluded_qids", report.excluded_qids}};
    if (report.mean_s_ppr) j["mean_s_ppr"] = *report.mean_s_ppr;
    if (report.mean_super_hub_mass) j["mean_super_hub_mass"] = *report.mean_super_hub_mass;
    if (include_per_query) {
        json rows = json::array();
        for (const auto& r : report.per_query) {
            json row{{"qid", r.qid},
                     {"retrieved", r.retrieved_docs},
                     {"recall_at_k", r.recall_at_k},
                     {"fcr", r.fcr},
                     {"jsr", r.jsr},
                     {"f1", r.f1},
                     {"answer", r.answer},
                     {"answer_correct", r.answer_correct}};
            if (r.s_ppr) row["s_ppr"] = *r.s_ppr;
            if (r.super_hub_mass) row["super_hub_mass"] = *r.super_hub_mass;
            if (r.excluded) {
                row["excluded"] = true;
                row["error"] = r.error;
            }
            rows.push_back(std::move(row));
        }
        j["per_query"] = std::move(rows);
    }
    return j.dump(2);
}

namespace {
std::string fixed(double v, int precision = 4) {
    std::ostringstream ss;
    ss.setf(std::ios::fixed);
    ss.precision(precision);
    ss << v;
    return ss.str();
}
} // namespace

std::string report_to_table(const MetricsReport& report) {
    std::ostringstream out;
    out << "mode: " << report.mode << "  (k=" << report.k << ")\n";
    out << "  recall@" << report.k << "      " << fixed(report.recall_at_k) << "\n";
    out << "  fcr           " << fixed(report.fcr) << "\n";
    out << "  jsr           " << fixed(report.jsr) << "\n";
    out << "  f1            " << fixed(report.f1) << "\n";
    out << "  answer_acc    " << fixed(report.answer_accuracy) << "\n";
    if (report.mean_s_ppr) out << "  mean_s_ppr    " << fixed(*report.mean_s_ppr, 2) << "\n";
    if (report.mean_super_hub_mass) {
        out << "  super_hub     " << fixed(*report.mean_super_hub_mass) << "\n";
    }
    if (!report.excluded_qids.empty()) {
        out << "  excluded      " << report.excluded_qids.size() << "\n";
    }
    return out.str();
}

std::string report_delta_table(const MetricsReport& a, const MetricsReport& b) {
    std::ostringstream out;
    out << "delta (" << b.mode << " - " << a.mode << ")\n";
    out << "  d_recall@" << a.k << "    " << fixed(b.recall_at_k - a.recall_at_k) << "\n";
    out << "  d_fcr         " << fixed(b.fcr - a.fcr) << "\n";
    out << "  d_jsr         " << fixed(b.jsr - a.jsr) << "\n";
    if (a.mean_s_ppr && b.mean_s_ppr) {
        out << "  d_s_ppr       " << fixed(*b.mean_s_ppr - *a.mean_s_ppr, 2) << "\n";
    }
    if (a.mean_super_hub_mass && b.mean_super_hub_mass) {
        out << "  d_super_hub   " << fixed(*b.mean_super_hub_mass - *a.mean_super_hub_mass) << "\n";
    }
    return out.str();
}

} // namespace catrag
