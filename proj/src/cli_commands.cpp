#include "catrag/cli.hpp"
#include "catrag/config.hpp"
#include "catrag/dataset_loaders.hpp"
#include "catrag/errors.hpp"
#include "catrag/eval.hpp"
#include "catrag/util.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

namespace catrag {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string utc_timestamp() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct CommonArgs {
    std::string config_path;
    std::string graph_dir;
    std::string mode;
    int k = -1;
};

RunConfig effective_config(const CommonArgs& args) {
    RunConfig config = args.config_path.empty() ? default_run_config()
                                                : load_run_config(args.config_path);
    if (!args.graph_dir.empty()) config.graph_dir = args.graph_dir;
    if (!args.mode.empty()) config.mode = args.mode;
    if (args.k > 0) config.k = args.k;
    if (config.mode != "static" && config.mode != "catrag") {
        throw Error::validation("mode must be 'static' or 'catrag', got '" + config.mode + "'");
    }
    return config;
}

KnowledgeGraph load_graph_or_fail(const RunConfig& config) {
    if (config.graph_dir.empty()) throw Error::validation("graph_dir not set (flag --graph or config)");
    if (!fs::exists(config.graph_dir + "/nodes.jsonl")) {
        throw Error::validation("graph directory not found or incomplete: " + config.graph_dir);
    }
    return KnowledgeGraph::load(config.graph_dir);
}

json passages_json(const KnowledgeGraph& graph,
                   const std::vector<std::pair<NodeId, double>>& passages) {
    json out = json::array();
    int rank = 1;
    for (const auto& [id, score] : passages) {
        out.push_back({{"id", id},
                       {"doc_id", graph.passage(id).doc_id},
                       {"score", score},
                       {"rank", rank++}});
    }
    return out;
}

// Approximate per-seed attribution: PPR restricted to a unit reset on each
// seed; contribution to a passage is seed_mass * unit_run_probability.
json explain_json(const KnowledgeGraph& graph, const RetrievalOutcome& outcome,
                  const PprConfig& ppr_config) {
    std::vector<std::pair<NodeId, double>> seeds(outcome.plan.reset.begin(),
                                                 outcome.plan.reset.end());
    std::sort(seeds.begin(), seeds.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (seeds.size() > 10) seeds.resize(10);

    std::map<NodeId, RankedResult> unit_runs;
    for (const auto& [seed, mass] : seeds) {
        std::map<NodeId, double> unit{{seed, 1.0}};
        unit_runs.emplace(seed, run_ppr(graph, outcome.overlay, unit, ppr_config));
    }

    json out = json::array();
    for (const auto& [passage, score] : outcome.top_passages) {
        NodeId best_seed;
        double best_contrib = -1.0;
        for (const auto& [seed, mass] : seeds) {
            double contrib = mass * unit_runs.at(seed).probability(graph, passage);
            if (contrib > best_contrib) {
                best_contrib = contrib;
                best_seed = seed;
            }
        }
        json boosts = json::array();
        for (const auto& e : outcome.overlay.sorted_entries()) {
            if (e.provenance == OverlayProvenance::keyfact_boost && e.dst == passage) {
                boosts.push_back({{"src", e.src}, {"multiplier", e.multiplier}});
            }
        }
        json entry{{"passage", passage},
                   {"doc_id", graph.passage(passage).doc_id},
                   {"top_seed", best_seed},
                   {"top_seed_contribution", best_contrib}};
        if (graph.is_entity(best_seed)) entry["top_seed_surface"] = graph.entity(best_seed).surface;
        entry["keyfact_boosts"] = boosts;
        out.push_back(std::move(entry));
    }
    return out;
}

int cmd_index(const CommonArgs& common, const std::string& corpus_path,
              const std::string& triples_path, const std::string& out_dir) {
    RunConfig config = effective_config(common);
    auto corpus = parse_corpus_jsonl(corpus_path);
    auto triples = parse_triples_jsonl(triples_path);

    BuiltProviders providers = build_providers(config, nullptr, nullptr);
    IndexManifest manifest = config.index;
    manifest.corpus_path = corpus_path;
    manifest.triples_path = triples_path;
    manifest.embedder_description = config.providers.embedding;
    if (config.providers.embedding == "hash") {
        manifest.embedder_description += "(dimension=" +
                                         std::to_string(config.providers.hash_dimension) +
                                         ",seed=" + std::to_string(config.providers.hash_seed) + ")";
    }
    manifest.created_at = utc_timestamp();

    KnowledgeGraph graph = index_corpus(corpus, triples, *providers.set.embedder, manifest);
    fs::create_directories(out_dir);
    std::string checksum = graph.save(out_dir);
    manifest.graph_checksum = checksum;
    write_manifest(out_dir + "/manifest.json", manifest);

    size_t relation_edges = 0, synonym_edges = 0, context_edges = 0;
    for (const auto& id : graph.finalized_ids()) {
        for (const auto& e : graph.out_edges(id)) {
            switch (e.kind) {
            case EdgeKind::relation: ++relation_edges; break;
            case EdgeKind::synonym: ++synonym_edges; break;
            case EdgeKind::context: ++context_edges; break;
            }
        }
    }
    std::fprintf(stderr, "indexed %zu passages, %zu entities, %zu edges (checksum %s)\n",
                 graph.passage_count(), graph.entity_count(), graph.edge_count(),
                 checksum.c_str());

    json out{{"graph_dir", out_dir},
             {"passages", graph.passage_count()},
             {"entities", graph.entity_count()},
             {"relation_edges", relation_edges},
             {"synonym_edges", synonym_edges},
             {"context_edges", context_edges},
             {"triples", graph.triple_count()},
             {"facts", graph.fact_count()},
             {"checksum", checksum},
             {"config", json::parse(run_config_to_json(config))}};
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_query(const CommonArgs& common, const std::string& question, bool dump_plan,
              bool dump_overlay, bool explain, bool fallback_static,
              const std::string& chains_path) {
    RunConfig config = effective_config(common);
    KnowledgeGraph graph = load_graph_or_fail(config);

    std::vector<EvalQuery> chain_queries;
    if (!chains_path.empty()) chain_queries = parse_queries_jsonl(chains_path);
    BuiltProviders providers =
        build_providers(config, &graph, chain_queries.empty() ? nullptr : &chain_queries);

    EvalOptions options = eval_options_from(config);
    RetrievalOutcome outcome;
    std::string effective_mode = config.mode;
    try {
        outcome = run_retrieval(question, graph, providers.set, options);
    } catch (const Error& e) {
        if (e.code() == Errc::provider_unavailable && config.mode == "catrag" && fallback_static) {
            std::fprintf(stderr, "provider failure, falling back to static mode: %s\n", e.what());
            options.mode = "static";
            effective_mode = "static";
            outcome = run_retrieval(question, graph, providers.set, options);
        } else {
            throw;
        }
    }

    json out{{"query", question},
             {"mode", effective_mode},
             {"passages", passages_json(graph, outcome.top_passages)},
             {"iterations", outcome.result.iterations_used},
             {"converged", outcome.result.converged},
             {"config", json::parse(run_config_to_json(config))}};
    if (outcome.result.diagnostics) {
        out["s_ppr"] = outcome.result.diagnostics->s_ppr;
        out["super_hub_mass"] = outcome.result.diagnostics->super_hub_mass;
    } else {
        out["s_ppr"] = nullptr;
        out["super_hub_mass"] = nullptr;
    }
    if (!outcome.diagnostics.empty()) out["warnings"] = outcome.diagnostics;
    if (dump_plan) out["plan"] = json::parse(plan_to_json(outcome.plan, graph));
    if (dump_overlay) out["overlay"] = json::parse(overlay_to_json(outcome.overlay));
    if (explain) out["explain"] = explain_json(graph, outcome, options.ppr);
    std::cout << out.dump(2) << "\n";
    return 0;
}

json report_summary_json(const MetricsReport& report) {
    return json::parse(report_to_json(report, /*include_per_query=*/false));
}

int cmd_eval(const CommonArgs& common, const std::string& queries_path,
             const std::string& modes_csv, const std::string& out_dir, bool strict) {
    RunConfig config = effective_config(common);
    KnowledgeGraph graph = load_graph_or_fail(config);
    std::vector<EvalQuery> queries = parse_queries_jsonl(queries_path);

    std::vector<std::string> modes;
    std::stringstream ss(modes_csv);
    std::string mode;
    while (std::getline(ss, mode, ',')) {
        if (mode != "static" && mode != "catrag") {
            throw Error::validation("unknown mode in --modes: " + mode);
        }
        modes.push_back(mode);
    }
    if (modes.empty()) throw Error::validation("--modes is empty");

    BuiltProviders providers = build_providers(config, &graph, &queries);
    if (!out_dir.empty()) fs::create_directories(out_dir);

    std::string config_echo = run_config_to_json(config);
    std::map<std::string, MetricsReport> reports;
    for (const auto& m : modes) {
        EvalOptions options = eval_options_from(config);
        options.mode = m;
        MetricsReport report = compare_modes(graph, queries, providers.set, options);
        if (!out_dir.empty()) {
            json full = json::parse(report_to_json(report, true));
            full["config"] = json::parse(config_echo);
            write_file(out_dir + "/report_" + m + ".json", full.dump(2) + "\n");
            write_file(out_dir + "/report_" + m + ".txt", report_to_table(report));
            std::string records;
            for (const auto& r : report.per_query) {
                json row{{"qid", r.qid},          {"retrieved", r.retrieved_docs},
                         {"recall_at_k", r.recall_at_k}, {"fcr", r.fcr},
                         {"jsr", r.jsr},          {"f1", r.f1},
                         {"answer", r.answer},    {"answer_correct", r.answer_correct},
                         {"excluded", r.excluded}};
                if (r.s_ppr) row["s_ppr"] = *r.s_ppr;
                if (r.super_hub_mass) row["super_hub_mass"] = *r.super_hub_mass;
                if (!r.error.empty()) row["error"] = r.error;
                records += row.dump();
                records += '\n';
            }
            write_file(out_dir + "/records_" + m + ".jsonl", records);
        }
        for (const auto& qid : report.excluded_qids) {
            std::fprintf(stderr, "warning: query %s excluded (provider failure)\n", qid.c_str());
        }
        reports.emplace(m, std::move(report));
    }

    json out{{"config", json::parse(config_echo)}};
    for (const auto& [m, report] : reports) out["modes"][m] = report_summary_json(report);

    bool have_both = reports.count("static") && reports.count("catrag");
    if (have_both) {
        const auto& s = reports.at("static");
        const auto& c = reports.at("catrag");
        json delta{{"recall_at_k", c.recall_at_k - s.recall_at_k},
                   {"fcr", c.fcr - s.fcr},
                   {"jsr", c.jsr - s.jsr}};
        if (s.mean_s_ppr && c.mean_s_ppr) delta["mean_s_ppr"] = *c.mean_s_ppr - *s.mean_s_ppr;
        if (s.mean_super_hub_mass && c.mean_super_hub_mass) {
            delta["mean_super_hub_mass"] = *c.mean_super_hub_mass - *s.mean_super_hub_mass;
        }
        out["delta"] = delta;
        if (!out_dir.empty()) write_file(out_dir + "/delta.txt", report_delta_table(s, c));
    }
    std::cout << out.dump(2) << "\n";

    size_t excluded = 0;
    for (const auto& [m, report] : reports) excluded += report.excluded_qids.size();
    if (excluded > 0 && strict) return 3;
    return 0;
}

int cmd_synth(const CommonArgs& common, const SyntheticSpec& spec, const std::string& out_dir) {
    RunConfig config = effective_config(common);
    SyntheticData data = generate_synthetic(spec);
    fs::create_directories(out_dir);
    write_synthetic(data, out_dir);
    json manifest{{"spec",
                   {{"n_queries", spec.n_queries},
                    {"hops_min", spec.hops_min},
                    {"hops_max", spec.hops_max},
                    {"n_distractor_passages", spec.n_distractor_passages},
                    {"n_hub_entities", spec.n_hub_entities},
                    {"hub_degree", spec.hub_degree},
                    {"seed", spec.seed},
                    {"claim_mode", spec.claim_mode}}},
                  {"config", json::parse(run_config_to_json(config))}};
    write_file(out_dir + "/synth_manifest.json", manifest.dump(2) + "\n");
    json out{{"out_dir", out_dir},
             {"passages", data.corpus.size()},
             {"triples", data.triples.size()},
             {"queries", data.queries.size()}};
    out["spec"] = manifest["spec"];
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_analyze_hubs(const CommonArgs& common, const std::string& queries_path,
                     const std::string& modes_csv, int bins) {
    RunConfig config = effective_config(common);
    // stdout stays pure CSV; the config echo goes to the diagnostic stream
    std::fprintf(stderr, "config: %s\n", run_config_to_json(config).c_str());
    KnowledgeGraph graph = load_graph_or_fail(config);
    std::vector<EvalQuery> queries = parse_queries_jsonl(queries_path);
    BuiltProviders providers = build_providers(config, &graph, &queries);

    std::vector<std::string> modes;
    std::stringstream ss(modes_csv);
    std::string mode;
    while (std::getline(ss, mode, ',')) modes.push_back(mode);

    std::map<std::string, std::vector<double>> values;
    std::map<std::string, double> hub_mass_mean;
    for (const auto& m : modes) {
        EvalOptions options = eval_options_from(config);
        options.mode = m;
        options.with_reader = false;
        MetricsReport report = compare_modes(graph, queries, providers.set, options);
        auto& v = values[m];
        double hub_sum = 0.0;
        size_t hub_n = 0;
        for (const auto& r : report.per_query) {
            if (!r.excluded && r.s_ppr) {
                v.push_back(*r.s_ppr);
                if (r.super_hub_mass) {
                    hub_sum += *r.super_hub_mass;
                    ++hub_n;
                }
            }
        }
        hub_mass_mean[m] = hub_n ? hub_sum / static_cast<double>(hub_n) : 0.0;
    }

    double lo = 0.0, hi = 1.0;
    bool first = true;
    for (const auto& [m, v] : values) {
        for (double x : v) {
            if (first) {
                lo = hi = x;
                first = false;
            }
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
    }
    if (hi <= lo) hi = lo + 1.0;
    if (bins < 1) bins = 20;
    double width = (hi - lo) / bins;

    // histogram CSV: one row per bin, one count column per mode
    std::cout << "bin_lo,bin_hi";
    for (const auto& m : modes) std::cout << "," << m;
    std::cout << "\n";
    for (int b = 0; b < bins; ++b) {
        double blo = lo + b * width;
        double bhi = (b == bins - 1) ? hi : blo + width;
        std::cout << blo << "," << bhi;
        for (const auto& m : modes) {
            size_t count = 0;
            for (double x : values[m]) {
                if ((x >= blo && x < bhi) || (b == bins - 1 && x == hi)) ++count;
            }
            std::cout << "," << count;
        }
        std::cout << "\n";
    }
    for (const auto& m : modes) {
        double mean = 0.0;
        if (!values[m].empty()) {
            for (double x : values[m]) mean += x;
            mean /= static_cast<double>(values[m].size());
        }
        std::fprintf(stderr, "%s: mean_s_ppr=%.2f mean_super_hub_mass=%.4f n=%zu\n", m.c_str(),
                     mean, hub_mass_mean[m], values[m].size());
    }
    return 0;
}

} // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"context-aware knowledge-graph retrieval engine"};
    app.require_subcommand(1);

    CommonArgs common;
    app.add_option("--config", common.config_path, "JSON run config (flags override it)");

    // index
    auto* index = app.add_subcommand("index", "build and persist a knowledge graph");
    std::string corpus_path, triples_path, out_dir;
    index->add_option("--corpus", corpus_path, "corpus.jsonl")->required();
    index->add_option("--triples", triples_path, "triples.jsonl")->required();
    index->add_option("--out", out_dir, "output graph directory")->required();

    // query
    auto* query = app.add_subcommand("query", "run a single query");
    std::string question, chains_path;
    bool dump_plan = false, dump_overlay = false, explain = false, fallback_static = false;
    query->add_option("question", question, "the question to run")->required();
    query->add_option("--graph", common.graph_dir, "graph directory");
    query->add_option("--mode", common.mode, "static | catrag");
    query->add_option("--k", common.k, "passages to return");
    query->add_option("--chains", chains_path, "queries.jsonl with gold chains (oracle scorer)");
    query->add_flag("--dump-plan", dump_plan, "include the query plan in the output");
    query->add_flag("--dump-overlay", dump_overlay, "include the weight overlay in the output");
    query->add_flag("--explain", explain, "attribute retrieved passages to seeds");
    query->add_flag("--fallback-static", fallback_static, "fall back to static mode on provider failure");

    // eval
    auto* eval = app.add_subcommand("eval", "evaluate a query set");
    std::string queries_path, modes_csv = "catrag", eval_out;
    bool strict = false;
    eval->add_option("--graph", common.graph_dir, "graph directory");
    eval->add_option("--queries", queries_path, "queries.jsonl")->required();
    eval->add_option("--modes", modes_csv, "comma-separated: static,catrag");
    eval->add_option("--out", eval_out, "directory for report files");
    eval->add_option("--k", common.k, "retrieval depth");
    eval->add_flag("--strict", strict, "exit 3 when any query is excluded");

    // synth
    auto* synth = app.add_subcommand("synth", "generate a planted-chain benchmark");
    SyntheticSpec spec;
    std::string synth_out, hops_range = "2";
    synth->add_option("--out", synth_out, "output directory")->required();
    synth->add_option("--queries", spec.n_queries, "number of queries");
    synth->add_option("--hops", hops_range, "hop count or range, e.g. 2 or 2-3");
    synth->add_option("--distractors", spec.n_distractor_passages, "distractor passages");
    synth->add_option("--hubs", spec.n_hub_entities, "hub entities");
    synth->add_option("--hub-degree", spec.hub_degree, "edges per hub");
    synth->add_option("--seed", spec.seed, "random seed");
    synth->add_flag("--claim-mode", spec.claim_mode, "SUPPORTED/NOT_SUPPORTED claims");

    // analyze-hubs
    auto* hubs = app.add_subcommand("analyze-hubs", "emit the S_ppr histogram as CSV");
    std::string hub_queries, hub_modes = "static,catrag";
    int bins = 20;
    hubs->add_option("--graph", common.graph_dir, "graph directory");
    hubs->add_option("--queries", hub_queries, "queries.jsonl")->required();
    hubs->add_option("--modes", hub_modes, "modes to compare");
    hubs->add_option("--bins", bins, "histogram bins");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (index->parsed()) return cmd_index(common, corpus_path, triples_path, out_dir);
        if (query->parsed()) {
            return cmd_query(common, question, dump_plan, dump_overlay, explain, fallback_static,
                             chains_path);
        }
        if (eval->parsed()) return cmd_eval(common, queries_path, modes_csv, eval_out, strict);
        if (synth->parsed()) {
            size_t dash = hops_range.find('-');
            if (dash == std::string::npos) {
                spec.hops_min = spec.hops_max = std::stoi(hops_range);
            } else {
                spec.hops_min = std::stoi(hops_range.substr(0, dash));
                spec.hops_max = std::stoi(hops_range.substr(dash + 1));
            }
            return cmd_synth(common, spec, synth_out);
        }
        if (hubs->parsed()) return cmd_analyze_hubs(common, hub_queries, hub_modes, bins);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 4;
    }
    return 2;
}

} // namespace catrag
