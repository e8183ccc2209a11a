#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "catrag/eval.hpp"
#include "catrag/util.hpp"
#include "test_helpers.hpp"

#include <json.hpp>

#include <cstdlib>
#include <string>
#include <sys/wait.h>

using namespace catrag;
using namespace catrag::test;
using json = nlohmann::json;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

CliResult run_cli(const std::string& args, const std::string& workdir) {
    std::string out_path = workdir + "/stdout.txt";
    std::string err_path = workdir + "/stderr.txt";
    std::string cmd = std::string(CATRAG_CLI_PATH) + " " + args + " >" + out_path + " 2>" + err_path;
    int status = std::system(cmd.c_str());
    CliResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = read_file(out_path);
    r.err = read_file(err_path);
    return r;
}

// Shared fixture: synth corpus -> indexed graph, built once.
struct CliWorld {
    TempDir dir{"cli_world"};
    std::string synth_dir, graph_dir, config_path;

    CliWorld() {
        synth_dir = dir.str() + "/synth";
        graph_dir = dir.str() + "/graph";
        CliResult synth = run_cli("synth --out " + synth_dir +
                                      " --queries 8 --hops 2-3 --distractors 40 --hubs 2 "
                                      "--hub-degree 10 --seed 7",
                                  dir.str());
        REQUIRE(synth.exit_code == 0);
        CliResult index = run_cli("index --corpus " + synth_dir + "/corpus.jsonl --triples " +
                                      synth_dir + "/triples.jsonl --out " + graph_dir,
                                  dir.str());
        REQUIRE(index.exit_code == 0);

        config_path = dir.str() + "/config.json";
        write_file(config_path, R"({
  "graph_dir": ")" + graph_dir + R"(",
  "mode": "catrag",
  "k": 5,
  "planner": {"filter_mode": "llm"},
  "providers": {
    "embedding": {"type": "hash", "dimension": 256, "seed": 17},
    "scorer": {"type": "oracle"},
    "recognition": {"type": "lexical"}
  }
})");
    }

    std::string a_question() {
        auto queries = parse_queries_jsonl(synth_dir + "/queries.jsonl");
        return queries.front().question;
    }
};

CliWorld& world() {
    static CliWorld w;
    return w;
}

} // namespace

TEST_CASE("synth writes corpus, triples, queries and a manifest") {
    CliWorld& w = world();
    for (const char* f : {"corpus.jsonl", "triples.jsonl", "queries.jsonl", "synth_manifest.json"}) {
        CHECK(std::filesystem::exists(w.synth_dir + "/" + std::string(f)));
    }
    json manifest = json::parse(read_file(w.synth_dir + "/synth_manifest.json"));
    CHECK(manifest["spec"]["seed"] == 7);
}

TEST_CASE("infeasible synth spec exits 2") {
    CliWorld& w = world();
    CliResult r = run_cli("synth --out " + w.dir.str() + "/bad --queries 2 --hubs 1 "
                          "--hub-degree 100 --distractors 5",
                          w.dir.str());
    CHECK(r.exit_code == 2);
}

TEST_CASE("index reports counts and a stable checksum") {
    CliWorld& w = world();
    std::string out2 = w.dir.str() + "/graph2";
    CliResult again = run_cli("index --corpus " + w.synth_dir + "/corpus.jsonl --triples " +
                                  w.synth_dir + "/triples.jsonl --out " + out2,
                              w.dir.str());
    REQUIRE(again.exit_code == 0);
    json a = json::parse(read_file(w.graph_dir + "/manifest.json"));
    json b = json::parse(read_file(out2 + "/manifest.json"));
    CHECK(a["graph_checksum"] == b["graph_checksum"]);
    CHECK(json::parse(again.out)["passages"].get<size_t>() > 0);
}

TEST_CASE("index with a missing file exits 2") {
    CliWorld& w = world();
    CliResult r = run_cli("index --corpus " + w.synth_dir + "/corpus.jsonl --triples " +
                              w.synth_dir + "/nope.jsonl --out " + w.dir.str() + "/g3",
                          w.dir.str());
    CHECK(r.exit_code == 2);
}

TEST_CASE("query returns ranked passages with diagnostics") {
    CliWorld& w = world();
    CliResult r = run_cli("--config " + w.config_path + " query \"" + w.a_question() +
                              "\" --chains " + w.synth_dir + "/queries.jsonl --dump-plan "
                              "--dump-overlay --explain",
                          w.dir.str());
    REQUIRE(r.exit_code == 0);
    json out = json::parse(r.out);
    CHECK(out["converged"] == true);
    CHECK(out["passages"].size() > 0);
    CHECK(out["passages"][0]["rank"] == 1);
    CHECK(out.contains("s_ppr"));
    CHECK(out["plan"]["reset"].size() > 0);
    CHECK(out["overlay"]["entries"].size() > 0);
    CHECK(out["explain"].size() == out["passages"].size());
    CHECK(out["explain"][0].contains("top_seed"));
    CHECK(out["config"]["mode"] == "catrag");
}

TEST_CASE("static mode equals catrag with all adaptations disabled") {
    CliWorld& w = world();
    std::string disabled = w.dir.str() + "/disabled.json";
    write_file(disabled, R"({
  "graph_dir": ")" + w.graph_dir + R"(",
  "mode": "catrag",
  "planner": {"use_anchors": false, "filter_mode": "llm"},
  "tuner": {"enable_stage2": false, "enable_keyfact": false},
  "providers": {"recognition": {"type": "lexical"}}
})");
    std::string question = w.a_question();
    CliResult catrag_off = run_cli("--config " + disabled + " query \"" + question + "\"",
                               w.dir.str());
    CliResult stat = run_cli("--config " + disabled + " query \"" + question + "\" --mode static",
                             w.dir.str());
    REQUIRE(catrag_off.exit_code == 0);
    REQUIRE(stat.exit_code == 0);
    json a = json::parse(catrag_off.out);
    json b = json::parse(stat.out);
    CHECK(a["passages"] == b["passages"]);
    CHECK(a["iterations"] == b["iterations"]);
    CHECK(a["s_ppr"] == b["s_ppr"]);
}

TEST_CASE("unknown mode exits 2") {
    CliWorld& w = world();
    CliResult r = run_cli("query \"whatever\" --graph " + w.graph_dir + " --mode sideways",
                          w.dir.str());
    CHECK(r.exit_code == 2);
}

TEST_CASE("eval produces reports, delta and byte-identical reruns") {
    CliWorld& w = world();
    std::string out1 = w.dir.str() + "/eval1";
    std::string out2 = w.dir.str() + "/eval2";
    std::string args = "--config " + w.config_path + " eval --queries " + w.synth_dir +
                       "/queries.jsonl --modes static,catrag --out ";
    CliResult r1 = run_cli(args + out1, w.dir.str());
    CliResult r2 = run_cli(args + out2, w.dir.str());
    REQUIRE(r1.exit_code == 0);
    REQUIRE(r2.exit_code == 0);

    json combined = json::parse(r1.out);
    CHECK(combined["modes"].contains("static"));
    CHECK(combined["modes"].contains("catrag"));
    CHECK(combined.contains("delta"));

    for (const char* f : {"report_static.json", "report_catrag.json", "records_static.jsonl",
                          "records_catrag.jsonl", "delta.txt", "report_static.txt",
                          "report_catrag.txt"}) {
        CAPTURE(f);
        CHECK(std::filesystem::exists(out1 + "/" + std::string(f)));
        CHECK(read_file(out1 + "/" + std::string(f)) == read_file(out2 + "/" + std::string(f)));
    }
    CHECK(r1.out == r2.out);
}

TEST_CASE("single-mode eval has no delta section") {
    CliWorld& w = world();
    CliResult r = run_cli("--config " + w.config_path + " eval --queries " + w.synth_dir +
                              "/queries.jsonl --modes catrag",
                          w.dir.str());
    REQUIRE(r.exit_code == 0);
    json out = json::parse(r.out);
    CHECK(!out.contains("delta"));
}

TEST_CASE("provider failure: exit 3 in catrag mode, rescued by --fallback-static") {
    CliWorld& w = world();
    // remote summarizer on a closed port: dense hub neighbors need summaries
    std::string broken = w.dir.str() + "/broken.json";
    write_file(broken, R"({
  "graph_dir": ")" + w.graph_dir + R"(",
  "mode": "catrag",
  "planner": {"filter_mode": "llm"},
  "tuner": {"tau": 1},
  "providers": {
    "summarizer": {"type": "remote"},
    "recognition": {"type": "lexical"},
    "remote": {"endpoint": "http://127.0.0.1:9", "timeout_ms": 200, "max_retries": 0}
  }
})");
    std::string question = w.a_question();
    CliResult fail = run_cli("--config " + broken + " query \"" + question + "\"", w.dir.str());
    CHECK(fail.exit_code == 3);

    CliResult rescued = run_cli("--config " + broken + " query \"" + question +
                                    "\" --fallback-static",
                                w.dir.str());
    REQUIRE(rescued.exit_code == 0);
    CHECK(json::parse(rescued.out)["mode"] == "static");

    // eval: failing queries are excluded with a warning; --strict exits 3
    CliResult soft = run_cli("--config " + broken + " eval --queries " + w.synth_dir +
                                 "/queries.jsonl --modes catrag",
                             w.dir.str());
    CHECK(soft.exit_code == 0);
    json report = json::parse(soft.out);
    CHECK(report["modes"]["catrag"]["excluded_qids"].size() > 0);

    CliResult strict = run_cli("--config " + broken + " eval --queries " + w.synth_dir +
                                   "/queries.jsonl --modes catrag --strict",
                               w.dir.str());
    CHECK(strict.exit_code == 3);
}

TEST_CASE("analyze-hubs emits histogram CSV") {
    CliWorld& w = world();
    CliResult r = run_cli("--config " + w.config_path + " analyze-hubs --queries " + w.synth_dir +
                              "/queries.jsonl --modes static,catrag --bins 8",
                          w.dir.str());
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.substr(0, 13) == "bin_lo,bin_hi");
    size_t lines = 0;
    for (char c : r.out) {
        if (c == '\n') ++lines;
    }
    CHECK(lines == 9); // header + 8 bins
    CHECK(r.err.find("mean_s_ppr") != std::string::npos);
}

TEST_CASE("embedder settings mismatched with the index fail loudly") {
    CliWorld& w = world();
    std::string cfg = w.dir.str() + "/wrongdim.json";
    write_file(cfg, R"({
  "graph_dir": ")" + w.graph_dir + R"(",
  "providers": {"embedding": {"type": "hash", "dimension": 64, "seed": 17}}
})");
    CliResult r = run_cli("--config " + cfg + " query \"" + w.a_question() + "\"", w.dir.str());
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("dimension") != std::string::npos);
}

TEST_CASE("config env interpolation resolves secrets") {
    CliWorld& w = world();
    setenv("CATRAG_TEST_GRAPH", w.graph_dir.c_str(), 1);
    std::string cfg = w.dir.str() + "/env.json";
    write_file(cfg, R"({"graph_dir": "${CATRAG_TEST_GRAPH}", "mode": "static"})");
    CliResult r = run_cli("--config " + cfg + " query \"" + w.a_question() + "\"", w.dir.str());
    CHECK(r.exit_code == 0);
}
