#include "catrag/config.hpp"
#include "catrag/errors.hpp"
#include "catrag/util.hpp"

#include <json.hpp>

#include <cstdlib>

namespace catrag {

using json = nlohmann::json;

namespace {

// ${NAME} -> environment value; unset variables become empty strings.
std::string interpolate_env(const std::string& s) {
    std::string out;
    size_t i = 0;
    while (i < s.size()) {
        if (s[i] == '$' && i + 1 < s.size() && s[i + 1] == '{') {
            size_t close = s.find('}', i + 2);
            if (close != std::string::npos) {
                std::string name = s.substr(i + 2, close - i - 2);
                const char* v = std::getenv(name.c_str());
                if (v) out += v;
                i = close + 1;
                continue;
            }
        }
        out.push_back(s[i]);
        ++i;
    }
    return out;
}

void interpolate_tree(json& j) {
    if (j.is_string()) {
        std::string s = j.get<std::string>();
        if (s.find("${") != std::string::npos) j = interpolate_env(s);
    } else if (j.is_object() || j.is_array()) {
        for (auto& child : j) interpolate_tree(child);
    }
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

} // namespace

RunConfig default_run_config() { return RunConfig{}; }

RunConfig load_run_config(const std::string& path) {
    RunConfig c;
    json j = json::parse(read_file(path), nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw Error::parse(path + ": invalid JSON config");
    interpolate_tree(j);

    maybe(j, "graph_dir", c.graph_dir);
    maybe(j, "mode", c.mode);
    maybe(j, "k", c.k);

    if (j.contains("planner")) {
        const auto& p = j["planner"];
        maybe(p, "top_m_triples", c.planner.top_m_triples);
        maybe(p, "passage_seed_fraction", c.planner.passage_seed_fraction);
        maybe(p, "passage_seed_top", c.planner.passage_seed_top);
        maybe(p, "epsilon", c.planner.epsilon);
        maybe(p, "use_anchors", c.planner.use_anchors);
        if (p.contains("filter_mode")) {
            std::string mode = p["filter_mode"].get<std::string>();
            if (mode == "llm") {
                c.planner.filter_mode = PlannerConfig::FilterMode::llm;
            } else if (mode == "passthrough") {
                c.planner.filter_mode = PlannerConfig::FilterMode::passthrough;
            } else {
                throw Error::parse(path + ": unknown filter_mode '" + mode + "'");
            }
        }
    }
    if (j.contains("tuner")) {
        const auto& t = j["tuner"];
        maybe(t, "n_seed", c.tuner.n_seed);
        maybe(t, "k_edge", c.tuner.k_edge);
        maybe(t, "tau", c.tuner.tau);
        maybe(t, "beta", c.tuner.beta);
        maybe(t, "weak_default_weight", c.tuner.weak_default_weight);
        maybe(t, "enable_stage2", c.tuner.enable_stage2);
        maybe(t, "enable_keyfact", c.tuner.enable_keyfact);
        maybe(t, "summary_fallback_concat", c.tuner.summary_fallback_concat);
    }
    if (j.contains("ppr")) {
        const auto& p = j["ppr"];
        maybe(p, "damping", c.ppr.damping);
        maybe(p, "tolerance", c.ppr.tolerance);
        maybe(p, "max_iterations", c.ppr.max_iterations);
    }
    if (j.contains("index")) {
        const auto& x = j["index"];
        maybe(x, "synonym_threshold", c.index.synonym_threshold);
        maybe(x, "synonym_weight_scale", c.index.synonym_weight_scale);
        maybe(x, "relation_base_weight", c.index.relation_base_weight);
        maybe(x, "context_base_weight", c.index.context_base_weight);
        maybe(x, "embed_batch_size", c.index.embed_batch_size);
    }
    if (j.contains("eval")) {
        const auto& e = j["eval"];
        maybe(e, "workers", c.eval_workers);
        maybe(e, "claim_mode", c.claim_mode);
        maybe(e, "with_reader", c.with_reader);
    }
    if (j.contains("providers")) {
        const auto& p = j["providers"];
        auto role = [&](const char* name, std::string& out) {
            if (p.contains(name) && p[name].contains("type")) {
                out = p[name]["type"].get<std::string>();
            }
        };
        role("embedding", c.providers.embedding);
        role("ner", c.providers.ner);
        role("summarizer", c.providers.summarizer);
        role("scorer", c.providers.scorer);
        role("reader", c.providers.reader);
        role("recognition", c.providers.recognition);
        if (p.contains("embedding")) {
            maybe(p["embedding"], "dimension", c.providers.hash_dimension);
            maybe(p["embedding"], "seed", c.providers.hash_seed);
        }
        if (p.contains("summarizer")) {
            maybe(p["summarizer"], "max_facts", c.providers.concat_max_facts);
        }
        if (p.contains("remote")) {
            const auto& r = p["remote"];
            maybe(r, "endpoint", c.providers.remote.endpoint);
            maybe(r, "chat_model", c.providers.remote_chat_model);
            maybe(r, "embed_model", c.providers.remote_embed_model);
            maybe(r, "api_key_env", c.providers.remote.api_key_env);
            maybe(r, "temperature", c.providers.remote.temperature);
            maybe(r, "max_retries", c.providers.remote.max_retries);
            maybe(r, "max_concurrency", c.providers.remote.max_concurrency);
            maybe(r, "cache_dir", c.providers.remote.cache_dir);
            if (r.contains("timeout_ms")) {
                c.providers.remote.timeout = std::chrono::milliseconds(r["timeout_ms"].get<int64_t>());
            }
            if (r.contains("backoff_ms")) {
                c.providers.remote.backoff_base =
                    std::chrono::milliseconds(r["backoff_ms"].get<int64_t>());
            }
        }
    }
    return c;
}

std::string run_config_to_json(const RunConfig& c) {
    json j{
        {"graph_dir", c.graph_dir},
        {"mode", c.mode},
        {"k", c.k},
        {"planner",
         {{"top_m_triples", c.planner.top_m_triples},
          {"filter_mode",
           c.planner.filter_mode == PlannerConfig::FilterMode::llm ? "llm" : "passthrough"},
          {"passage_seed_fraction", c.planner.passage_seed_fraction},
          {"passage_seed_top", c.planner.passage_seed_top},
          {"epsilon", c.planner.epsilon},
          {"use_anchors", c.planner.use_anchors}}},
        {"tuner",
         {{"n_seed", c.tuner.n_seed},
          {"k_edge", c.tuner.k_edge},
          {"tau", c.tuner.tau},
          {"beta", c.tuner.beta},
          {"weak_default_weight", c.tuner.weak_default_weight},
          {"enable_stage2", c.tuner.enable_stage2},
          {"enable_keyfact", c.tuner.enable_keyfact},
          {"summary_fallback_concat", c.tuner.summary_fallback_concat}}},
        {"ppr",
         {{"damping", c.ppr.damping},
          {"tolerance", c.ppr.tolerance},
          {"max_iterations", c.ppr.max_iterations}}},
        {"index",
         {{"synonym_threshold", c.index.synonym_threshold},
          {"synonym_weight_scale", c.index.synonym_weight_scale},
          {"relation_base_weight", c.index.relation_base_weight},
          {"context_base_weight", c.index.context_base_weight},
          {"embed_batch_size", c.index.embed_batch_size}}},
        {"eval",
         {{"workers", c.eval_workers}, {"claim_mode", c.claim_mode}, {"with_reader", c.with_reader}}},
        {"providers",
         {{"embedding",
           {{"type", c.providers.embedding},
            {"dimension", c.providers.hash_dimension},
            {"seed", c.providers.hash_seed}}},
          {"ner", {{"type", c.providers.ner}}},
          {"summarizer",
           {{"type", c.providers.summarizer}, {"max_facts", c.providers.concat_max_facts}}},
          {"scorer", {{"type", c.providers.scorer}}},
          {"reader", {{"type", c.providers.reader}}},
          {"recognition", {{"type", c.providers.recognition}}},
          {"remote",
           {{"endpoint", c.providers.remote.endpoint},
            {"chat_model", c.providers.remote_chat_model},
            {"embed_model", c.providers.remote_embed_model},
            {"api_key_env", c.providers.remote.api_key_env},
            {"temperature", c.providers.remote.temperature},
            {"timeout_ms", c.providers.remote.timeout.count()},
            {"max_retries", c.providers.remote.max_retries},
            {"max_concurrency", c.providers.remote.max_concurrency},
            {"cache_dir", c.providers.remote.cache_dir}}}}},
    };
    return j.dump(2);
}

EvalOptions eval_options_from(const RunConfig& c) {
    EvalOptions opt;
    opt.mode = c.mode;
    opt.k = c.k;
    opt.planner = c.planner;
    opt.tuner = c.tuner;
    opt.ppr = c.ppr;
    opt.claim_mode = c.claim_mode;
    opt.workers = c.eval_workers;
    opt.with_reader = c.with_reader;
    return opt;
}

BuiltProviders build_providers(const RunConfig& config, const KnowledgeGraph* graph,
                               const std::vector<EvalQuery>* queries_for_oracle) {
    BuiltProviders built;
    const ProviderSelection& sel = config.providers;

    auto need_chat = [&]() {
        if (!built.chat) {
            ProviderConfig remote = sel.remote;
            remote.model_name = sel.remote_chat_model;
            if (remote.endpoint.empty()) {
                throw Error::validation("remote provider requested but providers.remote.endpoint is empty");
            }
            built.chat = std::make_shared<RemoteChatClient>(remote);
        }
        return built.chat;
    };

    if (sel.embedding == "hash") {
        built.embedder = std::make_unique<HashEmbedder>(sel.hash_dimension, sel.hash_seed);
    } else if (sel.embedding == "remote") {
        ProviderConfig remote = sel.remote;
        remote.model_name = sel.remote_embed_model;
        if (remote.endpoint.empty()) {
            throw Error::validation("remote embedding requested but providers.remote.endpoint is empty");
        }
        built.embedder = std::make_unique<RemoteEmbeddingProvider>(remote);
    } else {
        throw Error::validation("unknown embedding provider type: " + sel.embedding);
    }

    if (sel.ner == "dictionary") {
        std::vector<std::string> surfaces;
        if (graph != nullptr) {
            surfaces.reserve(graph->entity_count());
            for (const auto& e : graph->entities()) surfaces.push_back(e.surface);
        }
        built.ner = std::make_unique<DictionaryNer>(std::move(surfaces));
    } else if (sel.ner == "remote") {
        built.ner = std::make_unique<RemoteNer>(need_chat());
    } else if (sel.ner != "none") {
        throw Error::validation("unknown ner provider type: " + sel.ner);
    }

    if (sel.summarizer == "concat") {
        built.summarizer = std::make_unique<ConcatSummarizer>(sel.concat_max_facts);
    } else if (sel.summarizer == "remote") {
        built.summarizer = std::make_unique<RemoteSummarizer>(need_chat());
    } else if (sel.summarizer != "none") {
        throw Error::validation("unknown summarizer provider type: " + sel.summarizer);
    }

    if (sel.scorer == "lexical") {
        built.scorer = std::make_unique<LexicalScorer>();
    } else if (sel.scorer == "oracle") {
        auto oracle = std::make_unique<OracleScorer>();
        if (queries_for_oracle != nullptr) {
            for (const auto& q : *queries_for_oracle) {
                if (!q.chain_pairs.empty()) oracle->add_chain(q.question, q.chain_pairs);
            }
        }
        built.scorer = std::move(oracle);
    } else if (sel.scorer == "remote") {
        built.scorer = std::make_unique<RemoteScorer>(need_chat());
    } else if (sel.scorer != "none") {
        throw Error::validation("unknown scorer provider type: " + sel.scorer);
    }

    if (sel.reader == "extractive") {
        built.reader = std::make_unique<ExtractiveReader>();
    } else if (sel.reader == "claim") {
        built.reader = std::make_unique<ClaimReader>();
    } else if (sel.reader == "remote") {
        built.reader = std::make_unique<RemoteReader>(need_chat());
    } else if (sel.reader != "none") {
        throw Error::validation("unknown reader provider type: " + sel.reader);
    }

    if (sel.recognition == "lexical") {
        built.recognition = std::make_unique<LexicalRecognitionFilter>();
    } else if (sel.recognition == "passthrough") {
        built.recognition = std::make_unique<PassthroughFilter>();
    } else {
        throw Error::validation("unknown recognition provider type: " + sel.recognition);
    }

    built.set.embedder = built.embedder.get();
    built.set.ner = built.ner.get();
    built.set.summarizer = built.summarizer.get();
    built.set.scorer = built.scorer.get();
    built.set.reader = built.reader.get();
    built.set.recognition = built.recognition.get();
    return built;
}

} // namespace catrag
