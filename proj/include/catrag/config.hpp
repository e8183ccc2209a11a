#pragma once
#include "catrag/eval.hpp"
#include "catrag/indexer.hpp"
#include "catrag/providers.hpp"
#include "catrag/providers_remote.hpp"

#include <memory>
#include <string>

namespace catrag {

struct ProviderSelection {
    std::string embedding = "hash";    // hash | remote
    std::string ner = "dictionary";    // dictionary | remote | none
    std::string summarizer = "concat"; // concat | remote | none
    std::string scorer = "lexical";    // lexical | oracle | remote | none
    std::string reader = "extractive"; // extractive | claim | remote | none
    std::string recognition = "passthrough"; // passthrough | lexical
    size_t hash_dimension = 256;
    uint64_t hash_seed = 17;
    size_t concat_max_facts = 20;
    ProviderConfig remote;             // shared remote settings
    std::string remote_chat_model = "gpt-4o-mini";
    std::string remote_embed_model = "text-embedding-3-small";
};

// Effective run configuration: config file values overridden by CLI flags.
struct RunConfig {
    std::string graph_dir;
    std::string mode = "catrag"; // static | catrag
    int k = 5;
    PlannerConfig planner;
    TunerConfig tuner;
    PprConfig ppr;
    IndexManifest index;
    int eval_workers = 1;
    bool claim_mode = false;
    bool with_reader = true;
    ProviderSelection providers;
};

// Loads JSON config with ${ENV_VAR} interpolation inside string values.
RunConfig load_run_config(const std::string& path);
RunConfig default_run_config();

// Full effective config as JSON, echoed into output artifacts.
std::string run_config_to_json(const RunConfig& config);

EvalOptions eval_options_from(const RunConfig& config);

// Owning provider bundle assembled per run. The dictionary NER needs graph
// surfaces; the oracle scorer needs gold chains from the query set.
struct BuiltProviders {
    ProviderSet set;

    std::shared_ptr<RemoteChatClient> chat;
    std::unique_ptr<EmbeddingProvider> embedder;
    std::unique_ptr<NerProvider> ner;
    std::unique_ptr<SummaryProvider> summarizer;
    std::unique_ptr<NeighborScorer> scorer;
    std::unique_ptr<AnswerReader> reader;
    std::unique_ptr<RecognitionFilter> recognition;
};

BuiltProviders build_providers(const RunConfig& config, const KnowledgeGraph* graph,
                               const std::vector<EvalQuery>* queries_for_oracle);

} // namespace catrag
