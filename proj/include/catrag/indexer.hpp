#pragma once
#include "catrag/graph.hpp"
#include "catrag/providers.hpp"

#include <string>
#include <vector>

namespace catrag {

struct CorpusDocument {
    std::string doc_id;
    std::string title;
    std::string text;
};

struct TripleInput {
    std::string subject;
    std::string predicate;
    std::string object;
    std::string source_doc_id;
};

struct IndexManifest {
    std::string corpus_path;
    std::string triples_path;
    double synonym_threshold = 0.8;
    double synonym_weight_scale = 2.0;
    double relation_base_weight = 1.0;
    double context_base_weight = 1.0;
    size_t embed_batch_size = 64;
    std::string embedder_description;
    std::string created_at;
    std::string graph_checksum;
};

// corpus.jsonl: {doc_id,title,text} per line. Throws ParseError with the
// offending line number.
std::vector<CorpusDocument> parse_corpus_jsonl(const std::string& path);
// triples.jsonl: {subject,predicate,object,source_passage} per line.
std::vector<TripleInput> parse_triples_jsonl(const std::string& path);

// Builds passages, entities, relation edges, context edges and synonym links,
// then finalizes. Entity-passage co-occurrence derives from triple provenance.
KnowledgeGraph index_corpus(const std::vector<CorpusDocument>& corpus,
                            const std::vector<TripleInput>& triples,
                            EmbeddingProvider& embedder, IndexManifest& manifest);

// All-pairs synonym linking over entity embeddings: paired directed edges of
// weight scale * cosine for cosine >= threshold, no self-edges. Returns the
// number of entity pairs linked. Must run before finalize().
size_t link_synonyms(KnowledgeGraph& graph, double threshold, double scale);

// Paired context edges for every distinct (entity, passage) pair implied by
// triple provenance; sets passage_count. Returns directed edges added.
size_t attach_context_edges(KnowledgeGraph& graph, double weight = 1.0);

void write_manifest(const std::string& path, const IndexManifest& manifest);
IndexManifest read_manifest(const std::string& path);

} // namespace catrag
