#include "catrag/indexer.hpp"
#include "catrag/errors.hpp"
#include "catrag/util.hpp"

#include <json.hpp>

#include <algorithm>
#include <set>
#include <unordered_set>

namespace catrag {

using json = nlohmann::json;

namespace {

json parse_line(const std::string& path, std::string_view line, size_t line_no) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw Error::parse(path + ":" + std::to_string(line_no) + ": invalid JSON object");
    }
    return j;
}

std::string require_string(const json& j, const char* field, const std::string& path,
                           size_t line_no) {
    if (!j.contains(field) || !j[field].is_string()) {
        throw Error::parse(path + ":" + std::to_string(line_no) + ": missing string field '" +
                           field + "'");
    }
    return j[field].get<std::string>();
}

template <typename Fn>
void for_each_jsonl_line(const std::string& path, Fn&& fn) {
    std::string text = read_file(path);
    size_t start = 0, line_no = 1;
    while (start < text.size()) {
        size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        std::string_view line(text.data() + start, end - start);
        if (!line.empty() && line.find_first_not_of(" \t\r") != std::string_view::npos) {
            fn(line, line_no);
        }
        start = end + 1;
        ++line_no;
    }
}

// Batched embedding helper keeping call order deterministic.
std::vector<Embedding> embed_all(EmbeddingProvider& embedder, const std::vector<std::string>& texts,
                                 size_t batch_size) {
    std::vector<Embedding> out;
    out.reserve(texts.size());
    for (size_t i = 0; i < texts.size(); i += batch_size) {
        size_t end = std::min(i + batch_size, texts.size());
        std::vector<std::string> batch(texts.begin() + static_cast<std::ptrdiff_t>(i),
                                       texts.begin() + static_cast<std::ptrdiff_t>(end));
        auto vecs = embedder.embed(batch);
        for (auto& v : vecs) out.push_back(std::move(v));
    }
    return out;
}

} // namespace

std::vector<CorpusDocument> parse_corpus_jsonl(const std::string& path) {
    std::vector<CorpusDocument> docs;
    std::unordered_set<std::string> seen;
    for_each_jsonl_line(path, [&](std::string_view line, size_t line_no) {
        json j = parse_line(path, line, line_no);
        CorpusDocument d;
        d.doc_id = require_string(j, "doc_id", path, line_no);
        d.title = j.value("title", "");
        d.text = require_string(j, "text", path, line_no);
        if (d.text.empty()) {
            throw Error::parse(path + ":" + std::to_string(line_no) + ": empty text");
        }
        if (!seen.insert(d.doc_id).second) {
            throw Error::parse(path + ":" + std::to_string(line_no) + ": duplicate doc_id '" +
                               d.doc_id + "'");
        }
        docs.push_back(std::move(d));
    });
    return docs;
}

std::vector<TripleInput> parse_triples_jsonl(const std::string& path) {
    std::vector<TripleInput> triples;
    for_each_jsonl_line(path, [&](std::string_view line, size_t line_no) {
        json j = parse_line(path, line, line_no);
        TripleInput t;
        t.subject = require_string(j, "subject", path, line_no);
        t.predicate = require_string(j, "predicate", path, line_no);
        t.object = require_string(j, "object", path, line_no);
        t.source_doc_id = require_string(j, "source_passage", path, line_no);
        if (normalize_surface(t.subject).empty() || normalize_surface(t.object).empty()) {
            throw Error::parse(path + ":" + std::to_string(line_no) + ": empty subject/object");
        }
        triples.push_back(std::move(t));
    });
    return triples;
}

size_t link_synonyms(KnowledgeGraph& graph, double threshold, double scale) {
    if (threshold <= 0.0 || threshold > 1.0) {
        throw Error::validation("synonym threshold must be in (0,1]");
    }
    const auto& entities = graph.entities();
    size_t pairs = 0;
    // exact all-pairs; fine for desk-scale corpora
    for (size_t i = 0; i < entities.size(); ++i) {
        if (entities[i].embedding.empty()) continue;
        for (size_t j = i + 1; j < entities.size(); ++j) {
            if (entities[j].embedding.empty()) continue;
            double sim = cosine(entities[i].embedding, entities[j].embedding);
            if (sim >= threshold) {
                graph.add_synonym_edges(entities[i].id, entities[j].id, scale * sim);
                ++pairs;
            }
        }
    }
    return pairs;
}

size_t attach_context_edges(KnowledgeGraph& graph, double weight) {
    // distinct (entity, passage) pairs from triple provenance
    std::set<std::pair<NodeId, NodeId>> pairs;
    for (const auto& t : graph.triples()) {
        if (t.source_passage.empty()) continue;
        auto subj = graph.find_entity(t.subject);
        auto obj = graph.find_entity(t.object);
        if (subj) pairs.emplace(*subj, t.source_passage);
        if (obj) pairs.emplace(*obj, t.source_passage);
    }
    std::unordered_map<NodeId, int> counts;
    for (const auto& [entity, passage] : pairs) {
        graph.add_context_edges(entity, passage, weight);
        counts[entity] += 1;
    }
    for (const auto& [entity, count] : counts) graph.set_passage_count(entity, count);
    return pairs.size() * 2;
}

KnowledgeGraph index_corpus(const std::vector<CorpusDocument>& corpus,
                            const std::vector<TripleInput>& triples,
                            EmbeddingProvider& embedder, IndexManifest& manifest) {
    KnowledgeGraph graph;

    // passages
    std::vector<std::string> passage_texts;
    passage_texts.reserve(corpus.size());
    for (const auto& d : corpus) {
        passage_texts.push_back(d.title.empty() ? d.text : d.title + "\n" + d.text);
    }
    std::vector<Embedding> passage_vecs =
        corpus.empty() ? std::vector<Embedding>{}
                       : embed_all(embedder, passage_texts, manifest.embed_batch_size);
    std::unordered_map<std::string, NodeId> passage_by_doc;
    for (size_t i = 0; i < corpus.size(); ++i) {
        NodeId id = graph.add_passage(corpus[i].doc_id, corpus[i].text, std::move(passage_vecs[i]));
        passage_by_doc[corpus[i].doc_id] = id;
    }

    // entities (distinct normalized surfaces, first-seen order)
    std::vector<std::string> surfaces;
    std::unordered_set<std::string> surface_seen;
    for (const auto& t : triples) {
        for (const std::string* s : {&t.subject, &t.object}) {
            std::string norm = normalize_surface(*s);
            if (norm.empty()) throw Error::validation("triple has empty subject/object surface");
            if (surface_seen.insert(norm).second) surfaces.push_back(norm);
        }
    }
    std::vector<Embedding> surface_vecs =
        surfaces.empty() ? std::vector<Embedding>{}
                         : embed_all(embedder, surfaces, manifest.embed_batch_size);
    for (size_t i = 0; i < surfaces.size(); ++i) {
        graph.upsert_entity(surfaces[i], std::move(surface_vecs[i]));
    }

    // relation edges; fact embeddings over distinct text forms
    std::vector<std::string> fact_forms;
    std::unordered_map<std::string, size_t> fact_form_index;
    for (const auto& t : triples) {
        std::string form = Triple::make_text_form(normalize_surface(t.subject), t.predicate,
                                                  normalize_surface(t.object));
        if (!fact_form_index.count(form)) {
            fact_form_index[form] = fact_forms.size();
            fact_forms.push_back(form);
        }
    }
    std::vector<Embedding> fact_vecs =
        fact_forms.empty() ? std::vector<Embedding>{}
                           : embed_all(embedder, fact_forms, manifest.embed_batch_size);

    for (const auto& t : triples) {
        auto pit = passage_by_doc.find(t.source_doc_id);
        if (pit == passage_by_doc.end()) {
            throw Error::dangling_triple("triple references absent passage '" + t.source_doc_id +
                                         "' (" + t.subject + " | " + t.predicate + " | " + t.object +
                                         ")");
        }
        Triple triple;
        triple.subject = t.subject;
        triple.predicate = t.predicate;
        triple.object = t.object;
        triple.source_passage = pit->second;
        std::string form = Triple::make_text_form(normalize_surface(t.subject), t.predicate,
                                                  normalize_surface(t.object));
        graph.add_triple_edges(triple, manifest.relation_base_weight,
                               fact_vecs[fact_form_index[form]]);
    }

    attach_context_edges(graph, manifest.context_base_weight);
    link_synonyms(graph, manifest.synonym_threshold, manifest.synonym_weight_scale);

    graph.finalize();
    manifest.graph_checksum = graph.checksum();
    return graph;
}

void write_manifest(const std::string& path, const IndexManifest& m) {
    json j{{"corpus_path", m.corpus_path},
           {"triples_path", m.triples_path},
           {"synonym_threshold", m.synonym_threshold},
           {"synonym_weight_scale", m.synonym_weight_scale},
           {"relation_base_weight", m.relation_base_weight},
           {"context_base_weight", m.context_base_weight},
           {"embed_batch_size", m.embed_batch_size},
           {"embedder", m.embedder_description},
           {"created_at", m.created_at},
           {"graph_checksum", m.graph_checksum}};
    write_file(path, j.dump(2) + "\n");
}

IndexManifest read_manifest(const std::string& path) {
    json j = json::parse(read_file(path), nullptr, false);
    if (j.is_discarded()) throw Error::parse(path + ": invalid JSON");
    IndexManifest m;
    m.corpus_path = j.value("corpus_path", "");
    m.triples_path = j.value("triples_path", "");
    m.synonym_threshold = j.value("synonym_threshold", 0.8);
    m.synonym_weight_scale = j.value("synonym_weight_scale", 2.0);
    m.relation_base_weight = j.value("relation_base_weight", 1.0);
    m.context_base_weight = j.value("context_base_weight", 1.0);
    m.embed_batch_size = j.value("embed_batch_size", static_cast<size_t>(64));
    m.embedder_description = j.value("embedder", "");
    m.created_at = j.value("created_at", "");
    m.graph_checksum = j.value("graph_checksum", "");
    return m;
}

} // namespace catrag
