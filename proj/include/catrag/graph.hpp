#pragma once
#include "catrag/types.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace catrag {

// A distinct fact: identical "subject | predicate | object" extractions share
// one fact record (and one relation edge pair); re-adding accumulates weight
// on that pair. Occurrences track every source passage for provenance.
struct Fact {
    int32_t id = -1;
    std::string subject;   // normalized surface
    std::string predicate;
    std::string object;    // normalized surface
    std::string text_form;
    Embedding embedding;
    std::vector<NodeId> source_passages; // one entry per extraction occurrence
};

// Heterogeneous directed graph over entity and passage nodes.
//
// Edge storage: relation and synonym edges are materialized as two directed
// edges of equal weight; context edges as passage->entity plus entity->passage.
// Two-phase lifecycle: single-writer while indexing, immutable after
// finalize(); queries share the finalized graph freely.
class KnowledgeGraph {
public:
    KnowledgeGraph() = default;

    // --- construction (pre-finalize) ---

    NodeId add_passage(const std::string& doc_id, const std::string& text, Embedding embedding);
    NodeId upsert_entity(const std::string& surface, Embedding embedding);

    // Stores the triple occurrence and adds (or strengthens) the paired
    // relation edges for its fact. fact_embedding embeds the text_form.
    std::pair<Edge, Edge> add_triple_edges(const Triple& triple, double weight,
                                           Embedding fact_embedding);

    void add_synonym_edges(const NodeId& a, const NodeId& b, double weight);
    void add_context_edges(const NodeId& entity, const NodeId& passage, double weight);
    void set_passage_count(const NodeId& entity, int count);

    void finalize();
    bool finalized() const { return finalized_; }

    // --- lookups ---

    bool has_node(const NodeId& id) const;
    bool is_entity(const NodeId& id) const;
    bool is_passage(const NodeId& id) const;
    const EntityNode& entity(const NodeId& id) const;
    const PassageNode& passage(const NodeId& id) const;
    std::optional<NodeId> find_entity(const std::string& surface) const; // normalized match
    std::optional<NodeId> find_passage_by_doc(const std::string& doc_id) const;

    size_t entity_count() const { return entities_.size(); }
    size_t passage_count() const { return passages_.size(); }
    // 0 when the graph carries no embeddings
    size_t embedding_dimension() const { return embedding_dim_; }
    size_t node_count() const { return entities_.size() + passages_.size(); }
    size_t edge_count() const;
    size_t triple_count() const { return triples_.size(); }
    size_t fact_count() const { return facts_.size(); }

    const std::vector<EntityNode>& entities() const { return entities_; }
    const std::vector<PassageNode>& passages() const { return passages_; }
    const std::vector<Triple>& triples() const { return triples_; }
    const std::vector<Fact>& facts() const { return facts_; }
    const Fact& fact(int32_t id) const;
    std::optional<int32_t> find_fact(const std::string& text_form) const;

    // Distinct facts incident to an entity (as subject or object), in fact-id
    // order. This is F(v) for contextualization.
    std::vector<int32_t> facts_of_entity(const NodeId& id) const;
    std::vector<int32_t> triples_of_passage(const NodeId& id) const;
    std::vector<int32_t> triples_between(const std::string& subject_surface,
                                         const std::string& object_surface) const;

    // Outgoing edges in deterministic (dst id, kind, fact id) order.
    // kind_filter restricts to one kind when given.
    std::vector<Edge> out_edges(const NodeId& id, std::optional<EdgeKind> kind_filter = {}) const;

    // Weighted out-degree over stored directed edges (base static weights).
    double strength(const NodeId& id) const;

    // --- finalized index (dense, node-id sorted) ---

    // Dense node index in ascending node-id order; fixed after finalize().
    size_t index_of(const NodeId& id) const;
    const NodeId& id_at(size_t index) const;
    const std::vector<NodeId>& finalized_ids() const;
    bool index_is_entity(size_t index) const;
    std::span<const Edge> out_edges_at(size_t index) const;
    double strength_at(size_t index) const;

    // Global top-1%-by-strength node set (ceil(n/100) members, ties broken by
    // node id); the "super hub" set for diagnostics.
    const std::vector<size_t>& super_hub_indices() const;

    // --- persistence ---

    // Writes nodes.jsonl, edges.jsonl, triples.jsonl, embeddings.bin into dir.
    // Requires a finalized graph. Returns the content checksum (hex FNV-1a64).
    std::string save(const std::string& dir) const;
    static KnowledgeGraph load(const std::string& dir);
    std::string checksum() const;

private:
    void require_mutable() const;
    void require_finalized() const;
    const std::vector<Edge>& adjacency_of(const NodeId& id) const;
    std::vector<Edge>& mutable_adjacency(const NodeId& id);

    std::vector<EntityNode> entities_;
    std::vector<PassageNode> passages_;
    std::unordered_map<std::string, size_t> entity_by_surface_;
    std::unordered_map<std::string, size_t> passage_by_doc_;
    std::unordered_map<NodeId, size_t> entity_by_id_;
    std::unordered_map<NodeId, size_t> passage_by_id_;

    std::vector<Triple> triples_;
    std::vector<Fact> facts_;
    std::unordered_map<std::string, int32_t> fact_by_text_form_;
    std::unordered_map<std::string, std::vector<int32_t>> triples_by_pair_; // "subj\x1fobj"
    std::unordered_map<NodeId, std::vector<int32_t>> triples_by_passage_;
    std::unordered_map<NodeId, std::vector<int32_t>> facts_by_entity_;

    std::unordered_map<NodeId, std::vector<Edge>> adjacency_;
    size_t embedding_dim_ = 0; // fixed by the first non-empty embedding

    bool finalized_ = false;
    std::vector<NodeId> sorted_ids_;
    std::unordered_map<NodeId, size_t> index_by_id_;
    std::vector<uint8_t> index_entity_flag_;
    std::vector<std::vector<Edge>> finalized_adjacency_;
    std::vector<double> strengths_;
    std::vector<size_t> super_hubs_;
};

} // namespace catrag
