#pragma once
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace catrag {

using NodeId = std::string;
using Embedding = std::vector<float>;

enum class EdgeKind : uint8_t { relation = 0, synonym = 1, context = 2 };

const char* to_string(EdgeKind kind);
std::optional<EdgeKind> edge_kind_from_string(std::string_view s);

struct EntityNode {
    NodeId id;
    std::string surface; // normalized: lowercase, whitespace-collapsed
    Embedding embedding; // unit L2 norm
    int passage_count = 0; // |P_i|: distinct passages containing this entity
};

struct PassageNode {
    NodeId id;
    std::string doc_id;
    std::string text;
    Embedding embedding;
};

// A single OpenIE extraction occurrence. text_form is the canonical
// "subject | predicate | object" string shared by identical extractions.
struct Triple {
    std::string subject;
    std::string predicate;
    std::string object;
    NodeId source_passage;
    std::string text_form;

    static std::string make_text_form(std::string_view subject, std::string_view predicate,
                                      std::string_view object);
};

struct Edge {
    NodeId src;
    NodeId dst;
    EdgeKind kind = EdgeKind::relation;
    double static_weight = 0.0;
    // Relation edges reference the distinct fact they were derived from
    // (index into KnowledgeGraph facts); -1 for synonym/context edges.
    int32_t fact_id = -1;
};

} // namespace catrag
