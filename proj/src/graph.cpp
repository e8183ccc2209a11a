#include "catrag/graph.hpp"
#include "catrag/errors.hpp"
#include "catrag/util.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace catrag {

using json = nlohmann::json;
namespace fs = std::filesystem;

const char* to_string(EdgeKind kind) {
    switch (kind) {
    case EdgeKind::relation: return "relation";
    case EdgeKind::synonym: return "synonym";
    case EdgeKind::context: return "context";
    }
    return "?";
}

std::optional<EdgeKind> edge_kind_from_string(std::string_view s) {
    if (s == "relation") return EdgeKind::relation;
    if (s == "synonym") return EdgeKind::synonym;
    if (s == "context") return EdgeKind::context;
    return std::nullopt;
}

std::string Triple::make_text_form(std::string_view subject, std::string_view predicate,
                                   std::string_view object) {
    std::string out;
    out.reserve(subject.size() + predicate.size() + object.size() + 6);
    out += subject;
    out += " | ";
    out += predicate;
    out += " | ";
    out += object;
    return out;
}

namespace {

void validate_embedding(const Embedding& e, size_t& dim, const std::string& what) {
    if (e.empty()) return; // embeddings are optional for plumbing-only graphs
    if (dim == 0) {
        dim = e.size();
    } else if (e.size() != dim) {
        throw Error::validation(what + ": embedding dimension " + std::to_string(e.size()) +
                                " does not match graph dimension " + std::to_string(dim));
    }
    double n = l2_norm(e);
    if (std::abs(n - 1.0) > 1e-6) {
        throw Error::validation(what + ": embedding not unit-normalized (norm=" + std::to_string(n) + ")");
    }
}

bool edge_order(const Edge& a, const Edge& b) {
    if (a.dst != b.dst) return a.dst < b.dst;
    if (a.kind != b.kind) return a.kind < b.kind;
    return a.fact_id < b.fact_id;
}

} // namespace

void KnowledgeGraph::require_mutable() const {
    if (finalized_) throw Error::graph_finalized("graph is finalized; base graph is immutable");
}

void KnowledgeGraph::require_finalized() const {
    if (!finalized_) throw Error::internal("operation requires a finalized graph");
}

NodeId KnowledgeGraph::add_passage(const std::string& doc_id, const std::string& text,
                                   Embedding embedding) {
    require_mutable();
    if (text.empty()) throw Error::validation("passage text is empty (doc_id=" + doc_id + ")");
    if (doc_id.empty()) throw Error::validation("passage doc_id is empty");
    if (passage_by_doc_.count(doc_id)) {
        throw Error::duplicate_doc_id("doc_id already indexed: " + doc_id);
    }
    validate_embedding(embedding, embedding_dim_, "passage " + doc_id);
    PassageNode node;
    node.id = "p" + std::to_string(passages_.size());
    node.doc_id = doc_id;
    node.text = text;
    node.embedding = std::move(embedding);
    passage_by_doc_[doc_id] = passages_.size();
    passage_by_id_[node.id] = passages_.size();
    adjacency_[node.id];
    passages_.push_back(std::move(node));
    return passages_.back().id;
}

NodeId KnowledgeGraph::upsert_entity(const std::string& surface, Embedding embedding) {
    require_mutable();
    std::string norm = normalize_surface(surface);
    if (norm.empty()) throw Error::validation("entity surface empty after normalization");
    auto it = entity_by_surface_.find(norm);
    if (it != entity_by_surface_.end()) return entities_[it->second].id;
    validate_embedding(embedding, embedding_dim_, "entity " + norm);
    EntityNode node;
    node.id = "e" + std::to_string(entities_.size());
    node.surface = norm;
    node.embedding = std::move(embedding);
    entity_by_surface_[norm] = entities_.size();
    entity_by_id_[node.id] = entities_.size();
    adjacency_[node.id];
    entities_.push_back(std::move(node));
    return entities_.back().id;
}

std::pair<Edge, Edge> KnowledgeGraph::add_triple_edges(const Triple& triple, double weight,
                                                       Embedding fact_embedding) {
    require_mutable();
    if (weight <= 0.0) throw Error::validation("triple edge weight must be positive");
    std::string subj = normalize_surface(triple.subject);
    std::string obj = normalize_surface(triple.object);
    if (subj.empty() || obj.empty()) throw Error::validation("triple subject/object empty");
    auto sit = entity_by_surface_.find(subj);
    if (sit == entity_by_surface_.end()) throw Error::unknown_entity("unknown subject entity: " + subj);
    auto oit = entity_by_surface_.find(obj);
    if (oit == entity_by_surface_.end()) throw Error::unknown_entity("unknown object entity: " + obj);
    if (!triple.source_passage.empty() && !passage_by_id_.count(triple.source_passage)) {
        throw Error::dangling_triple("triple source passage not indexed: " + triple.source_passage);
    }

    const NodeId& u = entities_[sit->second].id;
    const NodeId& v = entities_[oit->second].id;

    std::string text_form = Triple::make_text_form(subj, triple.predicate, obj);
    int32_t fact_id;
    auto fit = fact_by_text_form_.find(text_form);
    if (fit != fact_by_text_form_.end()) {
        fact_id = fit->second;
        facts_[fact_id].source_passages.push_back(triple.source_passage);
    } else {
        fact_id = static_cast<int32_t>(facts_.size());
        Fact f;
        f.id = fact_id;
        f.subject = subj;
        f.predicate = triple.predicate;
        f.object = obj;
        f.text_form = text_form;
        validate_embedding(fact_embedding, embedding_dim_, "fact " + text_form);
        f.embedding = std::move(fact_embedding);
        f.source_passages.push_back(triple.source_passage);
        fact_by_text_form_[text_form] = fact_id;
        facts_.push_back(std::move(f));
        facts_by_entity_[u].push_back(fact_id);
        if (v != u) facts_by_entity_[v].push_back(fact_id);
    }

    int32_t triple_idx = static_cast<int32_t>(triples_.size());
    Triple stored = triple;
    stored.subject = subj;
    stored.object = obj;
    stored.text_form = text_form;
    triples_.push_back(stored);
    triples_by_pair_[subj + "\x1f" + obj].push_back(triple_idx);
    if (!stored.source_passage.empty()) {
        triples_by_passage_[stored.source_passage].push_back(triple_idx);
    }

    auto bump = [&](const NodeId& from, const NodeId& to) -> Edge {
        auto& adj = adjacency_[from];
        for (auto& e : adj) {
            if (e.dst == to && e.kind == EdgeKind::relation && e.fact_id == fact_id) {
                e.static_weight += weight;
                return e;
            }
        }
        adj.push_back(Edge{from, to, EdgeKind::relation, weight, fact_id});
        return adj.back();
    };

    Edge forward = bump(u, v);
    // self-loop facts keep a single stored edge
    Edge backward = (u == v) ? forward : bump(v, u);
    return {forward, backward};
}

void KnowledgeGraph::add_synonym_edges(const NodeId& a, const NodeId& b, double weight) {
    require_mutable();
    if (weight <= 0.0) throw Error::validation("synonym edge weight must be positive");
    if (a == b) throw Error::validation("synonym self-edge rejected: " + a);
    if (!entity_by_id_.count(a)) throw Error::unknown_node("unknown entity: " + a);
    if (!entity_by_id_.count(b)) throw Error::unknown_node("unknown entity: " + b);
    adjacency_[a].push_back(Edge{a, b, EdgeKind::synonym, weight, -1});
    adjacency_[b].push_back(Edge{b, a, EdgeKind::synonym, weight, -1});
}

void KnowledgeGraph::add_context_edges(const NodeId& entity, const NodeId& passage, double weight) {
    require_mutable();
    if (weight <= 0.0) throw Error::validation("context edge weight must be positive");
    if (!entity_by_id_.count(entity)) throw Error::unknown_node("unknown entity: " + entity);
    if (!passage_by_id_.count(passage)) throw Error::unknown_node("unknown passage: " + passage);
    adjacency_[entity].push_back(Edge{entity, passage, EdgeKind::context, weight, -1});
    adjacency_[passage].push_back(Edge{passage, entity, EdgeKind::context, weight, -1});
}

void KnowledgeGraph::set_passage_count(const NodeId& entity, int count) {
    require_mutable();
    auto it = entity_by_id_.find(entity);
    if (it == entity_by_id_.end()) throw Error::unknown_node("unknown entity: " + entity);
    entities_[it->second].passage_count = count;
}

void KnowledgeGraph::finalize() {
    require_mutable();

    // Derive passage_count from stored context edges where the indexer did not
    // set it explicitly; entities touched by a context edge must end up >= 1.
    for (auto& e : entities_) {
        if (e.passage_count > 0) continue;
        std::vector<NodeId> seen;
        for (const auto& edge : adjacency_[e.id]) {
            if (edge.kind != EdgeKind::context) continue;
            if (std::find(seen.begin(), seen.end(), edge.dst) == seen.end()) seen.push_back(edge.dst);
        }
        e.passage_count = static_cast<int>(seen.size());
    }

    sorted_ids_.clear();
    sorted_ids_.reserve(node_count());
    for (const auto& e : entities_) sorted_ids_.push_back(e.id);
    for (const auto& p : passages_) sorted_ids_.push_back(p.id);
    std::sort(sorted_ids_.begin(), sorted_ids_.end());

    index_by_id_.clear();
    index_entity_flag_.assign(sorted_ids_.size(), 0);
    finalized_adjacency_.assign(sorted_ids_.size(), {});
    strengths_.assign(sorted_ids_.size(), 0.0);
    for (size_t i = 0; i < sorted_ids_.size(); ++i) {
        const NodeId& id = sorted_ids_[i];
        index_by_id_[id] = i;
        index_entity_flag_[i] = entity_by_id_.count(id) ? 1 : 0;
        auto it = adjacency_.find(id);
        if (it != adjacency_.end()) {
            finalized_adjacency_[i] = it->second;
            std::sort(finalized_adjacency_[i].begin(), finalized_adjacency_[i].end(), edge_order);
        }
        double s = 0.0;
        for (const auto& e : finalized_adjacency_[i]) s += e.static_weight;
        strengths_[i] = s;
    }

    // Super hubs: global top-1% by strength (at least one node), ties by id.
    super_hubs_.clear();
    if (!sorted_ids_.empty()) {
        size_t count = static_cast<size_t>(
            std::ceil(static_cast<double>(sorted_ids_.size()) / 100.0));
        count = std::max<size_t>(1, std::min(count, sorted_ids_.size()));
        std::vector<size_t> order(sorted_ids_.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
            if (strengths_[a] != strengths_[b]) return strengths_[a] > strengths_[b];
            return sorted_ids_[a] < sorted_ids_[b];
        });
        super_hubs_.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count));
        std::sort(super_hubs_.begin(), super_hubs_.end());
    }

    finalized_ = true;
}

bool KnowledgeGraph::has_node(const NodeId& id) const {
    return entity_by_id_.count(id) || passage_by_id_.count(id);
}

bool KnowledgeGraph::is_entity(const NodeId& id) const { return entity_by_id_.count(id) > 0; }
bool KnowledgeGraph::is_passage(const NodeId& id) const { return passage_by_id_.count(id) > 0; }

const EntityNode& KnowledgeGraph::entity(const NodeId& id) const {
    auto it = entity_by_id_.find(id);
    if (it == entity_by_id_.end()) throw Error::unknown_node("unknown entity: " + id);
    return entities_[it->second];
}

const PassageNode& KnowledgeGraph::passage(const NodeId& id) const {
    auto it = passage_by_id_.find(id);
    if (it == passage_by_id_.end()) throw Error::unknown_node("unknown passage: " + id);
    return passages_[it->second];
}

std::optional<NodeId> KnowledgeGraph::find_entity(const std::string& surface) const {
    auto it = entity_by_surface_.find(normalize_surface(surface));
    if (it == entity_by_surface_.end()) return std::nullopt;
    return entities_[it->second].id;
}

std::optional<NodeId> KnowledgeGraph::find_passage_by_doc(const std::string& doc_id) const {
    auto it = passage_by_doc_.find(doc_id);
    if (it == passage_by_doc_.end()) return std::nullopt;
    return passages_[it->second].id;
}

size_t KnowledgeGraph::edge_count() const {
    size_t n = 0;
    for (const auto& [id, adj] : adjacency_) n += adj.size();
    return n;
}

const Fact& KnowledgeGraph::fact(int32_t id) const {
    if (id < 0 || static_cast<size_t>(id) >= facts_.size()) {
        throw Error::internal("fact id out of range: " + std::to_string(id));
    }
    return facts_[static_cast<size_t>(id)];
}

std::optional<int32_t> KnowledgeGraph::find_fact(const std::string& text_form) const {
    auto it = fact_by_text_form_.find(text_form);
    if (it == fact_by_text_form_.end()) return std::nullopt;
    return it->second;
}

std::vector<int32_t> KnowledgeGraph::facts_of_entity(const NodeId& id) const {
    if (!entity_by_id_.count(id)) throw Error::unknown_node("unknown entity: " + id);
    auto it = facts_by_entity_.find(id);
    if (it == facts_by_entity_.end()) return {};
    return it->second;
}

std::vector<int32_t> KnowledgeGraph::triples_of_passage(const NodeId& id) const {
    auto it = triples_by_passage_.find(id);
    if (it == triples_by_passage_.end()) return {};
    return it->second;
}

std::vector<int32_t> KnowledgeGraph::triples_between(const std::string& subject_surface,
                                                     const std::string& object_surface) const {
    auto it = triples_by_pair_.find(normalize_surface(subject_surface) + "\x1f" +
                                    normalize_surface(object_surface));
    if (it == triples_by_pair_.end()) return {};
    return it->second;
}

const std::vector<Edge>& KnowledgeGraph::adjacency_of(const NodeId& id) const {
    auto it = adjacency_.find(id);
    if (it == adjacency_.end()) throw Error::unknown_node("unknown node: " + id);
    return it->second;
}

std::vector<Edge> KnowledgeGraph::out_edges(const NodeId& id,
                                            std::optional<EdgeKind> kind_filter) const {
    std::vector<Edge> out;
    if (finalized_) {
        auto it = index_by_id_.find(id);
        if (it == index_by_id_.end()) throw Error::unknown_node("unknown node: " + id);
        const auto& adj = finalized_adjacency_[it->second];
        out.assign(adj.begin(), adj.end());
    } else {
        out = adjacency_of(id);
        std::sort(out.begin(), out.end(), edge_order);
    }
    if (kind_filter) {
        out.erase(std::remove_if(out.begin(), out.end(),
                                 [&](const Edge& e) { return e.kind != *kind_filter; }),
                  out.end());
    }
    return out;
}

double KnowledgeGraph::strength(const NodeId& id) const {
    if (finalized_) {
        auto it = index_by_id_.find(id);
        if (it == index_by_id_.end()) throw Error::unknown_node("unknown node: " + id);
        return strengths_[it->second];
    }
    double s = 0.0;
    for (const auto& e : adjacency_of(id)) s += e.static_weight;
    return s;
}

size_t KnowledgeGraph::index_of(const NodeId& id) const {
    require_finalized();
    auto it = index_by_id_.find(id);
    if (it == index_by_id_.end()) throw Error::unknown_node("unknown node: " + id);
    return it->second;
}

const NodeId& KnowledgeGraph::id_at(size_t index) const {
    require_finalized();
    return sorted_ids_.at(index);
}

const std::vector<NodeId>& KnowledgeGraph::finalized_ids() const {
    require_finalized();
    return sorted_ids_;
}

bool KnowledgeGraph::index_is_entity(size_t index) const {
    require_finalized();
    return index_entity_flag_.at(index) != 0;
}

std::span<const Edge> KnowledgeGraph::out_edges_at(size_t index) const {
    require_finalized();
    const auto& adj = finalized_adjacency_.at(index);
    return {adj.data(), adj.size()};
}

double KnowledgeGraph::strength_at(size_t index) const {
    require_finalized();
    return strengths_.at(index);
}

const std::vector<size_t>& KnowledgeGraph::super_hub_indices() const {
    require_finalized();
    return super_hubs_;
}

// --- persistence ---

namespace {

void append_f32_le(std::string& out, float v) {
    uint32_t bits = std::bit_cast<uint32_t>(v);
    out.push_back(static_cast<char>(bits & 0xff));
    out.push_back(static_cast<char>((bits >> 8) & 0xff));
    out.push_back(static_cast<char>((bits >> 16) & 0xff));
    out.push_back(static_cast<char>((bits >> 24) & 0xff));
}

float read_f32_le(const char* p) {
    uint32_t bits = static_cast<uint8_t>(p[0]) | (static_cast<uint32_t>(static_cast<uint8_t>(p[1])) << 8) |
                    (static_cast<uint32_t>(static_cast<uint8_t>(p[2])) << 16) |
                    (static_cast<uint32_t>(static_cast<uint8_t>(p[3])) << 24);
    return std::bit_cast<float>(bits);
}

struct SerializedGraph {
    std::string nodes;
    std::string edges;
    std::string triples;
    std::string embeddings;
};

} // namespace

static SerializedGraph serialize_graph(const KnowledgeGraph& g) {
    SerializedGraph out;

    for (const auto& e : g.entities()) {
        json j{{"id", e.id}, {"kind", "entity"}, {"surface", e.surface},
               {"passage_count", e.passage_count}};
        out.nodes += j.dump();
        out.nodes += '\n';
    }
    for (const auto& p : g.passages()) {
        json j{{"id", p.id}, {"kind", "passage"}, {"doc_id", p.doc_id}, {"text", p.text}};
        out.nodes += j.dump();
        out.nodes += '\n';
    }

    for (const auto& id : g.finalized_ids()) {
        for (const auto& e : g.out_edges(id)) {
            json j{{"src", e.src}, {"dst", e.dst}, {"kind", to_string(e.kind)},
                   {"weight", e.static_weight}};
            if (e.fact_id >= 0) j["fact_id"] = e.fact_id;
            out.edges += j.dump();
            out.edges += '\n';
        }
    }

    for (const auto& t : g.triples()) {
        json j{{"subject", t.subject}, {"predicate", t.predicate}, {"object", t.object},
               {"source_passage", t.source_passage}};
        out.triples += j.dump();
        out.triples += '\n';
    }

    size_t dim = 0;
    auto consider = [&](const Embedding& e) { if (!e.empty()) dim = e.size(); };
    for (const auto& e : g.entities()) consider(e.embedding);
    for (const auto& p : g.passages()) consider(p.embedding);
    for (const auto& f : g.facts()) consider(f.embedding);

    json rows = json::array();
    std::string blob;
    auto emit = [&](const std::string& row_id, const Embedding& e) {
        rows.push_back(row_id);
        for (size_t i = 0; i < dim; ++i) append_f32_le(blob, i < e.size() ? e[i] : 0.0f);
    };
    for (const auto& e : g.entities()) emit(e.id, e.embedding);
    for (const auto& p : g.passages()) emit(p.id, p.embedding);
    for (const auto& f : g.facts()) emit("f" + std::to_string(f.id), f.embedding);
    json header{{"dimension", dim}, {"rows", rows}};
    out.embeddings = header.dump();
    out.embeddings += '\n';
    out.embeddings += blob;

    return out;
}

std::string KnowledgeGraph::checksum() const {
    require_finalized();
    SerializedGraph s = serialize_graph(*this);
    uint64_t h = fnv1a64(s.nodes);
    h = fnv1a64(s.edges, h);
    h = fnv1a64(s.triples, h);
    h = fnv1a64(s.embeddings, h);
    return hex64(h);
}

std::string KnowledgeGraph::save(const std::string& dir) const {
    require_finalized();
    fs::create_directories(dir);
    SerializedGraph s = serialize_graph(*this);
    write_file(dir + "/nodes.jsonl", s.nodes);
    write_file(dir + "/edges.jsonl", s.edges);
    write_file(dir + "/triples.jsonl", s.triples);
    write_file(dir + "/embeddings.bin", s.embeddings);
    uint64_t h = fnv1a64(s.nodes);
    h = fnv1a64(s.edges, h);
    h = fnv1a64(s.triples, h);
    h = fnv1a64(s.embeddings, h);
    return hex64(h);
}

KnowledgeGraph KnowledgeGraph::load(const std::string& dir) {
    KnowledgeGraph g;

    std::string emb = read_file(dir + "/embeddings.bin");
    size_t nl = emb.find('\n');
    if (nl == std::string::npos) throw Error::parse(dir + "/embeddings.bin: missing header line");
    json header = json::parse(emb.substr(0, nl), nullptr, false);
    if (header.is_discarded()) throw Error::parse(dir + "/embeddings.bin: bad header");
    size_t dim = header.at("dimension").get<size_t>();
    std::unordered_map<std::string, Embedding> by_row;
    {
        const auto& rows = header.at("rows");
        size_t offset = nl + 1;
        size_t need = rows.size() * dim * 4;
        if (emb.size() - offset < need) throw Error::parse(dir + "/embeddings.bin: truncated");
        for (size_t r = 0; r < rows.size(); ++r) {
            Embedding v(dim);
            for (size_t i = 0; i < dim; ++i) {
                v[i] = read_f32_le(emb.data() + offset + (r * dim + i) * 4);
            }
            bool all_zero = std::all_of(v.begin(), v.end(), [](float x) { return x == 0.0f; });
            by_row[rows[r].get<std::string>()] = all_zero ? Embedding{} : std::move(v);
        }
    }

    auto for_each_line = [](const std::string& text, auto&& fn) {
        size_t start = 0, line_no = 1;
        while (start < text.size()) {
            size_t end = text.find('\n', start);
            if (end == std::string::npos) end = text.size();
            std::string_view line(text.data() + start, end - start);
            if (!line.empty()) fn(line, line_no);
            start = end + 1;
            ++line_no;
        }
    };

    std::string nodes = read_file(dir + "/nodes.jsonl");
    for_each_line(nodes, [&](std::string_view line, size_t line_no) {
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) throw Error::parse(dir + "/nodes.jsonl:" + std::to_string(line_no));
        std::string id = j.at("id").get<std::string>();
        if (j.at("kind") == "entity") {
            NodeId got = g.upsert_entity(j.at("surface").get<std::string>(), by_row[id]);
            if (got != id) throw Error::parse(dir + "/nodes.jsonl: non-canonical entity order at " + id);
            g.set_passage_count(got, j.value("passage_count", 0));
        } else {
            NodeId got = g.add_passage(j.at("doc_id").get<std::string>(),
                                       j.at("text").get<std::string>(), by_row[id]);
            if (got != id) throw Error::parse(dir + "/nodes.jsonl: non-canonical passage order at " + id);
        }
    });

    // Rebuild triple/fact stores; fact ids follow first-occurrence order, which
    // matches how they were assigned at index time.
    std::string triples = read_file(dir + "/triples.jsonl");
    for_each_line(triples, [&](std::string_view line, size_t line_no) {
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) throw Error::parse(dir + "/triples.jsonl:" + std::to_string(line_no));
        Triple t;
        t.subject = j.at("subject").get<std::string>();
        t.predicate = j.at("predicate").get<std::string>();
        t.object = j.at("object").get<std::string>();
        t.source_passage = j.at("source_passage").get<std::string>();
        std::string text_form = Triple::make_text_form(normalize_surface(t.subject), t.predicate,
                                                       normalize_surface(t.object));
        std::string row = "f" + std::to_string(g.fact_count());
        Embedding fe = g.fact_by_text_form_.count(text_form) ? Embedding{} : by_row[row];
        // weight is a placeholder: real edge weights are restored from edges.jsonl
        g.add_triple_edges(t, 1.0, std::move(fe));
    });

    // Replace replayed relation adjacency with the persisted edge weights.
    for (auto& [id, adj] : g.adjacency_) adj.clear();
    std::string edges = read_file(dir + "/edges.jsonl");
    for_each_line(edges, [&](std::string_view line, size_t line_no) {
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) throw Error::parse(dir + "/edges.jsonl:" + std::to_string(line_no));
        auto kind = edge_kind_from_string(j.at("kind").get<std::string>());
        if (!kind) throw Error::parse(dir + "/edges.jsonl:" + std::to_string(line_no) + ": bad kind");
        Edge e;
        e.src = j.at("src").get<std::string>();
        e.dst = j.at("dst").get<std::string>();
        e.kind = *kind;
        e.static_weight = j.at("weight").get<double>();
        e.fact_id = j.value("fact_id", -1);
        if (!g.has_node(e.src) || !g.has_node(e.dst)) {
            throw Error::parse(dir + "/edges.jsonl:" + std::to_string(line_no) + ": unknown endpoint");
        }
        g.adjacency_[e.src].push_back(e);
    });

    g.finalize();
    return g;
}

} // namespace catrag
