#pragma once
#include <stdexcept>
#include <string>

namespace catrag {

// Error taxonomy. The CLI maps categories to exit codes:
//   input errors -> 2, provider errors -> 3, internal invariant violations -> 4.
enum class Errc {
    validation,
    duplicate_doc_id,
    unknown_entity,
    unknown_node,
    dangling_triple,
    parse,
    empty_graph,
    empty_input,
    no_seeds,
    infeasible_spec,
    graph_finalized,
    provider_unavailable,
    internal,
};

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Errc code() const { return code_; }

    static Error validation(const std::string& w) { return {Errc::validation, w}; }
    static Error duplicate_doc_id(const std::string& w) { return {Errc::duplicate_doc_id, w}; }
    static Error unknown_entity(const std::string& w) { return {Errc::unknown_entity, w}; }
    static Error unknown_node(const std::string& w) { return {Errc::unknown_node, w}; }
    static Error dangling_triple(const std::string& w) { return {Errc::dangling_triple, w}; }
    static Error parse(const std::string& w) { return {Errc::parse, w}; }
    static Error empty_graph(const std::string& w) { return {Errc::empty_graph, w}; }
    static Error empty_input(const std::string& w) { return {Errc::empty_input, w}; }
    static Error no_seeds(const std::string& w) { return {Errc::no_seeds, w}; }
    static Error infeasible_spec(const std::string& w) { return {Errc::infeasible_spec, w}; }
    static Error graph_finalized(const std::string& w) { return {Errc::graph_finalized, w}; }
    static Error provider_unavailable(const std::string& w) { return {Errc::provider_unavailable, w}; }
    static Error internal(const std::string& w) { return {Errc::internal, w}; }

private:
    Errc code_;
};

// Exit-code contract used by the CLI.
int exit_code_for(Errc code);

} // namespace catrag
