#pragma once

#include "fmea/sign.hpp"
#include "fmea/state.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fmea {

struct FmeaModel;

/// Directed graph of monotone influences between variables, labelled '+', '-' or '?'.
///
/// Vertex i is the model's i-th variable, so vertex indices line up with State
/// components. Child lists are sorted by variable id so traversal order is stable.
class QualitativeGraph {
public:
    struct Link {
        std::size_t node;
        Sign label;
        bool operator==(const Link&) const = default;
    };

    struct Edge {
        std::size_t from;
        std::size_t to;
        Sign label;
    };

    QualitativeGraph() = default;

    /// Throws StructuralError on duplicate ordered pairs or out-of-range endpoints.
    QualitativeGraph(std::vector<std::string> vertices, const std::vector<Edge>& edges);

    static QualitativeGraph from_model(const FmeaModel& model);

    std::size_t size() const { return ids_.size(); }
    const std::string& id(std::size_t v) const { return ids_[v]; }
    std::optional<std::size_t> index_of(std::string_view id) const;

    std::span<const Link> parents(std::size_t v) const { return parents_[v]; }
    std::span<const Link> children(std::size_t v) const { return children_[v]; }
    std::optional<Sign> label(std::size_t from, std::size_t to) const;
    std::size_t edge_count() const;

    /// Copy with every edge into `v` removed.
    QualitativeGraph without_incoming(std::size_t v) const;

private:
    std::vector<std::string> ids_;
    std::vector<std::vector<Link>> parents_;
    std::vector<std::vector<Link>> children_;
};

/// Sign per vertex, indexed like the graph.
using SignMap = std::vector<Sign>;

/// Sign propagation from `start` with initial message `sigma`.
///
/// Every vertex starts at sign_of(s[v]). A visited vertex is reset to '0' and
/// folded (sign addition) with the incoming message and the messages of its
/// other parents; it then forwards its new sign to unvisited children whose
/// sign differs. Each vertex is visited at most once, so this terminates on
/// cyclic graphs too. Callers intervening on `start` must cut its incoming
/// edges first.
SignMap propagate(const QualitativeGraph& g, const State& s, std::size_t start, Sign sigma);

/// Same, addressing the start vertex by id. Throws StructuralError if unknown.
SignMap propagate(const QualitativeGraph& g, const State& s, std::string_view start, Sign sigma);

} // namespace fmea
