#include "fmea/errors.hpp"
#include "fmea/model.hpp"
#include "fmea/qualitative_graph.hpp"
#include "fmea/successors.hpp"

#include <algorithm>

namespace fmea {

QualitativeGraph::QualitativeGraph(std::vector<std::string> vertices, const std::vector<Edge>& edges)
    : ids_(std::move(vertices)), parents_(ids_.size()), children_(ids_.size()) {
    for (const auto& e : edges) {
        if (e.from >= ids_.size() || e.to >= ids_.size()) throw StructuralError("influence edge endpoint out of range");
        auto& out = children_[e.from];
        if (std::any_of(out.begin(), out.end(), [&](const Link& l) { return l.node == e.to; }))
            throw StructuralError("duplicate influence edge " + ids_[e.from] + " -> " + ids_[e.to]);
        out.push_back({e.to, e.label});
        parents_[e.to].push_back({e.from, e.label});
    }
    auto byNode = [&](const Link& a, const Link& b) { return ids_[a.node] < ids_[b.node]; };
    for (auto& list : children_) std::sort(list.begin(), list.end(), byNode);
    for (auto& list : parents_) std::sort(list.begin(), list.end(), byNode);
}

QualitativeGraph QualitativeGraph::from_model(const FmeaModel& model) {
    std::vector<std::string> ids;
    for (const auto& v : model.variables) ids.push_back(v.id);
    std::vector<Edge> edges;
    for (const auto& e : model.qualitativeEdges) {
        auto from = model.variable_index(e.from);
        auto to = model.variable_index(e.to);
        if (!from || !to) throw StructuralError("influence edge " + e.from + " -> " + e.to + " has an unknown endpoint");
        edges.push_back({*from, *to, e.label});
    }
    return QualitativeGraph(std::move(ids), edges);
}

std::optional<std::size_t> QualitativeGraph::index_of(std::string_view id) const {
    for (std::size_t i = 0; i < ids_.size(); ++i)
        if (ids_[i] == id) return i;
    return std::nullopt;
}

std::optional<Sign> QualitativeGraph::label(std::size_t from, std::size_t to) const {
    for (const auto& l : children_.at(from))
        if (l.node == to) return l.label;
    return std::nullopt;
}

std::size_t QualitativeGraph::edge_count() const {
    std::size_t n = 0;
    for (const auto& list : children_) n += list.size();
    return n;
}

QualitativeGraph QualitativeGraph::without_incoming(std::size_t v) const {
    QualitativeGraph g = *this;
    for (const auto& p : g.parents_.at(v)) {
        auto& out = g.children_[p.node];
        out.erase(std::remove_if(out.begin(), out.end(), [&](const Link& l) { return l.node == v; }), out.end());
    }
    g.parents_[v].clear();
    return g;
}

namespace {

struct Propagation {
    const QualitativeGraph& g;
    SignMap signs;
    std::vector<bool> visited;

    void visit(std::size_t from, std::size_t v, Sign message) {
        Sign folded = Sign::zero;
        signs[v] = Sign::zero;
        folded = sign_add(folded, message);
        for (const auto& p : g.parents(v))
            if (p.node != from) folded = sign_add(folded, sign_mul(signs[p.node], p.label));
        signs[v] = folded;
        visited[v] = true;
        for (const auto& c : g.children(v)) {
            Sign m = sign_mul(signs[v], c.label);
            if (!visited[c.node] && signs[c.node] != m) visit(v, c.node, m);
        }
    }
};

} // namespace

SignMap propagate(const QualitativeGraph& g, const State& s, std::size_t start, Sign sigma) {
    if (start >= g.size() || s.size() != g.size()) throw StructuralError("propagation start or state size mismatch");
    Propagation p{g, SignMap(g.size()), std::vector<bool>(g.size(), false)};
    for (std::size_t v = 0; v < g.size(); ++v) p.signs[v] = sign_of(s[v]);
    p.visit(start, start, sigma);
    return p.signs;
}

SignMap propagate(const QualitativeGraph& g, const State& s, std::string_view start, Sign sigma) {
    auto v = g.index_of(start);
    if (!v) throw StructuralError("unknown variable '" + std::string(start) + "'");
    return propagate(g, s, *v, sigma);
}

// ---------------------------------------------------------------------------
// Successor states
// ---------------------------------------------------------------------------

bool is_applicable(const CompiledModel& cm, std::size_t action, const State& s) {
    const Action& a = cm.action(action);
    if (a.kind == ActionKind::detective && s[cm.action_info(action).variable].size() <= 1) return false;
    return eval_condition(a.pre, cm.model(), s);
}

State apply_postconditions(const CompiledModel& cm, std::size_t action, const State& s) {
    State out = s;
    for (const auto& asg : cm.action(action).post) out[*cm.model().variable_index(asg.variable)] = ValueSet{asg.value};
    return out;
}

namespace {

std::optional<Value> value_of(Sign sign) {
    switch (sign) {
    case Sign::minus: return Value::tooLow;
    case Sign::plus: return Value::tooHigh;
    case Sign::zero: return Value::normal;
    case Sign::unknown: break;
    }
    return std::nullopt;
}

State intervene(const CompiledModel& cm, std::size_t action, const State& s, Value x) {
    const auto& info = cm.action_info(action);
    bool detective = cm.action(action).kind == ActionKind::detective;
    SignMap signs = propagate(cm.intervention_graph(info.variable), s, info.variable, sign_of(x));
    State next = s;
    for (std::size_t w = 0; w < signs.size(); ++w) {
        auto value = value_of(signs[w]);
        if (!value || !cm.range(w).contains(*value)) continue;
        if (detective && !s[w].contains(*value)) continue;
        next[w] = ValueSet{*value};
    }
    return apply_postconditions(cm, action, next);
}

} // namespace

std::vector<LabeledSuccessor> action_outcomes(const CompiledModel& cm, std::size_t action, const State& s) {
    std::vector<LabeledSuccessor> out;
    if (cm.action(action).kind == ActionKind::detective) {
        for (Value x : s[cm.action_info(action).variable].values())
            out.push_back({outcome_of(x), intervene(cm, action, s, x)});
    } else {
        out.push_back({Outcome::success, intervene(cm, action, s, Value::normal)});
    }
    return out;
}

SuccessorSet successor_states(const CompiledModel& cm, std::size_t action, const State& s) {
    SuccessorSet result;
    if (!is_applicable(cm, action, s)) return result;
    result.applicable = true;
    for (auto& labeled : action_outcomes(cm, action, s))
        if (std::find(result.states.begin(), result.states.end(), labeled.state) == result.states.end())
            result.states.push_back(std::move(labeled.state));
    return result;
}

} // namespace fmea
