#include "fmea/model.hpp"

#include "fmea/errors.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

namespace fmea {

std::string_view to_string(FailureMode m) { return m == FailureMode::leftCritical ? "leftCritical" : "rightCritical"; }

std::string_view to_string(ActionKind k) { return k == ActionKind::detective ? "detective" : "preventive"; }

namespace {

template <typename T>
std::optional<std::size_t> find_by_id(const std::vector<T>& items, std::string_view id) {
    for (std::size_t i = 0; i < items.size(); ++i)
        if (items[i].id == id) return i;
    return std::nullopt;
}

} // namespace

std::optional<std::size_t> FmeaModel::variable_index(std::string_view id) const { return find_by_id(variables, id); }
std::optional<std::size_t> FmeaModel::failure_index(std::string_view id) const { return find_by_id(failures, id); }
std::optional<std::size_t> FmeaModel::action_index(std::string_view id) const { return find_by_id(actions, id); }
std::optional<std::size_t> FmeaModel::function_index(std::string_view id) const { return find_by_id(functions, id); }

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

namespace {

class ReportBuilder {
public:
    void add(std::string rule, std::vector<std::string> entities, std::string message) {
        report_.push_back({std::move(rule), std::move(entities), std::move(message)});
    }
    ValidationReport take() { return std::move(report_); }

private:
    ValidationReport report_;
};

template <typename T>
std::set<std::string> check_unique_ids(const std::vector<T>& items, std::string_view kind, ReportBuilder& report) {
    std::set<std::string> seen;
    for (const auto& item : items) {
        if (item.id.empty()) report.add("empty-id", {}, std::string(kind) + " with an empty id");
        else if (!seen.insert(item.id).second)
            report.add("duplicate-id", {item.id}, std::string(kind) + " id '" + item.id + "' is not unique");
    }
    return seen;
}

struct DisjointSets {
    explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[a] = b;
        return true;
    }
    std::vector<std::size_t> parent;
};

/// Undirected acyclic and connected over `nodes`; optionally at most one outgoing edge per node.
void check_hierarchy(const std::vector<std::string>& nodes, const std::vector<HierarchyEdge>& edges,
                     std::string_view name, bool singleParent, ReportBuilder& report) {
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < nodes.size(); ++i) index.emplace(nodes[i], i);

    DisjointSets sets(nodes.size());
    std::map<std::string, std::vector<std::string>> outgoing;
    bool cycleReported = false;
    for (const auto& e : edges) {
        auto from = index.find(e.from);
        auto to = index.find(e.to);
        if (from == index.end() || to == index.end()) {
            report.add("hierarchy-unknown-node", {e.from, e.to},
                       std::string(name) + " hierarchy edge " + e.from + " -> " + e.to + " references an unknown id");
            continue;
        }
        outgoing[e.from].push_back(e.to);
        if (!sets.unite(from->second, to->second) && !cycleReported) {
            report.add("hierarchy-not-polytree", {e.from, e.to},
                       std::string(name) + " hierarchy contains an undirected cycle through " + e.from + " -> " + e.to);
            cycleReported = true;
        }
    }

    if (singleParent) {
        for (const auto& [node, targets] : outgoing) {
            if (targets.size() > 1) {
                std::vector<std::string> entities{node};
                entities.insert(entities.end(), targets.begin(), targets.end());
                report.add("hierarchy-multiple-parents", entities,
                           std::string(name) + " '" + node + "' is attached below more than one parent");
            }
        }
    }

    std::set<std::size_t> roots;
    for (std::size_t i = 0; i < nodes.size(); ++i) roots.insert(sets.find(i));
    if (roots.size() > 1) {
        std::vector<std::string> representatives;
        for (std::size_t i = 0; i < nodes.size(); ++i)
            if (sets.find(i) == i) representatives.push_back(nodes[i]);
        report.add("hierarchy-disconnected", representatives,
                   std::string(name) + " hierarchy splits into " + std::to_string(roots.size()) +
                       " disconnected parts");
    }
}

template <typename T>
std::vector<std::string> ids_of(const std::vector<T>& items) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& item : items)
        if (seen.insert(item.id).second) out.push_back(item.id);
    return out;
}

void check_condition(const Condition& cond, const FmeaModel& model, const std::string& action, ReportBuilder& report) {
    if (cond.op == Condition::Op::eq || cond.op == Condition::Op::uncertain) {
        auto v = model.variable_index(cond.variable);
        if (!v) {
            report.add("condition-unknown-variable", {action, cond.variable},
                       "precondition of '" + action + "' references unknown variable '" + cond.variable + "'");
        } else if (cond.op == Condition::Op::eq && !model.variables[*v].range.contains(cond.value)) {
            report.add("condition-value-out-of-range", {action, cond.variable},
                       "precondition of '" + action + "' compares '" + cond.variable + "' with " +
                           std::string(to_string(cond.value)) + ", which is outside its range");
        }
    }
    if (cond.op == Condition::Op::negate && cond.children.size() != 1)
        report.add("condition-malformed", {action}, "not() of '" + action + "' needs exactly one operand");
    for (const auto& child : cond.children) check_condition(child, model, action, report);
}

} // namespace

ValidationReport validate_model(const FmeaModel& model) {
    ReportBuilder report;

    auto componentIds = check_unique_ids(model.components, "component", report);
    auto functionIds = check_unique_ids(model.functions, "function", report);
    check_unique_ids(model.variables, "variable", report);
    auto failureIds = check_unique_ids(model.failures, "failure", report);
    check_unique_ids(model.actions, "action", report);

    for (const auto& f : model.functions) {
        if (!componentIds.contains(f.component))
            report.add("function-unknown-component", {f.id, f.component},
                       "function '" + f.id + "' belongs to unknown component '" + f.component + "'");
    }

    std::map<std::string, int> variablesPerFunction;
    for (const auto& v : model.variables) {
        if (!functionIds.contains(v.function))
            report.add("variable-unknown-function", {v.id, v.function},
                       "variable '" + v.id + "' belongs to unknown function '" + v.function + "'");
        ++variablesPerFunction[v.function];
        if (v.range.empty()) report.add("range-empty", {v.id}, "variable '" + v.id + "' has an empty range");
        else if (!v.range.contains(Value::normal))
            report.add("range-missing-normal", {v.id}, "range of variable '" + v.id + "' does not contain normal");
    }
    for (const auto& f : model.functions) {
        if (variablesPerFunction[f.id] == 0)
            report.add("function-without-variable", {f.id}, "function '" + f.id + "' has no variable");
    }

    for (const auto& e : model.failures) {
        if (!functionIds.contains(e.function))
            report.add("failure-unknown-function", {e.id, e.function},
                       "failure '" + e.id + "' belongs to unknown function '" + e.function + "'");
        auto v = model.variable_index(e.variable);
        if (!v) {
            report.add("failure-unknown-variable", {e.id, e.variable},
                       "failure '" + e.id + "' refers to unknown variable '" + e.variable + "'");
        } else {
            const Variable& var = model.variables[*v];
            if (var.function != e.function)
                report.add("failure-variable-owner", {e.id, e.variable},
                           "variable '" + e.variable + "' of failure '" + e.id + "' belongs to function '" +
                               var.function + "', not '" + e.function + "'");
            Value critical = e.mode == FailureMode::leftCritical ? Value::tooLow : Value::tooHigh;
            if (!var.range.contains(critical))
                report.add("failure-mode-range", {e.id, e.variable},
                           "failure '" + e.id + "' is " + std::string(to_string(e.mode)) + " but " +
                               std::string(to_string(critical)) + " is not in the range of '" + e.variable + "'");
        }
        for (auto [name, value] : {std::pair{"sev", e.sev}, std::pair{"occ", e.occ}, std::pair{"det", e.det}}) {
            if (value < 1 || value > 10)
                report.add("risk-parameter-range", {e.id},
                           std::string(name) + " of failure '" + e.id + "' is " + std::to_string(value) +
                               ", expected 1..10");
        }
        if (!(e.failureProb >= 0.0 && e.failureProb <= 1.0))
            report.add("failure-probability-range", {e.id}, "failure probability of '" + e.id + "' is not in [0,1]");
    }

    check_hierarchy(ids_of(model.components), model.componentHierarchy, "component", true, report);
    check_hierarchy(ids_of(model.functions), model.functionHierarchy, "function", true, report);
    check_hierarchy(ids_of(model.failures), model.failureHierarchy, "failure", false, report);

    std::set<std::pair<std::string, std::string>> failurePairs;
    for (const auto& e : model.failureHierarchy) failurePairs.emplace(e.from, e.to);

    for (const auto& a : model.actions) {
        if (!failureIds.contains(a.cause) || !failureIds.contains(a.effect)) {
            report.add("action-unknown-failure", {a.id, a.cause, a.effect},
                       "action '" + a.id + "' is attached to an unknown failure");
        } else if (!failurePairs.contains({a.cause, a.effect})) {
            report.add("action-target-not-in-hierarchy", {a.id, a.cause, a.effect},
                       "action '" + a.id + "' targets (" + a.cause + ", " + a.effect +
                           "), which is not a failure hierarchy edge");
        }
        check_condition(a.pre, model, a.id, report);
        if (a.kind == ActionKind::detective && !a.post.empty())
            report.add("detective-postcondition", {a.id},
                       "detective action '" + a.id + "' has postconditions; detections only observe");
        for (const auto& asg : a.post) {
            auto v = model.variable_index(asg.variable);
            if (!v)
                report.add("postcondition-unknown-variable", {a.id, asg.variable},
                           "postcondition of '" + a.id + "' assigns unknown variable '" + asg.variable + "'");
            else if (!model.variables[*v].range.contains(asg.value))
                report.add("postcondition-value-out-of-range", {a.id, asg.variable},
                           "postcondition of '" + a.id + "' assigns " + std::string(to_string(asg.value)) +
                               " outside the range of '" + asg.variable + "'");
        }
        if (a.probability && !(*a.probability >= 0.0 && *a.probability <= 1.0))
            report.add("action-probability-range", {a.id}, "success probability of '" + a.id + "' is not in [0,1]");
    }

    std::set<std::pair<std::string, std::string>> edgePairs;
    for (const auto& e : model.qualitativeEdges) {
        if (!model.variable_index(e.from) || !model.variable_index(e.to))
            report.add("qualitative-edge-unknown-variable", {e.from, e.to},
                       "influence edge " + e.from + " -> " + e.to + " references an unknown variable");
        if (!edgePairs.emplace(e.from, e.to).second)
            report.add("qualitative-edge-duplicate", {e.from, e.to},
                       "more than one influence edge " + e.from + " -> " + e.to);
        if (e.label == Sign::zero)
            report.add("qualitative-edge-label", {e.from, e.to},
                       "influence edge " + e.from + " -> " + e.to + " must be labelled '+', '-' or '?'");
    }

    return report.take();
}

// ---------------------------------------------------------------------------
// Risk
// ---------------------------------------------------------------------------

std::string_view to_string(RiskColor c) {
    switch (c) {
    case RiskColor::green: return "green";
    case RiskColor::orange: return "orange";
    case RiskColor::red: return "red";
    }
    return "?";
}

std::optional<RiskColor> parse_risk_color(std::string_view text) {
    for (RiskColor c : {RiskColor::green, RiskColor::orange, RiskColor::red})
        if (to_string(c) == text) return c;
    return std::nullopt;
}

std::size_t RiskMatrix::slot(int sev, int occ, int det) {
    if (sev < 1 || sev > 10 || occ < 1 || occ > 10 || det < 1 || det > 10)
        throw StructuralError("risk parameters must lie in 1..10");
    return static_cast<std::size_t>((sev - 1) * 100 + (occ - 1) * 10 + (det - 1));
}

RiskMatrix RiskMatrix::product_thresholds(int orangeFrom, int redFrom) {
    if (orangeFrom > redFrom) throw StructuralError("orange threshold must not exceed red threshold");
    RiskMatrix m;
    for (int s = 1; s <= 10; ++s)
        for (int o = 1; o <= 10; ++o)
            for (int d = 1; d <= 10; ++d) {
                int product = s * o * d;
                m.table_[slot(s, o, d)] = product < orangeFrom ? RiskColor::green
                                          : product < redFrom  ? RiskColor::orange
                                                               : RiskColor::red;
            }
    return m;
}

RiskMatrix RiskMatrix::constant(RiskColor color) {
    RiskMatrix m;
    m.table_.fill(color);
    return m;
}

RiskColor RiskMatrix::operator()(int sev, int occ, int det) const { return table_[slot(sev, occ, det)]; }

void RiskMatrix::set(int sev, int occ, int det, RiskColor color) { table_[slot(sev, occ, det)] = color; }

RiskColor class_level_risk(const FmeaModel& model, const RiskMatrix& phi) {
    RiskColor worst = RiskColor::green;
    for (const auto& e : model.failures) worst = std::max(worst, phi(e.sev, e.occ, e.det));
    return worst;
}

// ---------------------------------------------------------------------------
// Conditions
// ---------------------------------------------------------------------------

bool eval_condition(const Condition& cond, const FmeaModel& model, const State& s) {
    auto lookup = [&](const std::string& id) -> ValueSet {
        auto v = model.variable_index(id);
        if (!v || *v >= s.size()) throw StructuralError("condition references unknown variable '" + id + "'");
        return s[*v];
    };

    switch (cond.op) {
    case Condition::Op::always: return true;
    case Condition::Op::eq: return lookup(cond.variable) == ValueSet{cond.value};
    case Condition::Op::uncertain: return lookup(cond.variable).size() > 1;
    case Condition::Op::negate: return !eval_condition(cond.children.at(0), model, s);
    case Condition::Op::all:
        return std::all_of(cond.children.begin(), cond.children.end(),
                           [&](const Condition& c) { return eval_condition(c, model, s); });
    case Condition::Op::any:
        return std::any_of(cond.children.begin(), cond.children.end(),
                           [&](const Condition& c) { return eval_condition(c, model, s); });
    }
    return false;
}

} // namespace fmea
