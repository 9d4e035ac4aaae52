#pragma once

#include "fmea/condition.hpp"
#include "fmea/sign.hpp"
#include "fmea/state.hpp"
#include "fmea/value.hpp"

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fmea {

enum class FailureMode { leftCritical, rightCritical };
enum class ActionKind { detective, preventive };

std::string_view to_string(FailureMode m);
std::string_view to_string(ActionKind k);

struct Component {
    std::string id;
    std::string label;
    bool operator==(const Component&) const = default;
};

struct Function {
    std::string id;
    std::string label;
    std::string component;
    bool operator==(const Function&) const = default;
};

struct Variable {
    std::string id;
    std::string label;
    std::string function;
    ValueSet range;
    bool operator==(const Variable&) const = default;
};

struct Failure {
    std::string id;
    std::string label;
    std::string function;
    std::string variable;
    FailureMode mode = FailureMode::rightCritical;
    int sev = 1;
    int occ = 1;
    int det = 1;
    double failureProb = 1.0;
    bool operator==(const Failure&) const = default;
};

/// Postcondition: poss(variable) := {value}.
struct Assignment {
    std::string variable;
    Value value = Value::normal;
    bool operator==(const Assignment&) const = default;
};

struct Action {
    std::string id;
    std::string label;
    ActionKind kind = ActionKind::detective;
    std::string cause;   // failure cause e'
    std::string effect;  // failure effect e, (cause, effect) is in the failure hierarchy
    Condition pre;
    std::vector<Assignment> post;
    std::optional<double> probability;  // overrides the detectability/occurrence formula
    bool operator==(const Action&) const = default;
};

/// `from` is a sub-component / sub-function / cause of `to`.
struct HierarchyEdge {
    std::string from;
    std::string to;
    bool operator==(const HierarchyEdge&) const = default;
};

struct QualitativeEdge {
    std::string from;
    std::string to;
    Sign label = Sign::plus;
    bool operator==(const QualitativeEdge&) const = default;
};

/// Extended FMEA model. Plain data; may be invalid until validate_model says otherwise.
/// Variable order (and hence State layout) is the order of `variables`.
struct FmeaModel {
    std::string name;
    std::vector<Component> components;
    std::vector<Function> functions;
    std::vector<Variable> variables;
    std::vector<Failure> failures;
    std::vector<Action> actions;
    std::vector<HierarchyEdge> componentHierarchy;
    std::vector<HierarchyEdge> functionHierarchy;
    std::vector<HierarchyEdge> failureHierarchy;
    std::vector<QualitativeEdge> qualitativeEdges;

    std::optional<std::size_t> variable_index(std::string_view id) const;
    std::optional<std::size_t> failure_index(std::string_view id) const;
    std::optional<std::size_t> action_index(std::string_view id) const;
    std::optional<std::size_t> function_index(std::string_view id) const;

    bool operator==(const FmeaModel&) const = default;
};

struct Violation {
    std::string rule;
    std::vector<std::string> entities;
    std::string message;
    bool operator==(const Violation&) const = default;
};

using ValidationReport = std::vector<Violation>;

/// Checks every structural constraint; an empty report means the model is valid.
ValidationReport validate_model(const FmeaModel& model);

enum class RiskColor { green = 0, orange = 1, red = 2 };

std::string_view to_string(RiskColor c);
std::optional<RiskColor> parse_risk_color(std::string_view text);

/// Total map (sev, occ, det) in {1..10}^3 -> RiskColor.
class RiskMatrix {
public:
    /// green iff sev*occ*det < orangeFrom, orange iff < redFrom, red otherwise.
    static RiskMatrix product_thresholds(int orangeFrom = 125, int redFrom = 500);
    static RiskMatrix constant(RiskColor color);

    RiskColor operator()(int sev, int occ, int det) const;
    void set(int sev, int occ, int det, RiskColor color);

    bool operator==(const RiskMatrix&) const = default;

private:
    static std::size_t slot(int sev, int occ, int det);
    std::array<RiskColor, 1000> table_{};
};

/// Max over all failures of phi(sev, occ, det); green for a model without failures.
RiskColor class_level_risk(const FmeaModel& model, const RiskMatrix& phi);

/// Certainty semantics: eq(v,x) iff poss(v) = {x}; uncertain(v) iff |poss(v)| > 1.
/// Throws StructuralError for unknown variables.
bool eval_condition(const Condition& cond, const FmeaModel& model, const State& s);

} // namespace fmea
