#pragma once

#include "fmea/compiled_model.hpp"
#include "fmea/state.hpp"
#include "fmea/value.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fmea {

enum class Combination { min, max };

std::string_view to_string(Combination c);
std::optional<Combination> parse_combination(std::string_view text);

struct RewardParams {
    static constexpr double rpnMax = 1000.0;

    /// Finite stand-in for the infinite reward of entering a state without open failures.
    double goalReward = 10000.0;
    /// How the RPNs of several causes of one effect combine: min is AND, max is OR.
    Combination combination = Combination::min;

    /// Throws StructuralError unless goalReward > rpnMax.
    void check() const;
};

/// Partial map variable id -> possibility set.
using Evidence = std::map<std::string, ValueSet>;

/// Evidence where given, full range elsewhere. Throws StructuralError for unknown
/// variables, empty sets, or values outside the range.
State initial_state(const FmeaModel& model, const Evidence& evidence = {});

/// Every well-formed state of the model (product of nonempty subsets of each range).
std::vector<State> enumerate_full_state_space(const FmeaModel& model);

/// Breadth-first closure of {s0} under all applicable actions (successful
/// outcomes plus failure branch). Goal states are not expanded. s0 is index 0.
/// Throws CapacityError if more than `stateCap` states are discovered.
std::vector<State> enumerate_states(const CompiledModel& cm, const State& s0, std::size_t stateCap = 1'000'000);

/// Detective: (9 - (det(cause) - 1)) / 9; preventive: same with occ(cause).
/// An explicit probability on the action takes precedence.
double action_success_prob(const FmeaModel& model, const Action& action);

struct WeightedState {
    State state;
    double probability;
};

struct OutcomeBranch {
    Outcome outcome;
    State state;
    double probability;
};

/// Unmerged, outcome-labelled distribution: p/k per successful outcome and 1 - p
/// for the failure branch (s with postconditions). Empty if not applicable.
std::vector<OutcomeBranch> outcome_distribution(const CompiledModel& cm, const State& s, std::size_t action);

/// Same distribution with coinciding states merged, in first-appearance order.
std::vector<WeightedState> transition(const CompiledModel& cm, const State& s, std::size_t action);

/// Failures whose critical value is still possible in s (E_s), as failure indices.
std::vector<std::size_t> failures_not_ruled_out(const CompiledModel& cm, const State& s);

/// Risk priority number of failure `e` in `next`; 0 when e has no causes.
double rpn(const CompiledModel& cm, std::size_t e, const State& next, Combination combination = Combination::min);

/// R(s, a, next). Independent of s and a: 0 when next is the initial state,
/// goalReward when no failure remains possible, else the mean of
/// failureProb * (1000 - RPN) over the failures that cannot be ruled out.
double reward(const CompiledModel& cm, const State& initial, const State& next, const RewardParams& params);

/// Explicit MDP over the reachable states.
struct Mdp {
    struct Successor {
        std::size_t state;
        double probability;
        double reward;
    };
    /// Empty optional: action not applicable in that state.
    using Row = std::optional<std::vector<Successor>>;

    std::vector<std::string> variables;
    std::vector<std::string> actions;
    std::vector<State> states;
    std::size_t initial = 0;
    double gamma = 0.9;
    std::vector<std::vector<Row>> transitions;  // [state][action]
    std::vector<bool> goal;

    std::size_t state_count() const { return states.size(); }
    std::size_t action_count() const { return actions.size(); }
    bool applicable(std::size_t s, std::size_t a) const { return transitions[s][a].has_value(); }
    std::optional<std::size_t> find_state(const State& s) const;
    std::optional<std::size_t> find_action(std::string_view id) const;
};

struct BuildOptions {
    std::size_t stateCap = 1'000'000;
};

/// Compiles the model into an MDP rooted at s0. Goal states (no open failures)
/// are absorbing: every action self-loops with probability 1 and reward 0.
Mdp build_mdp(const CompiledModel& cm, const State& s0, double gamma, const RewardParams& params = {},
              const BuildOptions& options = {});

} // namespace fmea
