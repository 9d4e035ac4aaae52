#include "fmea/mdp_builder.hpp"

#include "fmea/errors.hpp"
#include "fmea/successors.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>

namespace fmea {

std::string_view to_string(Combination c) { return c == Combination::min ? "min" : "max"; }

std::optional<Combination> parse_combination(std::string_view text) {
    if (text == "min") return Combination::min;
    if (text == "max") return Combination::max;
    return std::nullopt;
}

void RewardParams::check() const {
    if (!(goalReward > rpnMax)) throw StructuralError("goal reward must exceed " + std::to_string(rpnMax));
}

State initial_state(const FmeaModel& model, const Evidence& evidence) {
    State s;
    for (const auto& v : model.variables) s.poss.push_back(v.range);
    for (const auto& [id, values] : evidence) {
        auto v = model.variable_index(id);
        if (!v) throw StructuralError("evidence names unknown variable '" + id + "'");
        if (values.empty()) throw StructuralError("evidence for '" + id + "' is empty");
        if (!values.subset_of(model.variables[*v].range))
            throw StructuralError("evidence " + to_string(values) + " for '" + id + "' lies outside its range");
        s[*v] = values;
    }
    return s;
}

std::vector<State> enumerate_full_state_space(const FmeaModel& model) {
    std::vector<State> out{State{}};
    for (const auto& v : model.variables) {
        std::vector<ValueSet> subsets;
        for (std::uint8_t bits = 1; bits < 8; ++bits) {
            ValueSet candidate = ValueSet::from_bits(bits);
            if (candidate.subset_of(v.range)) subsets.push_back(candidate);
        }
        std::vector<State> next;
        next.reserve(out.size() * subsets.size());
        for (const auto& prefix : out)
            for (ValueSet p : subsets) {
                State s = prefix;
                s.poss.push_back(p);
                next.push_back(std::move(s));
            }
        out = std::move(next);
    }
    return out;
}

double action_success_prob(const FmeaModel& model, const Action& action) {
    if (action.probability) return *action.probability;
    auto cause = model.failure_index(action.cause);
    if (!cause) throw StructuralError("action '" + action.id + "' has unknown cause '" + action.cause + "'");
    const Failure& e = model.failures[*cause];
    int factor = action.kind == ActionKind::detective ? e.det : e.occ;
    return (9.0 - (factor - 1)) / 9.0;
}

std::vector<OutcomeBranch> outcome_distribution(const CompiledModel& cm, const State& s, std::size_t action) {
    std::vector<OutcomeBranch> out;
    if (!is_applicable(cm, action, s)) return out;
    double p = cm.action_info(action).successProb;
    auto successes = action_outcomes(cm, action, s);
    double share = p / static_cast<double>(successes.size());
    for (auto& labeled : successes) out.push_back({labeled.outcome, std::move(labeled.state), share});
    out.push_back({Outcome::failure, apply_postconditions(cm, action, s), 1.0 - p});
    return out;
}

std::vector<WeightedState> transition(const CompiledModel& cm, const State& s, std::size_t action) {
    std::vector<WeightedState> out;
    for (auto& branch : outcome_distribution(cm, s, action)) {
        auto it = std::find_if(out.begin(), out.end(), [&](const WeightedState& w) { return w.state == branch.state; });
        if (it != out.end()) it->probability += branch.probability;
        else out.push_back({std::move(branch.state), branch.probability});
    }
    return out;
}

std::vector<std::size_t> failures_not_ruled_out(const CompiledModel& cm, const State& s) {
    std::vector<std::size_t> out;
    for (std::size_t e = 0; e < cm.failure_count(); ++e) {
        Value critical = cm.failure(e).mode == FailureMode::leftCritical ? Value::tooLow : Value::tooHigh;
        if (s[cm.failure_variable(e)].contains(critical)) out.push_back(e);
    }
    return out;
}

double rpn(const CompiledModel& cm, std::size_t e, const State& next, Combination combination) {
    const auto& links = cm.causes(e);
    if (links.empty()) return 0.0;
    double result = combination == Combination::min ? RewardParams::rpnMax : 0.0;
    for (const auto& link : links) {
        const Failure& cause = cm.failure(link.cause);
        bool detectable = std::any_of(link.detective.begin(), link.detective.end(),
                                      [&](std::size_t a) { return is_applicable(cm, a, next); });
        bool prevented = !link.preventive.empty() && next[cm.failure_variable(link.cause)] == ValueSet{Value::normal};
        double d = detectable ? cause.det : 10;
        double o = prevented ? cause.occ : 10;
        double value = cm.failure(e).sev * o * d;
        result = combination == Combination::min ? std::min(result, value) : std::max(result, value);
    }
    return result;
}

double reward(const CompiledModel& cm, const State& initial, const State& next, const RewardParams& params) {
    if (next == initial) return 0.0;
    auto open = failures_not_ruled_out(cm, next);
    if (open.empty()) return params.goalReward;
    double sum = 0.0;
    for (std::size_t e : open)
        sum += cm.failure(e).failureProb * (RewardParams::rpnMax - rpn(cm, e, next, params.combination));
    return sum / static_cast<double>(open.size());
}

std::vector<State> enumerate_states(const CompiledModel& cm, const State& s0, std::size_t stateCap) {
    std::vector<State> states{s0};
    std::unordered_map<State, std::size_t, StateHash> index{{s0, 0}};
    if (stateCap < 1) throw CapacityError(stateCap);
    for (std::size_t i = 0; i < states.size(); ++i) {
        State s = states[i];
        if (failures_not_ruled_out(cm, s).empty()) continue;
        for (std::size_t a = 0; a < cm.action_count(); ++a) {
            for (auto& branch : outcome_distribution(cm, s, a)) {
                if (index.contains(branch.state)) continue;
                if (states.size() >= stateCap) throw CapacityError(stateCap);
                index.emplace(branch.state, states.size());
                states.push_back(std::move(branch.state));
            }
        }
    }
    return states;
}

std::optional<std::size_t> Mdp::find_state(const State& s) const {
    auto it = std::find(states.begin(), states.end(), s);
    if (it == states.end()) return std::nullopt;
    return static_cast<std::size_t>(it - states.begin());
}

std::optional<std::size_t> Mdp::find_action(std::string_view id) const {
    auto it = std::find(actions.begin(), actions.end(), id);
    if (it == actions.end()) return std::nullopt;
    return static_cast<std::size_t>(it - actions.begin());
}

Mdp build_mdp(const CompiledModel& cm, const State& s0, double gamma, const RewardParams& params,
              const BuildOptions& options) {
    params.check();
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw StructuralError("discount factor must lie in [0,1]");
    if (s0.size() != cm.variable_count() || !s0.well_formed())
        throw StructuralError("initial state " + to_string(s0) + " does not fit the model");
    for (std::size_t v = 0; v < s0.size(); ++v)
        if (!s0[v].subset_of(cm.range(v))) throw StructuralError("initial state exceeds the range of a variable");

    Mdp mdp;
    for (const auto& v : cm.model().variables) mdp.variables.push_back(v.id);
    for (const auto& a : cm.model().actions) mdp.actions.push_back(a.id);
    mdp.gamma = gamma;
    mdp.initial = 0;
    mdp.states = enumerate_states(cm, s0, options.stateCap);

    std::unordered_map<State, std::size_t, StateHash> index;
    for (std::size_t i = 0; i < mdp.states.size(); ++i) index.emplace(mdp.states[i], i);

    mdp.goal.resize(mdp.states.size());
    mdp.transitions.resize(mdp.states.size());
    for (std::size_t i = 0; i < mdp.states.size(); ++i) {
        const State& s = mdp.states[i];
        mdp.goal[i] = failures_not_ruled_out(cm, s).empty();
        auto& row = mdp.transitions[i];
        row.resize(cm.action_count());
        for (std::size_t a = 0; a < cm.action_count(); ++a) {
            if (mdp.goal[i]) {
                row[a] = std::vector<Mdp::Successor>{{i, 1.0, 0.0}};
                continue;
            }
            if (!is_applicable(cm, a, s)) continue;
            std::vector<Mdp::Successor> successors;
            for (const auto& w : transition(cm, s, a))
                successors.push_back({index.at(w.state), w.probability, reward(cm, s0, w.state, params)});
            row[a] = std::move(successors);
        }
    }
    return mdp;
}

} // namespace fmea
