#pragma once

#include "fmea/compiled_model.hpp"
#include "fmea/state.hpp"
#include "fmea/value.hpp"

#include <cstddef>
#include <vector>

namespace fmea {

/// Preconditions plus, for detective actions, the implicit |poss(v)| > 1.
bool is_applicable(const CompiledModel& cm, std::size_t action, const State& s);

/// s with the action's postconditions written over it.
State apply_postconditions(const CompiledModel& cm, std::size_t action, const State& s);

/// A successful outcome of an action and the state it leads to.
struct LabeledSuccessor {
    Outcome outcome;
    State state;
};

/// One entry per possible successful outcome: each value of poss_s(v) for a
/// detective action (tooLow, normal, tooHigh order), `success` for a preventive
/// one. The action's variable is fixed, its incoming influence edges are cut,
/// the sign is propagated, and postconditions are applied last. Does not check
/// applicability.
std::vector<LabeledSuccessor> action_outcomes(const CompiledModel& cm, std::size_t action, const State& s);

struct SuccessorSet {
    bool applicable = false;
    std::vector<State> states;  // deduplicated, in outcome order
};

/// Possible successor states of a successful application; empty and
/// `applicable == false` if the action's preconditions fail in s.
SuccessorSet successor_states(const CompiledModel& cm, std::size_t action, const State& s);

} // namespace fmea
