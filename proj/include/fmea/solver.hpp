#pragma once

#include "fmea/mdp_builder.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace fmea {

using ValueFunction = std::vector<double>;

struct SolveOptions {
    double epsilon = 1e-6;
    int maxIter = 100'000;
    /// Worker threads per Jacobi sweep. Results do not depend on this.
    unsigned threads = 1;
};

struct ValueIterationResult {
    ValueFunction values;
    int iterations = 0;
    double residual = 0.0;
    /// Sup-norm change of every sweep, in order.
    std::vector<double> residuals;
};

/// Jacobi value iteration until the sup-norm residual is <= epsilon.
///
/// States without an applicable action are terminal with value 0. Throws
/// IterationLimitError after maxIter sweeps and DivergenceRiskError for
/// gamma = 1 when some state cannot reach an absorbing state.
ValueIterationResult value_iteration(const Mdp& mdp, const SolveOptions& options = {});

/// Expected one-step return of action a in state s under V.
double q_value(const Mdp& mdp, const ValueFunction& values, std::size_t s, std::size_t a);

/// Action index per state; empty optional means Stop.
struct Policy {
    std::vector<std::optional<std::size_t>> action;

    std::size_t size() const { return action.size(); }
    bool stops(std::size_t s) const { return !action[s].has_value(); }
};

/// Greedy policy. Goal states and states without applicable actions map to Stop;
/// ties (within 1e-9 relative) go to the lexicographically smallest action id.
Policy extract_policy(const Mdp& mdp, const ValueFunction& values);

/// Finite-horizon optimal values by backward induction. Test oracle for small
/// MDPs: at most 12 states and horizon 1000, otherwise StructuralError.
ValueFunction brute_force_optimal(const Mdp& mdp, int horizon);

} // namespace fmea
