#include "fmea/solver.hpp"

#include "fmea/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

namespace fmea {

double q_value(const Mdp& mdp, const ValueFunction& values, std::size_t s, std::size_t a) {
    const auto& row = mdp.transitions[s][a];
    if (!row) throw NotApplicableError("action '" + mdp.actions[a] + "' is not applicable in state " +
                                       std::to_string(s));
    double q = 0.0;
    for (const auto& succ : *row) q += succ.probability * (succ.reward + mdp.gamma * values[succ.state]);
    return q;
}

namespace {

double backup(const Mdp& mdp, const ValueFunction& values, std::size_t s) {
    bool any = false;
    double best = 0.0;
    for (std::size_t a = 0; a < mdp.action_count(); ++a) {
        if (!mdp.applicable(s, a)) continue;
        double q = q_value(mdp, values, s, a);
        if (!any || q > best) best = q;
        any = true;
    }
    return best;
}

bool is_absorbing(const Mdp& mdp, std::size_t s) {
    if (mdp.goal[s]) return true;
    for (std::size_t a = 0; a < mdp.action_count(); ++a)
        if (mdp.applicable(s, a)) return false;
    return true;
}

void check_reaches_absorbing(const Mdp& mdp) {
    std::size_t n = mdp.state_count();
    std::vector<std::vector<std::size_t>> predecessors(n);
    for (std::size_t s = 0; s < n; ++s)
        for (std::size_t a = 0; a < mdp.action_count(); ++a)
            if (const auto& row = mdp.transitions[s][a])
                for (const auto& succ : *row)
                    if (succ.probability > 0.0) predecessors[succ.state].push_back(s);

    std::vector<bool> reaches(n, false);
    std::vector<std::size_t> frontier;
    for (std::size_t s = 0; s < n; ++s)
        if (is_absorbing(mdp, s)) {
            reaches[s] = true;
            frontier.push_back(s);
        }
    while (!frontier.empty()) {
        std::size_t s = frontier.back();
        frontier.pop_back();
        for (std::size_t p : predecessors[s])
            if (!reaches[p]) {
                reaches[p] = true;
                frontier.push_back(p);
            }
    }
    for (std::size_t s = 0; s < n; ++s)
        if (!reaches[s])
            throw DivergenceRiskError("gamma = 1 but state " + std::to_string(s) + " cannot reach an absorbing state");
}

} // namespace

ValueIterationResult value_iteration(const Mdp& mdp, const SolveOptions& options) {
    if (!(options.epsilon > 0.0)) throw StructuralError("epsilon must be positive");
    if (options.maxIter < 1) throw StructuralError("maxIter must be at least 1");
    if (!(mdp.gamma >= 0.0 && mdp.gamma <= 1.0)) throw StructuralError("discount factor must lie in [0,1]");
    if (mdp.gamma == 1.0) check_reaches_absorbing(mdp);

    std::size_t n = mdp.state_count();
    unsigned workers = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(n / 64 + 1)));

    ValueIterationResult result;
    ValueFunction current(n, 0.0);
    ValueFunction next(n, 0.0);

    auto sweep = [&](std::size_t begin, std::size_t end) {
        for (std::size_t s = begin; s < end; ++s) next[s] = backup(mdp, current, s);
    };

    while (true) {
        if (workers == 1) {
            sweep(0, n);
        } else {
            std::vector<std::thread> pool;
            std::size_t chunk = (n + workers - 1) / workers;
            for (unsigned w = 0; w < workers; ++w) {
                std::size_t begin = std::min(n, w * chunk);
                std::size_t end = std::min(n, begin + chunk);
                pool.emplace_back(sweep, begin, end);
            }
            for (auto& t : pool) t.join();
        }

        double residual = 0.0;
        for (std::size_t s = 0; s < n; ++s) residual = std::max(residual, std::abs(next[s] - current[s]));
        std::swap(current, next);
        ++result.iterations;
        result.residual = residual;
        result.residuals.push_back(residual);
        if (!std::isfinite(residual))
            throw IterationLimitError(result.iterations, residual);
        if (residual <= options.epsilon) break;
        if (result.iterations >= options.maxIter) throw IterationLimitError(result.iterations, residual);
    }
    result.values = std::move(current);
    return result;
}

Policy extract_policy(const Mdp& mdp, const ValueFunction& values) {
    std::vector<std::size_t> order(mdp.action_count());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return mdp.actions[a] < mdp.actions[b]; });

    Policy policy;
    policy.action.resize(mdp.state_count());
    for (std::size_t s = 0; s < mdp.state_count(); ++s) {
        if (mdp.goal[s]) continue;
        std::optional<std::size_t> best;
        double bestQ = 0.0;
        for (std::size_t a : order) {
            if (!mdp.applicable(s, a)) continue;
            double q = q_value(mdp, values, s, a);
            if (!best || q > bestQ + 1e-9 * std::max(1.0, std::abs(bestQ))) {
                best = a;
                bestQ = q;
            }
        }
        policy.action[s] = best;
    }
    return policy;
}

ValueFunction brute_force_optimal(const Mdp& mdp, int horizon) {
    if (mdp.state_count() > 12) throw StructuralError("brute force oracle supports at most 12 states");
    if (horizon < 0 || horizon > 1000) throw StructuralError("brute force horizon must lie in 0..1000");
    ValueFunction values(mdp.state_count(), 0.0);
    for (int k = 0; k < horizon; ++k) {
        ValueFunction next(mdp.state_count(), 0.0);
        for (std::size_t s = 0; s < mdp.state_count(); ++s) next[s] = backup(mdp, values, s);
        values = std::move(next);
    }
    return values;
}

} // namespace fmea
