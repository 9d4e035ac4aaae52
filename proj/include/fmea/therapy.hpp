#pragma once

#include "fmea/compiled_model.hpp"
#include "fmea/mdp_builder.hpp"
#include "fmea/solver.hpp"

#include <cstddef>
#include <deque>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace fmea {

/// Stopping set of a therapy. Without explicit states, any state in which no
/// failure can still occur counts as a goal.
struct GoalSet {
    std::vector<State> states;
    bool noOpenFailures = false;

    static GoalSet open_failures_ruled_out() { return {{}, true}; }
    static GoalSet of(std::vector<State> states) { return {std::move(states), false}; }
    /// The single state with every variable known to be normal.
    static GoalSet all_normal(const FmeaModel& model);

    bool contains(const CompiledModel& cm, const State& s) const;
};

/// Observed outcomes per action id, consumed front to back.
using PatientData = std::map<std::string, std::deque<Outcome>>;

enum class SessionStatus { running, reachedGoal, reachedThreshold, deadEnd };

std::string_view to_string(SessionStatus s);

struct TherapyStep {
    State before;
    std::string action;
    Outcome outcome;
    State after;
    double reward;
};

struct SessionConfig {
    double gamma = 0.9;
    /// Stop once a realized transition reward exceeds this.
    double theta = std::numeric_limits<double>::infinity();
    RewardParams reward;
    SolveOptions solve;
    BuildOptions build;
    std::size_t maxSteps = 1000;
    RiskMatrix risk = RiskMatrix::product_thresholds();
};

/// Solved MDP and policy for one (model, initial state, parameters) key.
/// Immutable; shared by every session started from the same key.
struct SolvedPlan {
    CompiledModelPtr model;
    RewardParams reward;
    Mdp mdp;
    ValueIterationResult solution;
    Policy policy;
    std::unordered_map<State, std::size_t, StateHash> stateIndex;
};

using SolvedPlanPtr = std::shared_ptr<const SolvedPlan>;

SolvedPlanPtr solve_plan(CompiledModelPtr model, const State& s0, const SessionConfig& config);

struct FailureRisk {
    std::string failure;
    RiskColor color;
};

struct Recommendation {
    /// Empty: Stop.
    std::optional<std::string> action;
    std::optional<ActionKind> kind;
    double successProbability = 0.0;
    std::vector<OutcomeBranch> outcomes;
    std::vector<FailureRisk> stateRisk;
};

/// Interactive therapy for one instance. Operations on one session must be
/// serialized by the caller; distinct sessions are independent.
class TherapySession {
public:
    /// Builds and solves the MDP rooted at s0.
    static TherapySession start(CompiledModelPtr model, const State& s0, GoalSet goals, SessionConfig config = {});
    /// Reuses an already solved plan; its MDP must be rooted at s0.
    static TherapySession start(SolvedPlanPtr plan, GoalSet goals, SessionConfig config = {});

    /// pi*(current), outcome previews, and the risk color of each open failure.
    /// Throws SessionStateError unless running.
    Recommendation recommend() const;

    /// Advances along the recommended action's branch labelled `outcome`.
    /// Throws SessionStateError unless running, InconsistentEvidenceError if the
    /// action is not the recommendation or the outcome is impossible here.
    void apply_outcome(std::string_view action, Outcome outcome);

    const State& initial() const { return initial_; }
    const State& current() const { return current_; }
    SessionStatus status() const { return status_; }
    const std::vector<TherapyStep>& history() const { return history_; }
    std::size_t step() const { return history_.size(); }
    const GoalSet& goals() const { return goals_; }
    const SessionConfig& config() const { return config_; }
    const SolvedPlan& plan() const { return *plan_; }
    const SolvedPlanPtr& plan_ptr() const { return plan_; }

private:
    TherapySession() = default;
    std::size_t current_index() const;
    void settle(std::optional<double> lastReward);

    SolvedPlanPtr plan_;
    GoalSet goals_;
    SessionConfig config_;
    State initial_;
    State current_;
    SessionStatus status_ = SessionStatus::running;
    std::vector<TherapyStep> history_;
};

struct TherapyResult {
    std::vector<std::string> actions;
    std::vector<TherapyStep> steps;
    SessionStatus status = SessionStatus::running;
    State initial;
};

/// Follows pi* from s0, drawing each action's actual outcome from `data`, until
/// a goal is reached, a transition reward exceeds theta, or the policy stops.
/// Throws MissingOutcomeError when the data has no outcome left for an action.
TherapyResult optimal_therapy(CompiledModelPtr model, const State& s0, const GoalSet& goals, const PatientData& data,
                              const SessionConfig& config = {});

} // namespace fmea
