#include "fmea/therapy.hpp"

#include "fmea/errors.hpp"
#include "fmea/successors.hpp"

#include <algorithm>

namespace fmea {

GoalSet GoalSet::all_normal(const FmeaModel& model) {
    State s;
    for (std::size_t i = 0; i < model.variables.size(); ++i) s.poss.push_back(ValueSet{Value::normal});
    return of({std::move(s)});
}

bool GoalSet::contains(const CompiledModel& cm, const State& s) const {
    if (noOpenFailures && failures_not_ruled_out(cm, s).empty()) return true;
    return std::find(states.begin(), states.end(), s) != states.end();
}

std::string_view to_string(SessionStatus s) {
    switch (s) {
    case SessionStatus::running: return "running";
    case SessionStatus::reachedGoal: return "reachedGoal";
    case SessionStatus::reachedThreshold: return "reachedThreshold";
    case SessionStatus::deadEnd: return "deadEnd";
    }
    return "?";
}

SolvedPlanPtr solve_plan(CompiledModelPtr model, const State& s0, const SessionConfig& config) {
    auto plan = std::make_shared<SolvedPlan>();
    plan->model = std::move(model);
    plan->reward = config.reward;
    plan->mdp = build_mdp(*plan->model, s0, config.gamma, config.reward, config.build);
    plan->solution = value_iteration(plan->mdp, config.solve);
    plan->policy = extract_policy(plan->mdp, plan->solution.values);
    for (std::size_t i = 0; i < plan->mdp.states.size(); ++i) plan->stateIndex.emplace(plan->mdp.states[i], i);
    return plan;
}

TherapySession TherapySession::start(CompiledModelPtr model, const State& s0, GoalSet goals, SessionConfig config) {
    auto plan = solve_plan(std::move(model), s0, config);
    return start(std::move(plan), std::move(goals), std::move(config));
}

TherapySession TherapySession::start(SolvedPlanPtr plan, GoalSet goals, SessionConfig config) {
    if (!plan || plan->mdp.states.empty()) throw StructuralError("session needs a solved plan");
    TherapySession session;
    session.plan_ = std::move(plan);
    session.goals_ = std::move(goals);
    session.config_ = std::move(config);
    session.initial_ = session.plan_->mdp.states[session.plan_->mdp.initial];
    session.current_ = session.initial_;
    session.settle(std::nullopt);
    return session;
}

std::size_t TherapySession::current_index() const {
    auto it = plan_->stateIndex.find(current_);
    if (it == plan_->stateIndex.end()) throw StructuralError("state " + to_string(current_) + " is not in the MDP");
    return it->second;
}

void TherapySession::settle(std::optional<double> lastReward) {
    const CompiledModel& cm = *plan_->model;
    if (goals_.contains(cm, current_)) status_ = SessionStatus::reachedGoal;
    else if (lastReward && *lastReward > config_.theta) status_ = SessionStatus::reachedThreshold;
    else if (plan_->policy.stops(current_index()) || history_.size() >= config_.maxSteps)
        status_ = SessionStatus::deadEnd;
    else status_ = SessionStatus::running;
}

Recommendation TherapySession::recommend() const {
    if (status_ != SessionStatus::running)
        throw SessionStateError("session is " + std::string(to_string(status_)) + ", not running");
    const CompiledModel& cm = *plan_->model;
    Recommendation rec;
    auto a = plan_->policy.action[current_index()];
    if (a) {
        rec.action = cm.action(*a).id;
        rec.kind = cm.action(*a).kind;
        rec.successProbability = cm.action_info(*a).successProb;
        rec.outcomes = outcome_distribution(cm, current_, *a);
    }
    for (std::size_t e : failures_not_ruled_out(cm, current_)) {
        const Failure& f = cm.failure(e);
        rec.stateRisk.push_back({f.id, config_.risk(f.sev, f.occ, f.det)});
    }
    return rec;
}

void TherapySession::apply_outcome(std::string_view action, Outcome outcome) {
    Recommendation rec = recommend();
    if (!rec.action || *rec.action != action)
        throw InconsistentEvidenceError("action '" + std::string(action) + "' is not the recommended action" +
                                        (rec.action ? " '" + *rec.action + "'" : std::string()));
    auto branch = std::find_if(rec.outcomes.begin(), rec.outcomes.end(),
                               [&](const OutcomeBranch& b) { return b.outcome == outcome; });
    if (branch == rec.outcomes.end() || branch->probability <= 0.0)
        throw InconsistentEvidenceError("outcome " + std::string(to_string(outcome)) + " of '" + std::string(action) +
                                        "' is impossible in state " + to_string(current_));

    double r = reward(*plan_->model, initial_, branch->state, plan_->reward);
    history_.push_back({current_, std::string(action), outcome, branch->state, r});
    current_ = branch->state;
    settle(r);
}

TherapyResult optimal_therapy(CompiledModelPtr model, const State& s0, const GoalSet& goals, const PatientData& data,
                              const SessionConfig& config) {
    auto session = TherapySession::start(std::move(model), s0, goals, config);
    PatientData remaining = data;
    while (session.status() == SessionStatus::running) {
        Recommendation rec = session.recommend();
        const std::string& action = *rec.action;
        auto it = remaining.find(action);
        if (it == remaining.end() || it->second.empty()) throw MissingOutcomeError(action);
        Outcome outcome = it->second.front();
        it->second.pop_front();
        session.apply_outcome(action, outcome);
    }

    TherapyResult result;
    result.initial = session.initial();
    result.status = session.status();
    result.steps = session.history();
    for (const auto& step : result.steps) result.actions.push_back(step.action);
    return result;
}

} // namespace fmea
