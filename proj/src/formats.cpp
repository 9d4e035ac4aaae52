#include "fmea/formats.hpp"

#include "fmea/errors.hpp"
#include "fmea/model_io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace fmea {

using nlohmann::json;

namespace {

json values_to_json(ValueSet set) {
    json out = json::array();
    for (Value v : set.values()) out.push_back(std::string(to_string(v)));
    return out;
}

ValueSet values_from_json(const JsonNode& node) {
    ValueSet set;
    for (const auto& element : node.elements()) {
        std::string text = element.as_string();
        auto v = parse_value(text);
        if (!v) element.fail("unknown value '" + text + "'");
        set.insert(*v);
    }
    if (set.empty()) node.fail("possibility set must not be empty");
    return set;
}

json optional_double(double value) {
    if (std::isinf(value)) return nullptr;
    return value;
}

Outcome outcome_from_json(const JsonNode& node) {
    std::string text = node.as_string();
    auto o = parse_outcome(text);
    if (!o) node.fail("unknown outcome '" + text + "'");
    return *o;
}

char color_code(RiskColor c) { return to_string(c)[0]; }

} // namespace

json state_to_json(const std::vector<std::string>& variables, const State& s) {
    json out = json::object();
    for (std::size_t i = 0; i < variables.size() && i < s.size(); ++i) out[variables[i]] = values_to_json(s[i]);
    return out;
}

State state_from_json(const JsonNode& node, const std::vector<std::string>& variables) {
    State s;
    s.poss.resize(variables.size());
    for (const auto& [key, value] : node.members()) {
        auto it = std::find(variables.begin(), variables.end(), key);
        if (it == variables.end()) value.fail("unknown variable '" + key + "'");
        s[static_cast<std::size_t>(it - variables.begin())] = values_from_json(value);
    }
    for (std::size_t i = 0; i < variables.size(); ++i)
        if (s[i].empty()) node.fail("missing possibility set for variable '" + variables[i] + "'");
    return s;
}

json state_to_array(const State& s) {
    json out = json::array();
    for (ValueSet p : s.poss) out.push_back(values_to_json(p));
    return out;
}

State state_from_array(const JsonNode& node) {
    State s;
    for (const auto& element : node.elements()) s.poss.push_back(values_from_json(element));
    return s;
}

Evidence parse_evidence(std::string_view text) {
    Evidence evidence;
    std::size_t pos = 0;
    while (pos <= text.size() && !text.empty()) {
        std::size_t comma = text.find(',', pos);
        std::string_view item = text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
        std::size_t eq = item.find('=');
        if (eq == std::string_view::npos || eq == 0)
            throw StructuralError("evidence item '" + std::string(item) + "' must look like variable=value[|value]");
        std::string variable(item.substr(0, eq));
        std::string_view values = item.substr(eq + 1);
        ValueSet set;
        std::size_t vpos = 0;
        while (true) {
            std::size_t bar = values.find('|', vpos);
            std::string_view token = values.substr(vpos, bar == std::string_view::npos ? std::string_view::npos : bar - vpos);
            auto v = parse_value(token);
            if (!v) throw StructuralError("unknown value '" + std::string(token) + "' in evidence for '" + variable + "'");
            set.insert(*v);
            if (bar == std::string_view::npos) break;
            vpos = bar + 1;
        }
        if (evidence.contains(variable)) throw StructuralError("evidence names '" + variable + "' twice");
        evidence[variable] = set;
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return evidence;
}

// ---------------------------------------------------------------------------
// MDP and policy
// ---------------------------------------------------------------------------

json mdp_to_json(const Mdp& mdp) {
    json doc;
    doc["schemaVersion"] = kSchemaVersion;
    doc["gamma"] = mdp.gamma;
    doc["variables"] = mdp.variables;
    doc["actions"] = mdp.actions;
    doc["initialState"] = mdp.initial;
    doc["states"] = json::array();
    for (std::size_t i = 0; i < mdp.state_count(); ++i)
        doc["states"].push_back(
            {{"index", i}, {"poss", state_to_json(mdp.variables, mdp.states[i])}, {"goal", static_cast<bool>(mdp.goal[i])}});
    doc["transitions"] = json::array();
    for (std::size_t s = 0; s < mdp.state_count(); ++s) {
        for (std::size_t a = 0; a < mdp.action_count(); ++a) {
            const auto& row = mdp.transitions[s][a];
            if (!row) continue;
            json successors = json::array();
            for (const auto& succ : *row)
                successors.push_back({{"state", succ.state}, {"probability", succ.probability}, {"reward", succ.reward}});
            doc["transitions"].push_back({{"state", s}, {"action", mdp.actions[a]}, {"successors", successors}});
        }
    }
    return doc;
}

Mdp mdp_from_json(const LocatedJson& doc) {
    JsonNode root = JsonNode::root(doc);
    root.expect_keys({"schemaVersion", "gamma", "variables", "actions", "initialState", "states", "transitions"});
    auto version = root.member("schemaVersion");
    if (version.as_integer() != kSchemaVersion) version.fail("unsupported schemaVersion");

    Mdp mdp;
    auto gamma = root.member("gamma");
    mdp.gamma = gamma.as_number();
    if (!(mdp.gamma >= 0.0 && mdp.gamma <= 1.0)) gamma.fail("gamma must lie in [0,1]");
    for (const auto& v : root.member("variables").elements()) mdp.variables.push_back(v.as_string());
    for (const auto& a : root.member("actions").elements()) mdp.actions.push_back(a.as_string());

    auto states = root.member("states").elements();
    for (std::size_t i = 0; i < states.size(); ++i) {
        states[i].expect_keys({"index", "poss", "goal"});
        auto index = states[i].member("index");
        if (index.as_index() != i) index.fail("states must be listed in index order");
        mdp.states.push_back(state_from_json(states[i].member("poss"), mdp.variables));
        mdp.goal.push_back(states[i].member("goal").as_bool());
    }
    if (mdp.states.empty()) root.member("states").fail("an MDP needs at least one state");
    auto initial = root.member("initialState");
    mdp.initial = initial.as_index();
    if (mdp.initial >= mdp.states.size()) initial.fail("initial state index out of range");

    mdp.transitions.assign(mdp.states.size(), std::vector<Mdp::Row>(mdp.actions.size()));
    for (const auto& t : root.member("transitions").elements()) {
        t.expect_keys({"state", "action", "successors"});
        auto stateNode = t.member("state");
        std::size_t s = stateNode.as_index();
        if (s >= mdp.states.size()) stateNode.fail("state index out of range");
        auto actionNode = t.member("action");
        auto a = mdp.find_action(actionNode.as_string());
        if (!a) actionNode.fail("unknown action '" + actionNode.as_string() + "'");
        if (mdp.transitions[s][*a]) t.fail("duplicate transition row");
        std::vector<Mdp::Successor> row;
        double total = 0.0;
        for (const auto& succ : t.member("successors").elements()) {
            succ.expect_keys({"state", "probability", "reward"});
            auto target = succ.member("state");
            std::size_t to = target.as_index();
            if (to >= mdp.states.size()) target.fail("state index out of range");
            auto probNode = succ.member("probability");
            double p = probNode.as_number();
            if (!(p >= 0.0 && p <= 1.0)) probNode.fail("probability must lie in [0,1]");
            total += p;
            row.push_back({to, p, succ.member("reward").as_number()});
        }
        if (std::abs(total - 1.0) > 1e-9) t.fail("successor probabilities must sum to 1");
        mdp.transitions[s][*a] = std::move(row);
    }
    return mdp;
}

Mdp parse_mdp(std::string_view text) { return mdp_from_json(LocatedJson::parse(text)); }

json policy_to_json(const Mdp& mdp, const ValueIterationResult& solution, const Policy& policy) {
    json doc;
    doc["schemaVersion"] = kSchemaVersion;
    doc["gamma"] = mdp.gamma;
    doc["iterations"] = solution.iterations;
    doc["residual"] = solution.residual;
    doc["variables"] = mdp.variables;
    doc["initialState"] = mdp.initial;
    doc["states"] = json::array();
    for (std::size_t s = 0; s < mdp.state_count(); ++s) {
        json action = policy.action[s] ? json(mdp.actions[*policy.action[s]]) : json(nullptr);
        doc["states"].push_back({{"index", s},
                                 {"poss", state_to_json(mdp.variables, mdp.states[s])},
                                 {"action", action},
                                 {"value", solution.values[s]}});
    }
    return doc;
}

// ---------------------------------------------------------------------------
// Patient data, therapy, recommendations
// ---------------------------------------------------------------------------

PatientData parse_patient_data(std::string_view text) {
    LocatedJson doc = LocatedJson::parse(text);
    PatientData data;
    for (const auto& [action, outcomes] : JsonNode::root(doc).members()) {
        auto& queue = data[action];
        for (const auto& o : outcomes.elements()) queue.push_back(outcome_from_json(o));
    }
    return data;
}

json patient_data_to_json(const PatientData& data) {
    json doc = json::object();
    for (const auto& [action, outcomes] : data) {
        json list = json::array();
        for (Outcome o : outcomes) list.push_back(std::string(to_string(o)));
        doc[action] = list;
    }
    return doc;
}

json validation_report_to_json(const ValidationReport& report) {
    json doc;
    doc["valid"] = report.empty();
    doc["violations"] = json::array();
    for (const auto& v : report)
        doc["violations"].push_back({{"rule", v.rule}, {"entities", v.entities}, {"message", v.message}});
    return doc;
}

namespace {

std::vector<std::string> variable_ids(const CompiledModel& cm) {
    std::vector<std::string> ids;
    for (const auto& v : cm.model().variables) ids.push_back(v.id);
    return ids;
}

} // namespace

json step_to_json(const CompiledModel& cm, const TherapyStep& step, std::size_t index) {
    auto vars = variable_ids(cm);
    return {{"index", index},
            {"before", state_to_json(vars, step.before)},
            {"action", step.action},
            {"outcome", std::string(to_string(step.outcome))},
            {"after", state_to_json(vars, step.after)},
            {"reward", step.reward}};
}

json therapy_to_json(const CompiledModel& cm, const TherapyResult& result) {
    json doc;
    doc["schemaVersion"] = kSchemaVersion;
    doc["status"] = std::string(to_string(result.status));
    doc["actions"] = result.actions;
    doc["variables"] = variable_ids(cm);
    doc["initialState"] = state_to_json(variable_ids(cm), result.initial);
    doc["steps"] = json::array();
    for (std::size_t i = 0; i < result.steps.size(); ++i) doc["steps"].push_back(step_to_json(cm, result.steps[i], i));
    return doc;
}

json recommendation_to_json(const CompiledModel& cm, const Recommendation& rec) {
    auto vars = variable_ids(cm);
    json doc;
    doc["action"] = rec.action ? json(*rec.action) : json(nullptr);
    doc["label"] = nullptr;
    if (rec.action) {
        auto a = cm.model().action_index(*rec.action);
        if (a) doc["label"] = cm.action(*a).label;
    }
    doc["kind"] = rec.kind ? json(std::string(to_string(*rec.kind))) : json(nullptr);
    doc["successProbability"] = rec.successProbability;
    doc["outcomes"] = json::array();
    for (const auto& b : rec.outcomes)
        doc["outcomes"].push_back({{"outcome", std::string(to_string(b.outcome))},
                                   {"probability", b.probability},
                                   {"state", state_to_json(vars, b.state)}});
    doc["stateRisk"] = json::array();
    for (const auto& r : rec.stateRisk)
        doc["stateRisk"].push_back({{"failure", r.failure}, {"color", std::string(to_string(r.color))}});
    return doc;
}

json goals_to_json(const CompiledModel& cm, const GoalSet& goals) {
    json states = json::array();
    for (const auto& s : goals.states) states.push_back(state_to_json(variable_ids(cm), s));
    return {{"noOpenFailures", goals.noOpenFailures}, {"states", states}};
}

GoalSet goals_from_json(const JsonNode& node, const FmeaModel& model) {
    node.expect_keys({"noOpenFailures", "states"});
    std::vector<std::string> vars;
    for (const auto& v : model.variables) vars.push_back(v.id);
    GoalSet goals;
    if (auto n = node.optional_member("noOpenFailures")) goals.noOpenFailures = n->as_bool();
    if (auto states = node.optional_member("states"))
        for (const auto& s : states->elements()) {
            State state = state_from_json(s, vars);
            for (std::size_t i = 0; i < state.size(); ++i)
                if (!state[i].subset_of(model.variables[i].range))
                    s.fail("goal state exceeds the range of '" + vars[i] + "'");
            goals.states.push_back(std::move(state));
        }
    if (!goals.noOpenFailures && goals.states.empty()) node.fail("goal set is empty");
    return goals;
}

json session_config_to_json(const SessionConfig& config) {
    std::string risk;
    risk.reserve(1000);
    for (int s = 1; s <= 10; ++s)
        for (int o = 1; o <= 10; ++o)
            for (int d = 1; d <= 10; ++d) risk += color_code(config.risk(s, o, d));
    return {{"gamma", config.gamma},
            {"theta", optional_double(config.theta)},
            {"goalReward", config.reward.goalReward},
            {"combination", std::string(to_string(config.reward.combination))},
            {"epsilon", config.solve.epsilon},
            {"maxIter", config.solve.maxIter},
            {"stateCap", config.build.stateCap},
            {"maxSteps", config.maxSteps},
            {"risk", risk}};
}

SessionConfig session_config_from_json(const JsonNode& node) {
    node.expect_keys({"gamma", "theta", "goalReward", "combination", "epsilon", "maxIter", "stateCap", "maxSteps", "risk"});
    SessionConfig config;
    config.gamma = node.member("gamma").as_number();
    auto theta = node.member("theta");
    config.theta = theta.is_null() ? std::numeric_limits<double>::infinity() : theta.as_number();
    config.reward.goalReward = node.member("goalReward").as_number();
    auto comb = node.member("combination");
    auto c = parse_combination(comb.as_string());
    if (!c) comb.fail("unknown combination");
    config.reward.combination = *c;
    config.solve.epsilon = node.member("epsilon").as_number();
    config.solve.maxIter = static_cast<int>(node.member("maxIter").as_integer());
    config.build.stateCap = node.member("stateCap").as_index();
    config.maxSteps = node.member("maxSteps").as_index();
    auto riskNode = node.member("risk");
    std::string risk = riskNode.as_string();
    if (risk.size() != 1000) riskNode.fail("risk matrix must have 1000 entries");
    std::size_t i = 0;
    for (int s = 1; s <= 10; ++s)
        for (int o = 1; o <= 10; ++o)
            for (int d = 1; d <= 10; ++d, ++i) {
                RiskColor color = risk[i] == 'g' ? RiskColor::green : risk[i] == 'o' ? RiskColor::orange : RiskColor::red;
                if (risk[i] != 'g' && risk[i] != 'o' && risk[i] != 'r') riskNode.fail("risk entries must be g, o or r");
                config.risk.set(s, o, d, color);
            }
    return config;
}

// ---------------------------------------------------------------------------
// Session event log
// ---------------------------------------------------------------------------

std::string start_event(const std::string& sessionId, const std::string& modelId, const TherapySession& session) {
    const CompiledModel& cm = *session.plan().model;
    json event{{"event", "start"},
               {"sessionId", sessionId},
               {"modelId", modelId},
               {"initialState", state_to_array(session.initial())},
               {"goals", goals_to_json(cm, session.goals())},
               {"config", session_config_to_json(session.config())}};
    return event.dump() + "\n";
}

std::string outcome_event(std::size_t step, std::string_view action, Outcome outcome) {
    json event{{"event", "outcome"}, {"step", step}, {"action", std::string(action)}, {"outcome", std::string(to_string(outcome))}};
    return event.dump() + "\n";
}

std::string end_event() { return json{{"event", "end"}}.dump() + "\n"; }

SessionLog parse_session_log(std::string_view text) {
    SessionLog log;
    bool started = false;
    std::size_t pos = 0;
    std::size_t lineNo = 0;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        bool complete = nl != std::string_view::npos;
        std::string_view line = text.substr(pos, complete ? nl - pos : std::string_view::npos);
        pos = complete ? nl + 1 : text.size();
        ++lineNo;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

        std::optional<LocatedJson> doc;
        try {
            doc = LocatedJson::parse(line);
        } catch (const ParseError&) {
            if (!complete) break;
            throw;
        }
        JsonNode event = JsonNode::root(*doc);
        std::string kind = event.member("event").as_string();
        if (kind == "start") {
            if (started) event.fail("second start event on line " + std::to_string(lineNo));
            event.expect_keys({"event", "sessionId", "modelId", "initialState", "goals", "config"});
            log.sessionId = event.member("sessionId").as_string();
            log.modelId = event.member("modelId").as_string();
            log.initial = state_from_array(event.member("initialState"));
            log.goals = event.member("goals").raw();
            log.config = session_config_from_json(event.member("config"));
            started = true;
        } else if (!started) {
            event.fail("event before the start event on line " + std::to_string(lineNo));
        } else if (kind == "outcome") {
            event.expect_keys({"event", "step", "action", "outcome"});
            log.outcomes.push_back({event.member("step").as_index(), event.member("action").as_string(),
                                    outcome_from_json(event.member("outcome"))});
        } else if (kind == "end") {
            log.ended = true;
        } else {
            event.member("event").fail("unknown event '" + kind + "'");
        }
    }
    if (!started) throw ParseError(ParseError::Kind::schema, "session log has no start event", 1, 1, "");
    return log;
}

TherapySession replay_session(CompiledModelPtr model, const SessionLog& log, SolvedPlanPtr plan) {
    LocatedJson goalsDoc = LocatedJson::wrap(log.goals);
    GoalSet goals = goals_from_json(JsonNode::root(goalsDoc), model->model());
    if (!plan) plan = solve_plan(model, log.initial, log.config);
    if (plan->mdp.states.at(plan->mdp.initial) != log.initial)
        throw StructuralError("cached plan is rooted at a different initial state");
    TherapySession session = TherapySession::start(std::move(plan), std::move(goals), log.config);
    for (const auto& o : log.outcomes) {
        if (o.step != session.step())
            throw InconsistentEvidenceError("event log step " + std::to_string(o.step) + " does not follow step " +
                                            std::to_string(session.step()));
        session.apply_outcome(o.action, o.outcome);
    }
    return session;
}

} // namespace fmea
