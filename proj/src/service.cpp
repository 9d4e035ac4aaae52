#include "fmea/service.hpp"

#include "fmea/errors.hpp"
#include "fmea/formats.hpp"
#include "fmea/model_io.hpp"
#include "fmea/successors.hpp"

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <vector>

namespace fmea {

using nlohmann::json;

namespace {

/// Error with an HTTP status, turned into a JSON error body by handle().
class HttpError : public std::runtime_error {
public:
    HttpError(int status, std::string type, const std::string& message, json details = json::object())
        : std::runtime_error(message), status(status), type(std::move(type)), details(std::move(details)) {}
    int status;
    std::string type;
    json details;
};

HttpResponse json_response(int status, const json& body) {
    HttpResponse r;
    r.status = status;
    r.body = body.dump(2) + "\n";
    r.headers["Content-Type"] = "application/json";
    return r;
}

HttpResponse error_response(int status, const std::string& type, const std::string& message, json details = json::object()) {
    details["type"] = type;
    details["message"] = message;
    return json_response(status, json{{"error", details}});
}

std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> parts;
    std::string clean = path.substr(0, path.find('?'));
    std::size_t pos = 0;
    while (pos < clean.size()) {
        std::size_t slash = clean.find('/', pos);
        if (slash == std::string::npos) slash = clean.size();
        if (slash > pos) parts.push_back(clean.substr(pos, slash - pos));
        pos = slash + 1;
    }
    return parts;
}

std::string content_id(std::string_view text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream out;
    out << "m-" << std::hex << std::setw(16) << std::setfill('0') << h;
    return out.str();
}

LocatedJson parse_body(const std::string& body, bool allowEmpty) {
    if (allowEmpty && body.find_first_not_of(" \t\r\n") == std::string::npos) return LocatedJson::wrap(json::object());
    return LocatedJson::parse(body);
}

json parse_error_details(const ParseError& e) {
    return {{"line", e.line()}, {"column", e.column()}, {"pointer", e.pointer()}};
}

/// Reads the optional tuning members shared by solve and session requests.
void read_tuning(const JsonNode& body, SessionConfig& config) {
    if (auto g = body.optional_member("gamma")) {
        config.gamma = g->as_number();
        if (!(config.gamma >= 0.0 && config.gamma <= 1.0)) g->fail("gamma must lie in [0,1]");
    }
    if (auto r = body.optional_member("goalReward")) {
        config.reward.goalReward = r->as_number();
        if (!(config.reward.goalReward > RewardParams::rpnMax)) r->fail("goalReward must exceed 1000");
    }
    if (auto c = body.optional_member("combination")) {
        auto comb = parse_combination(c->as_string());
        if (!comb) c->fail("combination must be min or max");
        config.reward.combination = *comb;
    }
    if (auto e = body.optional_member("epsilon")) {
        config.solve.epsilon = e->as_number();
        if (!(config.solve.epsilon > 0.0)) e->fail("epsilon must be positive");
    }
    if (auto m = body.optional_member("maxIter")) config.solve.maxIter = m->as_int_in(1, 1'000'000'000);
}

State read_initial_state(const JsonNode& body, const FmeaModel& model) {
    Evidence evidence;
    if (auto e = body.optional_member("evidence")) {
        for (const auto& [variable, values] : e->members()) {
            ValueSet set;
            for (const auto& v : values.elements()) {
                auto value = parse_value(v.as_string());
                if (!value) v.fail("unknown value '" + v.as_string() + "'");
                set.insert(*value);
            }
            evidence[variable] = set;
        }
    }
    return initial_state(model, evidence);
}

std::string plan_key(const std::string& modelId, const State& s0, const SessionConfig& c) {
    json key{{"model", modelId},
             {"s0", state_to_array(s0)},
             {"gamma", c.gamma},
             {"goalReward", c.reward.goalReward},
             {"combination", std::string(to_string(c.reward.combination))},
             {"epsilon", c.solve.epsilon},
             {"maxIter", c.solve.maxIter},
             {"stateCap", c.build.stateCap}};
    return key.dump();
}

} // namespace

Service::Service(ServiceOptions options) : options_(std::move(options)), rng_(std::random_device{}()) {
    if (options_.dataDir) {
        std::filesystem::create_directories(*options_.dataDir / "models");
        std::filesystem::create_directories(*options_.dataDir / "sessions");
        restore();
    }
}

std::size_t Service::session_count() const {
    std::shared_lock lock(mutex_);
    return sessions_.size();
}

std::size_t Service::expire_idle() {
    auto now = options_.clock();
    std::vector<std::string> expired;
    {
        std::unique_lock lock(mutex_);
        for (auto it = sessions_.begin(); it != sessions_.end();) {
            std::lock_guard sessionLock(it->second->mutex);
            if (now - it->second->lastTouched > options_.sessionTtl) {
                expired.push_back(it->first);
                it = sessions_.erase(it);
            } else {
                ++it;
            }
        }
    }
    for (const auto& id : expired) append_log(id, end_event());
    return expired.size();
}

HttpResponse Service::handle(const HttpRequest& request) {
    HttpResponse response;
    try {
        expire_idle();
        auto parts = split_path(request.path);
        const std::string& m = request.method;
        if (m == "OPTIONS") {
            response.status = 204;
        } else if (parts.size() == 1 && parts[0] == "models" && m == "POST") {
            response = post_model(request.body);
        } else if (parts.size() == 2 && parts[0] == "models" && m == "GET") {
            response = get_model(parts[1]);
        } else if (parts.size() == 3 && parts[0] == "models" && parts[2] == "risk" && m == "GET") {
            response = get_risk(parts[1]);
        } else if (parts.size() == 3 && parts[0] == "models" && parts[2] == "solve" && m == "POST") {
            response = post_solve(parts[1], request.body);
        } else if (parts.size() == 1 && parts[0] == "sessions" && m == "POST") {
            response = post_session(request.body);
        } else if (parts.size() == 2 && parts[0] == "sessions" && m == "GET") {
            response = get_session(parts[1]);
        } else if (parts.size() == 2 && parts[0] == "sessions" && m == "DELETE") {
            response = delete_session(parts[1]);
        } else if (parts.size() == 3 && parts[0] == "sessions" && parts[2] == "outcome" && m == "POST") {
            response = post_outcome(parts[1], request.body);
        } else {
            response = error_response(404, "notFound", "no route for " + m + " " + request.path);
        }
    } catch (const HttpError& e) {
        response = error_response(e.status, e.type, e.what(), e.details);
    } catch (const ParseError& e) {
        response = error_response(400, e.kind() == ParseError::Kind::syntax ? "syntax" : "schema", e.what(),
                                  parse_error_details(e));
    } catch (const ValidationError& e) {
        response = error_response(422, "validation", e.what(), {{"report", validation_report_to_json(e.report())}});
    } catch (const InconsistentEvidenceError& e) {
        response = error_response(400, "inconsistentEvidence", e.what());
    } catch (const SessionStateError& e) {
        response = error_response(409, "sessionState", e.what());
    } catch (const StructuralError& e) {
        response = error_response(400, "structural", e.what());
    } catch (const Error& e) {
        response = error_response(422, "domain", e.what());
    } catch (const std::exception& e) {
        response = error_response(500, "internal", e.what());
    }
    if (options_.cors) {
        response.headers["Access-Control-Allow-Origin"] = "*";
        response.headers["Access-Control-Allow-Methods"] = "GET, POST, DELETE, OPTIONS";
        response.headers["Access-Control-Allow-Headers"] = "Content-Type";
    }
    return response;
}

std::shared_ptr<const Service::ModelEntry> Service::find_model(const std::string& id) const {
    std::shared_lock lock(mutex_);
    auto it = models_.find(id);
    if (it == models_.end()) throw HttpError(404, "notFound", "unknown model '" + id + "'");
    return it->second;
}

std::shared_ptr<Service::SessionEntry> Service::find_session(const std::string& id) const {
    std::shared_lock lock(mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw HttpError(404, "notFound", "unknown session '" + id + "'");
    return it->second;
}

std::string Service::register_model(const FmeaModel& model) {
    auto entry = std::make_shared<ModelEntry>();
    entry->canonical = serialize_model(model);
    entry->id = content_id(entry->canonical);
    entry->model = compile(parse_model(entry->canonical));
    {
        std::unique_lock lock(mutex_);
        if (models_.contains(entry->id)) return entry->id;
        models_[entry->id] = entry;
    }
    if (options_.dataDir) write_file(*options_.dataDir / "models" / (entry->id + ".json"), entry->canonical);
    return entry->id;
}

HttpResponse Service::post_model(const std::string& body) {
    FmeaModel model = parse_model_document(body);
    auto report = validate_model(model);
    if (!report.empty()) {
        json out = validation_report_to_json(report);
        out["modelId"] = nullptr;
        return json_response(422, out);
    }
    std::string id = register_model(model);
    json out = validation_report_to_json(report);
    out["modelId"] = id;
    out["name"] = model.name;
    return json_response(201, out);
}

HttpResponse Service::get_model(const std::string& id) {
    auto entry = find_model(id);
    HttpResponse r;
    r.body = entry->canonical;
    r.headers["Content-Type"] = "application/json";
    return r;
}

HttpResponse Service::get_risk(const std::string& id) {
    auto entry = find_model(id);
    const FmeaModel& model = entry->model->model();
    const RiskMatrix& phi = options_.defaults.risk;
    json failures = json::array();
    for (const auto& e : model.failures)
        failures.push_back({{"failure", e.id},
                            {"label", e.label},
                            {"product", e.sev * e.occ * e.det},
                            {"color", std::string(to_string(phi(e.sev, e.occ, e.det)))}});
    return json_response(200, {{"modelId", id},
                               {"risk", std::string(to_string(class_level_risk(model, phi)))},
                               {"failures", failures}});
}

SolvedPlanPtr Service::plan_for(const ModelEntry& model, const State& s0, const SessionConfig& config) {
    std::string key = plan_key(model.id, s0, config);
    std::promise<SolvedPlanPtr> promise;
    std::shared_future<SolvedPlanPtr> future;
    bool owner = false;
    {
        std::lock_guard lock(planMutex_);
        auto it = plans_.find(key);
        if (it != plans_.end()) {
            future = it->second;
        } else {
            future = promise.get_future().share();
            plans_[key] = future;
            owner = true;
        }
    }
    if (owner) {
        try {
            promise.set_value(solve_plan(model.model, s0, config));
        } catch (...) {
            {
                std::lock_guard lock(planMutex_);
                plans_.erase(key);
            }
            promise.set_exception(std::current_exception());
        }
    }
    return future.get();
}

HttpResponse Service::post_solve(const std::string& id, const std::string& body) {
    auto entry = find_model(id);
    LocatedJson doc = parse_body(body, true);
    JsonNode root = JsonNode::root(doc);
    root.expect_keys({"evidence", "gamma", "goalReward", "combination", "epsilon", "maxIter"});
    SessionConfig config = options_.defaults;
    read_tuning(root, config);
    State s0 = read_initial_state(root, entry->model->model());
    auto plan = plan_for(*entry, s0, config);
    const Mdp& mdp = plan->mdp;
    json policy = json::object();
    std::size_t decisions = 0;
    for (std::size_t s = 0; s < mdp.state_count(); ++s)
        if (plan->policy.action[s]) ++decisions;
    auto a0 = plan->policy.action[mdp.initial];
    return json_response(200, {{"modelId", id},
                               {"stateCount", mdp.state_count()},
                               {"goalStates", std::count(mdp.goal.begin(), mdp.goal.end(), true)},
                               {"decisionStates", decisions},
                               {"iterations", plan->solution.iterations},
                               {"residual", plan->solution.residual},
                               {"gamma", mdp.gamma},
                               {"initialValue", plan->solution.values[mdp.initial]},
                               {"initialAction", a0 ? json(mdp.actions[*a0]) : json(nullptr)}});
}

std::string Service::new_session_id() {
    std::lock_guard lock(idMutex_);
    std::ostringstream out;
    out << "s-" << std::hex << std::setfill('0') << std::setw(16) << rng_() << std::setw(16) << rng_();
    return out.str();
}

void Service::append_log(const std::string& sessionId, const std::string& line) const {
    if (!options_.dataDir) return;
    std::ofstream out(*options_.dataDir / "sessions" / (sessionId + ".jsonl"), std::ios::app | std::ios::binary);
    out << line;
    out.flush();
    if (!out) throw Error("failed to append to the event log of session '" + sessionId + "'");
}

HttpResponse Service::post_session(const std::string& body) {
    LocatedJson doc = parse_body(body, false);
    JsonNode root = JsonNode::root(doc);
    root.expect_keys({"modelId", "evidence", "goals", "theta", "gamma", "goalReward", "combination", "epsilon", "maxIter"});
    auto entry = find_model(root.member("modelId").as_string());
    const FmeaModel& model = entry->model->model();

    SessionConfig config = options_.defaults;
    read_tuning(root, config);
    if (auto t = root.optional_member("theta"))
        config.theta = t->is_null() ? std::numeric_limits<double>::infinity() : t->as_number();
    State s0 = read_initial_state(root, model);

    GoalSet goals = GoalSet::open_failures_ruled_out();
    if (auto g = root.optional_member("goals")) {
        if (g->raw().is_string()) {
            std::string name = g->as_string();
            if (name == "all-normal") goals = GoalSet::all_normal(model);
            else if (name != "no-open-failures") g->fail("goals must be all-normal, no-open-failures or an object");
        } else {
            goals = goals_from_json(*g, model);
        }
    }

    auto plan = plan_for(*entry, s0, config);
    auto session = std::make_shared<SessionEntry>();
    session->id = new_session_id();
    session->modelId = entry->id;
    session->session.emplace(TherapySession::start(plan, std::move(goals), config));
    session->lastTouched = options_.clock();
    append_log(session->id, start_event(session->id, entry->id, *session->session));
    {
        std::unique_lock lock(mutex_);
        sessions_[session->id] = session;
    }
    std::lock_guard lock(session->mutex);
    HttpResponse r;
    r.status = 201;
    r.body = session_view(*session);
    r.headers["Content-Type"] = "application/json";
    return r;
}

std::string Service::session_view(const SessionEntry& entry) const {
    const TherapySession& s = *entry.session;
    const CompiledModel& cm = *s.plan().model;
    const FmeaModel& model = cm.model();
    std::vector<std::string> vars;
    for (const auto& v : model.variables) vars.push_back(v.id);

    json variables = json::array();
    for (std::size_t i = 0; i < model.variables.size(); ++i) {
        json poss = json::array();
        for (Value v : s.current()[i].values()) poss.push_back(std::string(to_string(v)));
        variables.push_back({{"id", model.variables[i].id},
                             {"label", model.variables[i].label},
                             {"poss", poss},
                             {"sign", std::string(1, to_char(sign_of(s.current()[i])))}});
    }

    auto open = failures_not_ruled_out(cm, s.current());
    json failures = json::array();
    for (std::size_t e = 0; e < cm.failure_count(); ++e) {
        const Failure& f = cm.failure(e);
        failures.push_back({{"id", f.id},
                            {"label", f.label},
                            {"ruledOut", std::find(open.begin(), open.end(), e) == open.end()},
                            {"color", std::string(to_string(s.config().risk(f.sev, f.occ, f.det)))}});
    }

    json history = json::array();
    for (std::size_t i = 0; i < s.history().size(); ++i) history.push_back(step_to_json(cm, s.history()[i], i));

    json view{{"sessionId", entry.id},
              {"modelId", entry.modelId},
              {"step", s.step()},
              {"status", std::string(to_string(s.status()))},
              {"variables", variables},
              {"failures", failures},
              {"initialState", state_to_json(vars, s.initial())},
              {"currentState", state_to_json(vars, s.current())},
              {"history", history},
              {"goals", goals_to_json(cm, s.goals())},
              {"gamma", s.config().gamma},
              {"theta", std::isinf(s.config().theta) ? json(nullptr) : json(s.config().theta)},
              {"recommendation", s.status() == SessionStatus::running ? recommendation_to_json(cm, s.recommend())
                                                                      : json(nullptr)}};
    return view.dump(2) + "\n";
}

HttpResponse Service::get_session(const std::string& id) {
    auto entry = find_session(id);
    std::lock_guard lock(entry->mutex);
    entry->lastTouched = options_.clock();
    HttpResponse r;
    r.body = session_view(*entry);
    r.headers["Content-Type"] = "application/json";
    return r;
}

HttpResponse Service::post_outcome(const std::string& id, const std::string& body) {
    auto entry = find_session(id);
    LocatedJson doc = parse_body(body, false);
    JsonNode root = JsonNode::root(doc);
    root.expect_keys({"action", "outcome", "step"});
    std::string action = root.member("action").as_string();
    auto outcomeNode = root.member("outcome");
    auto outcome = parse_outcome(outcomeNode.as_string());
    if (!outcome) outcomeNode.fail("unknown outcome '" + outcomeNode.as_string() + "'");
    std::size_t step = root.member("step").as_index();

    std::lock_guard lock(entry->mutex);
    TherapySession& s = *entry->session;
    entry->lastTouched = options_.clock();
    if (s.status() != SessionStatus::running)
        throw HttpError(409, "sessionFinished", "session is " + std::string(to_string(s.status())),
                        {{"step", s.step()}});
    if (step != s.step())
        throw HttpError(409, "staleStep",
                        "step " + std::to_string(step) + " is stale, the session is at step " + std::to_string(s.step()),
                        {{"step", s.step()}});
    s.apply_outcome(action, *outcome);
    append_log(entry->id, outcome_event(step, action, *outcome));
    HttpResponse r;
    r.body = session_view(*entry);
    r.headers["Content-Type"] = "application/json";
    return r;
}

HttpResponse Service::delete_session(const std::string& id) {
    std::shared_ptr<SessionEntry> entry;
    {
        std::unique_lock lock(mutex_);
        auto it = sessions_.find(id);
        if (it == sessions_.end()) throw HttpError(404, "notFound", "unknown session '" + id + "'");
        entry = it->second;
        sessions_.erase(it);
    }
    std::lock_guard lock(entry->mutex);
    append_log(id, end_event());
    HttpResponse r;
    r.status = 204;
    return r;
}

void Service::restore() {
    namespace fs = std::filesystem;
    std::vector<fs::path> modelFiles;
    for (const auto& f : fs::directory_iterator(*options_.dataDir / "models"))
        if (f.path().extension() == ".json") modelFiles.push_back(f.path());
    std::sort(modelFiles.begin(), modelFiles.end());
    for (const auto& path : modelFiles) {
        try {
            register_model(parse_model(read_file(path)));
        } catch (const std::exception& e) {
            std::cerr << "skipping model " << path << ": " << e.what() << "\n";
        }
    }

    std::vector<fs::path> logFiles;
    for (const auto& f : fs::directory_iterator(*options_.dataDir / "sessions"))
        if (f.path().extension() == ".jsonl") logFiles.push_back(f.path());
    std::sort(logFiles.begin(), logFiles.end());
    for (const auto& path : logFiles) {
        try {
            SessionLog log = parse_session_log(read_file(path));
            if (log.ended) continue;
            auto model = find_model(log.modelId);
            auto entry = std::make_shared<SessionEntry>();
            entry->id = log.sessionId.empty() ? path.stem().string() : log.sessionId;
            entry->modelId = log.modelId;
            entry->session.emplace(replay_session(model->model, log, plan_for(*model, log.initial, log.config)));
            entry->lastTouched = options_.clock();
            std::unique_lock lock(mutex_);
            sessions_[entry->id] = entry;
        } catch (const std::exception& e) {
            std::cerr << "skipping session log " << path << ": " << e.what() << "\n";
        }
    }
}

} // namespace fmea
