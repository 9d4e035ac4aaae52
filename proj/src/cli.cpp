#include "fmea/cli.hpp"

#include "fmea/errors.hpp"
#include "fmea/formats.hpp"
#include "fmea/model_io.hpp"
#include "fmea/therapy.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace fmea {

std::optional<std::string> process_env(const std::string& name) {
    const char* value = std::getenv(name.c_str());
    if (!value) return std::nullopt;
    return std::string(value);
}

namespace {

using nlohmann::json;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Settings {
    double gamma = 0.9;
    double epsilon = 1e-6;
    int maxIter = 100'000;
    double goalReward = 10'000.0;
    std::size_t stateCap = 1'000'000;
    Combination combination = Combination::min;
    int riskOrange = 125;
    int riskRed = 500;
    unsigned threads = 1;
    std::size_t maxSteps = 1000;
};

double to_double(const std::string& text, const std::string& what) {
    try {
        std::size_t used = 0;
        double v = std::stod(text, &used);
        if (used == text.size()) return v;
    } catch (const std::exception&) {
    }
    throw UsageError(what + ": '" + text + "' is not a number");
}

long long to_integer(const std::string& text, const std::string& what) {
    try {
        std::size_t used = 0;
        long long v = std::stoll(text, &used);
        if (used == text.size()) return v;
    } catch (const std::exception&) {
    }
    throw UsageError(what + ": '" + text + "' is not an integer");
}

/// One named setting and how to assign it from text.
struct SettingSlot {
    const char* flag;
    const char* env;
    const char* key;
    const char* help;
    std::function<void(Settings&, const std::string&)> assign;
};

std::vector<SettingSlot> setting_slots() {
    return {
        {"--gamma", "FMEA_GAMMA", "gamma", "Discount factor in [0,1]",
         [](Settings& s, const std::string& v) { s.gamma = to_double(v, "gamma"); }},
        {"--epsilon", "FMEA_EPSILON", "epsilon", "Value iteration stopping residual",
         [](Settings& s, const std::string& v) { s.epsilon = to_double(v, "epsilon"); }},
        {"--max-iter", "FMEA_MAX_ITER", "maxIter", "Value iteration sweep limit",
         [](Settings& s, const std::string& v) {
             long long n = to_integer(v, "max-iter");
             if (n < 1 || n > 1'000'000'000) throw UsageError("max-iter must lie in 1..1e9");
             s.maxIter = static_cast<int>(n);
         }},
        {"--goal-reward", "FMEA_GOAL_REWARD", "goalReward", "Reward for reaching a state without open failures",
         [](Settings& s, const std::string& v) { s.goalReward = to_double(v, "goal-reward"); }},
        {"--state-cap", "FMEA_STATE_CAP", "stateCap", "Maximum number of reachable states",
         [](Settings& s, const std::string& v) {
             long long n = to_integer(v, "state-cap");
             if (n < 1) throw UsageError("state-cap must be positive");
             s.stateCap = static_cast<std::size_t>(n);
         }},
        {"--combination", "FMEA_COMBINATION", "combination", "min or max over the RPNs of several causes",
         [](Settings& s, const std::string& v) {
             auto c = parse_combination(v);
             if (!c) throw UsageError("combination must be min or max");
             s.combination = *c;
         }},
        {"--risk-orange", "FMEA_RISK_ORANGE", "riskOrange", "Smallest sev*occ*det rated orange",
         [](Settings& s, const std::string& v) { s.riskOrange = static_cast<int>(to_integer(v, "risk-orange")); }},
        {"--risk-red", "FMEA_RISK_RED", "riskRed", "Smallest sev*occ*det rated red",
         [](Settings& s, const std::string& v) { s.riskRed = static_cast<int>(to_integer(v, "risk-red")); }},
        {"--threads", "FMEA_THREADS", "threads", "Worker threads per value iteration sweep",
         [](Settings& s, const std::string& v) {
             long long n = to_integer(v, "threads");
             if (n < 1 || n > 256) throw UsageError("threads must lie in 1..256");
             s.threads = static_cast<unsigned>(n);
         }},
        {"--max-steps", "FMEA_MAX_STEPS", "maxSteps", "Step limit of a therapy",
         [](Settings& s, const std::string& v) {
             long long n = to_integer(v, "max-steps");
             if (n < 0) throw UsageError("max-steps must not be negative");
             s.maxSteps = static_cast<std::size_t>(n);
         }},
    };
}

void check_settings(const Settings& s) {
    if (!(s.gamma >= 0.0 && s.gamma <= 1.0)) throw UsageError("gamma must lie in [0,1]");
    if (!(s.epsilon > 0.0)) throw UsageError("epsilon must be positive");
    if (!(s.goalReward > RewardParams::rpnMax)) throw UsageError("goal-reward must exceed 1000");
    if (s.riskOrange > s.riskRed) throw UsageError("risk-orange must not exceed risk-red");
}

std::string json_scalar_text(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

SessionConfig session_config(const Settings& s) {
    SessionConfig config;
    config.gamma = s.gamma;
    config.reward.goalReward = s.goalReward;
    config.reward.combination = s.combination;
    config.solve.epsilon = s.epsilon;
    config.solve.maxIter = s.maxIter;
    config.solve.threads = s.threads;
    config.build.stateCap = s.stateCap;
    config.maxSteps = s.maxSteps;
    config.risk = RiskMatrix::product_thresholds(s.riskOrange, s.riskRed);
    return config;
}

FmeaModel load_model(const std::string& path) { return parse_model(read_file(path)); }

GoalSet parse_goals(const std::vector<std::string>& specs, const FmeaModel& model) {
    if (specs.empty()) return GoalSet::open_failures_ruled_out();
    GoalSet goals;
    for (const auto& spec : specs) {
        if (spec == "all-normal") goals.states.push_back(GoalSet::all_normal(model).states.front());
        else if (spec == "no-open-failures") goals.noOpenFailures = true;
        else goals.states.push_back(initial_state(model, parse_evidence(spec)));
    }
    return goals;
}

double parse_theta(const std::string& text) {
    if (text.empty() || text == "inf") return std::numeric_limits<double>::infinity();
    return to_double(text, "theta");
}

void write_output(const std::string& path, const std::string& content, std::ostream& out) {
    if (path.empty() || path == "-") out << content;
    else write_file(path, content);
}

void print_error(std::ostream& err, bool asJson, const std::string& type, const std::string& message,
                 json details = json::object()) {
    if (asJson) {
        details["type"] = type;
        details["message"] = message;
        err << json{{"error", details}}.dump() << "\n";
    } else {
        err << "error: " << message << "\n";
    }
}

void print_report(std::ostream& out, const ValidationReport& report) {
    for (const auto& v : report) {
        out << v.rule << ": " << v.message;
        if (!v.entities.empty()) {
            out << " [";
            for (std::size_t i = 0; i < v.entities.size(); ++i) out << (i ? ", " : "") << v.entities[i];
            out << "]";
        }
        out << "\n";
    }
}

void print_recommendation(std::ostream& out, const TherapySession& session, const Recommendation& rec) {
    out << "state " << to_string(session.current()) << "\n";
    for (const auto& r : rec.stateRisk) out << "  open " << r.failure << " (" << to_string(r.color) << ")\n";
    if (!rec.action) {
        out << "recommend stop\n";
        return;
    }
    out << "recommend " << *rec.action << " (" << to_string(*rec.kind) << ", success " << rec.successProbability
        << ")\n";
    for (const auto& b : rec.outcomes)
        out << "  " << std::left << std::setw(8) << to_string(b.outcome) << " p=" << b.probability << " -> "
            << to_string(b.state) << "\n";
}

void print_steps(std::ostream& out, const std::vector<TherapyStep>& steps) {
    out << std::left << std::setw(6) << "step" << std::setw(10) << "action" << std::setw(10) << "outcome"
        << std::setw(10) << "reward" << "state\n";
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const auto& s = steps[i];
        std::ostringstream reward;
        reward << s.reward;
        out << std::left << std::setw(6) << (i + 1) << std::setw(10) << s.action << std::setw(10)
            << to_string(s.outcome) << std::setw(10) << reward.str() << to_string(s.after) << "\n";
    }
}

std::string join_actions(const std::vector<std::string>& actions) {
    std::string line;
    for (std::size_t i = 0; i < actions.size(); ++i) line += (i ? " " : "") + actions[i];
    return line;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err,
            const EnvLookup& env) {
    CLI::App app{"Planning engine for extended FMEA models", "fmea"};
    app.require_subcommand(1);
    app.fallthrough();

    auto slots = setting_slots();
    std::vector<std::string> flagValues(slots.size());
    std::vector<CLI::Option*> flagOptions;
    for (std::size_t i = 0; i < slots.size(); ++i)
        flagOptions.push_back(app.add_option(slots[i].flag, flagValues[i], slots[i].help));
    std::string configPath;
    bool asJson = false;
    app.add_option("--config", configPath, "JSON settings file");
    app.add_flag("--json", asJson, "Machine-readable output and errors");

    std::string input;
    std::string outPath;
    std::string evidenceText;
    std::string patientPath;
    std::string thetaText;
    std::string logPath;
    std::vector<std::string> goalSpecs;

    auto* validate = app.add_subcommand("validate", "Check a model and print its validation report");
    validate->add_option("model", input)->required();

    auto* risk = app.add_subcommand("risk", "Print the class-level risk color");
    risk->add_option("model", input)->required();

    auto* build = app.add_subcommand("build", "Compile a model into an MDP document");
    build->add_option("model", input)->required();
    build->add_option("--evidence", evidenceText, "v1=tooHigh,v2=normal|tooLow");
    build->add_option("--out", outPath);

    auto* solve = app.add_subcommand("solve", "Solve an MDP or model and write the policy");
    solve->add_option("input", input)->required();
    solve->add_option("--evidence", evidenceText);
    solve->add_option("--out", outPath);

    auto* therapy = app.add_subcommand("therapy", "Compute an optimal therapy from patient data");
    therapy->add_option("model", input)->required();
    therapy->add_option("--patient", patientPath)->required();
    therapy->add_option("--goal", goalSpecs, "all-normal, no-open-failures, or v1=normal,v2=normal");
    therapy->add_option("--theta", thetaText);
    therapy->add_option("--evidence", evidenceText);
    therapy->add_option("--out", outPath);

    auto* session = app.add_subcommand("session", "Interactive therapy session on stdin");
    session->add_option("model", input)->required();
    session->add_option("--goal", goalSpecs);
    session->add_option("--theta", thetaText);
    session->add_option("--evidence", evidenceText);
    session->add_option("--log", logPath, "Append the session event log to this file");

    auto* dot = app.add_subcommand("export-dot", "Print the model as a Graphviz digraph");
    dot->add_option("model", input)->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        Settings settings;
        if (configPath.empty()) configPath = env("FMEA_CONFIG").value_or("");
        if (!configPath.empty()) {
            LocatedJson doc = LocatedJson::parse(read_file(configPath));
            for (const auto& [key, value] : JsonNode::root(doc).members()) {
                auto slot = std::find_if(slots.begin(), slots.end(), [&](const SettingSlot& s) { return key == s.key; });
                if (slot == slots.end()) throw UsageError("unknown setting '" + key + "' in " + configPath);
                slot->assign(settings, json_scalar_text(value.raw()));
            }
        }
        for (const auto& slot : slots)
            if (auto v = env(slot.env)) slot.assign(settings, *v);
        for (std::size_t i = 0; i < slots.size(); ++i)
            if (flagOptions[i]->count() > 0) slots[i].assign(settings, flagValues[i]);
        check_settings(settings);
        SessionConfig config = session_config(settings);

        if (*validate) {
            FmeaModel model = parse_model_document(read_file(input));
            auto report = validate_model(model);
            if (asJson) out << validation_report_to_json(report).dump(2) << "\n";
            else if (report.empty()) out << "valid\n";
            else print_report(out, report);
            return report.empty() ? 0 : 1;
        }

        if (*risk) {
            FmeaModel model = load_model(input);
            RiskColor color = class_level_risk(model, config.risk);
            if (asJson) {
                json failures = json::array();
                for (const auto& e : model.failures)
                    failures.push_back({{"failure", e.id},
                                        {"product", e.sev * e.occ * e.det},
                                        {"color", std::string(to_string(config.risk(e.sev, e.occ, e.det)))}});
                out << json{{"risk", std::string(to_string(color))}, {"failures", failures}}.dump(2) << "\n";
            } else {
                out << to_string(color) << "\n";
            }
            return 0;
        }

        if (*build) {
            CompiledModel cm(load_model(input));
            State s0 = initial_state(cm.model(), parse_evidence(evidenceText));
            Mdp mdp = build_mdp(cm, s0, config.gamma, config.reward, config.build);
            write_output(outPath, dump_canonical(mdp_to_json(mdp)), out);
            return 0;
        }

        if (*solve) {
            std::string text = read_file(input);
            LocatedJson doc = LocatedJson::parse(text);
            Mdp mdp;
            if (doc.root().is_object() && doc.root().contains("transitions")) {
                mdp = mdp_from_json(doc);
                if (flagOptions[0]->count() > 0 || env("FMEA_GAMMA")) mdp.gamma = config.gamma;
            } else {
                FmeaModel model = model_from_json(doc);
                CompiledModel cm(std::move(model));
                State s0 = initial_state(cm.model(), parse_evidence(evidenceText));
                mdp = build_mdp(cm, s0, config.gamma, config.reward, config.build);
            }
            auto solution = value_iteration(mdp, config.solve);
            auto policy = extract_policy(mdp, solution.values);
            std::string document = dump_canonical(policy_to_json(mdp, solution, policy));
            if (outPath.empty() || outPath == "-") {
                out << document;
            } else {
                write_file(outPath, document);
                out << "states " << mdp.state_count() << ", iterations " << solution.iterations << ", residual "
                    << solution.residual << "\n";
            }
            return 0;
        }

        if (*therapy) {
            auto cm = compile(load_model(input));
            State s0 = initial_state(cm->model(), parse_evidence(evidenceText));
            GoalSet goals = parse_goals(goalSpecs, cm->model());
            config.theta = parse_theta(thetaText);
            PatientData data = parse_patient_data(read_file(patientPath));
            TherapyResult result = optimal_therapy(cm, s0, goals, data, config);
            json doc = therapy_to_json(*cm, result);
            if (!outPath.empty()) write_file(outPath, dump_canonical(doc));
            if (asJson) {
                out << dump_canonical(doc);
            } else {
                out << join_actions(result.actions) << "\n";
                print_steps(out, result.steps);
                out << "status " << to_string(result.status) << "\n";
            }
            return 0;
        }

        if (*session) {
            auto cm = compile(load_model(input));
            State s0 = initial_state(cm->model(), parse_evidence(evidenceText));
            GoalSet goals = parse_goals(goalSpecs, cm->model());
            config.theta = parse_theta(thetaText);
            auto live = TherapySession::start(cm, s0, goals, config);
            std::ofstream log;
            if (!logPath.empty()) {
                log.open(logPath, std::ios::app);
                if (!log) throw StructuralError("cannot open log '" + logPath + "'");
                log << start_event("cli", cm->model().name, live) << std::flush;
            }
            std::string line;
            while (live.status() == SessionStatus::running) {
                Recommendation rec = live.recommend();
                print_recommendation(out, live, rec);
                out << "outcome> " << std::flush;
                if (!std::getline(in, line)) {
                    out << "\n";
                    break;
                }
                line.erase(0, line.find_first_not_of(" \t\r"));
                line.erase(line.find_last_not_of(" \t\r") + 1);
                if (line == "quit" || line == "q") break;
                auto outcome = parse_outcome(line);
                if (!outcome) {
                    out << "unknown outcome '" << line << "'\n";
                    continue;
                }
                try {
                    std::size_t step = live.step();
                    live.apply_outcome(*rec.action, *outcome);
                    if (log.is_open()) log << outcome_event(step, *rec.action, *outcome) << std::flush;
                } catch (const InconsistentEvidenceError& ex) {
                    out << "rejected: " << ex.what() << "\n";
                }
            }
            std::vector<std::string> actions;
            for (const auto& s : live.history()) actions.push_back(s.action);
            out << "state " << to_string(live.current()) << "\n";
            out << "status " << to_string(live.status()) << "\n";
            out << "therapy " << join_actions(actions) << "\n";
            if (log.is_open()) log << end_event();
            return 0;
        }

        if (*dot) {
            out << export_dot(load_model(input));
            return 0;
        }
    } catch (const UsageError& e) {
        print_error(err, asJson, "usage", e.what());
        return 2;
    } catch (const ParseError& e) {
        print_error(err, asJson, e.kind() == ParseError::Kind::syntax ? "syntax" : "schema", e.what(),
                    {{"line", e.line()}, {"column", e.column()}, {"pointer", e.pointer()}});
        return 1;
    } catch (const ValidationError& e) {
        if (!asJson) print_report(err, e.report());
        print_error(err, asJson, "validation", e.what(), {{"report", validation_report_to_json(e.report())}});
        return 1;
    } catch (const MissingOutcomeError& e) {
        print_error(err, asJson, "missingOutcome", e.what(), {{"action", e.action()}});
        return 1;
    } catch (const Error& e) {
        print_error(err, asJson, "domain", e.what());
        return 1;
    } catch (const std::exception& e) {
        print_error(err, asJson, "internal", e.what());
        return 1;
    }
    return 2;
}

} // namespace fmea
