#pragma once

#include "fmea/located_json.hpp"
#include "fmea/mdp_builder.hpp"
#include "fmea/solver.hpp"
#include "fmea/therapy.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace fmea {

/// {"v1": ["normal", "tooHigh"], ...}
nlohmann::json state_to_json(const std::vector<std::string>& variables, const State& s);
State state_from_json(const JsonNode& node, const std::vector<std::string>& variables);

/// [["normal", "tooHigh"], ...] in variable order.
nlohmann::json state_to_array(const State& s);
State state_from_array(const JsonNode& node);

/// "v1=tooHigh,v2=normal|tooLow". Throws StructuralError on malformed text.
Evidence parse_evidence(std::string_view text);

nlohmann::json mdp_to_json(const Mdp& mdp);
Mdp mdp_from_json(const LocatedJson& doc);
Mdp parse_mdp(std::string_view text);

nlohmann::json policy_to_json(const Mdp& mdp, const ValueIterationResult& solution, const Policy& policy);

/// {"d1": ["tooHigh"], "p1": ["success"]}
PatientData parse_patient_data(std::string_view text);
nlohmann::json patient_data_to_json(const PatientData& data);

nlohmann::json validation_report_to_json(const ValidationReport& report);
nlohmann::json therapy_to_json(const CompiledModel& cm, const TherapyResult& result);
nlohmann::json step_to_json(const CompiledModel& cm, const TherapyStep& step, std::size_t index);
nlohmann::json recommendation_to_json(const CompiledModel& cm, const Recommendation& rec);

nlohmann::json goals_to_json(const CompiledModel& cm, const GoalSet& goals);
GoalSet goals_from_json(const JsonNode& node, const FmeaModel& model);

/// Config fields that affect a session's trajectory, plus the risk matrix.
nlohmann::json session_config_to_json(const SessionConfig& config);
SessionConfig session_config_from_json(const JsonNode& node);

/// Append-only session event log, one JSON object per line:
///   {"event":"start", "modelId", "initialState", "goals", "config"}
///   {"event":"outcome", "step", "action", "outcome"}
///   {"event":"end"}
struct SessionLog {
    struct OutcomeEvent {
        std::size_t step;
        std::string action;
        Outcome outcome;
    };

    std::string sessionId;
    std::string modelId;
    State initial;
    nlohmann::json goals;
    SessionConfig config;
    std::vector<OutcomeEvent> outcomes;
    bool ended = false;
};

std::string start_event(const std::string& sessionId, const std::string& modelId, const TherapySession& session);
std::string outcome_event(std::size_t step, std::string_view action, Outcome outcome);
std::string end_event();

/// Parses a whole log. A truncated trailing line is ignored.
SessionLog parse_session_log(std::string_view text);

/// Rebuilds the session by re-applying every logged outcome. `plan` may be a
/// cached plan for the same key; otherwise the MDP is solved afresh.
TherapySession replay_session(CompiledModelPtr model, const SessionLog& log, SolvedPlanPtr plan = nullptr);

} // namespace fmea
