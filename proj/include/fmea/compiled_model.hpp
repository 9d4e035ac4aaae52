#pragma once

#include "fmea/model.hpp"
#include "fmea/qualitative_graph.hpp"

#include <cstddef>
#include <memory>
#include <vector>

namespace fmea {

/// A validated model with id lookups resolved to indices.
///
/// Immutable after construction and safe to share between threads.
class CompiledModel {
public:
    struct ActionInfo {
        std::size_t variable;  // variable of the cause failure; the one the action acts on
        std::size_t cause;
        std::size_t effect;
        double successProb;
    };

    /// One incoming edge (cause, effect) of the failure hierarchy with its attached actions.
    struct CauseLink {
        std::size_t cause;
        std::vector<std::size_t> detective;
        std::vector<std::size_t> preventive;
    };

    /// Throws ValidationError if the model is not valid.
    explicit CompiledModel(FmeaModel model);

    const FmeaModel& model() const { return model_; }
    const QualitativeGraph& graph() const { return graph_; }
    /// The graph with every edge into variable v cut.
    const QualitativeGraph& intervention_graph(std::size_t v) const { return cutGraphs_[v]; }

    std::size_t variable_count() const { return model_.variables.size(); }
    std::size_t action_count() const { return model_.actions.size(); }
    std::size_t failure_count() const { return model_.failures.size(); }

    const Action& action(std::size_t a) const { return model_.actions[a]; }
    const ActionInfo& action_info(std::size_t a) const { return actions_[a]; }
    const Failure& failure(std::size_t e) const { return model_.failures[e]; }
    std::size_t failure_variable(std::size_t e) const { return failureVariable_[e]; }
    const std::vector<CauseLink>& causes(std::size_t e) const { return causes_[e]; }
    ValueSet range(std::size_t v) const { return model_.variables[v].range; }

    /// Action indices sorted by id; used for deterministic tie-breaking.
    const std::vector<std::size_t>& actions_by_id() const { return actionsById_; }

private:
    FmeaModel model_;
    QualitativeGraph graph_;
    std::vector<QualitativeGraph> cutGraphs_;
    std::vector<ActionInfo> actions_;
    std::vector<std::size_t> failureVariable_;
    std::vector<std::vector<CauseLink>> causes_;
    std::vector<std::size_t> actionsById_;
};

using CompiledModelPtr = std::shared_ptr<const CompiledModel>;

inline CompiledModelPtr compile(FmeaModel model) {
    return std::make_shared<const CompiledModel>(std::move(model));
}

} // namespace fmea
