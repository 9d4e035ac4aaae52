#include "fmea/compiled_model.hpp"

#include "fmea/errors.hpp"
#include "fmea/mdp_builder.hpp"

#include <algorithm>
#include <numeric>

namespace fmea {

CompiledModel::CompiledModel(FmeaModel model) : model_(std::move(model)) {
    auto report = validate_model(model_);
    if (!report.empty()) throw ValidationError(std::move(report));

    graph_ = QualitativeGraph::from_model(model_);
    for (std::size_t v = 0; v < model_.variables.size(); ++v) cutGraphs_.push_back(graph_.without_incoming(v));

    for (const auto& e : model_.failures) failureVariable_.push_back(*model_.variable_index(e.variable));

    causes_.resize(model_.failures.size());
    for (const auto& edge : model_.failureHierarchy) {
        std::size_t cause = *model_.failure_index(edge.from);
        std::size_t effect = *model_.failure_index(edge.to);
        auto& links = causes_[effect];
        if (std::none_of(links.begin(), links.end(), [&](const CauseLink& l) { return l.cause == cause; }))
            links.push_back({cause, {}, {}});
    }

    for (std::size_t a = 0; a < model_.actions.size(); ++a) {
        const Action& action = model_.actions[a];
        std::size_t cause = *model_.failure_index(action.cause);
        std::size_t effect = *model_.failure_index(action.effect);
        actions_.push_back({failureVariable_[cause], cause, effect, action_success_prob(model_, action)});
        for (auto& link : causes_[effect]) {
            if (link.cause != cause) continue;
            (action.kind == ActionKind::detective ? link.detective : link.preventive).push_back(a);
        }
    }

    actionsById_.resize(model_.actions.size());
    std::iota(actionsById_.begin(), actionsById_.end(), 0);
    std::sort(actionsById_.begin(), actionsById_.end(),
              [&](std::size_t a, std::size_t b) { return model_.actions[a].id < model_.actions[b].id; });
}

} // namespace fmea
