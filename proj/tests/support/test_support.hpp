#pragma once

#include "fmea/mdp_builder.hpp"
#include "fmea/model.hpp"
#include "fmea/therapy.hpp"

#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace fmea::testing {

std::filesystem::path fixture_path(const std::string& name);
std::string fixture_text(const std::string& name);
FmeaModel fixture_model(const std::string& name);
CompiledModelPtr fixture_compiled(const std::string& name);

/// Model file names in the fixture directory that are expected to validate.
std::vector<std::string> valid_model_fixtures();

struct RandomModelOptions {
    int maxVariables = 4;
    int maxActions = 4;
    int maxFailures = 4;
};

/// Random model that passes validation. Variables are grouped by function in
/// function order, detective actions carry no postconditions.
FmeaModel random_model(std::mt19937_64& rng, const RandomModelOptions& options = {});

/// Random well-formed state within the model's ranges.
State random_state(std::mt19937_64& rng, const FmeaModel& model);

/// Random evidence over a random subset of variables.
Evidence random_evidence(std::mt19937_64& rng, const FmeaModel& model);

/// Compiled MDPs from random models, each with at most `maxStates` states.
std::vector<Mdp> random_small_mdps(std::mt19937_64& rng, std::size_t count, std::size_t maxStates);

/// Two-state, two-action MDP with fixed transition probabilities; reward 10 on
/// every transition into state 1 and 0 into state 0.
Mdp two_state_mdp(double gamma);

State state_of(std::initializer_list<ValueSet> sets);

} // namespace fmea::testing
