#include "fmea/errors.hpp"
#include "fmea/mdp_builder.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <set>

using namespace fmea;
using testing::state_of;

namespace {

constexpr ValueSet N{Value::normal};
constexpr ValueSet H{Value::tooHigh};
constexpr ValueSet L{Value::tooLow};
constexpr ValueSet NH{Value::normal, Value::tooHigh};
constexpr ValueSet LN{Value::tooLow, Value::normal};

double probability_of(const std::vector<WeightedState>& dist, const State& s) {
    for (const auto& w : dist)
        if (w.state == s) return w.probability;
    return 0.0;
}

FmeaModel single_variable_model() {
    FmeaModel m;
    m.components = {{"c1", ""}};
    m.functions = {{"f1", "", "c1"}};
    m.variables = {{"v1", "", "f1", ValueSet::full()}};
    return m;
}

} // namespace

TEST_SUITE("mdp_builder") {

TEST_CASE("initial state from evidence") {
    auto m = testing::fixture_model("pulmonary_edema.json");
    CHECK(initial_state(m) == state_of({NH, LN}));
    CHECK(initial_state(m, {{"v2", L}}) == state_of({NH, L}));
    CHECK_THROWS_AS(initial_state(m, {{"v7", N}}), StructuralError);
    CHECK_THROWS_AS(initial_state(m, {{"v1", ValueSet{}}}), StructuralError);
    CHECK_THROWS_AS(initial_state(m, {{"v1", L}}), StructuralError);
}

TEST_CASE("full state space sizes") {
    CHECK(enumerate_full_state_space(single_variable_model()).size() == 7);
    auto edema = enumerate_full_state_space(testing::fixture_model("pulmonary_edema.json"));
    CHECK(edema.size() == 9);
    std::set<State> distinct(edema.begin(), edema.end());
    CHECK(distinct.size() == 9);
    for (const auto& s : edema) CHECK(s.well_formed());
}

TEST_CASE("success probabilities") {
    auto m = testing::fixture_model("pulmonary_edema.json");
    CHECK(action_success_prob(m, m.actions[0]) == doctest::Approx(1.0 / 9.0));
    CHECK(action_success_prob(m, m.actions[1]) == doctest::Approx(6.0 / 9.0));
    m.actions[1].probability = 0.25;
    CHECK(action_success_prob(m, m.actions[1]) == 0.25);
}

TEST_CASE("lung ultrasound transition from the initial state") {
    auto cm = testing::fixture_compiled("pulmonary_edema.json");
    State start = state_of({NH, LN});
    auto dist = transition(*cm, start, 0);
    REQUIRE(dist.size() == 3);
    CHECK(probability_of(dist, state_of({N, N})) == doctest::Approx(1.0 / 18.0).epsilon(1e-12));
    CHECK(probability_of(dist, state_of({H, L})) == doctest::Approx(1.0 / 18.0).epsilon(1e-12));
    CHECK(probability_of(dist, start) == doctest::Approx(16.0 / 18.0).epsilon(1e-12));

    auto branches = outcome_distribution(*cm, start, 0);
    REQUIRE(branches.size() == 3);
    CHECK(branches[2].outcome == Outcome::failure);
    CHECK(transition(*cm, start, 1).empty());
}

TEST_CASE("reward of the edema states") {
    auto cm = testing::fixture_compiled("pulmonary_edema.json");
    State start = state_of({NH, LN});
    RewardParams params;
    CHECK(reward(*cm, start, state_of({H, L}), params) == 275.0);
    CHECK(reward(*cm, start, state_of({N, N}), params) == params.goalReward);
    CHECK(reward(*cm, start, start, params) == 0.0);
    CHECK(failures_not_ruled_out(*cm, state_of({H, L})) == std::vector<std::size_t>{0, 1});
    CHECK(failures_not_ruled_out(*cm, state_of({N, L})) == std::vector<std::size_t>{1});
    CHECK(rpn(*cm, 0, state_of({H, L})) == 0.0);
    CHECK(rpn(*cm, 1, state_of({H, L})) == 700.0);
    // detection gate open while v1 is still uncertain
    CHECK(rpn(*cm, 1, state_of({NH, L})) == 7.0 * 10.0 * 9.0);
    // prevention gate open once v1 is known normal
    CHECK(rpn(*cm, 1, state_of({N, L})) == 7.0 * 4.0 * 10.0);
}

TEST_CASE("reward example with a detective action") {
    auto cm = testing::fixture_compiled("reward_example.json");
    State s0 = initial_state(cm->model());
    RewardParams params;
    CHECK(reward(*cm, s0, state_of({H, H}), params) == 600.0);
    CHECK(reward(*cm, s0, state_of({N, N}), params) == params.goalReward);
}

TEST_CASE("prevention example transition") {
    auto cm = testing::fixture_compiled("prevention_example.json");
    State s = state_of({H, N});
    auto dist = transition(*cm, s, 0);
    CHECK(probability_of(dist, state_of({N, N})) == 1.0);
    CHECK(probability_of(dist, s) == 0.0);
}

TEST_CASE("combination of several causes") {
    auto m = testing::fixture_model("three_stage_chain.json");
    m.failureHierarchy = {{"e1", "e3"}, {"e2", "e3"}};
    m.failures[0].det = 2;
    m.failures[1].det = 8;
    m.actions = {{"d1", "", ActionKind::detective, "e1", "e3", {}, {}, {}},
                 {"d2", "", ActionKind::detective, "e2", "e3", {}, {}, {}}};
    m.qualitativeEdges.clear();
    auto cm = compile(m);
    State s = state_of({NH, NH, NH});
    CHECK(rpn(*cm, 2, s, Combination::min) == 100.0);
    CHECK(rpn(*cm, 2, s, Combination::max) == 400.0);
    CHECK(parse_combination("max") == Combination::max);
    CHECK_FALSE(parse_combination("avg"));
}

TEST_CASE("prevention gate in the chain") {
    auto cm = testing::fixture_compiled("three_stage_chain.json");
    CHECK(rpn(*cm, 2, state_of({H, N, H})) == 250.0);
    CHECK(rpn(*cm, 2, state_of({H, H, H})) == 500.0);
}

TEST_CASE("reachable states and MDP layout") {
    auto cm = testing::fixture_compiled("pulmonary_edema.json");
    State start = state_of({NH, LN});
    auto states = enumerate_states(*cm, start);
    REQUIRE(states.size() == 3);
    CHECK(states[0] == start);
    CHECK(states[1] == state_of({N, N}));
    CHECK(states[2] == state_of({H, L}));
    CHECK_THROWS_AS(enumerate_states(*cm, start, 2), CapacityError);

    auto mdp = build_mdp(*cm, start, 0.9);
    CHECK(mdp.variables == std::vector<std::string>{"v1", "v2"});
    CHECK(mdp.actions == std::vector<std::string>{"d1", "p1"});
    CHECK(mdp.goal == std::vector<bool>{false, true, false});
    CHECK(mdp.applicable(0, 0));
    CHECK_FALSE(mdp.applicable(0, 1));
    CHECK_FALSE(mdp.applicable(2, 0));
    CHECK(mdp.applicable(2, 1));
    for (std::size_t a = 0; a < 2; ++a) {
        REQUIRE(mdp.applicable(1, a));
        const auto& row = *mdp.transitions[1][a];
        REQUIRE(row.size() == 1);
        CHECK(row[0].state == 1u);
        CHECK(row[0].probability == 1.0);
        CHECK(row[0].reward == 0.0);
    }
    CHECK(mdp.find_state(state_of({H, L})) == 2u);
    CHECK(mdp.find_action("p1") == 1u);
    CHECK_THROWS_AS(build_mdp(*cm, state_of({L, L}), 0.9), StructuralError);
}

TEST_CASE("goal reward must exceed the largest regular reward") {
    RewardParams p;
    p.goalReward = 1000.0;
    CHECK_THROWS_AS(p.check(), StructuralError);
    p.goalReward = 1000.5;
    CHECK_NOTHROW(p.check());
}

}
