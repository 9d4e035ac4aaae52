#include "fmea/errors.hpp"
#include "fmea/model.hpp"
#include "fmea/qualitative_graph.hpp"
#include "fmea/successors.hpp"

#include "test_support.hpp"

#include <doctest.h>

using namespace fmea;
using testing::state_of;

namespace {

constexpr ValueSet N{Value::normal};
constexpr ValueSet H{Value::tooHigh};
constexpr ValueSet L{Value::tooLow};
constexpr ValueSet NH{Value::normal, Value::tooHigh};
constexpr ValueSet LN{Value::tooLow, Value::normal};

} // namespace

TEST_SUITE("qualitative") {

TEST_CASE("graph structure") {
    QualitativeGraph g({"b", "a", "c"}, {{0, 2, Sign::plus}, {0, 1, Sign::minus}, {1, 2, Sign::unknown}});
    CHECK(g.size() == 3);
    CHECK(g.edge_count() == 3);
    CHECK(g.index_of("c") == 2u);
    CHECK(g.label(0, 1) == Sign::minus);
    CHECK_FALSE(g.label(2, 0));
    REQUIRE(g.children(0).size() == 2);
    CHECK(g.children(0)[0].node == 1u);  // "a" sorts before "c"
    CHECK(g.parents(2).size() == 2);
    auto cut = g.without_incoming(2);
    CHECK(cut.edge_count() == 1);
    CHECK(cut.parents(2).empty());
    CHECK_THROWS_AS(QualitativeGraph({"a", "b"}, {{0, 1, Sign::plus}, {0, 1, Sign::minus}}), StructuralError);
    CHECK_THROWS_AS(QualitativeGraph({"a"}, {{0, 3, Sign::plus}}), StructuralError);
}

TEST_CASE("conflicting parents give an unknown sign") {
    QualitativeGraph g({"v1", "v2", "v3"}, {{0, 2, Sign::plus}, {1, 2, Sign::minus}});
    State s = state_of({H, H, N});
    auto signs = propagate(g, s, "v1", Sign::plus);
    CHECK(signs[0] == Sign::plus);
    CHECK(signs[1] == Sign::plus);
    CHECK(signs[2] == Sign::unknown);
}

TEST_CASE("propagation along a chain and through cycles") {
    QualitativeGraph chain({"v1", "v2", "v3"}, {{0, 1, Sign::plus}, {1, 2, Sign::minus}});
    auto signs = propagate(chain, state_of({N, N, N}), 0, Sign::plus);
    CHECK(signs == SignMap{Sign::plus, Sign::plus, Sign::minus});

    QualitativeGraph cycle({"v1", "v2"}, {{0, 1, Sign::plus}, {1, 0, Sign::minus}});
    signs = propagate(cycle, state_of({N, N}), 0, Sign::plus);
    CHECK(signs[1] == Sign::plus);

    CHECK_THROWS_AS(propagate(chain, state_of({N, N, N}), "v7", Sign::plus), StructuralError);
}

TEST_CASE("children whose sign already matches are not revisited") {
    QualitativeGraph g({"v1", "v2", "v3"}, {{0, 1, Sign::plus}, {1, 2, Sign::plus}});
    // v2 already '+', so the message stops there and v3 keeps its own sign
    auto signs = propagate(g, state_of({N, H, L}), 0, Sign::plus);
    CHECK(signs == SignMap{Sign::plus, Sign::plus, Sign::minus});
}

TEST_CASE("preventive action in the three stage chain") {
    auto cm = testing::fixture_compiled("three_stage_chain.json");
    State s = state_of({H, H, H});
    auto succ = successor_states(*cm, 0, s);
    REQUIRE(succ.applicable);
    REQUIRE(succ.states.size() == 1);
    CHECK(succ.states[0] == state_of({H, N, N}));
}

TEST_CASE("detective outcomes in the edema model") {
    auto cm = testing::fixture_compiled("pulmonary_edema.json");
    State start = state_of({NH, LN});
    auto outcomes = action_outcomes(*cm, 0, start);
    REQUIRE(outcomes.size() == 2);
    CHECK(outcomes[0].outcome == Outcome::normal);
    CHECK(outcomes[0].state == state_of({N, N}));
    CHECK(outcomes[1].outcome == Outcome::tooHigh);
    CHECK(outcomes[1].state == state_of({H, L}));
}

TEST_CASE("detection never adds values outside the current possibilities") {
    auto cm = testing::fixture_compiled("pulmonary_edema.json");
    auto outcomes = action_outcomes(*cm, 0, state_of({NH, N}));
    REQUIRE(outcomes.size() == 2);
    CHECK(outcomes[1].state == state_of({H, N}));
}

TEST_CASE("applicability") {
    auto cm = testing::fixture_compiled("pulmonary_edema.json");
    CHECK(is_applicable(*cm, 0, state_of({NH, LN})));
    CHECK_FALSE(is_applicable(*cm, 0, state_of({H, LN})));
    CHECK_FALSE(is_applicable(*cm, 1, state_of({NH, LN})));
    CHECK(is_applicable(*cm, 1, state_of({H, L})));
    auto succ = successor_states(*cm, 1, state_of({NH, LN}));
    CHECK_FALSE(succ.applicable);
    CHECK(succ.states.empty());
}

TEST_CASE("postconditions are applied after propagation") {
    auto m = testing::fixture_model("pulmonary_edema.json");
    m.actions[1].post.push_back({"v2", Value::tooLow});
    auto cm = compile(m);
    State edema = state_of({H, L});
    CHECK(apply_postconditions(*cm, 1, edema) == edema);
    auto succ = successor_states(*cm, 1, edema);
    REQUIRE(succ.states.size() == 1);
    CHECK(succ.states[0] == state_of({N, L}));
}

TEST_CASE("unknown edge labels leave the target untouched") {
    auto m = testing::fixture_model("pulmonary_edema.json");
    m.qualitativeEdges[0].label = Sign::unknown;
    auto cm = compile(m);
    auto outcomes = action_outcomes(*cm, 0, state_of({NH, LN}));
    REQUIRE(outcomes.size() == 2);
    CHECK(outcomes[0].state == state_of({N, N}));
    CHECK(outcomes[1].state == state_of({H, LN}));
}

}
