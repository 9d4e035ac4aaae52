#include "fmea/errors.hpp"
#include "fmea/located_json.hpp"
#include "fmea/model_io.hpp"

#include "test_support.hpp"

#include <doctest.h>

using namespace fmea;

namespace {

ParseError parse_failure(const std::string& text) {
    try {
        parse_model_document(text);
    } catch (const ParseError& e) {
        return e;
    }
    FAIL("expected a ParseError");
    throw;
}

} // namespace

TEST_SUITE("model_io") {

TEST_CASE("fixtures round trip byte for byte") {
    for (const auto& name : testing::valid_model_fixtures()) {
        CAPTURE(name);
        auto text = testing::fixture_text(name);
        CHECK(serialize_model(parse_model(text)) == text);
    }
    auto broken = testing::fixture_text("broken.json");
    CHECK(serialize_model(parse_model_document(broken)) == broken);
}

TEST_CASE("edema fixture content") {
    auto m = testing::fixture_model("pulmonary_edema.json");
    CHECK(m.name == "pulmonary edema");
    REQUIRE(m.failures.size() == 2);
    CHECK(m.failures[0].label == "Interstitial pulmonary edema");
    CHECK(m.failures[0].failureProb == 0.4);
    CHECK(m.failures[1].sev == 7);
    CHECK(m.failures[1].mode == FailureMode::leftCritical);
    CHECK(m.actions[1].pre == Condition::eq("v1", Value::tooHigh));
    REQUIRE(m.qualitativeEdges.size() == 1);
    CHECK(m.qualitativeEdges[0].label == Sign::minus);
}

TEST_CASE("random models round trip") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 100; ++i) {
        auto m = testing::random_model(rng);
        REQUIRE(validate_model(m).empty());
        auto text = serialize_model(m);
        auto back = parse_model(text);
        CHECK(back == m);
        CHECK(serialize_model(back) == text);
    }
}

TEST_CASE("syntax errors are located") {
    auto e = parse_failure("{\n  \"schemaVersion\": 1,\n  \"name\": }\n");
    CHECK(e.kind() == ParseError::Kind::syntax);
    CHECK(e.line() == 3);
}

TEST_CASE("schema errors carry a pointer") {
    auto text = testing::fixture_text("pulmonary_edema.json");
    auto bad = text;
    bad.replace(bad.find("\"sev\": 5"), 8, "\"sev\": \"5\"");
    auto e = parse_failure(bad);
    CHECK(e.kind() == ParseError::Kind::schema);
    CHECK(e.pointer() == "/failures/0/sev");
    CHECK(e.line() > 1);

    bad = text;
    bad.replace(bad.find("\"mode\": \"leftCritical\""), 22, "\"mode\": \"sideways\"");
    CHECK(parse_failure(bad).pointer() == "/failures/1/mode");

    bad = text;
    bad.replace(bad.find("\"label\": \"-\""), 12, "\"label\": \"x\"");
    CHECK(parse_failure(bad).pointer() == "/qualitativeEdges/0/label");

    bad = text;
    bad.replace(bad.find("\"pre\": \"eq(v1,tooHigh)\""), 23, "\"pre\": \"eq(v1,\"");
    CHECK(parse_failure(bad).pointer() == "/actions/1/pre");
}

TEST_CASE("unknown keys, duplicates and versions are rejected") {
    auto e = parse_failure(R"({"schemaVersion": 1, "name": "x", "extra": true, "components": [], "functions": []})");
    CHECK(e.kind() == ParseError::Kind::schema);
    CHECK(e.pointer() == "/extra");

    e = parse_failure(R"({"schemaVersion": 1, "schemaVersion": 1, "components": [], "functions": []})");
    CHECK(e.kind() == ParseError::Kind::schema);

    e = parse_failure(R"({"schemaVersion": 2, "components": [], "functions": []})");
    CHECK(e.pointer() == "/schemaVersion");

    e = parse_failure(R"({"components": [], "functions": []})");
    CHECK(e.kind() == ParseError::Kind::schema);

    CHECK_THROWS_AS(parse_model_document("   "), ParseError);
}

TEST_CASE("semantic errors surface as a validation report") {
    try {
        parse_model(testing::fixture_text("broken.json"));
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        std::vector<std::string> rules;
        for (const auto& v : e.report()) rules.push_back(v.rule);
        CHECK(rules == std::vector<std::string>{"function-without-variable", "failure-variable-owner",
                                                "risk-parameter-range"});
    }
}

TEST_CASE("located json") {
    auto doc = LocatedJson::parse("{\n  \"a\": [1,\n    {\"b\": true}]\n}");
    auto loc = doc.locate("/a/1/b");
    CHECK(loc.line == 3);
    CHECK(loc.column == 11);
    CHECK(doc.locate("/a/0").line == 2);
    CHECK(pointer_append("/x", "a/b~c") == "/x/a~1b~0c");
    CHECK(pointer_append("", std::size_t{3}) == "/3");
    JsonNode root = JsonNode::root(doc);
    CHECK(root.member("a").elements()[1].member("b").as_bool());
    CHECK_THROWS_AS(root.member("zz"), ParseError);
    CHECK_THROWS_AS(root.member("a").as_string(), ParseError);
    CHECK(dump_canonical(nlohmann::json{{"b", 1}, {"a", 2}}) == "{\n  \"a\": 2,\n  \"b\": 1\n}\n");
}

TEST_CASE("dot export") {
    auto dot = export_dot(testing::fixture_model("pulmonary_edema.json"));
    CHECK(dot.rfind("digraph \"pulmonary edema\" {", 0) == 0);
    CHECK(dot.find("v1 -> v2 [label=\"-\"];") != std::string::npos);
    CHECK(dot.find("e1 -> e2 [class=\"e2e\"];") != std::string::npos);
    CHECK(dot.find("label=\"d1\\nLung ultrasound\"") != std::string::npos);
    CHECK(dot.back() == '\n');
}

TEST_CASE("file helpers") {
    auto path = std::filesystem::temp_directory_path() / "fmea_model_io_test.json";
    write_file(path, "abc\n");
    CHECK(read_file(path) == "abc\n");
    std::filesystem::remove(path);
    CHECK_THROWS_AS(read_file(path), StructuralError);
}

}
