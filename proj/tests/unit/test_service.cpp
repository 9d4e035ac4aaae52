#include "fmea/service.hpp"

#include "test_support.hpp"

#include <doctest.h>
#include <json.hpp>

#include <atomic>
#include <fstream>
#include <thread>

using namespace fmea;
using nlohmann::json;

namespace {

json body_of(const HttpResponse& r) { return json::parse(r.body); }

std::string post_edema(Service& service) {
    auto r = service.handle({"POST", "/models", testing::fixture_text("pulmonary_edema.json")});
    REQUIRE(r.status == 201);
    return body_of(r)["modelId"];
}

struct FakeClock {
    std::shared_ptr<std::chrono::system_clock::time_point> now =
        std::make_shared<std::chrono::system_clock::time_point>(std::chrono::system_clock::time_point{});
    ServiceOptions::Clock clock() const {
        auto p = now;
        return [p] { return *p; };
    }
};

std::filesystem::path fresh_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("fmea_service_test_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

} // namespace

TEST_SUITE("service") {

TEST_CASE("model upload, lookup and risk") {
    Service service;
    auto upload = service.handle({"POST", "/models", testing::fixture_text("pulmonary_edema.json")});
    CHECK(upload.status == 201);
    auto doc = body_of(upload);
    CHECK(doc["valid"] == true);
    std::string id = doc["modelId"];
    CHECK(id.rfind("m-", 0) == 0);
    CHECK(body_of(service.handle({"POST", "/models", testing::fixture_text("pulmonary_edema.json")}))["modelId"] == id);

    auto get = service.handle({"GET", "/models/" + id, ""});
    CHECK(get.status == 200);
    CHECK(get.body == testing::fixture_text("pulmonary_edema.json"));

    auto risk = body_of(service.handle({"GET", "/models/" + id + "/risk", ""}));
    CHECK(risk["risk"] == "orange");
    CHECK(risk["failures"][1]["product"] == 315);

    CHECK(service.handle({"GET", "/models/m-nope", ""}).status == 404);
    CHECK(service.handle({"GET", "/nothing", ""}).status == 404);
}

TEST_CASE("invalid models are reported") {
    Service service;
    auto r = service.handle({"POST", "/models", testing::fixture_text("broken.json")});
    CHECK(r.status == 422);
    auto doc = body_of(r);
    CHECK(doc["valid"] == false);
    CHECK(doc["modelId"].is_null());
    CHECK(doc["violations"].size() == 3);

    auto syntax = service.handle({"POST", "/models", "{\"schemaVersion\": "});
    CHECK(syntax.status == 400);
    CHECK(body_of(syntax)["error"]["type"] == "syntax");
    auto schema = service.handle({"POST", "/models", "{\"schemaVersion\": 1, \"bogus\": 1}"});
    CHECK(schema.status == 400);
    CHECK(body_of(schema)["error"]["pointer"] == "/bogus");
}

TEST_CASE("solve summary") {
    Service service;
    auto id = post_edema(service);
    auto r = service.handle({"POST", "/models/" + id + "/solve", ""});
    CHECK(r.status == 200);
    auto doc = body_of(r);
    CHECK(doc["stateCount"] == 3);
    CHECK(doc["goalStates"] == 1);
    CHECK(doc["decisionStates"] == 2);
    CHECK(doc["initialAction"] == "d1");
    CHECK(doc["initialValue"].get<double>() == doctest::Approx(36875.0 / 7.0).epsilon(1e-6));

    auto evidence = body_of(service.handle({"POST", "/models/" + id + "/solve", R"({"evidence": {"v1": ["tooHigh"]}})"}));
    CHECK(evidence["initialAction"] == "p1");
    CHECK(service.handle({"POST", "/models/" + id + "/solve", R"({"gamma": 2})"}).status == 400);
    CHECK(service.handle({"POST", "/models/" + id + "/solve", R"({"evidence": {"v9": ["normal"]}})"}).status == 400);
}

TEST_CASE("edema walkthrough") {
    Service service;
    auto id = post_edema(service);
    auto created = service.handle({"POST", "/sessions", json{{"modelId", id}}.dump()});
    REQUIRE(created.status == 201);
    auto view = body_of(created);
    std::string sid = view["sessionId"];
    CHECK(view["status"] == "running");
    CHECK(view["step"] == 0);
    CHECK(view["recommendation"]["action"] == "d1");
    CHECK(view["recommendation"]["label"] == "Lung ultrasound");
    CHECK(view["recommendation"]["kind"] == "detective");
    CHECK(view["recommendation"]["outcomes"].size() == 3);
    CHECK(view["variables"][0]["sign"] == "?");
    CHECK(view["failures"][0]["ruledOut"] == false);
    CHECK(view["theta"].is_null());

    auto step = service.handle({"POST", "/sessions/" + sid + "/outcome",
                                R"({"action": "d1", "outcome": "tooHigh", "step": 0})"});
    REQUIRE(step.status == 200);
    view = body_of(step);
    CHECK(view["step"] == 1);
    CHECK(view["currentState"] == json{{"v1", {"tooHigh"}}, {"v2", {"tooLow"}}});
    CHECK(view["recommendation"]["action"] == "p1");
    CHECK(view["recommendation"]["label"] == "Negative fluid balance");

    auto stale = service.handle({"POST", "/sessions/" + sid + "/outcome",
                                 R"({"action": "d1", "outcome": "tooHigh", "step": 0})"});
    CHECK(stale.status == 409);
    CHECK(body_of(stale)["error"]["step"] == 1);

    auto wrong = service.handle({"POST", "/sessions/" + sid + "/outcome",
                                 R"({"action": "d1", "outcome": "normal", "step": 1})"});
    CHECK(wrong.status == 400);

    auto done = body_of(service.handle({"POST", "/sessions/" + sid + "/outcome",
                                        R"({"action": "p1", "outcome": "success", "step": 1})"}));
    CHECK(done["status"] == "reachedGoal");
    CHECK(done["recommendation"].is_null());
    CHECK(done["history"].size() == 2);
    CHECK(done["failures"][0]["ruledOut"] == true);

    auto finished = service.handle({"POST", "/sessions/" + sid + "/outcome",
                                    R"({"action": "p1", "outcome": "success", "step": 2})"});
    CHECK(finished.status == 409);

    CHECK(service.handle({"GET", "/sessions/" + sid, ""}).status == 200);
    CHECK(service.handle({"DELETE", "/sessions/" + sid, ""}).status == 204);
    CHECK(service.handle({"GET", "/sessions/" + sid, ""}).status == 404);
}

TEST_CASE("session options") {
    Service service;
    auto id = post_edema(service);
    auto view = body_of(service.handle(
        {"POST", "/sessions",
         json{{"modelId", id}, {"goals", "all-normal"}, {"theta", 100}, {"gamma", 0.8}, {"evidence", {{"v2", {"tooLow"}}}}}
             .dump()}));
    CHECK(view["gamma"] == 0.8);
    CHECK(view["theta"] == 100.0);
    CHECK(view["initialState"]["v2"] == json{"tooLow"});
    CHECK(view["goals"]["states"].size() == 1);

    CHECK(service.handle({"POST", "/sessions", json{{"modelId", "m-x"}}.dump()}).status == 404);
    CHECK(service.handle({"POST", "/sessions", json{{"modelId", id}, {"goals", "someday"}}.dump()}).status == 400);
    CHECK(service.handle({"POST", "/sessions", json{{"modelId", id}, {"evidence", {{"v1", {"tooLow"}}}}}.dump()}).status ==
          400);
    CHECK(service.handle({"POST", "/sessions", ""}).status == 400);
}

TEST_CASE("cors headers") {
    ServiceOptions options;
    options.cors = true;
    Service service(options);
    auto r = service.handle({"OPTIONS", "/sessions", ""});
    CHECK(r.status == 204);
    CHECK(r.headers["Access-Control-Allow-Origin"] == "*");
}

TEST_CASE("idle sessions expire") {
    FakeClock clock;
    ServiceOptions options;
    options.clock = clock.clock();
    options.sessionTtl = std::chrono::seconds(60);
    Service service(options);
    auto id = post_edema(service);
    auto sid = body_of(service.handle({"POST", "/sessions", json{{"modelId", id}}.dump()}))["sessionId"].get<std::string>();
    *clock.now += std::chrono::seconds(30);
    CHECK(service.handle({"GET", "/sessions/" + sid, ""}).status == 200);
    *clock.now += std::chrono::seconds(61);
    CHECK(service.handle({"GET", "/sessions/" + sid, ""}).status == 404);
    CHECK(service.session_count() == 0);
}

TEST_CASE("sessions survive a restart") {
    auto dir = fresh_dir("restart");
    std::string id, sid, ended;
    {
        ServiceOptions options;
        options.dataDir = dir;
        Service service(options);
        id = post_edema(service);
        sid = body_of(service.handle({"POST", "/sessions", json{{"modelId", id}}.dump()}))["sessionId"];
        service.handle({"POST", "/sessions/" + sid + "/outcome", R"({"action": "d1", "outcome": "tooHigh", "step": 0})"});
        ended = body_of(service.handle({"POST", "/sessions", json{{"modelId", id}}.dump()}))["sessionId"];
        service.handle({"DELETE", "/sessions/" + ended, ""});
    }
    // a crash in the middle of a write leaves a partial line behind
    {
        std::ofstream out(dir / "sessions" / (sid + ".jsonl"), std::ios::app);
        out << "{\"event\":\"outc";
    }
    ServiceOptions options;
    options.dataDir = dir;
    Service service(options);
    CHECK(service.handle({"GET", "/models/" + id, ""}).status == 200);
    auto view = service.handle({"GET", "/sessions/" + sid, ""});
    REQUIRE(view.status == 200);
    CHECK(body_of(view)["step"] == 1);
    CHECK(body_of(view)["recommendation"]["action"] == "p1");
    CHECK(service.handle({"GET", "/sessions/" + ended, ""}).status == 404);
    std::filesystem::remove_all(dir);
}

TEST_CASE("concurrent commits on one session") {
    Service service;
    auto id = post_edema(service);
    auto sid = body_of(service.handle({"POST", "/sessions", json{{"modelId", id}}.dump()}))["sessionId"].get<std::string>();
    std::atomic<int> ok{0}, conflict{0};
    std::vector<std::thread> threads;
    for (int i = 0; i < 8; ++i)
        threads.emplace_back([&] {
            auto r = service.handle(
                {"POST", "/sessions/" + sid + "/outcome", R"({"action": "d1", "outcome": "failure", "step": 0})"});
            if (r.status == 200) ++ok;
            else if (r.status == 409) ++conflict;
        });
    for (auto& t : threads) t.join();
    CHECK(ok == 1);
    CHECK(conflict == 7);
}

TEST_CASE("concurrent sessions share one plan") {
    Service service;
    auto id = post_edema(service);
    std::vector<std::thread> threads;
    std::atomic<int> created{0};
    for (int i = 0; i < 6; ++i)
        threads.emplace_back([&] {
            if (service.handle({"POST", "/sessions", json{{"modelId", id}}.dump()}).status == 201) ++created;
        });
    for (auto& t : threads) t.join();
    CHECK(created == 6);
    CHECK(service.session_count() == 6);
}

}
