#pragma once

#include "fmea/therapy.hpp"

#include <chrono>
#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <string>
#include <unordered_map>

namespace fmea {

struct HttpRequest {
    std::string method;
    std::string path;
    std::string body;
};

struct HttpResponse {
    int status = 200;
    std::string body;
    std::map<std::string, std::string> headers;
};

struct ServiceOptions {
    using Clock = std::function<std::chrono::system_clock::time_point()>;

    /// Enables on-disk persistence: models/<id>.json and sessions/<id>.jsonl.
    std::optional<std::filesystem::path> dataDir;
    std::chrono::seconds sessionTtl = std::chrono::hours(24);
    bool cors = false;
    /// Defaults for solve and session requests.
    SessionConfig defaults;
    Clock clock = [] { return std::chrono::system_clock::now(); };
};

/// JSON-over-HTTP facade, independent of the transport.
///
/// Thread-safe: requests may arrive concurrently. Operations on one session
/// are serialized by a per-session mutex; solved plans are shared.
class Service {
public:
    /// Restores persisted models and unfinished sessions when dataDir is set.
    explicit Service(ServiceOptions options = {});

    HttpResponse handle(const HttpRequest& request);

    std::size_t session_count() const;
    /// Drops sessions idle for longer than the TTL; returns how many.
    std::size_t expire_idle();

private:
    struct ModelEntry {
        std::string id;
        CompiledModelPtr model;
        std::string canonical;
    };

    struct SessionEntry {
        std::string id;
        std::string modelId;
        std::mutex mutex;
        std::optional<TherapySession> session;
        std::chrono::system_clock::time_point lastTouched;
    };

    HttpResponse post_model(const std::string& body);
    HttpResponse get_model(const std::string& id);
    HttpResponse get_risk(const std::string& id);
    HttpResponse post_solve(const std::string& id, const std::string& body);
    HttpResponse post_session(const std::string& body);
    HttpResponse get_session(const std::string& id);
    HttpResponse post_outcome(const std::string& id, const std::string& body);
    HttpResponse delete_session(const std::string& id);

    std::shared_ptr<const ModelEntry> find_model(const std::string& id) const;
    std::shared_ptr<SessionEntry> find_session(const std::string& id) const;
    std::string register_model(const FmeaModel& model);
    SolvedPlanPtr plan_for(const ModelEntry& model, const State& s0, const SessionConfig& config);
    std::string session_view(const SessionEntry& entry) const;
    void append_log(const std::string& sessionId, const std::string& line) const;
    std::string new_session_id();
    void restore();

    ServiceOptions options_;
    mutable std::shared_mutex mutex_;
    std::map<std::string, std::shared_ptr<const ModelEntry>> models_;
    std::map<std::string, std::shared_ptr<SessionEntry>> sessions_;
    std::mutex planMutex_;
    std::map<std::string, std::shared_future<SolvedPlanPtr>> plans_;
    std::mutex idMutex_;
    std::mt19937_64 rng_;
};

} // namespace fmea
