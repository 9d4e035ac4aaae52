// HTTP front end for fmea::Service.
#include "fmea/service.hpp"

#include <CLI11.hpp>
#include <httplib.h>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"FMEA therapy session service", "fmea-service"};
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string dataDir;
    long long ttlSeconds = 24 * 3600;
    bool cors = false;
    double gamma = 0.9;
    app.add_option("--host", host)->envname("FMEA_SERVICE_HOST");
    app.add_option("--port", port)->envname("FMEA_SERVICE_PORT")->check(CLI::Range(1, 65535));
    app.add_option("--data-dir", dataDir, "Persist models and session event logs here")->envname("FMEA_DATA_DIR");
    app.add_option("--session-ttl", ttlSeconds, "Idle timeout in seconds")->envname("FMEA_SESSION_TTL")->check(CLI::PositiveNumber);
    app.add_flag("--cors", cors, "Send permissive cross-origin headers")->envname("FMEA_CORS");
    app.add_option("--gamma", gamma, "Default discount factor")->envname("FMEA_GAMMA")->check(CLI::Range(0.0, 1.0));
    CLI11_PARSE(app, argc, argv);

    fmea::ServiceOptions options;
    if (!dataDir.empty()) options.dataDir = dataDir;
    options.sessionTtl = std::chrono::seconds(ttlSeconds);
    options.cors = cors;
    options.defaults.gamma = gamma;

    std::unique_ptr<fmea::Service> service;
    try {
        service = std::make_unique<fmea::Service>(options);
    } catch (const std::exception& e) {
        std::cerr << "fmea-service: " << e.what() << "\n";
        return 1;
    }

    httplib::Server server;
    auto forward = [&](const httplib::Request& req, httplib::Response& res) {
        auto reply = service->handle({req.method, req.path, req.body});
        res.status = reply.status;
        for (const auto& [name, value] : reply.headers)
            if (name != "Content-Type") res.set_header(name, value);
        auto type = reply.headers.find("Content-Type");
        if (!reply.body.empty() || type != reply.headers.end())
            res.set_content(reply.body, type != reply.headers.end() ? type->second : "application/json");
    };
    server.Get(".*", forward);
    server.Post(".*", forward);
    server.Delete(".*", forward);
    server.Options(".*", forward);

    std::cerr << "fmea-service listening on " << host << ":" << port << "\n";
    if (!server.listen(host, port)) {
        std::cerr << "fmea-service: cannot listen on " << host << ":" << port << "\n";
        return 1;
    }
    return 0;
}
