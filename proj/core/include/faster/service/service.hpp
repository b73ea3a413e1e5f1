#pragma once

#include "faster/opt/optimize.hpp"
#include "faster/service/playback.hpp"
#include "faster/service/store.hpp"

#include <json.hpp>

#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace faster {

struct ServiceConfig {
    std::filesystem::path data_dir = "faster-data";
    unsigned job_workers = 2;
    OptimizeOptions optimize; // defaults for optimize jobs
};

struct Request {
    std::string method;
    std::string path;
    std::string body;
    std::map<std::string, std::string> query;
};

struct Response {
    int status = 200;
    nlohmann::json body;
};

/// {code, message, detail}
nlohmann::json error_body(const std::string& code, const std::string& message, const nlohmann::json& detail = {});

/// Routes:
///   POST /scenarios                      store a scenario (inline network), 201
///   GET  /scenarios/{id}                 current revision
///   POST /scenarios/{id}/incidents       append an incident (new revision), 201
///   POST /scenarios/{id}/simulate        run and store metrics, returns metrics_id
///   GET  /metrics/{id}
///   POST /scenarios/{id}/optimize        async job, 202
///   GET  /jobs/{id}                      queued, running, done, timeout or failed, with plans
///   GET  /plans, GET /plans/{id}
///   GET  /kpis?station&from&to&scenario  station crowding from the latest simulation
///   GET  /alerts?from&to                 alert log
///   POST /playback, POST /playback/{id}/step
/// Validation errors give 400, unknown ids 404, anything else 500, all with error_body.
class Service {
public:
    explicit Service(ServiceConfig config);
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    Response handle(const Request& request);

    ArtifactStore& store() { return store_; }
    /// Blocks until no job is queued or running.
    void wait_idle();

private:
    struct Job {
        std::string id;
        std::string scenario_id;
        std::string state = "queued";
        nlohmann::json params;
        std::vector<std::string> plan_ids;
        std::string result_id;
        std::string result_hash;
        nlohmann::json error;
    };

    Response route(const Request& r);
    Response create_scenario(const Request& r);
    Response get_scenario(const std::string& id);
    Response add_incident(const std::string& id, const Request& r);
    Response simulate_scenario(const std::string& id, const Request& r);
    Response start_optimize(const std::string& id, const Request& r);
    Response get_job(const std::string& id);
    Response get_kpis(const Request& r);
    Response get_alerts(const Request& r);
    Response start_playback(const Request& r);
    Response step_playback(const std::string& id, const Request& r);

    /// Current revision of a scenario: (artifact id, scenario).
    std::pair<ArtifactRef, Scenario> load_revision(const std::string& id) const;
    void run_job(const std::string& job_id);
    nlohmann::json job_json(const Job& job) const;
    void worker_loop();

    ServiceConfig config_;
    ArtifactStore store_;
    std::mutex mutex_;
    std::condition_variable cv_;
    std::condition_variable idle_cv_;
    std::deque<std::string> queue_;
    int running_ = 0;
    bool stopping_ = false;
    std::map<std::string, Job> jobs_;
    std::map<std::string, std::unique_ptr<PlaybackSession>> sessions_;
    std::map<std::string, std::unique_ptr<std::mutex>> session_locks_;
    long next_job_ = 0;
    long next_session_ = 0;
    std::vector<std::thread> workers_;
};

/// Blocking HTTP front end. `on_bound` receives the port (useful with port 0).
void serve_http(Service& service, const std::string& host, int port, const std::function<void(int)>& on_bound = {});

/// HTTP server on a background thread, for tests and embedding.
class BackgroundServer {
public:
    BackgroundServer(Service& service, const std::string& host = "127.0.0.1");
    ~BackgroundServer();
    int port() const { return port_; }
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    int port_ = 0;
};

} // namespace faster
