#include "faster/service/service.hpp"

#include "faster/common/error.hpp"
#include "faster/common/io.hpp"
#include "faster/sim/metrics.hpp"

#include <httplib.h>

#include <algorithm>
#include <climits>
#include <regex>

namespace faster {

nlohmann::json error_body(const std::string& code, const std::string& message, const nlohmann::json& detail)
{
    return {{"code", code}, {"message", message}, {"detail", detail}};
}

namespace {

Response error(int status, const std::string& code, const std::string& message)
{
    return {status, error_body(code, message)};
}

nlohmann::json parse_body(const Request& r, bool allow_empty)
{
    if (r.body.find_first_not_of(" \t\r\n") == std::string::npos) {
        require(allow_empty, "request body is required");
        return nlohmann::json::object();
    }
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(r.body);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(std::string("malformed JSON: ") + e.what());
    }
    require(doc.is_object(), "request body must be a JSON object");
    return doc;
}

/// Integer step, or a time of day relative to the scenario origin.
int query_step(const std::string& text, int origin_seconds, int dt_seconds)
{
    const bool digits = !text.empty() && std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; });
    if (digits) return std::stoi(text);
    return io::parse_step(nlohmann::json(text), origin_seconds, dt_seconds);
}

/// Seconds of day for alert filtering: plain numbers are seconds.
int query_seconds(const std::string& text)
{
    const bool digits = !text.empty() && std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; });
    return digits ? std::stoi(text) : io::parse_time_of_day(text);
}

} // namespace

Service::Service(ServiceConfig config) : config_(std::move(config)), store_(config_.data_dir)
{
    const unsigned n = std::max(1u, config_.job_workers);
    for (unsigned i = 0; i < n; ++i) workers_.emplace_back([this] { worker_loop(); });
}

Service::~Service()
{
    {
        std::lock_guard<std::mutex> g(mutex_);
        stopping_ = true;
    }
    cv_.notify_all();
    for (auto& t : workers_) t.join();
}

void Service::wait_idle()
{
    std::unique_lock<std::mutex> g(mutex_);
    idle_cv_.wait(g, [&] { return queue_.empty() && running_ == 0; });
}

Response Service::handle(const Request& request)
{
    try {
        return route(request);
    } catch (const ValidationError& e) {
        return error(400, "validation_error", e.what());
    } catch (const nlohmann::json::exception& e) {
        return error(400, "validation_error", e.what());
    } catch (const NotFoundError& e) {
        return error(404, "not_found", e.what());
    } catch (const std::exception& e) {
        return error(500, "internal_error", e.what());
    }
}

Response Service::route(const Request& r)
{
    static const std::regex scenario_re("^/scenarios/([^/]+)$");
    static const std::regex scenario_action_re("^/scenarios/([^/]+)/(incidents|simulate|optimize)$");
    static const std::regex job_re("^/jobs/([^/]+)$");
    static const std::regex plan_re("^/plans/([^/]+)$");
    static const std::regex metrics_re("^/metrics/([^/]+)$");
    static const std::regex playback_step_re("^/playback/([^/]+)/step$");
    std::smatch m;
    const auto& p = r.path;
    auto only = [&](const char* method) {
        if (r.method != method) throw std::invalid_argument(method);
    };
    try {
        if (p == "/scenarios") {
            only("POST");
            return create_scenario(r);
        }
        if (std::regex_match(p, m, scenario_re)) {
            only("GET");
            return get_scenario(m[1]);
        }
        if (std::regex_match(p, m, scenario_action_re)) {
            only("POST");
            if (m[2] == "incidents") return add_incident(m[1], r);
            if (m[2] == "simulate") return simulate_scenario(m[1], r);
            return start_optimize(m[1], r);
        }
        if (std::regex_match(p, m, job_re)) {
            only("GET");
            return get_job(m[1]);
        }
        if (p == "/plans") {
            only("GET");
            nlohmann::json list = nlohmann::json::array();
            for (const auto& ref : store_.list("plans")) {
                auto doc = nlohmann::json::parse(store_.read(ref));
                doc["plan_id"] = ref.id;
                doc["hash"] = ref.hash;
                list.push_back(doc);
            }
            return {200, {{"plans", list}}};
        }
        if (std::regex_match(p, m, plan_re)) {
            only("GET");
            const auto ref = store_.get("plans", m[1]);
            auto doc = nlohmann::json::parse(store_.read(ref));
            doc["plan_id"] = ref.id;
            doc["hash"] = ref.hash;
            return {200, doc};
        }
        if (std::regex_match(p, m, metrics_re)) {
            only("GET");
            const auto ref = store_.get("metrics", m[1]);
            auto doc = nlohmann::json::parse(store_.read(ref));
            doc["metrics_id"] = ref.id;
            doc["hash"] = ref.hash;
            return {200, doc};
        }
        if (p == "/kpis") {
            only("GET");
            return get_kpis(r);
        }
        if (p == "/alerts") {
            only("GET");
            return get_alerts(r);
        }
        if (p == "/playback") {
            only("POST");
            return start_playback(r);
        }
        if (std::regex_match(p, m, playback_step_re)) {
            only("POST");
            return step_playback(m[1], r);
        }
    } catch (const std::invalid_argument& allowed) {
        return error(405, "method_not_allowed", r.method + " not allowed on " + p + ", use " + allowed.what());
    }
    return error(404, "not_found", "no route for " + r.method + " " + p);
}

std::pair<ArtifactRef, Scenario> Service::load_revision(const std::string& id) const
{
    const auto history = store_.head_history("scenarios", id);
    if (!history || history->empty()) throw NotFoundError("scenario '" + id + "' not found");
    const auto ref = store_.get("scenarios", history->back());
    return {ref, scenario_from_json(nlohmann::json::parse(store_.read(ref)))};
}

Response Service::create_scenario(const Request& r)
{
    const auto doc = parse_body(r, false);
    require(!doc.contains("network_ref"), "scenarios posted to the API need an inline network");
    const Scenario s = scenario_from_json(doc);
    const auto ref = store_.put_json("scenarios", to_json(s));
    if (!store_.head_history("scenarios", ref.id)) store_.set_head("scenarios", ref.id, ref.id);
    return {201, {{"id", ref.id}, {"hash", ref.hash}, {"revision", ref.id}}};
}

Response Service::get_scenario(const std::string& id)
{
    const auto [ref, s] = load_revision(id);
    const auto history = *store_.head_history("scenarios", id);
    return {200,
            {{"id", id},
             {"hash", ref.hash},
             {"revision", ref.id},
             {"revisions", history},
             {"scenario", nlohmann::json::parse(store_.read(ref))}}};
}

Response Service::add_incident(const std::string& id, const Request& r)
{
    auto [ref, s] = load_revision(id);
    const auto doc = parse_body(r, false);
    const Incident inc = incident_from_json(doc, s.origin_seconds, s.dt_seconds);
    validate_incident(inc, s.network);
    s.incidents.push_back(inc);
    validate_scenario(s);
    const auto next = store_.put_json("scenarios", to_json(s));
    store_.set_head("scenarios", id, next.id);
    return {201, {{"id", id}, {"hash", next.hash}, {"revision", next.id}, {"incident", to_json(inc)}}};
}

Response Service::simulate_scenario(const std::string& id, const Request& r)
{
    auto [ref, s] = load_revision(id);
    const auto doc = parse_body(r, true);
    if (doc.contains("seed")) s.seed = doc.at("seed").get<std::uint64_t>();
    const auto metrics = simulate(s, MetricSelection::all());
    nlohmann::json queues = nlohmann::json::object();
    for (std::size_t st = 0; st < s.network.stations().size(); ++st)
        queues[s.network.stations()[st].id] = (*metrics.queue_lengths)[st];
    const nlohmann::json stored{{"scenario_id", id},
                                {"scenario_hash", ref.hash},
                                {"seed", s.seed},
                                {"origin_seconds", s.origin_seconds},
                                {"dt_seconds", s.dt_seconds},
                                {"summary", summary_json(metrics)},
                                {"queues", queues}};
    const auto mref = store_.put_json("metrics", stored);
    store_.set_head("kpis", "latest", mref.id);
    store_.set_head("kpis", id, mref.id);
    return {200, {{"metrics_id", mref.id}, {"hash", mref.hash}, {"scenario_hash", ref.hash}, {"summary", stored["summary"]}}};
}

Response Service::start_optimize(const std::string& id, const Request& r)
{
    load_revision(id); // 404 before queueing
    const auto doc = parse_body(r, true);
    for (const char* key : {"budget_seconds", "max_lines", "move_budget", "plans"})
        if (doc.contains(key)) require(doc.at(key).is_number() && doc.at(key).get<double>() >= 0, std::string(key) + " must be >= 0");
    if (doc.contains("mode")) solve_mode_from_string(doc.at("mode").get<std::string>());
    Job job;
    job.scenario_id = id;
    job.params = doc;
    {
        std::lock_guard<std::mutex> g(mutex_);
        job.id = "job-" + std::to_string(++next_job_);
        jobs_[job.id] = job;
        queue_.push_back(job.id);
    }
    cv_.notify_one();
    return {202, {{"job_id", job.id}, {"state", "queued"}}};
}

void Service::worker_loop()
{
    for (;;) {
        std::string id;
        {
            std::unique_lock<std::mutex> g(mutex_);
            cv_.wait(g, [&] { return stopping_ || !queue_.empty(); });
            if (stopping_ && queue_.empty()) return;
            id = queue_.front();
            queue_.pop_front();
            ++running_;
            jobs_[id].state = "running";
        }
        run_job(id);
        {
            std::lock_guard<std::mutex> g(mutex_);
            --running_;
        }
        idle_cv_.notify_all();
    }
}

void Service::run_job(const std::string& job_id)
{
    Job job;
    {
        std::lock_guard<std::mutex> g(mutex_);
        job = jobs_[job_id];
    }
    try {
        auto [ref, s] = load_revision(job.scenario_id);
        const auto& p = job.params;
        OptimizeOptions o = config_.optimize;
        if (p.contains("budget_seconds")) o.budget_seconds = p.at("budget_seconds").get<double>();
        if (p.contains("max_lines")) o.candidates.max_lines = p.at("max_lines").get<int>();
        if (p.contains("move_budget")) o.move_budget = p.at("move_budget").get<int>();
        if (p.contains("plans")) o.plans = std::max(1, p.at("plans").get<int>());
        if (p.contains("mode")) o.mode = solve_mode_from_string(p.at("mode").get<std::string>());
        if (p.contains("seed")) o.seed = p.at("seed").get<std::uint64_t>();
        const auto result = optimize(s, o);
        auto doc = to_json(result);
        doc["scenario_id"] = job.scenario_id;
        doc["scenario_hash"] = ref.hash;
        const auto rref = store_.put_json("optimizations", doc);
        std::vector<std::string> plan_ids;
        for (const auto& plan : doc.at("plans")) {
            auto pd = plan;
            pd["scenario_id"] = job.scenario_id;
            pd["scenario_hash"] = ref.hash;
            plan_ids.push_back(store_.put_json("plans", pd).id);
        }
        std::lock_guard<std::mutex> g(mutex_);
        auto& j = jobs_[job_id];
        j.plan_ids = plan_ids;
        j.result_id = rref.id;
        j.result_hash = rref.hash;
        j.state = (result.timed_out && o.budget_seconds > 0.0) ? "timeout" : "done";
    } catch (const std::exception& e) {
        std::lock_guard<std::mutex> g(mutex_);
        auto& j = jobs_[job_id];
        j.state = "failed";
        const bool client = dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const NotFoundError*>(&e);
        j.error = error_body(client ? "validation_error" : "internal_error", e.what());
    }
}

nlohmann::json Service::job_json(const Job& job) const
{
    nlohmann::json plans = nlohmann::json::array();
    for (const auto& id : job.plan_ids) {
        const auto ref = store_.get("plans", id);
        auto doc = nlohmann::json::parse(store_.read(ref));
        doc["plan_id"] = ref.id;
        doc["hash"] = ref.hash;
        plans.push_back(doc);
    }
    nlohmann::json out{{"job_id", job.id}, {"state", job.state}, {"scenario_id", job.scenario_id}, {"plans", plans}};
    if (!job.result_id.empty()) {
        out["result_id"] = job.result_id;
        out["hash"] = job.result_hash;
    }
    if (!job.error.is_null()) out["error"] = job.error;
    return out;
}

Response Service::get_job(const std::string& id)
{
    Job job;
    {
        std::lock_guard<std::mutex> g(mutex_);
        auto it = jobs_.find(id);
        if (it == jobs_.end()) throw NotFoundError("job '" + id + "' not found");
        job = it->second;
    }
    return {200, job_json(job)};
}

Response Service::get_kpis(const Request& r)
{
    auto q = [&](const char* k) { auto it = r.query.find(k); return it == r.query.end() ? std::string() : it->second; };
    const std::string scenario = q("scenario");
    const auto history = store_.head_history("kpis", scenario.empty() ? "latest" : scenario);
    if (!history || history->empty()) throw NotFoundError("no simulated KPIs" + (scenario.empty() ? std::string() : " for scenario '" + scenario + "'"));
    const auto ref = store_.get("metrics", history->back());
    const auto doc = nlohmann::json::parse(store_.read(ref));
    const int origin = doc.at("origin_seconds").get<int>();
    const int dt = doc.at("dt_seconds").get<int>();
    const int horizon = doc.at("summary").at("horizon").get<int>();
    const int from = q("from").empty() ? 0 : query_step(q("from"), origin, dt);
    const int to = q("to").empty() ? horizon : query_step(q("to"), origin, dt);
    require(from <= to, "'from' must not be after 'to'");
    const std::string station = q("station");
    if (!station.empty() && !doc.at("queues").contains(station)) throw NotFoundError("station '" + station + "' not found");
    nlohmann::json samples = nlohmann::json::array();
    for (const auto& [st, values] : doc.at("queues").items()) {
        if (!station.empty() && st != station) continue;
        for (int k = std::max(0, from); k < to && k < static_cast<int>(values.size()); ++k)
            samples.push_back({{"station", st}, {"step", k}, {"time", clock_time(origin + k * dt)}, {"value", values[static_cast<std::size_t>(k)]}});
    }
    return {200,
            {{"kpi", "platform_crowding"},
             {"metrics_id", ref.id},
             {"hash", ref.hash},
             {"scenario_id", doc.at("scenario_id")},
             {"samples", samples}}};
}

Response Service::get_alerts(const Request& r)
{
    auto q = [&](const char* k) { auto it = r.query.find(k); return it == r.query.end() ? std::string() : it->second; };
    const int from = q("from").empty() ? INT_MIN : query_seconds(q("from"));
    const int to = q("to").empty() ? INT_MAX : query_seconds(q("to"));
    nlohmann::json alerts = nlohmann::json::array();
    for (const auto& rec : store_.read_log("alerts")) {
        const long long key = rec.contains("t") ? rec.at("t").get<long long>() : rec.value("step", 0LL);
        if (key >= from && key < to) alerts.push_back(rec);
    }
    return {200, {{"alerts", alerts}}};
}

Response Service::start_playback(const Request& r)
{
    const auto doc = parse_body(r, false);
    require(doc.contains("scenario_id"), "'scenario_id' is required");
    auto [ref, s] = load_revision(doc.at("scenario_id").get<std::string>());
    if (doc.contains("seed")) s.seed = doc.at("seed").get<std::uint64_t>();
    const double speed = doc.value("speed", 1.0);
    auto session = std::make_unique<PlaybackSession>(s, speed);
    std::string id;
    {
        std::lock_guard<std::mutex> g(mutex_);
        id = "pb-" + std::to_string(++next_session_);
        sessions_[id] = std::move(session);
        session_locks_[id] = std::make_unique<std::mutex>();
    }
    return {201, {{"session_id", id}, {"scenario_id", doc.at("scenario_id")}, {"scenario_hash", ref.hash}, {"step", 0}, {"speed", speed}}};
}

Response Service::step_playback(const std::string& id, const Request& r)
{
    const auto doc = parse_body(r, true);
    const int steps = doc.value("steps", 1);
    PlaybackSession* session = nullptr;
    std::mutex* lock = nullptr;
    {
        std::lock_guard<std::mutex> g(mutex_);
        auto it = sessions_.find(id);
        if (it == sessions_.end()) throw NotFoundError("playback session '" + id + "' not found");
        session = it->second.get();
        lock = session_locks_[id].get();
    }
    std::lock_guard<std::mutex> g(*lock);
    nlohmann::json frames = nlohmann::json::array();
    for (const auto& f : session->step(steps)) frames.push_back(to_json(f));
    return {200, {{"session_id", id}, {"step", session->now()}, {"finished", session->finished()}, {"frames", frames}}};
}

namespace {

void bind_routes(httplib::Server& server, Service& service)
{
    auto handler = [&service](const httplib::Request& req, httplib::Response& res) {
        Request r;
        r.method = req.method;
        r.path = req.path;
        r.body = req.body;
        for (const auto& [k, v] : req.params) r.query[k] = v;
        const auto out = service.handle(r);
        res.status = out.status;
        res.set_content(out.body.dump(), "application/json");
    };
    const char* any = R"(/.*)";
    server.Get(any, handler);
    server.Post(any, handler);
    server.Put(any, handler);
    server.Delete(any, handler);
}

} // namespace

void serve_http(Service& service, const std::string& host, int port, const std::function<void(int)>& on_bound)
{
    httplib::Server server;
    bind_routes(server, service);
    if (port == 0) port = server.bind_to_any_port(host);
    else if (!server.bind_to_port(host, port)) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
    if (port < 0) throw std::runtime_error("cannot bind " + host);
    if (on_bound) on_bound(port);
    server.listen_after_bind();
}

struct BackgroundServer::Impl {
    httplib::Server server;
    std::thread thread;
};

BackgroundServer::BackgroundServer(Service& service, const std::string& host) : impl_(std::make_unique<Impl>())
{
    bind_routes(impl_->server, service);
    port_ = impl_->server.bind_to_any_port(host);
    if (port_ <= 0) throw std::runtime_error("cannot bind " + host);
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

BackgroundServer::~BackgroundServer() { stop(); }

void BackgroundServer::stop()
{
    if (!impl_ || !impl_->thread.joinable()) return;
    impl_->server.stop();
    impl_->thread.join();
}

} // namespace faster
