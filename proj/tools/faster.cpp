#include "faster/chmm/chmm.hpp"
#include "faster/chmm/trip.hpp"
#include "faster/cluster/cluster_users.hpp"
#include "faster/common/error.hpp"
#include "faster/common/hash.hpp"
#include "faster/common/io.hpp"
#include "faster/dsg/model.hpp"
#include "faster/kpi/alerts.hpp"
#include "faster/kpi/calendar.hpp"
#include "faster/kpi/fusion.hpp"
#include "faster/opt/optimize.hpp"
#include "faster/service/ingest.hpp"
#include "faster/service/playback.hpp"
#include "faster/service/service.hpp"
#include "faster/service/store.hpp"
#include "faster/sim/metrics.hpp"
#include "faster/sim/scenario.hpp"
#include "faster/sim/simulator.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace faster;

namespace {

std::string env_or(const char* name, const std::string& fallback)
{
    const char* v = std::getenv(name);
    return v && *v ? std::string(v) : fallback;
}

std::ifstream open_input(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotFoundError("cannot open " + path.string());
    return in;
}

void emit(const json& summary) { std::cout << summary.dump() << std::endl; }

// writes --out when given; the summary carries the file's hash
void write_output(const std::string& out, const std::string& content, json& summary)
{
    if (out.empty()) return;
    io::write_text_atomic(out, content);
    summary["out"] = out;
    summary["hash"] = sha256_hex(content);
}

// a network document, or a scenario whose network is used
Network load_network_file(const fs::path& path)
{
    const json doc = io::read_json(path);
    if (doc.contains("stations")) return load_network(doc);
    return load_scenario(path).network;
}

std::vector<Trip> load_trips(const fs::path& path, bool strict, json& summary)
{
    auto in = open_input(path);
    auto log = read_trips_jsonl(in, strict);
    summary["trips"] = log.trips.size();
    summary["skipped"] = log.errors.size();
    require(!log.trips.empty(), "no valid trips in " + path.string());
    return std::move(log.trips);
}

std::vector<Incident> load_incidents(const std::vector<std::string>& files, const Scenario& s)
{
    std::vector<Incident> out;
    for (const auto& f : files) {
        const json doc = io::read_json(f);
        if (doc.is_array())
            for (const auto& d : doc) out.push_back(incident_from_json(d, s.origin_seconds, s.dt_seconds));
        else
            out.push_back(incident_from_json(doc, s.origin_seconds, s.dt_seconds));
    }
    return out;
}

Scenario load_scenario_with(const std::string& path, const std::vector<std::string>& incidents, CLI::Option* seed_opt,
                            std::uint64_t seed)
{
    Scenario s = load_scenario(path);
    for (auto& i : load_incidents(incidents, s)) s.incidents.push_back(std::move(i));
    if (seed_opt->count() > 0) s.seed = seed;
    validate_scenario(s);
    return s;
}

struct Common {
    std::uint64_t seed = 0;
    std::string out;
    CLI::Option* seed_opt = nullptr;
};

Common& add_common(CLI::App* sub, std::vector<std::unique_ptr<Common>>& store, const std::string& out_help)
{
    store.push_back(std::make_unique<Common>());
    auto& c = *store.back();
    c.seed_opt = sub->add_option("--seed", c.seed, "random seed");
    sub->add_option("--out", c.out, out_help);
    return c;
}

std::string format_table(const json& result)
{
    std::ostringstream ss;
    ss << std::left << std::setw(8) << "rank" << std::setw(12) << "plan" << std::setw(14) << "origin" << std::setw(12)
       << "objective" << std::setw(12) << "delay_min" << std::setw(10) << ">=20min" << std::setw(14) << "overcrowd_min"
       << "trains/buses\n";
    for (const auto& p : result.at("plans")) {
        const auto& m = p.at("metrics");
        ss << std::setw(8) << p.value("rank", 0) << std::setw(12) << p.at("id").get<std::string>() << std::setw(14)
           << p.value("origin", std::string{}) << std::setw(12) << std::fixed << std::setprecision(1)
           << p.value("objective", 0.0) << std::setw(12) << std::setprecision(2) << m.value("average_delay_min", 0.0)
           << std::setw(10) << m.value("delay_ge_20_min_count", 0) << std::setw(14) << std::setprecision(1)
           << m.value("overcrowding_min", 0.0) << p.value("additional_trains", 0) << "/"
           << p.value("emergency_buses", 0) << "\n";
        for (const char* key : {"train_service", "shuttle_bus_service"})
            for (const auto& svc : p.value(key, json::array()))
                ss << "    " << (std::string(key) == "train_service" ? "train " : "bus   ")
                   << svc.at("line").get<std::string>() << " " << svc.at("from").get<std::string>() << "-"
                   << svc.at("to").get<std::string>() << " every " << std::setprecision(1)
                   << svc.at("headway_min").get<double>() << " min\n";
    }
    return ss.str();
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"faster: transit digital twin toolkit"};
    app.require_subcommand(1);
    std::vector<std::unique_ptr<Common>> commons;

    // ingest
    auto* ingest = app.add_subcommand("ingest", "validate and store a trip or presence-trace log");
    auto& ingest_c = add_common(ingest, commons, "write the summary here");
    std::string ingest_trips_file, ingest_traces_file;
    std::string ingest_dir = env_or("FASTER_DATA_DIR", "faster-data");
    bool ingest_strict = false;
    auto* trips_opt = ingest->add_option("--trips", ingest_trips_file, "trip log (JSONL)")->check(CLI::ExistingFile);
    auto* traces_opt = ingest->add_option("--traces", ingest_traces_file, "presence traces (JSONL)")->check(CLI::ExistingFile);
    trips_opt->excludes(traces_opt);
    ingest->add_option("--data-dir", ingest_dir, "artifact store root")->envname("FASTER_DATA_DIR");
    ingest->add_flag("--strict", ingest_strict, "reject the file on the first malformed row");

    // train-chmm
    auto* tchmm = app.add_subcommand("train-chmm", "fit the clustered hidden Markov model on a trip log");
    auto& tchmm_c = add_common(tchmm, commons, "model JSON");
    std::string tchmm_trips, tchmm_network;
    FitOptions fit;
    tchmm->add_option("--trips", tchmm_trips, "trip log (JSONL)")->required()->check(CLI::ExistingFile);
    tchmm->add_option("--network", tchmm_network, "network or scenario JSON")->required()->check(CLI::ExistingFile);
    tchmm->add_option("--states", fit.n_states, "hidden states")->capture_default_str();
    tchmm->add_option("--clusters", fit.n_clusters, "mixture components")->capture_default_str();
    tchmm->add_option("--max-iter", fit.max_iter)->capture_default_str();
    tchmm->add_option("--tol", fit.tol)->capture_default_str();

    // cluster-users
    auto* cusers = app.add_subcommand("cluster-users", "group users by travel behaviour");
    auto& cusers_c = add_common(cusers, commons, "assignments (JSONL)");
    std::string cu_trips, cu_network, cu_rep = "gmm_qfd", cu_affinity;
    ClusterOptions copts;
    cusers->add_option("--trips", cu_trips, "trip log (JSONL)")->required()->check(CLI::ExistingFile);
    cusers->add_option("--network", cu_network, "network or scenario JSON")->required()->check(CLI::ExistingFile);
    cusers->add_option("-k,--clusters", copts.k, "number of groups")->capture_default_str();
    cusers->add_option("--representation", cu_rep, "histogram, gmm_qfd or gmm_kl")->capture_default_str();
    cusers->add_option("--components", copts.gmm_components)->capture_default_str();
    cusers->add_option("--kl-samples", copts.kl_samples)->capture_default_str();
    cusers->add_option("--workers", copts.workers, "0 = all cores");
    cusers->add_option("--affinity", cu_affinity, "also write the affinity matrix (CSV)");

    // train-dsg
    auto* tdsg = app.add_subcommand("train-dsg", "train the denied-boarding detector hierarchy");
    auto& tdsg_c = add_common(tdsg, commons, "model JSON");
    std::string tdsg_windows;
    HierarchyConfig hconf;
    bool no_bootstrap = false;
    tdsg->add_option("--windows", tdsg_windows, "labeled windows (CSV)")->required()->check(CLI::ExistingFile);
    tdsg->add_flag("--no-bootstrap", no_bootstrap);
    tdsg->add_option("--resamples", hconf.bootstrap.resamples)->capture_default_str();
    tdsg->add_option("--epochs", hconf.train.epochs)->capture_default_str();
    tdsg->add_option("--learning-rate", hconf.train.learning_rate)->capture_default_str();
    tdsg->add_option("--features", hconf.features, "column indices to keep");

    // simulate
    auto* sim = app.add_subcommand("simulate", "run the mesoscopic simulator");
    auto& sim_c = add_common(sim, commons, "travel-time CSV; other families go next to it");
    std::string sim_scenario, sim_frames;
    std::vector<std::string> sim_incidents;
    bool sim_all = false;
    sim->add_option("--scenario", sim_scenario, "scenario JSON")->required()->check(CLI::ExistingFile);
    sim->add_option("--incident", sim_incidents, "incident JSON (repeatable)")->check(CLI::ExistingFile);
    sim->add_flag("--all-metrics", sim_all, "record queues, loads and boardings too");
    sim->add_option("--frames", sim_frames, "write playback frames (JSONL)");

    // optimize
    auto* opt = app.add_subcommand("optimize", "search response plans for an incident");
    auto& opt_c = add_common(opt, commons, "plans JSON");
    std::string opt_scenario, opt_mode = "heuristic", opt_rank = "weighted";
    std::vector<std::string> opt_incidents;
    OptimizeOptions oopts;
    opt->add_option("--scenario", opt_scenario, "scenario JSON")->required()->check(CLI::ExistingFile);
    opt->add_option("--incident", opt_incidents, "incident JSON (repeatable)")->check(CLI::ExistingFile);
    opt->add_option("--max-lines", oopts.candidates.max_lines, "candidate lines")->capture_default_str();
    opt->add_option("--budget-seconds", oopts.budget_seconds)->capture_default_str();
    opt->add_option("--mode", opt_mode, "exact or heuristic")->check(CLI::IsMember({"exact", "heuristic"}))->capture_default_str();
    opt->add_option("--plans", oopts.plans, "program solutions to refine")->capture_default_str();
    opt->add_option("--move-budget", oopts.move_budget, "simulations per local search")->capture_default_str();
    opt->add_option("--rank", opt_rank, "weighted or lexicographic")->check(CLI::IsMember({"weighted", "lexicographic"}))->capture_default_str();
    opt->add_option("--workers", oopts.workers, "0 = all cores");

    // detect
    auto* det = app.add_subcommand("detect", "alerts on a KPI day against the calendar baseline");
    auto& det_c = add_common(det, commons, "alert events (JSONL)");
    std::string det_kpis, det_calendar, det_date, det_event, det_kpi, det_model_out, det_dir;
    AlertConfig aconf;
    det->add_option("--kpis", det_kpis, "expert KPI records (JSONL)")->required()->check(CLI::ExistingFile);
    det->add_option("--calendar", det_calendar, "calendar model, or a history of days to fit one")->required()->check(CLI::ExistingFile);
    det->add_option("--date", det_date, "YYYY-MM-DD")->required();
    det->add_option("--event", det_event, "special-event tag of the day");
    det->add_option("--kpi", det_kpi, "KPI to check (default: first in the file)");
    det->add_option("--z-medium", aconf.z_medium)->capture_default_str();
    det->add_option("--z-severe", aconf.z_severe)->capture_default_str();
    det->add_option("--persistence", aconf.persistence)->capture_default_str();
    det->add_option("--save-model", det_model_out, "write the fitted calendar model");
    det->add_option("--data-dir", det_dir, "also append to the store's alert log");

    // serve
    auto* srv = app.add_subcommand("serve", "HTTP/JSON service");
    auto& srv_c = add_common(srv, commons, "write {host, port} once listening");
    std::string srv_addr = env_or("FASTER_ADDR", "127.0.0.1:8080");
    std::string srv_dir = env_or("FASTER_DATA_DIR", "faster-data");
    unsigned srv_workers = 2;
    srv->add_option("--addr", srv_addr, "host:port")->envname("FASTER_ADDR")->capture_default_str();
    srv->add_option("--data-dir", srv_dir)->envname("FASTER_DATA_DIR")->capture_default_str();
    srv->add_option("--job-workers", srv_workers)->capture_default_str();
    srv->add_option("--budget-seconds", oopts.budget_seconds, "default optimizer budget");

    // report
    auto* rep = app.add_subcommand("report", "tabulate an optimize result");
    auto& rep_c = add_common(rep, commons, "text table");
    std::string rep_plans;
    rep->add_option("--plans", rep_plans, "optimize output JSON")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n";
        const auto subs = app.get_subcommands();
        std::cerr << (subs.empty() ? app.help() : subs.front()->help());
        return 2;
    }

    try {
        json summary;
        if (*ingest) {
            summary["command"] = "ingest";
            require(!ingest_trips_file.empty() || !ingest_traces_file.empty(), "one of --trips or --traces is required");
            ArtifactStore store(ingest_dir);
            const bool trips = !ingest_trips_file.empty();
            auto in = open_input(trips ? ingest_trips_file : ingest_traces_file);
            const auto report = trips ? ingest_trips(store, in, ingest_strict) : ingest_traces(store, in, ingest_strict);
            summary.update(to_json(report));
            summary["dataset_hash"] = summary["hash"];
            summary.erase("hash");
            summary["data_dir"] = ingest_dir;
            write_output(ingest_c.out, summary.dump(2) + "\n", summary);
        } else if (*tchmm) {
            summary["command"] = "train-chmm";
            fit.seed = tchmm_c.seed;
            const Network net = load_network_file(tchmm_network);
            const auto trips = load_trips(tchmm_trips, false, summary);
            std::vector<std::vector<TripObservation>> users;
            for (auto& [id, seq] : build_sequences(trips, net)) users.push_back(std::move(seq));
            std::vector<std::string> stations;
            for (const auto& s : net.stations()) stations.push_back(s.id);
            const auto result = train_chmm(users, stations, fit);
            summary["users"] = users.size();
            summary["iterations"] = result.iterations;
            summary["converged"] = result.converged;
            summary["reseeds"] = result.reseeds;
            summary["log_likelihood"] = result.log_likelihood.empty() ? 0.0 : result.log_likelihood.back();
            write_output(tchmm_c.out, to_json(result.model).dump(2) + "\n", summary);
        } else if (*cusers) {
            summary["command"] = "cluster-users";
            copts.seed = cusers_c.seed;
            copts.representation = representation_from_string(cu_rep);
            const Network net = load_network_file(cu_network);
            const auto trips = load_trips(cu_trips, false, summary);
            std::vector<UserTrips> users;
            for (auto& [id, seq] : build_sequences(trips, net)) users.push_back(UserTrips{id, std::move(seq)});
            std::vector<std::string> stations;
            for (const auto& s : net.stations()) stations.push_back(s.id);
            const auto result = cluster_users(users, stations, copts);
            summary["users"] = users.size();
            summary["representation"] = to_string(copts.representation);
            summary["alpha"] = result.alpha;
            json sizes = json::array();
            for (const auto& m : result.members) sizes.push_back(m.size());
            summary["cluster_sizes"] = sizes;
            if (!cu_affinity.empty()) {
                io::write_text_atomic(cu_affinity, affinity_csv(result.affinity, result.user_ids));
                summary["affinity"] = cu_affinity;
            }
            write_output(cusers_c.out, assignments_jsonl(result), summary);
        } else if (*tdsg) {
            summary["command"] = "train-dsg";
            hconf.bootstrap.enabled = !no_bootstrap;
            auto in = open_input(tdsg_windows);
            const auto windows = read_windows_csv(in);
            require(!windows.empty(), "no windows in " + tdsg_windows);
            const auto h = train_hierarchy(windows, hconf, tdsg_c.seed);
            std::vector<int> truth;
            long positives = 0;
            for (const auto& w : windows) {
                truth.push_back(w.label);
                positives += w.label;
            }
            summary["windows"] = windows.size();
            summary["positives"] = positives;
            summary["lines"] = h.lines.size();
            summary["stations"] = h.stations.size();
            summary["inherited"] = h.inherited.size();
            json fit_scores;
            for (Level level : {Level::Network, Level::Line, Level::Station}) {
                std::vector<bool> flags;
                for (const auto& w : windows) flags.push_back(classify(w, h, level).flag);
                const auto sc = evaluate(flags, truth);
                fit_scores[to_string(level)] = {
                    {"precision", sc.precision}, {"recall", sc.recall}, {"accuracy", sc.accuracy}};
            }
            summary["training_scores"] = fit_scores;
            write_output(tdsg_c.out, to_json(h).dump() + "\n", summary);
        } else if (*sim) {
            summary["command"] = "simulate";
            const Scenario s = load_scenario_with(sim_scenario, sim_incidents, sim_c.seed_opt, sim_c.seed);
            const auto selection = sim_all ? MetricSelection::all() : MetricSelection{};
            Simulator runner(s, selection);
            runner.run();
            const auto metrics = runner.metrics();
            summary["seed"] = s.seed;
            summary["incidents"] = s.incidents.size();
            summary["summary"] = summary_json(metrics);
            if (!sim_c.out.empty()) {
                json files = json::array();
                for (const auto& p : write_metrics_csv(metrics, runner.demand(), s.network, sim_c.out))
                    files.push_back({{"path", p.string()}, {"hash", sha256_hex(io::read_text(p))}});
                summary["files"] = files;
            }
            if (!sim_frames.empty()) {
                PlaybackSession session(s);
                std::string text;
                for (const auto& f : session.step(s.horizon)) text += to_json(f).dump() + "\n";
                io::write_text_atomic(sim_frames, text);
                summary["frames"] = {{"path", sim_frames}, {"count", session.frames().size()},
                                     {"hash", sha256_hex(text)}};
            }
        } else if (*opt) {
            summary["command"] = "optimize";
            const Scenario s = load_scenario_with(opt_scenario, opt_incidents, opt_c.seed_opt, opt_c.seed);
            oopts.mode = solve_mode_from_string(opt_mode);
            oopts.rank = opt_rank == "lexicographic" ? RankMode::Lexicographic : RankMode::WeightedSum;
            oopts.seed = opt_c.seed;
            const auto result = optimize(s, oopts);
            const json doc = to_json(result);
            summary["plans"] = result.plans.size();
            summary["candidates"] = result.candidates.lines.size();
            if (!result.candidates.diagnostic.empty()) summary["diagnostic"] = result.candidates.diagnostic;
            summary["simulations"] = result.simulations;
            summary["timed_out"] = result.timed_out;
            if (!result.plans.empty()) {
                summary["best"] = result.plans.front().id;
                summary["best_objective"] = result.plans.front().objective;
                summary["best_metrics"] = to_json(result.plans.front().metrics);
            }
            write_output(opt_c.out, doc.dump(2) + "\n", summary);
        } else if (*det) {
            summary["command"] = "detect";
            const json cal_doc = io::read_json(det_calendar);
            CalendarModel model;
            if (cal_doc.is_array()) {
                std::vector<CalendarDay> history;
                for (const auto& d : cal_doc) history.push_back(calendar_day_from_json(d));
                model = fit_calendar(history);
                summary["history_days"] = history.size();
                if (!det_model_out.empty()) io::write_text_atomic(det_model_out, to_json(model).dump() + "\n");
            } else {
                model = calendar_from_json(cal_doc);
            }
            KpiGrid grid;
            for (const auto& [station, sd] : model.residual_std) grid.stations.push_back(station);
            grid.steps = model.bins;
            grid.step_seconds = model.bin_seconds();
            auto in = open_input(det_kpis);
            std::vector<std::pair<int, std::string>> errors;
            const auto records = read_expert_jsonl(in, false, &errors);
            require(!records.empty(), "no KPI records in " + det_kpis);
            if (det_kpi.empty()) det_kpi = records.front().kpi;
            KpiFusion fusion(grid);
            for (const auto& r : records)
                if (r.kpi == det_kpi) fusion.ingest(r.expert_id, r.kpi, r.sample);
            const auto series = fusion.series(det_kpi);
            const auto alerts = detect_series(series, model, det_date, aconf, det_event);
            std::ostringstream log;
            append_alert_log(log, alerts.events, &grid);
            long opened = 0;
            for (const auto& e : alerts.events) opened += e.kind == AlertEvent::Kind::Open;
            summary["kpi"] = det_kpi;
            summary["date"] = det_date;
            summary["records"] = records.size();
            summary["skipped"] = errors.size();
            summary["dropped"] = fusion.dropped();
            summary["events"] = alerts.events.size();
            summary["alerts"] = opened;
            summary["unmonitored"] = alerts.unmonitored;
            if (!det_dir.empty()) {
                ArtifactStore store(det_dir);
                for (const auto& e : alerts.events) store.append_log("alerts", to_json(e, &grid));
                summary["data_dir"] = det_dir;
            }
            write_output(det_c.out, log.str(), summary);
        } else if (*srv) {
            const auto colon = srv_addr.rfind(':');
            require(colon != std::string::npos, "address must be host:port");
            const std::string host = srv_addr.substr(0, colon);
            int port = 0;
            try {
                port = std::stoi(srv_addr.substr(colon + 1));
            } catch (const std::exception&) {
                throw ValidationError("bad port in " + srv_addr);
            }
            require(port >= 0 && port < 65536, "bad port in " + srv_addr);
            ServiceConfig config;
            config.data_dir = srv_dir;
            config.job_workers = srv_workers;
            config.optimize = oopts;
            config.optimize.seed = srv_c.seed;
            Service service(config);
            serve_http(service, host, port, [&](int bound) {
                json info{{"command", "serve"}, {"host", host}, {"port", bound}, {"data_dir", srv_dir}};
                if (!srv_c.out.empty()) io::write_text_atomic(srv_c.out, info.dump() + "\n");
                emit(info);
            });
            return 0;
        } else if (*rep) {
            summary["command"] = "report";
            const json doc = io::read_json(rep_plans);
            require(doc.contains("plans") && doc.at("plans").is_array(), "not an optimize result: " + rep_plans);
            const std::string table = format_table(doc);
            std::cerr << table;
            summary["plans"] = doc.at("plans").size();
            if (!doc.at("plans").empty()) summary["best"] = doc.at("plans").front().at("id");
            write_output(rep_c.out, table, summary);
        }
        emit(summary);
        return 0;
    } catch (const ValidationError& e) {
        std::cerr << json{{"code", "validation_error"}, {"message", e.what()}}.dump() << std::endl;
        return 2;
    } catch (const std::exception& e) {
        std::cerr << json{{"code", "error"}, {"message", e.what()}}.dump() << std::endl;
        return 1;
    }
}
