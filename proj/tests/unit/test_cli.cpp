#include "faster/common/hash.hpp"
#include "faster/common/io.hpp"
#include "faster/service/playback.hpp"
#include "faster/sim/scenario.hpp"

#include <doctest.h>
#include <httplib.h>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>

#include <sys/wait.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kFixtures = FASTER_FIXTURE_DIR;

struct Run {
    int rc = -1;
    std::string out;
    std::string err;
};

fs::path scratch(const std::string& name)
{
    auto p = fs::temp_directory_path() / ("faster_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

Run cli(const std::string& args, const fs::path& dir)
{
    const auto err_file = dir / "stderr.txt";
    const std::string cmd = std::string("\"") + FASTER_CLI_PATH + "\" " + args + " 2>\"" + err_file.string() + "\"";
    Run r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    std::size_t n = 0;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
    const int status = pclose(pipe);
    r.rc = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.err = faster::io::read_text(err_file);
    return r;
}

std::string fx(const std::string& name) { return "\"" + kFixtures + "/" + name + "\""; }
std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

} // namespace

TEST_CASE("usage errors exit 2 with usage text")
{
    const auto dir = scratch("usage");
    auto r = cli("", dir);
    CHECK(r.rc == 2);
    CHECK(r.err.find("Usage") != std::string::npos);

    r = cli("simulate --out " + q(dir / "m.csv"), dir);
    CHECK(r.rc == 2);
    CHECK(r.err.find("--scenario is required") != std::string::npos);
    CHECK(r.err.find("Usage") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "m.csv"));

    r = cli("optimize --scenario " + fx("scenario_5station.json") + " --mode fastest", dir);
    CHECK(r.rc == 2);
    r = cli("simulate --scenario " + q(dir / "missing.json"), dir);
    CHECK(r.rc == 2);
}

TEST_CASE("every subcommand takes --seed and --out")
{
    const auto dir = scratch("help");
    for (const char* sub : {"ingest", "train-chmm", "cluster-users", "train-dsg", "simulate", "optimize", "detect",
                            "serve", "report"}) {
        CAPTURE(sub);
        const auto r = cli(std::string(sub) + " --help", dir);
        CHECK(r.rc == 0);
        CHECK(r.out.find("--seed") != std::string::npos);
        CHECK(r.out.find("--out") != std::string::npos);
    }
}

TEST_CASE("validation failures exit 2, other failures exit 1")
{
    const auto dir = scratch("errors");
    auto doc = faster::io::read_json(kFixtures + "/scenario_5station.json");
    doc["network_ref"] = kFixtures + "/network_5station.json";
    doc["od_rates"].push_back({{"origin", "A"}, {"destination", "Z"}, {"from", 0}, {"to", 10}, {"rate", 1}});
    faster::io::write_text_atomic(dir / "bad.json", doc.dump());
    auto r = cli("simulate --scenario " + q(dir / "bad.json"), dir);
    CHECK(r.rc == 2);
    CHECK(json::parse(r.err).at("code") == "validation_error");

    // trips at a station the network does not know
    faster::io::write_text_atomic(
        dir / "trips.jsonl",
        R"({"user_id":"u","entry_station":"A","entry_time":100,"exit_station":"Q","exit_time":400})" "\n");
    r = cli("train-chmm --trips " + q(dir / "trips.jsonl") + " --network " + fx("network_5station.json"), dir);
    CHECK(r.rc == 1);
}

TEST_CASE("simulate writes metrics and frames")
{
    const auto dir = scratch("simulate");
    const auto r = cli("simulate --scenario " + fx("scenario_5station.json") + " --out " + q(dir / "m.csv") +
                           " --frames " + q(dir / "frames.jsonl") + " --all-metrics",
                       dir);
    REQUIRE(r.rc == 0);
    const auto summary = json::parse(r.out);
    CHECK(summary.at("command") == "simulate");
    CHECK(summary.at("summary").at("injected").get<long>() > 0);
    REQUIRE(fs::exists(dir / "m.csv"));
    CHECK(faster::io::read_text(dir / "m.csv").rfind("commodity,origin,destination", 0) == 0);
    CHECK(fs::exists(dir / "m.queues.csv"));
    CHECK(summary.at("files").size() == 4);

    // frames equal an in-process playback of the same scenario
    faster::PlaybackSession session(faster::load_scenario(kFixtures + "/scenario_5station.json"));
    std::string expected;
    for (const auto& f : session.step(1000)) expected += faster::to_json(f).dump() + "\n";
    CHECK(faster::io::read_text(dir / "frames.jsonl") == expected);

    // a seed override changes the sampled demand
    const auto again = cli("simulate --scenario " + fx("scenario_5station.json") + " --seed 8", dir);
    REQUIRE(again.rc == 0);
    CHECK(json::parse(again.out).at("seed") == 8);
}

TEST_CASE("optimize and report on the fixture incident")
{
    const auto dir = scratch("optimize");
    const std::string args = "optimize --scenario " + fx("scenario_5station.json") + " --incident " +
                             fx("incident_bc.json") + " --max-lines 6 --budget-seconds 60 --mode heuristic --seed 3";
    const auto r = cli(args + " --out " + q(dir / "plans.json"), dir);
    REQUIRE(r.rc == 0);
    const auto doc = faster::io::read_json(dir / "plans.json");
    REQUIRE(doc.at("plans").size() >= 1);
    for (const auto& p : doc.at("plans")) {
        CHECK(p.at("metrics").contains("average_delay_min"));
        CHECK(p.at("metrics").contains("delay_ge_20_min_count"));
        CHECK(p.at("metrics").contains("overcrowding_min"));
    }
    CHECK(json::parse(r.out).at("hash") == faster::sha256_hex(faster::io::read_text(dir / "plans.json")));

    const auto again = cli(args + " --out " + q(dir / "plans2.json"), dir);
    REQUIRE(again.rc == 0);
    CHECK(faster::io::read_text(dir / "plans.json") == faster::io::read_text(dir / "plans2.json"));

    const auto rep = cli("report --plans " + q(dir / "plans.json") + " --out " + q(dir / "table.txt"), dir);
    REQUIRE(rep.rc == 0);
    const auto table = faster::io::read_text(dir / "table.txt");
    CHECK(table.find(doc.at("plans")[0].at("id").get<std::string>()) != std::string::npos);
    CHECK(json::parse(rep.out).at("plans") == doc.at("plans").size());
}

TEST_CASE("ingest strict and lenient")
{
    const auto dir = scratch("ingest");
    std::string text = faster::io::read_text(kFixtures + "/trips_5station.jsonl");
    text += "{\"user_id\": \"x\"}\n";
    faster::io::write_text_atomic(dir / "trips.jsonl", text);
    auto r = cli("ingest --trips " + q(dir / "trips.jsonl") + " --data-dir " + q(dir / "data"), dir);
    REQUIRE(r.rc == 0);
    const auto summary = json::parse(r.out);
    CHECK(summary.at("rows") == 320);
    CHECK(summary.at("skipped") == 1);
    CHECK(fs::exists(dir / "data" / "trips"));

    r = cli("ingest --strict --trips " + q(dir / "trips.jsonl") + " --data-dir " + q(dir / "data"), dir);
    CHECK(r.rc == 2);
    CHECK(r.err.find("line 321") != std::string::npos);
}

TEST_CASE("learning subcommands")
{
    const auto dir = scratch("learn");
    auto r = cli("train-chmm --trips " + fx("trips_5station.jsonl") + " --network " + fx("network_5station.json") +
                     " --clusters 3 --seed 1 --out " + q(dir / "chmm.json"),
                 dir);
    REQUIRE(r.rc == 0);
    CHECK(json::parse(r.out).at("users") == 40);
    CHECK(faster::io::read_json(dir / "chmm.json").contains("A"));

    r = cli("cluster-users --trips " + fx("trips_5station.jsonl") + " --network " + fx("network_5station.json") +
                " -k 2 --out " + q(dir / "groups.jsonl") + " --affinity " + q(dir / "aff.csv"),
            dir);
    REQUIRE(r.rc == 0);
    CHECK(json::parse(r.out).at("cluster_sizes") == json::array({20, 20}));
    std::ifstream groups(dir / "groups.jsonl");
    std::string line;
    int n = 0;
    while (std::getline(groups, line)) ++n;
    CHECK(n == 40);

    r = cli("train-dsg --windows " + fx("dsg_windows.csv") + " --resamples 5 --out " + q(dir / "dsg.json"), dir);
    REQUIRE(r.rc == 0);
    CHECK(json::parse(r.out).at("windows") == 300);
}

TEST_CASE("detect flags the injected anomaly and logs it")
{
    const auto dir = scratch("detect");
    const auto r = cli("detect --kpis " + fx("kpi_day.jsonl") + " --calendar " + fx("calendar_history.json") +
                           " --date 2024-01-29 --persistence 2 --out " + q(dir / "alerts.jsonl") + " --data-dir " +
                           q(dir / "data") + " --save-model " + q(dir / "calendar.json"),
                       dir);
    REQUIRE(r.rc == 0);
    CHECK(json::parse(r.out).at("alerts") == 1);
    const auto first = json::parse(faster::io::read_text(dir / "alerts.jsonl").substr(0, faster::io::read_text(dir / "alerts.jsonl").find('\n')));
    CHECK(first.at("station") == "B");
    // injection starts at bin 12, persistence 2 opens one step later
    CHECK(first.at("step") == 13);
    CHECK(fs::exists(dir / "data" / "logs" / "alerts.jsonl"));

    // the saved model gives the same result
    const auto again = cli("detect --kpis " + fx("kpi_day.jsonl") + " --calendar " + q(dir / "calendar.json") +
                               " --date 2024-01-29 --persistence 2 --out " + q(dir / "alerts2.jsonl"),
                           dir);
    REQUIRE(again.rc == 0);
    CHECK(faster::io::read_text(dir / "alerts.jsonl") == faster::io::read_text(dir / "alerts2.jsonl"));
}

TEST_CASE("serve answers over HTTP")
{
    const auto dir = scratch("serve");
    const auto info = dir / "bound.json";
    const std::string cmd = std::string("FASTER_ADDR=127.0.0.1:0 \"") + FASTER_CLI_PATH + "\" serve --data-dir " +
                            q(dir / "data") + " --out " + q(info) + " >/dev/null 2>&1 & echo $!";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    long pid = 0;
    REQUIRE(fscanf(pipe, "%ld", &pid) == 1);
    pclose(pipe);
    for (int i = 0; i < 200 && !fs::exists(info); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(25));
    REQUIRE(fs::exists(info));
    const int port = faster::io::read_json(info).at("port").get<int>();
    httplib::Client client("127.0.0.1", port);
    auto res = client.Get("/plans");
    REQUIRE(res);
    CHECK(res->status == 200);
    res = client.Get("/scenarios/nope");
    REQUIRE(res);
    CHECK(res->status == 404);
    CHECK(json::parse(res->body).at("code") == "not_found");
    std::system(("kill " + std::to_string(pid)).c_str());
}
