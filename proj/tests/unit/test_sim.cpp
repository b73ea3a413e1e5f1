#include <doctest.h>

#include "random_scenario.hpp"

#include "faster/common/error.hpp"
#include "faster/common/io.hpp"
#include "faster/sim/metrics.hpp"
#include "faster/sim/path_planner.hpp"
#include "faster/sim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>

using namespace faster;

namespace {

Scenario single_line(int capacity, std::vector<int> departures, int horizon = 20)
{
    Scenario s;
    s.network = Network({{"A", {0, 0}, 100}, {"B", {1000, 0}, 100}},
                        {{"L", Mode::Train, {"A", "B"}, {1}, capacity, 5}});
    s.horizon = horizon;
    s.timetable = {{"L", std::move(departures), 0}};
    return s;
}

Scenario detour()
{
    Scenario s;
    s.network = load_network(io::read_json(FASTER_FIXTURE_DIR "/network_detour.json"));
    s.horizon = 40;
    s.timetable = {{"M", {1, 3, 5, 7, 9, 11, 13, 15, 17, 19, 21, 23, 25, 27, 29, 31, 33, 35}, 0},
                   timetable_for_services(s.network.line("N"), 1, 40)};
    return s;
}

std::map<int, std::vector<int>> per_person(const SimMetrics& m)
{
    std::map<int, std::vector<int>> out;
    for (const auto& g : *m.travel_times) out[g.commodity].insert(out[g.commodity].end(), g.count, g.travel_time);
    for (auto& [k, v] : out) std::sort(v.begin(), v.end());
    return out;
}

} // namespace

TEST_CASE("empty demand gives zero metrics")
{
    auto m = simulate(single_line(100, {0, 5}), MetricSelection::all());
    CHECK(m.injected == 0);
    CHECK(m.arrived == 0);
    CHECK(m.total_travel_time() == 0);
    CHECK(m.travel_times->empty());
    for (const auto& row : *m.queue_lengths)
        for (int v : row) CHECK(v == 0);
}

TEST_CASE("single passenger waits then rides")
{
    auto s = single_line(100, {2});
    s.commodities.push_back({"p", "A", "B", 0, 1});
    auto m = simulate(s);
    REQUIRE(m.travel_times->size() == 1);
    CHECK(m.travel_times->front().travel_time == 3);
    CHECK(m.travel_times->front().arrival == 3);
}

TEST_CASE("capacity denial and FIFO")
{
    auto s = single_line(100, {1, 6});
    s.commodities.push_back({"first", "A", "B", 0, 150});
    s.commodities.push_back({"second", "A", "B", 1, 30});
    auto m = simulate(s, MetricSelection::all());
    const auto& b = *m.boardings;
    REQUIRE(b.size() == 2);
    CHECK(b[0].boarded == 100);
    CHECK(b[0].denied == 80);
    CHECK(b[1].boarded == 80);
    // the first commodity's remainder boards ahead of later arrivals
    auto pp = per_person(m);
    CHECK(std::count(pp[0].begin(), pp[0].end(), 2) == 100);
    CHECK(std::count(pp[0].begin(), pp[0].end(), 7) == 50);
    CHECK(std::count(pp[1].begin(), pp[1].end(), 6) == 30);
    for (const auto& r : *m.train_loads) CHECK(r.load <= 100);
}

TEST_CASE("150 passengers over two departures")
{
    auto s = single_line(100, {0, 5});
    s.commodities.push_back({"p", "A", "B", 0, 150});
    auto m = simulate(s, MetricSelection::all());
    REQUIRE(m.boardings->size() == 2);
    CHECK((*m.boardings)[0].boarded == 100);
    CHECK((*m.boardings)[0].denied == 50);
    CHECK((*m.boardings)[1].boarded == 50);
    CHECK((*m.boardings)[1].denied == 0);
    CHECK(m.arrived == 150);
}

TEST_CASE("unselected families are not allocated")
{
    auto s = single_line(100, {0});
    s.commodities.push_back({"p", "A", "B", 0, 1});
    auto m = simulate(s, MetricSelection::none());
    CHECK_FALSE(m.travel_times.has_value());
    CHECK_FALSE(m.queue_lengths.has_value());
    CHECK_FALSE(m.train_loads.has_value());
    CHECK_FALSE(m.boardings.has_value());
    CHECK(m.arrived == 1);
}

TEST_CASE("timetable with unknown line")
{
    auto s = single_line(100, {0});
    s.timetable.push_back({"nope", {0}, 0});
    CHECK_THROWS_AS(simulate(s), ValidationError);
}

TEST_CASE("stranded passengers accrue to horizon end")
{
    auto s = single_line(100, {0, 5, 10});
    s.incidents.push_back({"A", "B", Direction::Both, 0, 20, ""});
    s.commodities.push_back({"p", "A", "B", 4, 3});
    auto m = simulate(s, MetricSelection::all());
    CHECK(m.stranded == 3);
    CHECK(m.in_system == 3);
    CHECK(m.travel_times->front().travel_time == 16);
    CHECK(m.travel_times->front().stranded);
    CHECK((*m.queue_lengths)[0][10] == 3);
}

TEST_CASE("incident mid-simulation reroutes a waiting passenger")
{
    auto s = detour();
    s.commodities.push_back({"p", "A", "C", 0, 1});
    auto calm = simulate(s, MetricSelection::all());
    CHECK(calm.travel_times->front().travel_time == 5);
    CHECK(calm.reroutes == 0);

    s.incidents.push_back({"B", "C", Direction::Both, 1, 30, ""});
    auto m = simulate(s, MetricSelection::all());
    CHECK(m.reroutes == 1);
    CHECK(m.arrived == 1);
    // walk to the bus (2 steps), next bus at 4, ride 8
    CHECK(m.travel_times->front().travel_time == 12);
    bool rode_bus = false;
    for (const auto& r : *m.boardings)
        if (r.boarded > 0) rode_bus = s.network.lines()[r.line].id == "N";
    CHECK(rode_bus);
}

TEST_CASE("train held at a blocked segment offloads its riders")
{
    auto s = detour();
    s.commodities.push_back({"p", "A", "C", 0, 4});
    s.incidents.push_back({"B", "C", Direction::Both, 2, 6, ""});
    auto m = simulate(s, MetricSelection::all());
    CHECK(m.arrived == 4);
    // rides A->B (1..3), waits for the block to lift, next M service through B leaves at 7
    CHECK(m.travel_times->front().travel_time >= 9);
    CHECK(m.reroutes >= 1);
}

TEST_CASE("path planner tie-break and invalidation")
{
    Network net({{"A", {0, 0}, 100}, {"B", {1, 0}, 100}},
                {{"Y", Mode::Train, {"A", "B"}, {2}, 10, 1}, {"X", Mode::Train, {"A", "B"}, {2}, 10, 1}});
    PathPlanner planner(build_time_expanded_graph(net, {10, 60, 2}));
    auto p = planner.plan({"p", "A", "B", 0, 1});
    REQUIRE(p);
    REQUIRE(p->legs.size() == 1);
    CHECK(net.lines()[p->legs[0].line].id == "X");
    CHECK(p->cost == 2);
    CHECK(planner.cache_size() == 1);

    const auto dropped = planner.apply_incident({"A", "B", Direction::Both, 0, 10, ""});
    CHECK(dropped == 1);
    CHECK_FALSE(planner.plan({"p", "A", "B", 0, 1}).has_value());

    auto assignment = plan_paths(build_time_expanded_graph(net, {10, 60, 2}),
                                 {{"a", "A", "B", 0, 1}, {"b", "B", "A", 0, 1}});
    CHECK_FALSE(assignment[0].stranded());
    CHECK(assignment[1].stranded());
}

TEST_CASE("conservation, capacity and determinism on random scenarios")
{
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        auto s = testing::random_scenario(seed);
        auto a = simulate(s, MetricSelection::all());
        auto b = simulate(s, MetricSelection::all());
        CHECK(a == b);
        CHECK(a.injected == a.arrived + a.in_system);
        long persons = 0;
        for (const auto& g : *a.travel_times) persons += g.count;
        CHECK(persons == a.injected);
        for (const auto& r : *a.train_loads) {
            int cap = s.network.lines()[r.line].capacity;
            CHECK(r.load <= cap);
        }
    }
}

TEST_CASE("more capacity never slows anyone on a single line")
{
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto s = testing::random_scenario(seed, 1, 30);
        s.incidents.clear();
        auto small = per_person(simulate(s));
        Line l = s.network.lines()[0];
        l.capacity += 25;
        s.network = Network(s.network.stations(), {l});
        auto big = per_person(simulate(s));
        for (const auto& [c, v] : small) {
            REQUIRE(big[c].size() == v.size());
            for (std::size_t i = 0; i < v.size(); ++i) CHECK(big[c][i] <= v[i]);
        }
    }
}

TEST_CASE("stepwise run equals one-shot run")
{
    auto s = testing::random_scenario(3);
    Simulator sim(s, MetricSelection::all());
    std::vector<std::vector<int>> frames;
    while (!sim.finished()) {
        sim.step();
        frames.push_back(sim.station_queue_snapshot());
    }
    auto whole = simulate(s, MetricSelection::all());
    CHECK(sim.metrics() == whole);
    for (std::size_t t = 0; t < frames.size(); ++t)
        for (std::size_t st = 0; st < frames[t].size(); ++st) CHECK(frames[t][st] == (*whole.queue_lengths)[st][t]);
}

TEST_CASE("Bhattacharyya coefficient and travel time error")
{
    CHECK(bhattacharyya({1, 2, 3}, {1, 2, 3}) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(bhattacharyya({1, 0}, {0, 1}) == 0.0);
    CHECK(std::abs(bhattacharyya({0.5, 0.5}, {0.25, 0.75}) - (std::sqrt(0.125) + std::sqrt(0.375))) < 1e-12);
    CHECK(std::abs(bhattacharyya({0.5, 0.5}, {0.25, 0.75}) - 0.9659258262890683) < 1e-9);

    OdTravelTimes sim{{{"A", "B"}, {10, 12}}, {{"A", "C"}, {20}}};
    OdTravelTimes obs{{{"A", "B"}, {10, 10}}, {{"B", "C"}, {5}}};
    auto e = travel_time_error(sim, obs);
    CHECK(e.pairs == 1);
    CHECK(e.mae_minutes == doctest::Approx(1.0));
    CHECK(e.mre_percent == doctest::Approx(10.0));
    CHECK(e.mean_bc == doctest::Approx(std::sqrt(0.5)));
    CHECK_THROWS_AS(travel_time_error(sim, {{{"X", "Y"}, {1}}}), ValidationError);
}

TEST_CASE("metrics CSV export")
{
    auto s = single_line(100, {0, 5});
    s.commodities.push_back({"p", "A", "B", 0, 150});
    auto m = simulate(s, MetricSelection::all());
    auto dir = std::filesystem::temp_directory_path() / "faster_sim_csv";
    std::filesystem::create_directories(dir);
    Simulator sim(s, MetricSelection::all());
    auto files = write_metrics_csv(m, sim.demand(), s.network, dir / "m.csv");
    REQUIRE(files.size() == 4);
    CHECK(files[1].filename() == "m.queues.csv");
    auto text = io::read_text(dir / "m.csv");
    CHECK(text.rfind("commodity,origin,destination,start,count,arrival,travel_time,stranded\n", 0) == 0);
    CHECK(text.find("p,A,B,0,100,1,1,0") != std::string::npos);
    CHECK(text.find("p,A,B,0,50,6,6,0") != std::string::npos);
    auto boardings = io::read_text(dir / "m.boardings.csv");
    CHECK(boardings.find("L,0,0,0,100,50") != std::string::npos);
    std::filesystem::remove_all(dir);
}
