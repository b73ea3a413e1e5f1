#include <doctest.h>

#include "faster/common/error.hpp"
#include "faster/common/io.hpp"
#include "faster/model/commodity.hpp"
#include "faster/model/incident.hpp"
#include "faster/model/time_expanded_graph.hpp"

#include <algorithm>
#include <random>

using namespace faster;

namespace {

Network two_station(int runtime = 1)
{
    return Network({{"A", {0, 0}, 100}, {"B", {1000, 0}, 100}},
                   {{"L", Mode::Train, {"A", "B"}, {runtime}, 100, 2}});
}

std::size_t closed_form_arcs(const Network& net, int T, ArcKind kind)
{
    std::size_t n = 0;
    for (const auto& l : net.lines()) {
        if (kind == ArcKind::Service)
            for (int r : l.runtimes) n += static_cast<std::size_t>(std::max(0, T - r));
        if (kind == ArcKind::Wait) n += l.stations.size() * static_cast<std::size_t>(T - 1);
    }
    return n;
}

Network random_network(std::mt19937& rng)
{
    std::uniform_int_distribution<int> n_st(2, 6), rt(1, 4), n_ln(1, 3);
    const int ns = n_st(rng);
    std::vector<Station> st;
    for (int i = 0; i < ns; ++i) st.push_back({"S" + std::to_string(i), {i * 1000.0, 0}, 100});
    std::vector<Line> lines;
    const int nl = n_ln(rng);
    for (int l = 0; l < nl; ++l) {
        std::vector<std::string> ids;
        for (int i = 0; i < ns; ++i) ids.push_back(st[i].id);
        std::shuffle(ids.begin(), ids.end(), rng);
        ids.resize(std::uniform_int_distribution<int>(2, ns)(rng));
        std::vector<int> runtimes;
        for (std::size_t k = 1; k < ids.size(); ++k) runtimes.push_back(rt(rng));
        lines.push_back({"L" + std::to_string(l), Mode::Train, ids, runtimes, 50, 3});
    }
    return Network(st, lines);
}

} // namespace

TEST_CASE("load_network counts the fixture")
{
    const auto net = load_network(io::read_json(FASTER_FIXTURE_DIR "/network_5station.json"));
    CHECK(net.stations().size() == 5);
    CHECK(net.lines().size() == 1);
    CHECK(net.total_segments() == 4);
}

TEST_CASE("load_network edge cases")
{
    auto one = load_network(nlohmann::json::parse(R"({"stations":[{"id":"A","x":0,"y":0,"platform_capacity":5}]})"));
    CHECK(one.stations().size() == 1);
    CHECK(one.lines().empty());

    auto dangling = nlohmann::json::parse(R"({"stations":[{"id":"A","x":0,"y":0,"platform_capacity":5}],
        "lines":[{"id":"L","mode":"train","stations":["A","Z"],"runtimes":[1],"capacity":10,"headway":1}]})");
    CHECK_THROWS_AS(load_network(dangling), ValidationError);

    auto zero_cap = dangling;
    zero_cap["stations"].push_back({{"id", "Z"}, {"x", 1}, {"y", 1}, {"platform_capacity", 5}});
    zero_cap["lines"][0]["capacity"] = 0;
    CHECK_THROWS_AS(load_network(zero_cap), ValidationError);

    auto missing = nlohmann::json::parse(R"({"stations":[{"id":"A","x":0}]})");
    CHECK_THROWS_AS(load_network(missing), ValidationError);
}

TEST_CASE("time-expanded graph on small fixtures")
{
    SUBCASE("stub line with T=1 has no service arcs")
    {
        auto g = build_time_expanded_graph(two_station(1), {1, 60, 2});
        CHECK(g.count_active(ArcKind::Service) == 0);
        CHECK(g.count_active(ArcKind::Wait) == 0);
    }
    SUBCASE("two stations, runtime 1, T=3")
    {
        auto g = build_time_expanded_graph(two_station(1), {3, 60, 2});
        CHECK(g.count_active(ArcKind::Service) == 2);
        CHECK(g.count_active(ArcKind::Wait) == 4);
        for (const auto& a : g.arcs())
            if (a.kind == ArcKind::Service) {
                CHECK(g.node(a.tail).station == 0);
                CHECK(g.node(a.head).station == 1);
                CHECK(g.node(a.head).time == a.time + 1);
                CHECK(a.cost == 1);
            }
    }
    SUBCASE("a second line doubles line-nodes, service arcs per line unchanged")
    {
        auto base = two_station(1);
        auto g1 = build_time_expanded_graph(base, {3, 60, 2});
        auto two = base.with_lines({{"L2", Mode::Train, {"A", "B"}, {1}, 100, 2}});
        auto g2 = build_time_expanded_graph(two, {3, 60, 2});
        CHECK(g2.line_node_count() == 2 * g1.line_node_count());
        CHECK(g2.count_active(ArcKind::Service, 0) == g1.count_active(ArcKind::Service, 0));
        CHECK(g2.count_active(ArcKind::Service, 1) == g1.count_active(ArcKind::Service, 0));
    }
    CHECK_THROWS_AS(build_time_expanded_graph(two_station(), {0, 60, 2}), ValidationError);
}

TEST_CASE("arc counts match the closed form on random networks")
{
    std::mt19937 rng(11);
    for (int trial = 0; trial < 40; ++trial) {
        const auto net = random_network(rng);
        const int T = std::uniform_int_distribution<int>(1, 20)(rng);
        auto g = build_time_expanded_graph(net, {T, 60, 2});
        CHECK(g.count_active(ArcKind::Service) == closed_form_arcs(net, T, ArcKind::Service));
        CHECK(g.count_active(ArcKind::Wait) == closed_form_arcs(net, T, ArcKind::Wait));
        for (const auto& a : g.arcs())
            if (a.kind == ArcKind::Service) {
                const auto& l = net.lines()[a.line];
                CHECK(a.cost == l.runtimes[g.node(a.tail).position]);
            } else if (a.kind == ArcKind::Wait) {
                CHECK(a.cost == 1);
                CHECK(g.node(a.head).time == g.node(a.tail).time + 1);
            }
    }
}

TEST_CASE("apply_incident removes exactly the arcs in the window")
{
    Network bidir({{"A", {0, 0}, 100}, {"B", {1, 0}, 100}, {"C", {2, 0}, 100}, {"D", {3, 0}, 100}},
                  {{"F", Mode::Train, {"A", "B", "C", "D"}, {1, 1, 1}, 100, 2},
                   {"R", Mode::Train, {"D", "C", "B", "A"}, {1, 1, 1}, 100, 2}});
    auto g = build_time_expanded_graph(bidir, {12, 60, 2});
    Incident inc{"B", "C", Direction::Both, 8, 9, ""};
    auto h = apply_incident(g, inc);
    CHECK(g.count_active(ArcKind::Service) - h.count_active(ArcKind::Service) == 2);
    for (const auto& a : h.arcs()) {
        const auto& orig = g.arc(&a - h.arcs().data());
        if (a.active != orig.active) {
            CHECK(a.kind == ArcKind::Service);
            CHECK(a.time == 8);
            const bool bc = (a.from_station == 1 && a.to_station == 2) || (a.from_station == 2 && a.to_station == 1);
            CHECK(bc);
        }
    }

    SUBCASE("empty window leaves the graph unchanged")
    {
        Incident empty{"B", "C", Direction::Both, 8, 8, ""};
        CHECK(apply_incident(g, empty).active_arc_ids() == g.active_arc_ids());
    }
    SUBCASE("idempotent and commuting")
    {
        CHECK(apply_incident(h, inc).active_arc_ids() == h.active_arc_ids());
        Incident other{"C", "D", Direction::Forward, 2, 6, ""};
        CHECK(apply_incident(apply_incident(g, inc), other).active_arc_ids() ==
              apply_incident(apply_incident(g, other), inc).active_arc_ids());
    }
    SUBCASE("unknown segment")
    {
        CHECK_THROWS_AS(apply_incident(g, Incident{"A", "C", Direction::Both, 1, 3, ""}), ValidationError);
    }
}

TEST_CASE("bus-only incident leaves train arcs intact")
{
    const auto net = load_network(io::read_json(FASTER_FIXTURE_DIR "/network_detour.json"));
    auto g = build_time_expanded_graph(net, {20, 60, 2});
    auto h = apply_incident(g, Incident{"A", "X", Direction::Both, 0, 10, ""});
    CHECK(h.count_active(ArcKind::Service, 0) == g.count_active(ArcKind::Service, 0));
    CHECK(h.count_active(ArcKind::Service, 1) == g.count_active(ArcKind::Service, 1) - 10);
}

TEST_CASE("incident documents")
{
    auto inc = incident_from_json(io::read_json(FASTER_FIXTURE_DIR "/incident_bc.json"), 7 * 3600 + 1800, 60);
    CHECK(inc.start == 30);
    CHECK(inc.end == 40);
    CHECK(inc.blocks("B", "C"));
    CHECK(inc.blocks("C", "B"));
    CHECK_FALSE(inc.blocks("A", "B"));
    auto bad = nlohmann::json::parse(R"({"segment":["B","C"],"start":5,"end":5})");
    CHECK_THROWS_AS(incident_from_json(bad, 0, 60), ValidationError);
}

TEST_CASE("commodity validation")
{
    CHECK_THROWS_AS(commodity_from_json(nlohmann::json::parse(R"({"origin":"A","destination":"B","start":0,"demand":0})")),
                    ValidationError);
    auto c = commodity_from_json(nlohmann::json::parse(R"({"id":"p","origin":"A","destination":"B","start":3,"demand":4})"));
    CHECK(c.demand == 4);
    CHECK(commodity_from_json(to_json(c)).start == 3);
}

TEST_CASE("incident mode scope")
{
    const auto net = load_network(io::read_json(FASTER_FIXTURE_DIR "/network_detour.json"));
    const auto pinned = pin_incident_modes({{"A", "X", Direction::Both, 0, 10, ""}}, net);
    REQUIRE(pinned.front().mode.has_value());
    CHECK(*pinned.front().mode == net.line("N").mode);

    // a bridge added over a pinned block keeps running
    Incident inc{"A", "X", Direction::Both, 0, 10, "", Mode::Train};
    CHECK_FALSE(inc.affects(Mode::Bus));
    auto g = apply_incident(build_time_expanded_graph(net, {20, 60, 2}), inc);
    CHECK(g.count_active(ArcKind::Service, 1) == build_time_expanded_graph(net, {20, 60, 2}).count_active(ArcKind::Service, 1));

    auto doc = to_json(inc);
    CHECK(doc.at("mode") == "train");
    CHECK(incident_from_json(doc).mode == Mode::Train);
}
