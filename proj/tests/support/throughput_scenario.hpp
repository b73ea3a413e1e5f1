#pragma once

#include "faster/sim/scenario.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace faster::testing {

/// Five radial lines crossing at a shared hub, each run in both directions, loaded
/// with `groups` random passenger groups over one simulated hour at one-minute steps.
inline Scenario throughput_scenario(int groups = 10000, std::uint64_t seed = 1, int horizon = 60)
{
    std::vector<Station> st{{"H", {0.0, 0.0}, 5000}};
    std::vector<Line> lines;
    for (int l = 0; l < 5; ++l) {
        const double angle = 2.0 * std::numbers::pi * l / 5.0;
        std::vector<std::string> ids;
        for (int k = -3; k <= 3; ++k) {
            if (k == 0) {
                ids.push_back("H");
                continue;
            }
            const std::string id = "S" + std::to_string(l) + (k < 0 ? "w" : "e") + std::to_string(std::abs(k));
            const double r = 1500.0 * k;
            st.push_back({id, {r * std::cos(angle), r * std::sin(angle)}, 2000});
            ids.push_back(id);
        }
        const std::vector<int> runtimes(ids.size() - 1, 2);
        lines.push_back({"L" + std::to_string(l), Mode::Train, ids, runtimes, 800, 3});
        std::vector<std::string> back(ids.rbegin(), ids.rend());
        lines.push_back({"L" + std::to_string(l) + "r", Mode::Train, back, runtimes, 800, 3});
    }
    Scenario s;
    s.network = Network(st, lines);
    s.horizon = horizon;
    s.seed = seed;
    s.timetable = default_timetable(s.network, horizon);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> station(0, static_cast<int>(st.size()) - 1), start(0, horizon - 1), size(1, 5);
    for (int p = 0; p < groups; ++p) {
        const int o = station(rng);
        int d = station(rng);
        if (o == d) d = (d + 1) % static_cast<int>(st.size());
        s.commodities.push_back({"g" + std::to_string(p), st[o].id, st[d].id, start(rng), size(rng)});
    }
    return s;
}

} // namespace faster::testing
