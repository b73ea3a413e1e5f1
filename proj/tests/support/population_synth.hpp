#pragma once

#include "faster/chmm/trip.hpp"
#include "faster/model/network.hpp"

#include <array>
#include <random>

namespace faster::testing {

/// Users moving between home, work and leisure places on a row of stations. The
/// purpose of the next trip follows a Markov chain on the current one and sets the
/// trip's entry time, so entry time carries information the history alone lacks.
struct Population {
    Network network;
    std::vector<std::vector<TripObservation>> users;
};

inline Population synth_population(std::uint64_t seed, int users = 150, int trips = 30)
{
    Population p;
    std::vector<Station> st;
    for (int i = 0; i < 8; ++i) st.push_back({"S" + std::to_string(i), {2000.0 * i, 0.0}, 200});
    p.network = Network(st, {});
    // purposes: 0 home, 1 work, 2 leisure
    const double A[3][3] = {{0.0, 0.6, 0.4}, {0.6, 0.0, 0.4}, {0.7, 0.3, 0.0}};
    const double hour[3] = {18.5, 8.0, 13.0};
    const double spread[3] = {1.0, 0.5, 1.2};
    const std::array<std::array<int, 2>, 3> places{{{0, 1}, {6, 7}, {3, 4}}};
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < users; ++k) {
        std::array<int, 3> main{}, other{};
        for (int s = 0; s < 3; ++s) {
            const int pick = u(rng) < 0.8 ? 0 : 1;
            main[s] = places[s][pick];
            other[s] = places[s][1 - pick];
        }
        int purpose = 0;
        int station = main[0];
        double now = 0.0; // absolute seconds
        std::vector<TripObservation> seq;
        for (int t = 0; t < trips; ++t) {
            const double r = u(rng);
            int next = 0;
            for (double acc = 0.0; next < 3; ++next) {
                acc += A[purpose][next];
                if (r < acc) break;
            }
            next = std::min(next, 2);
            double tod = std::clamp(hour[next] + spread[next] * g(rng), 5.0, 23.5) * 3600.0;
            double day = std::floor(now / 86400.0);
            if (day * 86400.0 + tod < now + 1800.0) day += 1.0;
            const double entry = day * 86400.0 + tod;
            const int dest = u(rng) < 0.85 ? main[next] : other[next];
            TripObservation obs;
            obs.entry_time = tod;
            obs.duration = t == 0 ? 8 * 3600.0 : entry - now;
            obs.entry_station = st[station].id;
            obs.exit_station = st[dest].id;
            obs.exit_position = st[dest].position;
            seq.push_back(obs);
            now = entry + 1200.0 + 300.0 * std::abs(dest - station);
            station = dest;
            purpose = next;
        }
        p.users.push_back(std::move(seq));
    }
    return p;
}

} // namespace faster::testing
