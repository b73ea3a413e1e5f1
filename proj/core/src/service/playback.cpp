#include "faster/service/playback.hpp"

#include "faster/common/error.hpp"

#include <cstdio>

namespace faster {

std::string clock_time(int seconds)
{
    const int day = 24 * 3600;
    seconds = ((seconds % day) + day) % day;
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02d:%02d:%02d", seconds / 3600, seconds / 60 % 60, seconds % 60);
    return buf;
}

PlaybackSession::PlaybackSession(Scenario scenario, double speed)
    : scenario_(std::move(scenario)), speed_(speed), sim_(scenario_, MetricSelection::none())
{
    require(speed > 0.0, "playback speed must be positive");
}

std::vector<PlaybackFrame> PlaybackSession::step(int steps)
{
    require(steps >= 0, "steps must be >= 0");
    std::vector<PlaybackFrame> out;
    const auto& stations = scenario_.network.stations();
    for (int k = 0; k < steps && !sim_.finished(); ++k) {
        const int t = sim_.now();
        sim_.step();
        PlaybackFrame f;
        f.step = t;
        f.time = clock_time(scenario_.origin_seconds + t * scenario_.dt_seconds);
        const auto q = sim_.station_queue_snapshot();
        for (std::size_t s = 0; s < stations.size(); ++s) f.queues.emplace_back(stations[s].id, q[s]);
        const auto m = sim_.metrics();
        f.in_system = m.in_system;
        f.arrived = m.arrived;
        frames_.push_back(f);
        out.push_back(std::move(f));
    }
    return out;
}

nlohmann::json to_json(const PlaybackFrame& f)
{
    nlohmann::json q = nlohmann::json::object();
    for (const auto& [s, v] : f.queues) q[s] = v;
    return {{"step", f.step}, {"time", f.time}, {"queues", q}, {"in_system", f.in_system}, {"arrived", f.arrived}};
}

} // namespace faster
