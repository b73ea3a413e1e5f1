#pragma once

#include "faster/sim/simulator.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace faster {

/// State after one simulated step.
struct PlaybackFrame {
    int step = 0;
    std::string time; // HH:MM:SS wall clock
    std::vector<std::pair<std::string, int>> queues; // per station, network order
    long in_system = 0;
    long arrived = 0;
    bool operator==(const PlaybackFrame&) const = default;
};

/// Steps a simulation of a scenario on demand. Frames depend only on the scenario
/// (including its seed), never on how the steps are batched.
class PlaybackSession {
public:
    PlaybackSession(Scenario scenario, double speed = 1.0);

    /// Advances up to `steps` steps (fewer at the horizon) and returns their frames.
    std::vector<PlaybackFrame> step(int steps = 1);

    int now() const { return sim_.now(); }
    bool finished() const { return sim_.finished(); }
    double speed() const { return speed_; }
    const Scenario& scenario() const { return scenario_; }
    const std::vector<PlaybackFrame>& frames() const { return frames_; }

private:
    Scenario scenario_;
    double speed_;
    Simulator sim_;
    std::vector<PlaybackFrame> frames_;
};

std::string clock_time(int seconds);
nlohmann::json to_json(const PlaybackFrame& frame);

} // namespace faster
