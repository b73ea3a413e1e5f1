#pragma once

#include "faster/sim/path_planner.hpp"
#include "faster/sim/scenario.hpp"

#include <deque>
#include <memory>
#include <optional>
#include <vector>

namespace faster {

enum class MetricFamily { TravelTimes, QueueLengths, TrainLoads, Boardings };

/// Which metric families a run records. Unselected families are never allocated.
struct MetricSelection {
    bool travel_times = true;
    bool queue_lengths = false;
    bool train_loads = false;
    bool boardings = false;

    static MetricSelection all() { return {true, true, true, true}; }
    static MetricSelection none() { return {false, false, false, false}; }
    bool has(MetricFamily f) const;
};

/// Travel outcome of one passenger group fragment. Groups split only at capacity
/// boundaries, so fragments of one commodity may have different outcomes.
struct GroupOutcome {
    int commodity = -1;  // index into the expanded demand
    int count = 0;
    int start = 0;
    int arrival = -1;    // -1: still in the system at horizon end
    int travel_time = 0; // steps; unfinished groups accrue to horizon end
    bool stranded = false;

    bool operator==(const GroupOutcome&) const = default;
};

struct LoadRecord {
    int line = -1;
    int run = -1;
    int position = -1; // departing station position on the line
    int step = 0;
    int load = 0;
    bool operator==(const LoadRecord&) const = default;
};

struct DepartureRecord {
    int line = -1;
    int run = -1;
    int position = -1;
    int step = 0;
    int boarded = 0;
    int denied = 0;
    bool operator==(const DepartureRecord&) const = default;
};

struct SimMetrics {
    int horizon = 0;
    long injected = 0;
    long arrived = 0;
    long in_system = 0;
    long stranded = 0;
    long reroutes = 0;

    std::optional<std::vector<GroupOutcome>> travel_times;
    std::optional<std::vector<std::vector<int>>> queue_lengths; // [station][step]
    std::optional<std::vector<LoadRecord>> train_loads;
    std::optional<std::vector<DepartureRecord>> boardings;

    /// Person-steps over all fragments (unfinished fragments count to horizon end).
    long long total_travel_time() const;

    bool operator==(const SimMetrics&) const = default;
};

/// Mesoscopic queuing-network simulator. Platform queues are FIFO per (line, station);
/// a service stopping at a station first lets riders alight, then boards
/// min(queue, residual capacity) persons in arrival order. Passengers who cannot board
/// wait for the next service. Paths come from a PathPlanner on the scenario's
/// time-expanded graph, refreshed every `refresh_steps` and recomputed when an
/// incident starts. One instance is single-threaded and deterministic.
class Simulator {
public:
    Simulator(const Scenario& scenario, MetricSelection selection);
    ~Simulator();
    Simulator(Simulator&&) noexcept;
    Simulator& operator=(Simulator&&) noexcept;

    /// Advances one step. No-op once finished.
    void step();
    void run();

    int now() const;
    bool finished() const;

    /// Waiting persons per station at the end of the last processed step.
    std::vector<int> station_queue_snapshot() const;

    /// Metrics so far; in_system counts everyone injected and not yet arrived.
    SimMetrics metrics() const;

    /// Commodity list after demand expansion, in the order GroupOutcome::commodity indexes.
    const std::vector<Commodity>& demand() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

SimMetrics simulate(const Scenario& scenario, MetricSelection selection = {});

} // namespace faster
