#pragma once

#include "faster/model/commodity.hpp"
#include "faster/model/incident.hpp"
#include "faster/model/network.hpp"
#include "faster/model/time_expanded_graph.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace faster {

/// Departures of one line from its first station, in steps.
struct TimetableEntry {
    std::string line;
    std::vector<int> departures;
    int capacity = 0; // persons per service; 0 means "use the line's capacity"
};

/// Poisson demand rate between two stations over [from, to), persons per step.
struct OdRate {
    std::string origin;
    std::string destination;
    int from = 0;
    int to = 0;
    double rate = 0.0;
};

struct Scenario {
    Network network;
    int horizon = 60;
    int dt_seconds = 60;
    int origin_seconds = 0;   // wall-clock time of step 0
    int transfer_time = 2;
    int refresh_steps = 15;   // low-frequency shortest-path refresh period
    std::vector<TimetableEntry> timetable;
    std::vector<Commodity> commodities;
    std::vector<OdRate> od_rates;
    std::vector<Incident> incidents;
    std::uint64_t seed = 0;

    GraphOptions graph_options() const { return GraphOptions{horizon, dt_seconds, transfer_time}; }
};

/// Departures every headway from step 0 for every line of the network.
std::vector<TimetableEntry> default_timetable(const Network& network, int horizon);

/// Departures for `services` vehicles per headway period: floor(k * headway / services).
TimetableEntry timetable_for_services(const Line& line, int services, int horizon);

/// Explicit commodities followed by groups sampled from od_rates (seeded Poisson draws,
/// one group per origin, destination and step). Commodities get ids when missing.
std::vector<Commodity> expand_demand(const Scenario& scenario);

/// Throws ValidationError on unknown lines/stations, out-of-horizon times and
/// malformed incidents.
void validate_scenario(const Scenario& scenario);

/// Scenario document. "network" holds an inline network, or "network_ref" a path
/// resolved against `base_dir`. When "timetable" is absent every line runs at its
/// nominal headway.
Scenario scenario_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
Scenario load_scenario(const std::filesystem::path& path);
nlohmann::json to_json(const Scenario& scenario);

} // namespace faster
