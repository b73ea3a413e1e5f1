#pragma once

#include <json.hpp>

#include <istream>
#include <string>
#include <vector>

namespace faster {

/// One device's continuous presence on a platform, in seconds.
struct PresenceTrace {
    std::string device;
    double first_seen = 0.0;
    double last_seen = 0.0;
};

struct DsgFeatures {
    double waiting_count = 0.0;
    double missed_count = 0.0;
    double wait_q3 = 0.0;
    double wait_std = 0.0;
    double headway = 0.0;
    bool headway_missing = false;
    bool flagged = false; // no departure observable near the window

    static constexpr int kCount = 5;
    std::vector<double> values() const { return {waiting_count, missed_count, wait_q3, wait_std, headway}; }
};

const std::vector<std::string>& dsg_feature_names();

struct FeatureOptions {
    double presence_slack = 30.0; // seconds around a departure that count as "immediately"
    double headway_sigma = 30.0;  // bandwidth of the time affinity used for headway estimation
};

/// Features of the window [start, end). A device waits for a departure d when it
/// arrived before d and was still seen within `presence_slack` of d; it missed d
/// when it was also seen later than d + `presence_slack`. Counts sum over the
/// departures inside the window (the nearest departure after the window when none
/// falls inside). Wait statistics use devices whose presence ended inside the window.
DsgFeatures extract_features(const std::vector<PresenceTrace>& traces, const std::vector<double>& departures,
                             double start, double end, const FeatureOptions& options = {});

/// Clusters event times with spectral clustering on exp(-dt^2 / (2 sigma^2)), picks
/// the cluster count by eigengap, and returns the median gap between consecutive
/// cluster centroids. Throws ValidationError with fewer than 2 events or a single
/// cluster ("insufficient departures").
double estimate_headway(std::vector<double> events, double sigma = 30.0);

/// Line-delimited platform traces: {station, device, first_seen, last_seen}.
struct StationTrace {
    std::string station;
    PresenceTrace trace;
};

std::vector<StationTrace> read_traces_jsonl(std::istream& in, bool strict, std::vector<std::pair<int, std::string>>* errors);

} // namespace faster
