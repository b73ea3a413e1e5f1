#pragma once

#include "faster/model/network.hpp"
#include "faster/sim/simulator.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace faster {

using OdKey = std::pair<std::string, std::string>;

/// Travel times in minutes per (origin, destination), one entry per person.
using OdTravelTimes = std::map<OdKey, std::vector<double>>;

struct TravelTimeError {
    double mae_minutes = 0.0;
    double mre_percent = 0.0;
    double mean_bc = 0.0;
    int pairs = 0;
};

/// Sum of sqrt(p_i q_i) after normalizing both histograms to unit mass.
double bhattacharyya(const std::vector<double>& p, const std::vector<double>& q);

/// Counts per bin of width `bin_width` starting at 0; values past the last bin land in it.
std::vector<double> histogram(const std::vector<double>& values, double bin_width, int bins);

/// Compares per-OD mean travel times (MAE, MRE) and per-OD histograms (BC) over the
/// OD pairs present in both inputs. Throws ValidationError when there is no overlap.
TravelTimeError travel_time_error(const OdTravelTimes& simulated, const OdTravelTimes& observed,
                                  double bin_width_minutes = 1.0);

/// Arrived passengers' travel times grouped by OD pair.
OdTravelTimes od_travel_times(const SimMetrics& metrics, const std::vector<Commodity>& demand, int dt_seconds);

/// Writes the travel-time family to `path` and every other recorded family to
/// `<stem>.<family>.csv` next to it. Returns the files written.
///
/// Columns:
///   travel_times  commodity,origin,destination,start,count,arrival,travel_time,stranded
///   queues        station,step,queue_length
///   loads         line,run,position,step,load
///   boardings     line,run,position,step,boarded,denied
std::vector<std::filesystem::path> write_metrics_csv(const SimMetrics& metrics, const std::vector<Commodity>& demand,
                                                     const Network& network, const std::filesystem::path& path);

nlohmann::json summary_json(const SimMetrics& metrics);

} // namespace faster
