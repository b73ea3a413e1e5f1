#pragma once

#include "faster/model/network.hpp"

#include <json.hpp>

#include <istream>
#include <map>
#include <string>
#include <vector>

namespace faster {

/// One tap-in/tap-out record of the trip log.
struct Trip {
    std::string user_id;
    std::string entry_station;
    int entry_time = 0; // seconds of day
    std::string exit_station;
    int exit_time = 0;
};

struct TripObservation {
    double entry_time = 0.0; // seconds of day
    double duration = 0.0;   // seconds spent outside the network before this trip
    Position exit_position;
    std::string entry_station;
    std::string exit_station;
};

struct RowError {
    int line = 0;
    std::string message;
};

struct TripLog {
    std::vector<Trip> trips;
    std::vector<RowError> errors;
};

Trip trip_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const Trip& trip);

/// Parses line-delimited trip records. Blank lines are ignored. In strict mode the
/// first malformed row throws ValidationError naming its line number; otherwise
/// malformed rows are skipped and reported in `errors`.
TripLog read_trips_jsonl(std::istream& in, bool strict);

/// Per-user observation sequences in log order. The first trip of a user has no
/// preceding exit, so its duration is the mean of the user's other durations.
/// Exit positions come from `network`; unknown stations throw NotFoundError.
std::map<std::string, std::vector<TripObservation>> build_sequences(const std::vector<Trip>& trips,
                                                                    const Network& network);

} // namespace faster
