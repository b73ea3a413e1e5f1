#pragma once

#include "faster/model/incident.hpp"
#include "faster/model/network.hpp"

#include <string>
#include <vector>

namespace faster {

struct CandidateLineParams {
    int max_lines = 8;             // response lines kept
    int max_overlap = 4;           // directed segments a line may share with lines kept before it
    int max_length = 6;            // stations per line
    int required_train_lines = 0;  // distinct affected train lines the set must serve
    double bus_speed_kmh = 25.0;
    int bus_capacity = 80;
    int bus_headway = 6;           // steps
};

enum class CandidateKind { Truncated, Bridge, HubConnector, Greedy };
const char* to_string(CandidateKind kind);

struct CandidateLine {
    Line line;
    CandidateKind kind = CandidateKind::Truncated;
    std::string serves; // affected train line it stands in for
};

struct CandidateSet {
    std::vector<CandidateLine> lines;
    std::string diagnostic; // why the set is empty or short
};

/// Response lines around the blocked segments of `incidents`, of three kinds:
///   truncated train services on either side of the block, in both directions
///   ("loop" services that turn at the incident boundary);
///   bus bridges over the block along the affected line, shortest first, both directions;
///   direct bus links between hubs (terminals and interchanges) on opposite sides.
/// Kinds are taken in turn, each in the order above.
/// The filter keeps lines within max_length and max_overlap until max_lines. Demand plays no part.
CandidateSet generate_candidate_lines(const Network& network, const std::vector<Incident>& incidents,
                                      const CandidateLineParams& params, int dt_seconds);

/// Bus runtime in steps between two stations at the configured speed, at least 1.
int bus_runtime(const Network& network, const std::string& from, const std::string& to, double speed_kmh, int dt_seconds);

/// Bus line for the residual origin-destination pair: the shortest station path over
/// unblocked segments (either direction) when it fits in max_length, else a direct link.
Line greedy_line(const Network& network, const std::vector<Incident>& incidents, const std::string& origin,
                 const std::string& destination, const CandidateLineParams& params, int dt_seconds, const std::string& id);

} // namespace faster
