#pragma once

#include "faster/model/network.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace faster {

enum class Direction { Forward, Backward, Both };

/// Blocks service between two adjacent stations for steps in [start, end).
struct Incident {
    std::string from;  // segment endpoint u
    std::string to;    // segment endpoint v
    Direction directions = Direction::Both;
    int start = 0;
    int end = 0;
    std::string description;
    std::optional<Mode> mode; // unset: every line on the segment

    bool blocks(const std::string& u, const std::string& v) const;
    bool affects(Mode m) const { return !mode || *mode == m; }
    bool active_at(int step) const { return step >= start && step < end; }
};

/// Throws ValidationError unless start < end and the segment exists on some line
/// in a blocked direction.
void validate_incident(const Incident& incident, const Network& network);
/// Segment check only; an empty window passes.
void validate_incident_segment(const Incident& incident, const Network& network);

/// Copies of `incidents` with an unset mode fixed to the mode of the lines carrying the
/// segment in `network`, when they all share one. Lines added later in another mode
/// (bus bridges over a rail block) then run unaffected.
std::vector<Incident> pin_incident_modes(const std::vector<Incident>& incidents, const Network& network);

/// {"segment":[u,v], "directions":"both"|"forward"|"backward", "start", "end", "description", "mode"?}
/// where times are integer steps or ISO-8601 times of day.
Incident incident_from_json(const nlohmann::json& doc, int origin_seconds = 0, int dt_seconds = 60);
nlohmann::json to_json(const Incident& incident);

} // namespace faster
