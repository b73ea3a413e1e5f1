#include "faster/model/incident.hpp"

#include "faster/common/error.hpp"
#include "faster/common/io.hpp"

namespace faster {

bool Incident::blocks(const std::string& u, const std::string& v) const
{
    const bool fwd = (u == from && v == to);
    const bool bwd = (u == to && v == from);
    switch (directions) {
    case Direction::Forward: return fwd;
    case Direction::Backward: return bwd;
    case Direction::Both: return fwd || bwd;
    }
    return false;
}

void validate_incident_segment(const Incident& incident, const Network& network)
{
    require(network.find_station(incident.from).has_value(), "incident: unknown station '" + incident.from + "'");
    require(network.find_station(incident.to).has_value(), "incident: unknown station '" + incident.to + "'");
    bool exists = false;
    if (incident.directions != Direction::Backward) exists = exists || network.has_segment(incident.from, incident.to);
    if (incident.directions != Direction::Forward) exists = exists || network.has_segment(incident.to, incident.from);
    require(exists, "incident: segment " + incident.from + "-" + incident.to + " does not exist on any line");
}

void validate_incident(const Incident& incident, const Network& network)
{
    require(incident.start < incident.end, "incident: start must be before end");
    validate_incident_segment(incident, network);
}

Incident incident_from_json(const nlohmann::json& doc, int origin_seconds, int dt_seconds)
{
    require(doc.is_object(), "incident must be an object");
    require(doc.contains("segment") && doc.at("segment").is_array() && doc.at("segment").size() == 2,
            "incident: 'segment' must be [u, v]");
    Incident inc;
    inc.from = doc.at("segment").at(0).get<std::string>();
    inc.to = doc.at("segment").at(1).get<std::string>();
    const std::string dir = doc.value("directions", std::string("both"));
    if (dir == "both") inc.directions = Direction::Both;
    else if (dir == "forward") inc.directions = Direction::Forward;
    else if (dir == "backward") inc.directions = Direction::Backward;
    else throw ValidationError("incident: unknown directions '" + dir + "'");
    require(doc.contains("start") && doc.contains("end"), "incident: 'start' and 'end' are required");
    inc.start = io::parse_step(doc.at("start"), origin_seconds, dt_seconds);
    inc.end = io::parse_step(doc.at("end"), origin_seconds, dt_seconds);
    inc.description = doc.value("description", std::string());
    if (doc.contains("mode") && !doc.at("mode").is_null()) inc.mode = mode_from_string(doc.at("mode").get<std::string>());
    require(inc.start < inc.end, "incident: start must be before end");
    return inc;
}

nlohmann::json to_json(const Incident& incident)
{
    const char* dir = incident.directions == Direction::Both      ? "both"
                      : incident.directions == Direction::Forward ? "forward"
                                                                  : "backward";
    nlohmann::json out{{"segment", {incident.from, incident.to}},
                       {"directions", dir},
                       {"start", incident.start},
                       {"end", incident.end},
                       {"description", incident.description}};
    if (incident.mode) out["mode"] = to_string(*incident.mode);
    return out;
}

std::vector<Incident> pin_incident_modes(const std::vector<Incident>& incidents, const Network& network)
{
    std::vector<Incident> out = incidents;
    for (auto& inc : out) {
        if (inc.mode) continue;
        std::optional<Mode> seen;
        bool mixed = false;
        for (const auto& l : network.lines())
            for (std::size_t i = 0; i + 1 < l.stations.size(); ++i) {
                if (!inc.blocks(l.stations[i], l.stations[i + 1])) continue;
                if (seen && *seen != l.mode) mixed = true;
                seen = l.mode;
            }
        if (seen && !mixed) inc.mode = seen;
    }
    return out;
}

} // namespace faster
