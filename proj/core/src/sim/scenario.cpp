#include "faster/sim/scenario.hpp"

#include "faster/common/error.hpp"
#include "faster/common/io.hpp"

#include <algorithm>
#include <map>
#include <random>

namespace faster {

std::vector<TimetableEntry> default_timetable(const Network& network, int horizon)
{
    std::vector<TimetableEntry> out;
    for (const auto& l : network.lines()) out.push_back(timetable_for_services(l, 1, horizon));
    return out;
}

TimetableEntry timetable_for_services(const Line& line, int services, int horizon)
{
    TimetableEntry e;
    e.line = line.id;
    e.capacity = line.capacity;
    if (services <= 0) return e;
    for (long k = 0;; ++k) {
        const long dep = k * line.headway / services;
        if (dep >= horizon) break;
        e.departures.push_back(static_cast<int>(dep));
    }
    return e;
}

std::vector<Commodity> expand_demand(const Scenario& scenario)
{
    std::vector<Commodity> out = scenario.commodities;
    for (std::size_t i = 0; i < out.size(); ++i)
        if (out[i].id.empty()) out[i].id = "p" + std::to_string(i);
    std::mt19937_64 rng(scenario.seed);
    for (std::size_t r = 0; r < scenario.od_rates.size(); ++r) {
        const auto& od = scenario.od_rates[r];
        std::poisson_distribution<int> draw(od.rate);
        for (int t = od.from; t < od.to; ++t) {
            const int n = od.rate > 0.0 ? draw(rng) : 0;
            if (n <= 0) continue;
            out.push_back(Commodity{"od" + std::to_string(r) + "@" + std::to_string(t), od.origin, od.destination, t, n});
        }
    }
    return out;
}

void validate_scenario(const Scenario& s)
{
    require(s.horizon >= 1, "scenario: horizon must be >= 1");
    require(s.dt_seconds >= 1, "scenario: dt must be >= 1");
    require(s.transfer_time >= 1, "scenario: transfer_time must be >= 1");
    require(s.refresh_steps >= 1, "scenario: refresh_steps must be >= 1");
    for (const auto& e : s.timetable) {
        require(s.network.find_line(e.line).has_value(), "timetable references unknown line '" + e.line + "'");
        require(std::is_sorted(e.departures.begin(), e.departures.end()), "timetable for " + e.line + " is not sorted");
        for (int d : e.departures)
            require(d >= 0 && d < s.horizon, "timetable for " + e.line + ": departure outside horizon");
        require(e.capacity >= 0, "timetable for " + e.line + ": negative capacity");
    }
    for (const auto& c : s.commodities) {
        require(s.network.find_station(c.origin).has_value(), "commodity " + c.id + ": unknown origin " + c.origin);
        require(s.network.find_station(c.destination).has_value(),
                "commodity " + c.id + ": unknown destination " + c.destination);
        require(c.start >= 0 && c.start < s.horizon, "commodity " + c.id + ": start outside horizon");
        require(c.demand > 0, "commodity " + c.id + ": demand must be positive");
        require(c.origin != c.destination, "commodity " + c.id + ": origin equals destination");
    }
    for (const auto& od : s.od_rates) {
        require(s.network.find_station(od.origin).has_value() && s.network.find_station(od.destination).has_value(),
                "od rate references unknown station");
        require(od.origin != od.destination, "od rate: origin equals destination");
        require(od.from >= 0 && od.to <= s.horizon && od.from <= od.to, "od rate: window outside horizon");
        require(od.rate >= 0.0, "od rate: negative rate");
    }
    for (const auto& inc : s.incidents) validate_incident(inc, s.network);
}

Scenario scenario_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir)
{
    require(doc.is_object(), "scenario must be an object");
    Scenario s;
    try {
        if (doc.contains("network")) {
            s.network = load_network(doc.at("network"));
        } else if (doc.contains("network_ref")) {
            s.network = load_network(io::read_json(base_dir / doc.at("network_ref").get<std::string>()));
        } else {
            throw ValidationError("scenario: needs 'network' or 'network_ref'");
        }
        s.horizon = doc.value("horizon", 60);
        s.dt_seconds = doc.value("dt", 60);
        if (doc.contains("origin_time")) s.origin_seconds = io::parse_time_of_day(doc.at("origin_time").get<std::string>());
        s.transfer_time = doc.value("transfer_time", 2);
        s.refresh_steps = doc.value("refresh_steps", std::max(1, 15 * 60 / s.dt_seconds));
        s.seed = doc.value("seed", std::uint64_t{0});
        if (doc.contains("timetable")) {
            for (const auto& e : doc.at("timetable")) {
                TimetableEntry t;
                t.line = e.at("line").get<std::string>();
                t.departures = e.at("departures").get<std::vector<int>>();
                t.capacity = e.value("capacity", 0);
                s.timetable.push_back(std::move(t));
            }
        } else {
            s.timetable = default_timetable(s.network, s.horizon);
        }
        if (doc.contains("commodities"))
            for (const auto& c : doc.at("commodities")) s.commodities.push_back(commodity_from_json(c));
        if (doc.contains("od_rates"))
            for (const auto& r : doc.at("od_rates"))
                s.od_rates.push_back(OdRate{r.at("origin").get<std::string>(), r.at("destination").get<std::string>(),
                                            r.at("from").get<int>(), r.at("to").get<int>(), r.at("rate").get<double>()});
        if (doc.contains("incidents"))
            for (const auto& i : doc.at("incidents"))
                s.incidents.push_back(incident_from_json(i, s.origin_seconds, s.dt_seconds));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("scenario: ") + e.what());
    }
    validate_scenario(s);
    return s;
}

Scenario load_scenario(const std::filesystem::path& path)
{
    return scenario_from_json(io::read_json(path), path.parent_path());
}

nlohmann::json to_json(const Scenario& s)
{
    nlohmann::json doc;
    doc["network"] = to_json(s.network);
    doc["horizon"] = s.horizon;
    doc["dt"] = s.dt_seconds;
    doc["origin_time"] = [&] {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%02d:%02d:%02d", s.origin_seconds / 3600, (s.origin_seconds / 60) % 60,
                      s.origin_seconds % 60);
        return std::string(buf);
    }();
    doc["transfer_time"] = s.transfer_time;
    doc["refresh_steps"] = s.refresh_steps;
    doc["seed"] = s.seed;
    doc["timetable"] = nlohmann::json::array();
    for (const auto& e : s.timetable)
        doc["timetable"].push_back({{"line", e.line}, {"departures", e.departures}, {"capacity", e.capacity}});
    doc["commodities"] = nlohmann::json::array();
    for (const auto& c : s.commodities) doc["commodities"].push_back(to_json(c));
    doc["od_rates"] = nlohmann::json::array();
    for (const auto& r : s.od_rates)
        doc["od_rates"].push_back({{"origin", r.origin},
                                   {"destination", r.destination},
                                   {"from", r.from},
                                   {"to", r.to},
                                   {"rate", r.rate}});
    doc["incidents"] = nlohmann::json::array();
    for (const auto& i : s.incidents) doc["incidents"].push_back(to_json(i));
    return doc;
}

} // namespace faster
