#include "faster/chmm/trip.hpp"

#include "faster/common/error.hpp"
#include "faster/common/io.hpp"

#include <numeric>

namespace faster {

namespace {

int time_field(const nlohmann::json& doc, const char* key)
{
    require(doc.contains(key), std::string("missing field '") + key + "'");
    const auto& v = doc.at(key);
    int t = 0;
    if (v.is_number_integer()) t = v.get<int>();
    else if (v.is_number()) t = static_cast<int>(v.get<double>());
    else if (v.is_string()) t = io::parse_time_of_day(v.get<std::string>());
    else throw ValidationError(std::string("field '") + key + "' must be a number or a time string");
    require(t >= 0 && t < 86400, std::string("field '") + key + "' outside the day");
    return t;
}

std::string string_field(const nlohmann::json& doc, const char* key)
{
    require(doc.contains(key) && doc.at(key).is_string(), std::string("field '") + key + "' must be a string");
    auto s = doc.at(key).get<std::string>();
    require(!s.empty(), std::string("field '") + key + "' is empty");
    return s;
}

} // namespace

Trip trip_from_json(const nlohmann::json& doc)
{
    require(doc.is_object(), "trip record must be an object");
    Trip t;
    t.user_id = doc.at("user_id").is_string() ? doc.at("user_id").get<std::string>() : doc.at("user_id").dump();
    t.entry_station = string_field(doc, "entry_station");
    t.entry_time = time_field(doc, "entry_time");
    t.exit_station = string_field(doc, "exit_station");
    t.exit_time = time_field(doc, "exit_time");
    return t;
}

nlohmann::json to_json(const Trip& t)
{
    return {{"user_id", t.user_id},
            {"entry_station", t.entry_station},
            {"entry_time", t.entry_time},
            {"exit_station", t.exit_station},
            {"exit_time", t.exit_time}};
}

TripLog read_trips_jsonl(std::istream& in, bool strict)
{
    TripLog log;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            auto doc = nlohmann::json::parse(line);
            require(doc.contains("user_id"), "missing field 'user_id'");
            log.trips.push_back(trip_from_json(doc));
        } catch (const std::exception& e) {
            if (strict) throw ValidationError("line " + std::to_string(number) + ": " + e.what());
            log.errors.push_back({number, e.what()});
        }
    }
    return log;
}

std::map<std::string, std::vector<TripObservation>> build_sequences(const std::vector<Trip>& trips,
                                                                    const Network& network)
{
    std::map<std::string, std::vector<const Trip*>> by_user;
    for (const auto& t : trips) by_user[t.user_id].push_back(&t);

    std::map<std::string, std::vector<TripObservation>> out;
    for (const auto& [user, list] : by_user) {
        auto& seq = out[user];
        for (std::size_t i = 0; i < list.size(); ++i) {
            const Trip& t = *list[i];
            TripObservation o;
            o.entry_time = t.entry_time;
            o.entry_station = t.entry_station;
            o.exit_station = t.exit_station;
            o.exit_position = network.station(t.exit_station).position;
            network.station_index(t.entry_station);
            if (i > 0) {
                int gap = t.entry_time - list[i - 1]->exit_time;
                if (gap < 0) gap += 86400;
                o.duration = gap;
            }
            seq.push_back(o);
        }
        if (seq.size() > 1) {
            double total = 0.0;
            for (std::size_t i = 1; i < seq.size(); ++i) total += seq[i].duration;
            seq[0].duration = total / static_cast<double>(seq.size() - 1);
        }
    }
    return out;
}

} // namespace faster
