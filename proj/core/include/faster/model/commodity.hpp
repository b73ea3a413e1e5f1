#pragma once

#include <json.hpp>

#include <string>

namespace faster {

/// A group of passengers sharing origin, start step and destination.
struct Commodity {
    std::string id;
    std::string origin;
    std::string destination;
    int start = 0;   // s_p, step
    int demand = 0;  // v_p, persons
};

Commodity commodity_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const Commodity& c);

} // namespace faster
