#include "faster/model/commodity.hpp"

#include "faster/common/error.hpp"

namespace faster {

Commodity commodity_from_json(const nlohmann::json& doc)
{
    require(doc.is_object(), "commodity must be an object");
    Commodity c;
    try {
        c.id = doc.value("id", std::string());
        c.origin = doc.at("origin").get<std::string>();
        c.destination = doc.at("destination").get<std::string>();
        c.start = doc.at("start").get<int>();
        c.demand = doc.at("demand").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("commodity: ") + e.what());
    }
    require(c.demand > 0, "commodity " + c.id + ": demand must be positive");
    require(c.origin != c.destination, "commodity " + c.id + ": origin equals destination");
    return c;
}

nlohmann::json to_json(const Commodity& c)
{
    return {{"id", c.id}, {"origin", c.origin}, {"destination", c.destination}, {"start", c.start}, {"demand", c.demand}};
}

} // namespace faster
