#include "faster/model/network.hpp"

#include "faster/common/error.hpp"

#include <cmath>
#include <set>

namespace faster {

double distance(const Position& a, const Position& b) { return std::hypot(a.x - b.x, a.y - b.y); }

const char* to_string(Mode mode) { return mode == Mode::Train ? "train" : "bus"; }

Mode mode_from_string(const std::string& text)
{
    if (text == "train") return Mode::Train;
    if (text == "bus") return Mode::Bus;
    throw ValidationError("unknown line mode '" + text + "'");
}

int Line::index_of(const std::string& station) const
{
    for (std::size_t i = 0; i < stations.size(); ++i)
        if (stations[i] == station) return static_cast<int>(i);
    return -1;
}

Network::Network(std::vector<Station> stations, std::vector<Line> lines)
    : stations_(std::move(stations)), lines_(std::move(lines))
{
    validate_and_index();
}

void Network::validate_and_index()
{
    station_index_.clear();
    line_index_.clear();
    for (std::size_t i = 0; i < stations_.size(); ++i) {
        const auto& s = stations_[i];
        require(!s.id.empty(), "station id must be non-empty");
        require(s.platform_capacity > 0, "station " + s.id + ": platform_capacity must be positive");
        require(station_index_.emplace(s.id, static_cast<int>(i)).second, "duplicate station id " + s.id);
    }
    for (std::size_t i = 0; i < lines_.size(); ++i) {
        const auto& l = lines_[i];
        require(!l.id.empty(), "line id must be non-empty");
        require(line_index_.emplace(l.id, static_cast<int>(i)).second, "duplicate line id " + l.id);
        require(l.stations.size() >= 2, "line " + l.id + ": needs at least 2 stations");
        require(l.runtimes.size() + 1 == l.stations.size(),
                "line " + l.id + ": runtimes must have one entry per segment");
        require(l.capacity > 0, "line " + l.id + ": capacity must be positive");
        require(l.headway >= 1, "line " + l.id + ": headway must be >= 1");
        for (int r : l.runtimes) require(r >= 1, "line " + l.id + ": runtimes must be >= 1");
        std::set<std::string> seen;
        for (const auto& s : l.stations) {
            require(station_index_.count(s) > 0, "line " + l.id + ": unknown station '" + s + "'");
            require(seen.insert(s).second, "line " + l.id + ": station '" + s + "' appears twice");
        }
    }
}

int Network::station_index(const std::string& id) const
{
    auto it = station_index_.find(id);
    if (it == station_index_.end()) throw NotFoundError("unknown station '" + id + "'");
    return it->second;
}

std::optional<int> Network::find_station(const std::string& id) const
{
    auto it = station_index_.find(id);
    if (it == station_index_.end()) return std::nullopt;
    return it->second;
}

int Network::line_index(const std::string& id) const
{
    auto it = line_index_.find(id);
    if (it == line_index_.end()) throw NotFoundError("unknown line '" + id + "'");
    return it->second;
}

std::optional<int> Network::find_line(const std::string& id) const
{
    auto it = line_index_.find(id);
    if (it == line_index_.end()) return std::nullopt;
    return it->second;
}

Network Network::with_lines(const std::vector<Line>& extra) const
{
    auto lines = lines_;
    lines.insert(lines.end(), extra.begin(), extra.end());
    return Network(stations_, std::move(lines));
}

Network Network::without_line(const std::string& id) const
{
    std::vector<Line> lines;
    for (const auto& l : lines_)
        if (l.id != id) lines.push_back(l);
    return Network(stations_, std::move(lines));
}

bool Network::has_segment(const std::string& u, const std::string& v) const
{
    for (const auto& l : lines_)
        for (std::size_t i = 0; i + 1 < l.stations.size(); ++i)
            if (l.stations[i] == u && l.stations[i + 1] == v) return true;
    return false;
}

std::size_t Network::total_segments() const
{
    std::size_t n = 0;
    for (const auto& l : lines_) n += l.runtimes.size();
    return n;
}

namespace {

template <typename T>
T field(const nlohmann::json& doc, const char* key, const std::string& where)
{
    if (!doc.contains(key)) throw ValidationError(where + ": missing field '" + key + "'");
    try {
        return doc.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ValidationError(where + ": field '" + key + "' has the wrong type");
    }
}

} // namespace

Line line_from_json(const nlohmann::json& doc)
{
    require(doc.is_object(), "line entry must be an object");
    Line l;
    l.id = field<std::string>(doc, "id", "line");
    const std::string where = "line " + l.id;
    l.mode = mode_from_string(doc.value("mode", std::string("train")));
    l.stations = field<std::vector<std::string>>(doc, "stations", where);
    l.runtimes = field<std::vector<int>>(doc, "runtimes", where);
    l.capacity = field<int>(doc, "capacity", where);
    l.headway = field<int>(doc, "headway", where);
    return l;
}

Network load_network(const nlohmann::json& doc)
{
    require(doc.is_object(), "network document must be an object");
    require(doc.contains("stations") && doc.at("stations").is_array(), "network: 'stations' must be an array");
    std::vector<Station> stations;
    for (const auto& s : doc.at("stations")) {
        require(s.is_object(), "station entry must be an object");
        Station st;
        st.id = field<std::string>(s, "id", "station");
        st.position.x = field<double>(s, "x", "station " + st.id);
        st.position.y = field<double>(s, "y", "station " + st.id);
        st.platform_capacity = field<int>(s, "platform_capacity", "station " + st.id);
        stations.push_back(std::move(st));
    }
    std::vector<Line> lines;
    if (doc.contains("lines")) {
        require(doc.at("lines").is_array(), "network: 'lines' must be an array");
        for (const auto& l : doc.at("lines")) lines.push_back(line_from_json(l));
    }
    return Network(std::move(stations), std::move(lines));
}

nlohmann::json to_json(const Line& l)
{
    return {{"id", l.id},           {"mode", to_string(l.mode)}, {"stations", l.stations},
            {"runtimes", l.runtimes}, {"capacity", l.capacity},   {"headway", l.headway}};
}

nlohmann::json to_json(const Network& network)
{
    nlohmann::json doc;
    doc["stations"] = nlohmann::json::array();
    for (const auto& s : network.stations())
        doc["stations"].push_back(
            {{"id", s.id}, {"x", s.position.x}, {"y", s.position.y}, {"platform_capacity", s.platform_capacity}});
    doc["lines"] = nlohmann::json::array();
    for (const auto& l : network.lines()) doc["lines"].push_back(to_json(l));
    return doc;
}

} // namespace faster
