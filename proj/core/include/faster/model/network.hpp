#pragma once

#include <json.hpp>

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace faster {

struct Position {
    double x = 0.0; // meters, planar
    double y = 0.0;
};

double distance(const Position& a, const Position& b);

struct Station {
    std::string id;
    Position position;
    int platform_capacity = 1; // persons
};

enum class Mode { Train, Bus };

const char* to_string(Mode mode);
Mode mode_from_string(const std::string& text);

/// A directed service pattern: vehicles run stations[0] -> stations[1] -> ... with
/// `runtimes[i]` steps between stations[i] and stations[i+1].
struct Line {
    std::string id;
    Mode mode = Mode::Train;
    std::vector<std::string> stations;
    std::vector<int> runtimes;
    int capacity = 1;  // persons per service (c_l)
    int headway = 1;   // steps between services (tau_l)

    int segment_count() const { return static_cast<int>(runtimes.size()); }
    /// Position of `station` along the line, or -1.
    int index_of(const std::string& station) const;
};

class Network {
public:
    Network() = default;
    Network(std::vector<Station> stations, std::vector<Line> lines);

    const std::vector<Station>& stations() const { return stations_; }
    const std::vector<Line>& lines() const { return lines_; }

    int station_index(const std::string& id) const;  // throws NotFoundError
    std::optional<int> find_station(const std::string& id) const;
    int line_index(const std::string& id) const;     // throws NotFoundError
    std::optional<int> find_line(const std::string& id) const;

    const Station& station(const std::string& id) const { return stations_[station_index(id)]; }
    const Line& line(const std::string& id) const { return lines_[line_index(id)]; }

    /// Returns a copy with `extra` appended; ids must not collide.
    Network with_lines(const std::vector<Line>& extra) const;
    Network without_line(const std::string& id) const;

    /// True when some line runs u -> v as a consecutive pair.
    bool has_segment(const std::string& u, const std::string& v) const;

    std::size_t total_segments() const;

private:
    void validate_and_index();

    std::vector<Station> stations_;
    std::vector<Line> lines_;
    std::unordered_map<std::string, int> station_index_;
    std::unordered_map<std::string, int> line_index_;
};

/// Parses and validates a network document:
/// {"stations":[{"id","x","y","platform_capacity"}], "lines":[{"id","mode","stations","runtimes","capacity","headway"}]}
Network load_network(const nlohmann::json& doc);
nlohmann::json to_json(const Network& network);
nlohmann::json to_json(const Line& line);
Line line_from_json(const nlohmann::json& doc);

} // namespace faster
