#pragma once

#include "faster/model/commodity.hpp"
#include "faster/model/incident.hpp"
#include "faster/model/time_expanded_graph.hpp"

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

namespace faster {

/// One ride on a line between two positions along it.
struct Leg {
    int line = -1;
    int board = -1;  // position on line
    int alight = -1; // position on line
};

struct Path {
    std::vector<int> arcs;
    std::vector<Leg> legs;
    int cost = 0;
};

/// Shortest paths to destination sinks on a time-expanded graph.
///
/// Distances to each requested destination are computed by one backward pass in
/// decreasing time order. Among equal-cost continuations the path whose sequence of
/// ridden line ids is lexicographically smallest wins; remaining ties prefer riding,
/// then transferring, then waiting, so waits sit as late as possible.
/// Paths are cached per (start node, destination). An incident invalidates exactly
/// the cached paths that use a deactivated arc.
class PathPlanner {
public:
    explicit PathPlanner(TimeExpandedGraph graph);

    const TimeExpandedGraph& graph() const { return graph_; }

    /// Shortest path from `start_node` to the sink of `destination_station`, or
    /// nullopt when the sink is unreachable within the horizon.
    std::optional<Path> shortest_path(int start_node, int destination_station);

    /// Path for a commodity from its station entry node at its start step.
    std::optional<Path> plan(const Commodity& commodity);

    /// Deactivates the incident's arcs and drops cache entries touching them.
    /// Returns the number of invalidated cache entries.
    std::size_t apply_incident(const Incident& incident);

    /// Cost to reach the destination sink, or nullopt.
    std::optional<int> distance(int start_node, int destination_station);

    std::size_t cache_size() const { return cache_.size(); }
    std::size_t cache_hits() const { return hits_; }
    std::size_t table_builds() const { return table_builds_; }

private:
    struct Table {
        std::vector<int> dist;
        std::vector<int> next_arc;
        std::vector<int> seq_first; // line rank of the first ridden line, -1 if none
        std::vector<int> seq_rest;  // node whose sequence continues after seq_first
        bool valid = false;
    };

    Table& table_for(int destination_station);
    void build_table(int destination_station, Table& table);
    int compare_sequences(const Table& t, int first_a, int rest_a, int first_b, int rest_b) const;

    TimeExpandedGraph graph_;
    std::vector<int> line_rank_;
    std::vector<std::vector<int>> nodes_by_time_; // per step: line-nodes then entry nodes
    std::unordered_map<int, Table> tables_;
    std::unordered_map<std::uint64_t, std::optional<Path>> cache_;
    std::size_t hits_ = 0;
    std::size_t table_builds_ = 0;
};

/// Extracts ride legs from a node path.
std::vector<Leg> legs_from_arcs(const TimeExpandedGraph& graph, const std::vector<int>& arcs);

struct PathAssignment {
    std::optional<Path> path; // nullopt: stranded
    bool stranded() const { return !path.has_value(); }
};

PathAssignment plan_path(PathPlanner& planner, const Commodity& commodity);
std::vector<PathAssignment> plan_paths(const TimeExpandedGraph& graph, const std::vector<Commodity>& commodities);

} // namespace faster
