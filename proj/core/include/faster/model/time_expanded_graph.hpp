#pragma once

#include "faster/model/incident.hpp"
#include "faster/model/network.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace faster {

enum class ArcKind : std::uint8_t {
    Service,  // n_{u,t,l} -> n_{v,t+r,l}
    Wait,     // n_{u,t,l} -> n_{u,t+1,l}
    Transfer, // n_{u,t,l} -> n_{u,t+w,l'} for co-located line-nodes
    Entry,    // station entry e_{u,t} -> n_{u,t,l}
    Sink,     // n_{d,t,l} -> z_d
};

const char* to_string(ArcKind kind);

struct Arc {
    int tail = 0;
    int head = 0;
    int cost = 0;     // h_a in steps
    ArcKind kind = ArcKind::Wait;
    int line = -1;    // line index for Service/Wait arcs, destination line for Transfer/Entry
    int from_station = -1;
    int to_station = -1;
    int time = 0;     // departure step
    bool active = true;
};

struct NodeInfo {
    enum class Kind : std::uint8_t { LineNode, Entry, Sink } kind = Kind::LineNode;
    int station = -1;
    int line = -1;
    int position = -1; // index of the station along the line
    int time = -1;
};

struct GraphOptions {
    int horizon = 60;      // T, steps
    int dt_seconds = 60;   // step length
    int transfer_time = 2; // steps between co-located line-nodes
};

/// Network copy per time step with service, wait, transfer, entry and sink arcs.
/// Node layout is dense: line-nodes first (per line, per station on the line, per
/// step), then entry nodes (per station, per step), then one sink per station.
/// Arcs keep their index for the lifetime of the graph; incidents deactivate arcs
/// rather than erase them.
class TimeExpandedGraph {
public:
    TimeExpandedGraph() = default;
    TimeExpandedGraph(const Network& network, const GraphOptions& options);

    int horizon() const { return options_.horizon; }
    int dt_seconds() const { return options_.dt_seconds; }
    const GraphOptions& options() const { return options_; }
    const Network& network() const { return network_; }

    int node_count() const { return static_cast<int>(nodes_.size()); }
    int line_node_count() const { return entry_offset_; }
    const NodeInfo& node(int id) const { return nodes_[id]; }

    const std::vector<Arc>& arcs() const { return arcs_; }
    const Arc& arc(int id) const { return arcs_[id]; }
    /// Arc ids leaving `node`, including inactive arcs.
    std::span<const int> out_arcs(int node) const;
    std::span<const int> in_arcs(int node) const;

    int line_node(int line, int position_on_line, int t) const;
    int entry_node(int station, int t) const;
    int sink_node(int station) const;

    std::size_t count_active(ArcKind kind) const;
    std::size_t count_active(ArcKind kind, int line) const;

    /// Service arc ids crossing u -> v on any line, any departure time.
    std::vector<int> service_arcs_between(int from_station, int to_station) const;

    /// Deactivates service arcs crossing the blocked segment with departure in
    /// [start, end). Returns the ids that changed state.
    std::vector<int> apply_incident_in_place(const Incident& incident);

    /// Ids of active arcs, for comparing graphs.
    std::vector<int> active_arc_ids() const;

private:
    void build();
    void add_arc(Arc arc);

    Network network_;
    GraphOptions options_;
    std::vector<NodeInfo> nodes_;
    std::vector<Arc> arcs_;
    std::vector<int> line_offset_;   // first node of each line
    int entry_offset_ = 0;
    int sink_offset_ = 0;
    std::vector<int> out_start_, out_list_;
    std::vector<int> in_start_, in_list_;
};

TimeExpandedGraph build_time_expanded_graph(const Network& network, const GraphOptions& options);

/// Value-semantics wrapper: returns a copy with the incident applied.
/// Throws ValidationError when the segment does not exist.
TimeExpandedGraph apply_incident(const TimeExpandedGraph& graph, const Incident& incident);

} // namespace faster
