#include "faster/model/time_expanded_graph.hpp"

#include "faster/common/error.hpp"

#include <algorithm>

namespace faster {

const char* to_string(ArcKind kind)
{
    switch (kind) {
    case ArcKind::Service: return "service";
    case ArcKind::Wait: return "wait";
    case ArcKind::Transfer: return "transfer";
    case ArcKind::Entry: return "entry";
    case ArcKind::Sink: return "sink";
    }
    return "?";
}

TimeExpandedGraph::TimeExpandedGraph(const Network& network, const GraphOptions& options)
    : network_(network), options_(options)
{
    require(options_.horizon >= 1, "time-expanded graph: horizon must be >= 1");
    require(options_.dt_seconds >= 1, "time-expanded graph: step size must be >= 1 second");
    require(options_.transfer_time >= 1, "time-expanded graph: transfer time must be >= 1 step");
    build();
}

int TimeExpandedGraph::line_node(int line, int position_on_line, int t) const
{
    return line_offset_[line] + position_on_line * options_.horizon + t;
}

int TimeExpandedGraph::entry_node(int station, int t) const { return entry_offset_ + station * options_.horizon + t; }

int TimeExpandedGraph::sink_node(int station) const { return sink_offset_ + station; }

void TimeExpandedGraph::add_arc(Arc arc) { arcs_.push_back(arc); }

void TimeExpandedGraph::build()
{
    const int T = options_.horizon;
    const auto& lines = network_.lines();
    const int n_stations = static_cast<int>(network_.stations().size());

    line_offset_.resize(lines.size());
    int offset = 0;
    for (std::size_t l = 0; l < lines.size(); ++l) {
        line_offset_[l] = offset;
        offset += static_cast<int>(lines[l].stations.size()) * T;
    }
    entry_offset_ = offset;
    sink_offset_ = entry_offset_ + n_stations * T;
    const int total = sink_offset_ + n_stations;

    nodes_.assign(total, NodeInfo{});
    std::vector<std::vector<std::pair<int, int>>> lines_at(n_stations); // (line, position)
    for (std::size_t l = 0; l < lines.size(); ++l) {
        const auto& line = lines[l];
        for (std::size_t i = 0; i < line.stations.size(); ++i) {
            const int s = network_.station_index(line.stations[i]);
            lines_at[s].emplace_back(static_cast<int>(l), static_cast<int>(i));
            for (int t = 0; t < T; ++t)
                nodes_[line_node(static_cast<int>(l), static_cast<int>(i), t)] =
                    NodeInfo{NodeInfo::Kind::LineNode, s, static_cast<int>(l), static_cast<int>(i), t};
        }
    }
    for (int s = 0; s < n_stations; ++s) {
        for (int t = 0; t < T; ++t) nodes_[entry_node(s, t)] = NodeInfo{NodeInfo::Kind::Entry, s, -1, -1, t};
        nodes_[sink_node(s)] = NodeInfo{NodeInfo::Kind::Sink, s, -1, -1, -1};
    }

    for (std::size_t li = 0; li < lines.size(); ++li) {
        const int l = static_cast<int>(li);
        const auto& line = lines[li];
        for (int i = 0; i < line.segment_count(); ++i) {
            const int r = line.runtimes[i];
            const int u = network_.station_index(line.stations[i]);
            const int v = network_.station_index(line.stations[i + 1]);
            for (int t = 0; t + r < T; ++t)
                add_arc(Arc{line_node(l, i, t), line_node(l, i + 1, t + r), r, ArcKind::Service, l, u, v, t, true});
        }
        for (int i = 0; i < static_cast<int>(line.stations.size()); ++i) {
            const int u = network_.station_index(line.stations[i]);
            for (int t = 0; t + 1 < T; ++t)
                add_arc(Arc{line_node(l, i, t), line_node(l, i, t + 1), 1, ArcKind::Wait, l, u, u, t, true});
        }
    }

    const int w = options_.transfer_time;
    for (int s = 0; s < n_stations; ++s) {
        for (const auto& [la, pa] : lines_at[s]) {
            for (const auto& [lb, pb] : lines_at[s]) {
                if (la == lb) continue;
                for (int t = 0; t + w < T; ++t)
                    add_arc(Arc{line_node(la, pa, t), line_node(lb, pb, t + w), w, ArcKind::Transfer, lb, s, s, t, true});
            }
        }
        for (const auto& [l, p] : lines_at[s])
            for (int t = 0; t < T; ++t)
                add_arc(Arc{entry_node(s, t), line_node(l, p, t), 0, ArcKind::Entry, l, s, s, t, true});
        for (const auto& [l, p] : lines_at[s])
            for (int t = 0; t < T; ++t)
                add_arc(Arc{line_node(l, p, t), sink_node(s), 0, ArcKind::Sink, l, s, s, t, true});
    }

    // CSR adjacency, arc ids in insertion order within each node
    out_start_.assign(total + 1, 0);
    in_start_.assign(total + 1, 0);
    for (const auto& a : arcs_) {
        ++out_start_[a.tail + 1];
        ++in_start_[a.head + 1];
    }
    for (int i = 0; i < total; ++i) {
        out_start_[i + 1] += out_start_[i];
        in_start_[i + 1] += in_start_[i];
    }
    out_list_.assign(arcs_.size(), 0);
    in_list_.assign(arcs_.size(), 0);
    auto out_fill = out_start_;
    auto in_fill = in_start_;
    for (std::size_t a = 0; a < arcs_.size(); ++a) {
        out_list_[out_fill[arcs_[a].tail]++] = static_cast<int>(a);
        in_list_[in_fill[arcs_[a].head]++] = static_cast<int>(a);
    }
}

std::span<const int> TimeExpandedGraph::out_arcs(int node) const
{
    return {out_list_.data() + out_start_[node], static_cast<std::size_t>(out_start_[node + 1] - out_start_[node])};
}

std::span<const int> TimeExpandedGraph::in_arcs(int node) const
{
    return {in_list_.data() + in_start_[node], static_cast<std::size_t>(in_start_[node + 1] - in_start_[node])};
}

std::size_t TimeExpandedGraph::count_active(ArcKind kind) const
{
    return static_cast<std::size_t>(
        std::count_if(arcs_.begin(), arcs_.end(), [&](const Arc& a) { return a.active && a.kind == kind; }));
}

std::size_t TimeExpandedGraph::count_active(ArcKind kind, int line) const
{
    return static_cast<std::size_t>(std::count_if(
        arcs_.begin(), arcs_.end(), [&](const Arc& a) { return a.active && a.kind == kind && a.line == line; }));
}

std::vector<int> TimeExpandedGraph::service_arcs_between(int from_station, int to_station) const
{
    std::vector<int> ids;
    for (std::size_t a = 0; a < arcs_.size(); ++a)
        if (arcs_[a].kind == ArcKind::Service && arcs_[a].from_station == from_station &&
            arcs_[a].to_station == to_station)
            ids.push_back(static_cast<int>(a));
    return ids;
}

std::vector<int> TimeExpandedGraph::apply_incident_in_place(const Incident& incident)
{
    validate_incident_segment(incident, network_);
    std::vector<int> changed;
    if (incident.start >= incident.end) return changed;
    const auto& stations = network_.stations();
    for (std::size_t a = 0; a < arcs_.size(); ++a) {
        auto& arc = arcs_[a];
        if (arc.kind != ArcKind::Service || !arc.active) continue;
        if (!incident.active_at(arc.time)) continue;
        if (!incident.affects(network_.lines()[arc.line].mode)) continue;
        if (!incident.blocks(stations[arc.from_station].id, stations[arc.to_station].id)) continue;
        arc.active = false;
        changed.push_back(static_cast<int>(a));
    }
    return changed;
}

std::vector<int> TimeExpandedGraph::active_arc_ids() const
{
    std::vector<int> ids;
    for (std::size_t a = 0; a < arcs_.size(); ++a)
        if (arcs_[a].active) ids.push_back(static_cast<int>(a));
    return ids;
}

TimeExpandedGraph build_time_expanded_graph(const Network& network, const GraphOptions& options)
{
    return TimeExpandedGraph(network, options);
}

TimeExpandedGraph apply_incident(const TimeExpandedGraph& graph, const Incident& incident)
{
    TimeExpandedGraph copy = graph;
    copy.apply_incident_in_place(incident);
    return copy;
}

} // namespace faster
