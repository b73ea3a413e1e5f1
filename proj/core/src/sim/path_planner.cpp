#include "faster/sim/path_planner.hpp"

#include "faster/common/error.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace faster {

namespace {

constexpr int kInf = std::numeric_limits<int>::max() / 4;

int kind_priority(ArcKind kind)
{
    switch (kind) {
    case ArcKind::Sink: return 0;
    case ArcKind::Service: return 1;
    case ArcKind::Transfer: return 2;
    case ArcKind::Entry: return 3;
    case ArcKind::Wait: return 4;
    }
    return 5;
}

std::uint64_t cache_key(int node, int dest)
{
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(node)) << 32) | static_cast<std::uint32_t>(dest);
}

} // namespace

PathPlanner::PathPlanner(TimeExpandedGraph graph) : graph_(std::move(graph))
{
    const auto& lines = graph_.network().lines();
    std::vector<int> order(lines.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return lines[a].id < lines[b].id; });
    line_rank_.assign(lines.size(), 0);
    for (std::size_t r = 0; r < order.size(); ++r) line_rank_[order[r]] = static_cast<int>(r);

    nodes_by_time_.assign(graph_.horizon(), {});
    for (int n = 0; n < graph_.node_count(); ++n) {
        const auto& info = graph_.node(n);
        if (info.kind == NodeInfo::Kind::LineNode) nodes_by_time_[info.time].push_back(n);
    }
    for (int n = 0; n < graph_.node_count(); ++n) {
        const auto& info = graph_.node(n);
        if (info.kind == NodeInfo::Kind::Entry) nodes_by_time_[info.time].push_back(n);
    }
}

int PathPlanner::compare_sequences(const Table& t, int fa, int ra, int fb, int rb) const
{
    for (;;) {
        if (fa == -1 && fb == -1) return 0;
        if (fa == -1) return -1;
        if (fb == -1) return 1;
        if (fa != fb) return fa < fb ? -1 : 1;
        const int na = ra, nb = rb;
        fa = na < 0 ? -1 : t.seq_first[na];
        ra = na < 0 ? -1 : t.seq_rest[na];
        fb = nb < 0 ? -1 : t.seq_first[nb];
        rb = nb < 0 ? -1 : t.seq_rest[nb];
    }
}

void PathPlanner::build_table(int dest, Table& t)
{
    const int n_nodes = graph_.node_count();
    t.dist.assign(n_nodes, kInf);
    t.next_arc.assign(n_nodes, -1);
    t.seq_first.assign(n_nodes, -1);
    t.seq_rest.assign(n_nodes, -1);
    t.dist[graph_.sink_node(dest)] = 0;

    for (int time = graph_.horizon() - 1; time >= 0; --time) {
        for (int node : nodes_by_time_[time]) {
            int best = kInf, best_arc = -1, best_first = -1, best_rest = -1, best_prio = 99;
            for (int a : graph_.out_arcs(node)) {
                const Arc& arc = graph_.arc(a);
                if (!arc.active) continue;
                const int h = arc.head;
                if (t.dist[h] >= kInf) continue;
                const int cost = arc.cost + t.dist[h];
                int first = -1, rest = -1;
                if (arc.kind == ArcKind::Service) {
                    const int l = line_rank_[arc.line];
                    first = l;
                    rest = (t.seq_first[h] == l) ? t.seq_rest[h] : h;
                } else if (arc.kind != ArcKind::Sink) {
                    first = t.seq_first[h];
                    rest = t.seq_rest[h];
                }
                const int prio = kind_priority(arc.kind);
                bool take = cost < best;
                if (!take && cost == best) {
                    const int c = compare_sequences(t, first, rest, best_first, best_rest);
                    take = c < 0 || (c == 0 && prio < best_prio);
                }
                if (take) {
                    best = cost;
                    best_arc = a;
                    best_first = first;
                    best_rest = rest;
                    best_prio = prio;
                }
            }
            t.dist[node] = best;
            t.next_arc[node] = best_arc;
            t.seq_first[node] = best_first;
            t.seq_rest[node] = best_rest;
        }
    }
    t.valid = true;
    ++table_builds_;
}

PathPlanner::Table& PathPlanner::table_for(int dest)
{
    auto& t = tables_[dest];
    if (!t.valid) build_table(dest, t);
    return t;
}

std::optional<int> PathPlanner::distance(int start_node, int dest)
{
    const auto& t = table_for(dest);
    if (t.dist[start_node] >= kInf) return std::nullopt;
    return t.dist[start_node];
}

std::optional<Path> PathPlanner::shortest_path(int start_node, int dest)
{
    const auto key = cache_key(start_node, dest);
    if (auto it = cache_.find(key); it != cache_.end()) {
        ++hits_;
        return it->second;
    }
    const auto& t = table_for(dest);
    std::optional<Path> result;
    if (t.dist[start_node] < kInf) {
        Path p;
        p.cost = t.dist[start_node];
        const int sink = graph_.sink_node(dest);
        int node = start_node;
        while (node != sink) {
            const int a = t.next_arc[node];
            p.arcs.push_back(a);
            node = graph_.arc(a).head;
        }
        p.legs = legs_from_arcs(graph_, p.arcs);
        result = std::move(p);
    }
    cache_.emplace(key, result);
    return result;
}

std::optional<Path> PathPlanner::plan(const Commodity& c)
{
    const auto& net = graph_.network();
    const int o = net.station_index(c.origin);
    const int d = net.station_index(c.destination);
    if (c.start < 0 || c.start >= graph_.horizon()) return std::nullopt;
    return shortest_path(graph_.entry_node(o, c.start), d);
}

std::size_t PathPlanner::apply_incident(const Incident& incident)
{
    const auto changed = graph_.apply_incident_in_place(incident);
    if (changed.empty()) return 0;
    for (auto& [dest, t] : tables_) t.valid = false;
    std::vector<char> removed(graph_.arcs().size(), 0);
    for (int a : changed) removed[a] = 1;
    std::size_t invalidated = 0;
    for (auto it = cache_.begin(); it != cache_.end();) {
        bool touches = false;
        if (it->second)
            for (int a : it->second->arcs)
                if (removed[a]) {
                    touches = true;
                    break;
                }
        if (touches) {
            it = cache_.erase(it);
            ++invalidated;
        } else {
            ++it;
        }
    }
    return invalidated;
}

std::vector<Leg> legs_from_arcs(const TimeExpandedGraph& graph, const std::vector<int>& arcs)
{
    std::vector<Leg> legs;
    bool transferred = true;
    for (int a : arcs) {
        const Arc& arc = graph.arc(a);
        if (arc.kind == ArcKind::Transfer || arc.kind == ArcKind::Entry) {
            transferred = true;
            continue;
        }
        if (arc.kind != ArcKind::Service) continue;
        const int from_pos = graph.node(arc.tail).position;
        const int to_pos = graph.node(arc.head).position;
        if (!transferred && !legs.empty() && legs.back().line == arc.line && legs.back().alight == from_pos) {
            legs.back().alight = to_pos;
        } else {
            legs.push_back(Leg{arc.line, from_pos, to_pos});
        }
        transferred = false;
    }
    return legs;
}

PathAssignment plan_path(PathPlanner& planner, const Commodity& commodity)
{
    return PathAssignment{planner.plan(commodity)};
}

std::vector<PathAssignment> plan_paths(const TimeExpandedGraph& graph, const std::vector<Commodity>& commodities)
{
    PathPlanner planner(graph);
    std::vector<PathAssignment> out;
    out.reserve(commodities.size());
    for (const auto& c : commodities) out.push_back(plan_path(planner, c));
    return out;
}

} // namespace faster
