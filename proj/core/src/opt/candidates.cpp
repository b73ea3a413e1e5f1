#include "faster/opt/candidates.hpp"

#include "faster/common/error.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>

namespace faster {

const char* to_string(CandidateKind kind)
{
    switch (kind) {
    case CandidateKind::Truncated: return "truncated";
    case CandidateKind::Bridge: return "bridge";
    case CandidateKind::HubConnector: return "hub";
    case CandidateKind::Greedy: return "greedy";
    }
    return "?";
}

int bus_runtime(const Network& network, const std::string& from, const std::string& to, double speed_kmh, int dt_seconds)
{
    require(speed_kmh > 0.0, "bus speed must be positive");
    const double meters = distance(network.station(from).position, network.station(to).position);
    const double seconds = meters / (speed_kmh / 3.6);
    return std::max(1, static_cast<int>(std::ceil(seconds / dt_seconds - 1e-9)));
}

namespace {

Line bus_line(const Network& net, const std::vector<std::string>& stations, const CandidateLineParams& p, int dt,
              const std::string& id)
{
    Line l;
    l.id = id;
    l.mode = Mode::Bus;
    l.stations = stations;
    for (std::size_t i = 0; i + 1 < stations.size(); ++i)
        l.runtimes.push_back(bus_runtime(net, stations[i], stations[i + 1], p.bus_speed_kmh, dt));
    l.capacity = p.bus_capacity;
    l.headway = p.bus_headway;
    return l;
}

Line slice(const Line& base, int from, int to, bool reverse, const std::string& id)
{
    Line l;
    l.id = id;
    l.mode = base.mode;
    l.capacity = base.capacity;
    l.headway = base.headway;
    for (int i = from; i <= to; ++i) l.stations.push_back(base.stations[static_cast<std::size_t>(i)]);
    for (int i = from; i < to; ++i) l.runtimes.push_back(base.runtimes[static_cast<std::size_t>(i)]);
    if (reverse) {
        std::reverse(l.stations.begin(), l.stations.end());
        std::reverse(l.runtimes.begin(), l.runtimes.end());
    }
    return l;
}

std::string join(const std::vector<std::string>& s)
{
    std::string out;
    for (const auto& x : s) out += (out.empty() ? "" : "-") + x;
    return out;
}

std::set<std::pair<std::string, std::string>> segments(const Line& l)
{
    std::set<std::pair<std::string, std::string>> out;
    for (std::size_t i = 0; i + 1 < l.stations.size(); ++i) out.emplace(l.stations[i], l.stations[i + 1]);
    return out;
}

bool blocked(const std::vector<Incident>& incidents, const std::string& u, const std::string& v)
{
    return std::any_of(incidents.begin(), incidents.end(), [&](const Incident& i) { return i.blocks(u, v); });
}

} // namespace

CandidateSet generate_candidate_lines(const Network& net, const std::vector<Incident>& incidents,
                                      const CandidateLineParams& p, int dt)
{
    require(p.max_lines >= 0 && p.max_overlap >= 0 && p.max_length >= 0 && p.required_train_lines >= 0,
            "candidate line parameters must be >= 0");
    for (const auto& inc : incidents) validate_incident_segment(inc, net);

    std::set<std::string> hubs;
    {
        std::map<std::string, int> served;
        for (const auto& l : net.lines()) {
            for (const auto& s : l.stations) ++served[s];
            hubs.insert(l.stations.front());
            hubs.insert(l.stations.back());
        }
        for (const auto& [s, k] : served)
            if (k >= 2) hubs.insert(s);
    }

    std::vector<CandidateLine> truncated, bridges, connectors;
    std::set<std::vector<std::string>> seen;
    auto add = [&](std::vector<CandidateLine>& bucket, CandidateLine c) {
        if (c.line.stations.size() < 2 || !seen.insert(c.line.stations).second) return;
        if (net.find_line(c.line.id)) return;
        bucket.push_back(std::move(c));
    };

    for (const auto& base : net.lines()) {
        if (base.mode != Mode::Train) continue;
        const int last = static_cast<int>(base.stations.size()) - 1;
        for (int i = 0; i < last; ++i) {
            const auto& u = base.stations[static_cast<std::size_t>(i)];
            const auto& v = base.stations[static_cast<std::size_t>(i + 1)];
            if (!blocked(incidents, u, v)) continue;
            // loop services turning at the block
            for (auto [a, b] : {std::pair{0, i}, std::pair{i + 1, last}}) {
                if (b - a < 1) continue;
                for (bool rev : {false, true}) {
                    auto l = slice(base, a, b, rev, "");
                    l.id = base.id + "~" + join(l.stations);
                    add(truncated, {l, CandidateKind::Truncated, base.id});
                }
            }
            // bridges along the line over the block, shortest first
            std::vector<std::pair<int, int>> spans;
            for (int a = i; a >= 0; --a)
                for (int b = i + 1; b <= last; ++b) spans.emplace_back(a, b);
            std::stable_sort(spans.begin(), spans.end(),
                             [](auto x, auto y) { return x.second - x.first < y.second - y.first; });
            for (auto [a, b] : spans)
                for (bool rev : {false, true}) {
                    std::vector<std::string> st(base.stations.begin() + a, base.stations.begin() + b + 1);
                    if (rev) std::reverse(st.begin(), st.end());
                    add(bridges, {bus_line(net, st, p, dt, "bus~" + join(st)), CandidateKind::Bridge, base.id});
                }
            // hub to hub across the block
            for (int a = 0; a <= i; ++a)
                for (int b = i + 1; b <= last; ++b) {
                    const auto& ha = base.stations[static_cast<std::size_t>(a)];
                    const auto& hb = base.stations[static_cast<std::size_t>(b)];
                    if (!hubs.count(ha) || !hubs.count(hb) || b - a < 2) continue;
                    for (bool rev : {false, true}) {
                        std::vector<std::string> st = rev ? std::vector<std::string>{hb, ha} : std::vector<std::string>{ha, hb};
                        add(connectors, {bus_line(net, st, p, dt, "hub~" + join(st)), CandidateKind::HubConnector, base.id});
                    }
                }
        }
    }

    CandidateSet out;
    std::vector<std::set<std::pair<std::string, std::string>>> kept_segments;
    int too_long = 0, overlapping = 0;
    // round robin over the kinds so a small max_lines still mixes them
    std::vector<CandidateLine*> order;
    for (std::size_t k = 0; k < std::max({truncated.size(), bridges.size(), connectors.size()}); ++k)
        for (auto* bucket : {&truncated, &bridges, &connectors})
            if (k < bucket->size()) order.push_back(&(*bucket)[k]);
    for (auto* cp : order) {
        auto& c = *cp;
        if (static_cast<int>(out.lines.size()) >= p.max_lines) break;
        if (static_cast<int>(c.line.stations.size()) > p.max_length) {
            ++too_long;
            continue;
        }
        const auto segs = segments(c.line);
        int shared = 0;
        for (const auto& k : kept_segments)
            for (const auto& s : segs) shared += static_cast<int>(k.count(s));
        if (shared > p.max_overlap) {
            ++overlapping;
            continue;
        }
        kept_segments.push_back(segs);
        out.lines.push_back(std::move(c));
    }

    std::set<std::string> covered;
    for (const auto& c : out.lines) covered.insert(c.serves);
    if (static_cast<int>(covered.size()) < p.required_train_lines) {
        out.diagnostic = "candidate set serves " + std::to_string(covered.size()) + " affected train lines, " +
                         std::to_string(p.required_train_lines) + " required";
        out.lines.clear();
        return out;
    }
    if (out.lines.empty()) {
        if (truncated.empty() && bridges.empty() && connectors.empty())
            out.diagnostic = "no train segment is blocked by the incidents";
        else
            out.diagnostic = "no candidate line within the parameters (" + std::to_string(too_long) + " too long, " +
                             std::to_string(overlapping) + " overlapping)";
    }
    return out;
}

Line greedy_line(const Network& net, const std::vector<Incident>& incidents, const std::string& origin,
                 const std::string& destination, const CandidateLineParams& p, int dt, const std::string& id)
{
    require(origin != destination, "greedy line needs two distinct stations");
    net.station_index(origin);
    net.station_index(destination);
    std::map<std::string, std::set<std::string>> adj;
    for (const auto& l : net.lines())
        for (std::size_t i = 0; i + 1 < l.stations.size(); ++i) {
            const auto& u = l.stations[i];
            const auto& v = l.stations[i + 1];
            if (!blocked(incidents, u, v)) adj[u].insert(v);
            if (!blocked(incidents, v, u)) adj[v].insert(u);
        }
    std::map<std::string, std::string> parent{{origin, ""}};
    std::deque<std::string> q{origin};
    while (!q.empty() && !parent.count(destination)) {
        const auto u = q.front();
        q.pop_front();
        for (const auto& v : adj[u])
            if (parent.emplace(v, u).second) q.push_back(v);
    }
    std::vector<std::string> path;
    if (parent.count(destination))
        for (std::string v = destination; !v.empty(); v = parent[v]) path.push_back(v);
    std::reverse(path.begin(), path.end());
    if (path.size() < 2 || static_cast<int>(path.size()) > std::max(2, p.max_length)) path = {origin, destination};
    return bus_line(net, path, p, dt, id);
}

} // namespace faster
