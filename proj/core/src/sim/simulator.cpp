#include "faster/sim/simulator.hpp"

#include "faster/common/error.hpp"

#include <algorithm>
#include <numeric>

namespace faster {

bool MetricSelection::has(MetricFamily f) const
{
    switch (f) {
    case MetricFamily::TravelTimes: return travel_times;
    case MetricFamily::QueueLengths: return queue_lengths;
    case MetricFamily::TrainLoads: return train_loads;
    case MetricFamily::Boardings: return boardings;
    }
    return false;
}

long long SimMetrics::total_travel_time() const
{
    long long total = 0;
    if (travel_times)
        for (const auto& g : *travel_times) total += static_cast<long long>(g.count) * g.travel_time;
    return total;
}

namespace {

enum class GroupState { Waiting, Walking, Onboard, Arrived, Stranded, Pending };

struct Group {
    int commodity = -1;
    int count = 0;
    int start = 0;
    int station = -1;
    int destination = -1;
    std::vector<Leg> legs;
    int leg = 0;
    GroupState state = GroupState::Pending;
    int queue_line = -1; // line whose platform the group waits on / walks to
    int arrival = -1;
};

struct Run {
    int line = -1;
    int departure = 0;
    int capacity = 0;
    int load = 0;
    bool terminated = false;
    std::vector<int> onboard;
};

struct Stop {
    int run = 0;
    int position = 0;
};

} // namespace

struct Simulator::Impl {
    Scenario scenario;
    MetricSelection selection;
    PathPlanner planner;
    std::vector<Commodity> demand;
    std::vector<std::vector<int>> injections; // per step
    std::vector<std::vector<int>> cumulative; // per line, arrival offset per position
    std::vector<int> queue_offset;
    std::vector<std::deque<int>> queues;
    std::vector<long> queue_persons;
    std::vector<int> queue_station;
    std::vector<long> stranded_at_station;
    std::vector<Group> groups;
    std::vector<Run> runs;
    std::vector<std::vector<Stop>> stops; // per step
    std::vector<std::vector<int>> pending; // walkers ready at step
    std::vector<std::vector<const Incident*>> incident_starts;
    int t = 0;
    long injected = 0;
    long arrived = 0;
    long reroutes = 0;

    std::optional<std::vector<std::vector<int>>> queue_lengths;
    std::optional<std::vector<LoadRecord>> loads;
    std::optional<std::vector<DepartureRecord>> departures;

    Impl(const Scenario& s, MetricSelection sel)
        : scenario(s), selection(sel), planner(build_time_expanded_graph(s.network, s.graph_options()))
    {
        validate_scenario(scenario);
        const int T = scenario.horizon;
        const auto& net = scenario.network;
        demand = expand_demand(scenario);
        injections.assign(T, {});
        for (std::size_t i = 0; i < demand.size(); ++i) {
            require(demand[i].start >= 0 && demand[i].start < T, "demand outside horizon");
            injections[demand[i].start].push_back(static_cast<int>(i));
        }

        const auto& lines = net.lines();
        cumulative.resize(lines.size());
        queue_offset.resize(lines.size());
        int q = 0;
        for (std::size_t l = 0; l < lines.size(); ++l) {
            cumulative[l].assign(lines[l].stations.size(), 0);
            for (std::size_t i = 1; i < lines[l].stations.size(); ++i)
                cumulative[l][i] = cumulative[l][i - 1] + lines[l].runtimes[i - 1];
            queue_offset[l] = q;
            for (const auto& st : lines[l].stations) {
                queue_station.push_back(net.station_index(st));
                ++q;
            }
        }
        queues.assign(q, {});
        queue_persons.assign(q, 0);
        stranded_at_station.assign(net.stations().size(), 0);

        stops.assign(T, {});
        std::vector<std::pair<int, int>> entries; // (line, departure) in line order
        for (const auto& e : scenario.timetable) {
            const int l = net.line_index(e.line);
            const int cap = e.capacity > 0 ? e.capacity : lines[l].capacity;
            for (int d : e.departures) {
                Run r;
                r.line = l;
                r.departure = d;
                r.capacity = cap;
                runs.push_back(std::move(r));
            }
        }
        std::stable_sort(runs.begin(), runs.end(), [](const Run& a, const Run& b) {
            return a.line != b.line ? a.line < b.line : a.departure < b.departure;
        });
        for (std::size_t r = 0; r < runs.size(); ++r) {
            const int l = runs[r].line;
            for (std::size_t p = 0; p < cumulative[l].size(); ++p) {
                const int at = runs[r].departure + cumulative[l][p];
                if (at >= 0 && at < T) stops[at].push_back(Stop{static_cast<int>(r), static_cast<int>(p)});
            }
        }
        pending.assign(T, {});
        incident_starts.assign(T, {});
        for (const auto& inc : scenario.incidents)
            if (inc.start >= 0 && inc.start < T && inc.start < inc.end) incident_starts[inc.start].push_back(&inc);

        if (selection.queue_lengths)
            queue_lengths.emplace(net.stations().size(), std::vector<int>(static_cast<std::size_t>(T), 0));
        if (selection.train_loads) loads.emplace();
        if (selection.boardings) departures.emplace();
    }

    int queue_index(int line, int position) const { return queue_offset[line] + position; }

    const Line& line(int l) const { return scenario.network.lines()[l]; }

    bool segment_blocked(int l, int position, int step) const
    {
        const auto& ln = line(l);
        if (position + 1 >= static_cast<int>(ln.stations.size())) return false;
        for (const auto& inc : scenario.incidents)
            if (inc.active_at(step) && inc.affects(ln.mode) && inc.blocks(ln.stations[position], ln.stations[position + 1]))
                return true;
        return false;
    }

    bool legs_cross(const Group& g, const Incident& inc) const
    {
        for (std::size_t k = static_cast<std::size_t>(g.leg); k < g.legs.size(); ++k) {
            const auto& leg = g.legs[k];
            const auto& ln = line(leg.line);
            if (!inc.affects(ln.mode)) continue;
            for (int p = leg.board; p < leg.alight; ++p)
                if (inc.blocks(ln.stations[p], ln.stations[p + 1])) return true;
        }
        return false;
    }

    void enqueue(int gid, int l, int position)
    {
        auto& g = groups[gid];
        g.state = GroupState::Waiting;
        g.queue_line = l;
        const int q = queue_index(l, position);
        queues[q].push_back(gid);
        queue_persons[q] += g.count;
    }

    void mark_stranded(int gid)
    {
        auto& g = groups[gid];
        g.state = GroupState::Stranded;
        stranded_at_station[g.station] += g.count;
    }

    void arrive(int gid, int step)
    {
        auto& g = groups[gid];
        g.state = GroupState::Arrived;
        g.arrival = step;
        arrived += g.count;
    }

    void start_walk(int gid, int to_line, int step)
    {
        auto& g = groups[gid];
        g.state = GroupState::Walking;
        g.queue_line = to_line;
        const int ready = step + scenario.transfer_time;
        if (ready < scenario.horizon) pending[ready].push_back(gid);
    }

    /// Place a group standing at its station at `step` (on the platform of `current_line`,
    /// or at the entry when -1) according to its fresh legs.
    void place(int gid, int current_line, int step, std::deque<int>* rebuilt_queue)
    {
        auto& g = groups[gid];
        if (g.legs.empty()) {
            arrive(gid, step);
            return;
        }
        const auto& first = g.legs[0];
        if (current_line == -1 || first.line == current_line) {
            if (rebuilt_queue) {
                g.state = GroupState::Waiting;
                g.queue_line = first.line;
                rebuilt_queue->push_back(gid);
                queue_persons[queue_index(first.line, first.board)] += g.count;
            } else {
                enqueue(gid, first.line, first.board);
            }
        } else {
            start_walk(gid, first.line, step);
        }
    }

    bool replan_from(int gid, int node)
    {
        auto& g = groups[gid];
        auto path = planner.shortest_path(node, g.destination);
        if (!path) return false;
        g.legs = path->legs;
        g.leg = 0;
        return true;
    }

    int line_node_for(int l, int station, int step) const
    {
        const int pos = line(l).index_of(scenario.network.stations()[station].id);
        return planner.graph().line_node(l, pos, step);
    }

    void replan_waiting(const Incident* inc)
    {
        for (std::size_t q = 0; q < queues.size(); ++q) {
            if (queues[q].empty()) continue;
            std::deque<int> old;
            old.swap(queues[q]);
            queue_persons[q] = 0;
            int l = 0;
            while (l + 1 < static_cast<int>(queue_offset.size()) && queue_offset[l + 1] <= static_cast<int>(q)) ++l;
            for (int gid : old) {
                auto& g = groups[gid];
                if (inc && !legs_cross(g, *inc)) {
                    queues[q].push_back(gid);
                    queue_persons[q] += g.count;
                    continue;
                }
                const auto before = g.legs;
                const int before_leg = g.leg;
                if (!replan_from(gid, line_node_for(l, g.station, t))) {
                    mark_stranded(gid);
                    ++reroutes;
                    continue;
                }
                if (!(g.legs.size() == before.size() - static_cast<std::size_t>(before_leg) &&
                      std::equal(g.legs.begin(), g.legs.end(), before.begin() + before_leg,
                                 [](const Leg& a, const Leg& b) {
                                     return a.line == b.line && a.board == b.board && a.alight == b.alight;
                                 })))
                    ++reroutes;
                place(gid, l, t, &queues[q]);
            }
        }
    }

    void replan_walking(const Incident& inc)
    {
        for (int ready = t; ready < scenario.horizon; ++ready) {
            auto list = std::move(pending[ready]);
            pending[ready].clear();
            for (int gid : list) {
                auto& g = groups[gid];
                if (!legs_cross(g, inc)) {
                    pending[ready].push_back(gid);
                    continue;
                }
                ++reroutes;
                if (!replan_from(gid, line_node_for(g.queue_line, g.station, ready))) {
                    mark_stranded(gid);
                    continue;
                }
                if (g.legs.empty()) {
                    arrive(gid, ready);
                } else if (g.legs[0].line == g.queue_line) {
                    pending[ready].push_back(gid);
                } else {
                    g.queue_line = g.legs[0].line;
                    const int next = ready + scenario.transfer_time;
                    if (next < scenario.horizon) pending[next].push_back(gid);
                }
            }
        }
    }

    void inject(int ci)
    {
        const auto& c = demand[ci];
        Group g;
        g.commodity = ci;
        g.count = c.demand;
        g.start = c.start;
        g.station = scenario.network.station_index(c.origin);
        g.destination = scenario.network.station_index(c.destination);
        groups.push_back(std::move(g));
        const int gid = static_cast<int>(groups.size()) - 1;
        injected += c.demand;
        auto path = planner.plan(c);
        if (!path) {
            mark_stranded(gid);
            return;
        }
        groups[gid].legs = path->legs;
        groups[gid].leg = 0;
        place(gid, -1, t, nullptr);
    }

    void board(Run& run, int run_id, int position)
    {
        const int q = queue_index(run.line, position);
        auto& queue = queues[q];
        int boarded = 0;
        while (!queue.empty() && run.load < run.capacity) {
            const int gid = queue.front();
            const int residual = run.capacity - run.load;
            int rider = gid;
            if (groups[gid].count > residual) {
                Group part = groups[gid];
                part.count = residual;
                groups[gid].count -= residual;
                groups.push_back(std::move(part));
                rider = static_cast<int>(groups.size()) - 1;
            } else {
                queue.pop_front();
            }
            auto& g = groups[rider];
            g.state = GroupState::Onboard;
            run.onboard.push_back(rider);
            run.load += g.count;
            queue_persons[q] -= g.count;
            boarded += g.count;
        }
        const int denied = static_cast<int>(queue_persons[q]);
        if (departures)
            departures->push_back(DepartureRecord{run.line, run_id, position, t, boarded, run.load >= run.capacity ? denied : 0});
        if (loads) loads->push_back(LoadRecord{run.line, run_id, position, t, run.load});
    }

    void alight(Run& run, int position, bool everyone)
    {
        std::vector<int> staying;
        std::vector<int> stuck;
        const int station = scenario.network.station_index(line(run.line).stations[position]);
        for (int gid : run.onboard) {
            auto& g = groups[gid];
            const auto& leg = g.legs[g.leg];
            if (leg.alight == position) {
                run.load -= g.count;
                g.station = station;
                if (g.leg + 1 == static_cast<int>(g.legs.size())) {
                    arrive(gid, t);
                } else {
                    ++g.leg;
                    // drop completed legs so legs[0] is always the next ride
                    g.legs.erase(g.legs.begin(), g.legs.begin() + g.leg);
                    g.leg = 0;
                    start_walk(gid, g.legs[0].line, t);
                }
            } else if (everyone) {
                run.load -= g.count;
                g.station = station;
                stuck.push_back(gid);
            } else {
                staying.push_back(gid);
            }
        }
        run.onboard = std::move(staying);
        for (int gid : stuck) {
            ++reroutes;
            if (!replan_from(gid, planner.graph().line_node(run.line, position, t))) {
                mark_stranded(gid);
                continue;
            }
            place(gid, run.line, t, nullptr);
        }
    }

    void step()
    {
        if (t >= scenario.horizon) return;

        for (const Incident* inc : incident_starts[t]) {
            planner.apply_incident(*inc);
            replan_waiting(inc);
            replan_walking(*inc);
        }
        if (t > 0 && t % scenario.refresh_steps == 0) replan_waiting(nullptr);

        for (int gid : pending[t]) {
            auto& g = groups[gid];
            if (g.state != GroupState::Walking) continue;
            enqueue(gid, g.legs[0].line, g.legs[0].board);
        }
        pending[t].clear();
        for (int ci : injections[t]) inject(ci);

        for (const auto& stop : stops[t]) {
            Run& run = runs[stop.run];
            if (run.terminated) continue;
            const bool last = stop.position + 1 == static_cast<int>(line(run.line).stations.size());
            const bool blocked = !last && segment_blocked(run.line, stop.position, t);
            alight(run, stop.position, last || blocked);
            if (last || blocked) {
                run.terminated = blocked;
                continue;
            }
            board(run, stop.run, stop.position);
        }

        if (queue_lengths) {
            auto& ql = *queue_lengths;
            for (std::size_t s = 0; s < ql.size(); ++s) ql[s][t] = static_cast<int>(stranded_at_station[s]);
            for (std::size_t q = 0; q < queues.size(); ++q) ql[queue_station[q]][t] += static_cast<int>(queue_persons[q]);
        }
        ++t;
    }

    std::vector<int> snapshot() const
    {
        std::vector<int> out(scenario.network.stations().size(), 0);
        for (std::size_t s = 0; s < out.size(); ++s) out[s] = static_cast<int>(stranded_at_station[s]);
        for (std::size_t q = 0; q < queues.size(); ++q) out[queue_station[q]] += static_cast<int>(queue_persons[q]);
        return out;
    }

    SimMetrics metrics() const
    {
        SimMetrics m;
        m.horizon = scenario.horizon;
        m.injected = injected;
        m.arrived = arrived;
        m.in_system = injected - arrived;
        m.reroutes = reroutes;
        for (const auto& g : groups)
            if (g.state == GroupState::Stranded) m.stranded += g.count;
        if (selection.travel_times) {
            std::vector<GroupOutcome> out;
            out.reserve(groups.size());
            for (const auto& g : groups) {
                GroupOutcome o;
                o.commodity = g.commodity;
                o.count = g.count;
                o.start = g.start;
                o.stranded = g.state == GroupState::Stranded;
                if (g.state == GroupState::Arrived) {
                    o.arrival = g.arrival;
                    o.travel_time = g.arrival - g.start;
                } else {
                    o.travel_time = std::max(0, std::min(t, scenario.horizon) - g.start);
                }
                out.push_back(o);
            }
            std::stable_sort(out.begin(), out.end(), [](const GroupOutcome& a, const GroupOutcome& b) {
                return a.commodity != b.commodity ? a.commodity < b.commodity : a.travel_time < b.travel_time;
            });
            m.travel_times = std::move(out);
        }
        m.queue_lengths = queue_lengths;
        m.train_loads = loads;
        m.boardings = departures;
        return m;
    }
};

Simulator::Simulator(const Scenario& scenario, MetricSelection selection)
    : impl_(std::make_unique<Impl>(scenario, selection))
{
}

Simulator::~Simulator() = default;
Simulator::Simulator(Simulator&&) noexcept = default;
Simulator& Simulator::operator=(Simulator&&) noexcept = default;

void Simulator::step() { impl_->step(); }

void Simulator::run()
{
    while (!finished()) step();
}

int Simulator::now() const { return impl_->t; }
bool Simulator::finished() const { return impl_->t >= impl_->scenario.horizon; }
std::vector<int> Simulator::station_queue_snapshot() const { return impl_->snapshot(); }
SimMetrics Simulator::metrics() const { return impl_->metrics(); }
const std::vector<Commodity>& Simulator::demand() const { return impl_->demand; }

SimMetrics simulate(const Scenario& scenario, MetricSelection selection)
{
    Simulator sim(scenario, selection);
    sim.run();
    return sim.metrics();
}

} // namespace faster
