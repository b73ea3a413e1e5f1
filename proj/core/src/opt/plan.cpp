#include "faster/opt/plan.hpp"

#include "faster/common/error.hpp"
#include "faster/common/work_queue.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

namespace faster {

double PlanLine::headway_minutes(int dt_seconds) const
{
    if (services <= 0) return 0.0;
    return static_cast<double>(line.headway) * dt_seconds / 60.0 / services;
}

int Plan::additional_trains() const
{
    int total = 0;
    for (const auto& l : lines)
        if (l.line.mode == Mode::Train) total += std::max(0, l.services - (l.candidate() ? 0 : 1));
    return total;
}

int Plan::emergency_buses() const
{
    int total = 0;
    for (const auto& l : lines)
        if (l.line.mode == Mode::Bus && l.candidate()) total += l.services;
    return total;
}

const PlanLine* Plan::find(const std::string& line_id) const
{
    for (const auto& l : lines)
        if (l.line.id == line_id) return &l;
    return nullptr;
}

std::string Plan::signature() const
{
    std::vector<std::string> parts;
    for (const auto& l : lines) parts.push_back(l.line.id + "=" + std::to_string(l.services));
    std::sort(parts.begin(), parts.end());
    std::string out;
    for (const auto& p : parts) out += p + ";";
    return out;
}

Plan plan_from_solution(const MipInstance& m, const FlowSolution& s, const std::vector<CandidateLine>& candidates,
                        const std::string& id)
{
    require(s.n.size() == m.lines.size(), "solution does not match the program");
    Plan p;
    p.id = id;
    p.mip_objective = s.objective;
    p.flows = s;
    const auto& net = m.graph.network();
    for (std::size_t i = 0; i < m.lines.size(); ++i) {
        const auto& ml = m.lines[i];
        if (ml.candidate && s.n[i] == 0) continue;
        PlanLine pl;
        pl.line = net.lines()[static_cast<std::size_t>(ml.line)];
        pl.services = s.n[i];
        if (ml.candidate) {
            pl.role = "greedy";
            for (const auto& c : candidates)
                if (c.line.id == ml.id) pl.role = to_string(c.kind);
        }
        p.lines.push_back(std::move(pl));
    }
    return p;
}

Plan nominal_plan(const Network& network, const std::string& id)
{
    Plan p;
    p.id = id;
    for (const auto& l : network.lines()) p.lines.push_back(PlanLine{l, "existing", 1});
    return p;
}

Scenario realize(const Plan& plan, const Scenario& scenario)
{
    Scenario out = scenario;
    std::vector<Line> extra;
    for (const auto& pl : plan.lines) {
        if (!pl.candidate()) {
            require(scenario.network.find_line(pl.line.id).has_value(), "plan line '" + pl.line.id + "' is not in the network");
            require(pl.services >= 1, "existing line '" + pl.line.id + "' needs at least one service");
        } else if (pl.services > 0) {
            extra.push_back(pl.line);
        }
    }
    out.network = scenario.network.with_lines(extra);
    out.incidents = pin_incident_modes(scenario.incidents, scenario.network);

    std::map<std::string, int> services;
    for (const auto& pl : plan.lines) services[pl.line.id] = pl.services;
    out.timetable.clear();
    std::set<std::string> scheduled;
    for (const auto& e : scenario.timetable) {
        auto it = services.find(e.line);
        if (it == services.end() || it->second == 1) {
            out.timetable.push_back(e);
            scheduled.insert(e.line);
        }
    }
    for (const auto& l : out.network.lines()) {
        if (scheduled.count(l.id)) continue;
        auto it = services.find(l.id);
        out.timetable.push_back(timetable_for_services(l, it == services.end() ? 1 : it->second, out.horizon));
    }
    return out;
}

namespace {

/// Per-commodity per-person travel times, ascending.
std::vector<std::vector<int>> person_times(const SimMetrics& m)
{
    require(m.travel_times.has_value(), "plan metrics need travel times");
    std::vector<std::vector<int>> out;
    for (const auto& g : *m.travel_times) {
        if (g.commodity >= static_cast<int>(out.size())) out.resize(static_cast<std::size_t>(g.commodity) + 1);
        auto& v = out[static_cast<std::size_t>(g.commodity)];
        v.insert(v.end(), static_cast<std::size_t>(g.count), g.travel_time);
    }
    for (auto& v : out) std::sort(v.begin(), v.end());
    return out;
}

/// Delay in steps per person, per commodity.
std::vector<std::vector<int>> person_delays(const SimMetrics& run, const SimMetrics& baseline)
{
    auto a = person_times(run);
    auto b = person_times(baseline);
    a.resize(std::max(a.size(), b.size()));
    b.resize(a.size());
    std::vector<std::vector<int>> out(a.size());
    for (std::size_t c = 0; c < a.size(); ++c) {
        require(a[c].size() == b[c].size(), "plan and baseline runs carry different demand");
        for (std::size_t i = 0; i < a[c].size(); ++i) out[c].push_back(std::max(0, a[c][i] - b[c][i]));
    }
    return out;
}

} // namespace

PlanMetrics compute_plan_metrics(const SimMetrics& run, const SimMetrics& baseline, const Network& network,
                                 int dt_seconds)
{
    require(dt_seconds > 0, "step size must be positive");
    PlanMetrics out;
    const double minutes = dt_seconds / 60.0;
    const auto delays = person_delays(run, baseline);
    long persons = 0;
    double total = 0.0;
    for (const auto& c : delays)
        for (int d : c) {
            ++persons;
            total += d * minutes;
            if (d * minutes >= 20.0 - 1e-9) ++out.delayed_20;
        }
    out.average_delay_min = persons ? total / persons : 0.0;
    require(run.queue_lengths.has_value(), "plan metrics need queue lengths");
    const auto& q = *run.queue_lengths;
    long over = 0;
    for (std::size_t s = 0; s < q.size() && s < network.stations().size(); ++s)
        for (int v : q[s])
            if (v > network.stations()[s].platform_capacity) ++over;
    out.overcrowding_min = over * minutes;
    return out;
}

EvaluationContext make_evaluation_context(const Scenario& scenario)
{
    validate_scenario(scenario);
    EvaluationContext ctx;
    ctx.scenario = scenario;
    Scenario base = scenario;
    base.incidents.clear();
    ctx.baseline = simulate(base, MetricSelection{true, false, false, false});
    return ctx;
}

PlanEvaluation evaluate_plan(const Plan& plan, const EvaluationContext& context)
{
    if (!context.baseline) throw ValidationError("baseline scenario missing");
    const Scenario s = realize(plan, context.scenario);
    Simulator sim(s, MetricSelection{true, true, false, true});
    sim.run();
    const auto run = sim.metrics();
    PlanEvaluation out;
    out.metrics = compute_plan_metrics(run, *context.baseline, s.network, s.dt_seconds);
    out.objective = run.total_travel_time();
    out.boardings.assign(s.network.lines().size(), 0);
    for (const auto& d : *run.boardings) out.boardings[static_cast<std::size_t>(d.line)] += d.boarded;

    const auto delays = person_delays(run, *context.baseline);
    std::map<std::pair<std::string, std::string>, long> residual;
    const auto& demand = sim.demand();
    for (std::size_t c = 0; c < delays.size() && c < demand.size(); ++c) {
        const long sum = std::accumulate(delays[c].begin(), delays[c].end(), 0L);
        if (sum > 0) residual[{demand[c].origin, demand[c].destination}] += sum;
    }
    out.residual.assign(residual.begin(), residual.end());
    std::stable_sort(out.residual.begin(), out.residual.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    return out;
}

std::vector<Plan> rank_plans(std::vector<Plan> plans, const MetricWeights& w, RankMode mode)
{
    require(!plans.empty(), "no plans to rank");
    if (mode == RankMode::Lexicographic) {
        std::sort(plans.begin(), plans.end(), [](const Plan& a, const Plan& b) {
            const auto& x = a.metrics;
            const auto& y = b.metrics;
            return std::tie(x.delayed_20, x.overcrowding_min, x.average_delay_min, a.objective, a.id) <
                   std::tie(y.delayed_20, y.overcrowding_min, y.average_delay_min, b.objective, b.id);
        });
        return plans;
    }
    double md = 0, mc = 0, mo = 0;
    for (const auto& p : plans) {
        md = std::max(md, p.metrics.average_delay_min);
        mc = std::max(mc, static_cast<double>(p.metrics.delayed_20));
        mo = std::max(mo, p.metrics.overcrowding_min);
    }
    auto norm = [](double v, double m) { return m > 0 ? v / m : 0.0; };
    auto score = [&](const Plan& p) {
        return w.average_delay * norm(p.metrics.average_delay_min, md) +
               w.delayed_20 * norm(static_cast<double>(p.metrics.delayed_20), mc) +
               w.overcrowding * norm(p.metrics.overcrowding_min, mo);
    };
    std::vector<std::pair<double, Plan>> scored;
    for (auto& p : plans) scored.emplace_back(score(p), std::move(p));
    std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return a.second.id < b.second.id;
    });
    std::vector<Plan> out;
    for (auto& [s, p] : scored) out.push_back(std::move(p));
    return out;
}

namespace {

bool within(const Plan& p, const FleetBudget& b)
{
    long trains = 0, buses = 0;
    for (const auto& l : p.lines) (l.line.mode == Mode::Train ? trains : buses) += l.services;
    return trains <= b.trains && buses <= b.buses;
}

} // namespace

LocalSearchResult local_search(const Plan& initial, const EvaluationContext& ctx,
                               const std::vector<CandidateLine>& candidates, const LocalSearchOptions& opt)
{
    require(opt.move_budget >= 0, "move budget must be >= 0");
    const auto t0 = std::chrono::steady_clock::now();
    auto out_of_time = [&] {
        if (opt.budget_seconds <= 0.0) return false;
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() >= opt.budget_seconds;
    };

    LocalSearchResult res;
    res.plan = initial;
    if (opt.move_budget == 0) return res;

    auto current = evaluate_plan(res.plan, ctx);
    ++res.evaluations;
    res.plan.objective = current.objective;
    res.plan.metrics = current.metrics;
    res.trace.push_back(current.objective);
    std::mt19937_64 rng(opt.seed);

    while (res.evaluations < opt.move_budget && !out_of_time()) {
        std::vector<Plan> moves;
        auto push = [&](Plan p) {
            if (!within(p, opt.budget)) return;
            p.flows.reset();
            p.mip_objective.reset();
            p.origin = "local_search";
            moves.push_back(std::move(p));
        };
        const auto& plan = res.plan;
        if (opt.service_moves)
            for (std::size_t i = 0; i < plan.lines.size(); ++i)
                for (int d : {+1, -1}) {
                    const int n = plan.lines[i].services + d;
                    if (n > opt.max_services || n < (plan.lines[i].candidate() ? 0 : 1)) continue;
                    Plan p = plan;
                    if (n == 0) p.lines.erase(p.lines.begin() + static_cast<long>(i));
                    else p.lines[i].services = n;
                    push(std::move(p));
                }
        if (opt.swap_moves) {
            // least-used response line by boardings; ties by position
            const Scenario realized = realize(plan, ctx.scenario);
            int worst = -1;
            long worst_use = 0;
            for (std::size_t i = 0; i < plan.lines.size(); ++i) {
                if (!plan.lines[i].candidate()) continue;
                const auto li = realized.network.find_line(plan.lines[i].line.id);
                const long use = li ? current.boardings[static_cast<std::size_t>(*li)] : 0;
                if (worst < 0 || use < worst_use) {
                    worst = static_cast<int>(i);
                    worst_use = use;
                }
            }
            if (worst >= 0)
                for (const auto& c : candidates) {
                    if (plan.find(c.line.id)) continue;
                    Plan p = plan;
                    auto& slot = p.lines[static_cast<std::size_t>(worst)];
                    slot.line = c.line;
                    slot.role = to_string(c.kind);
                    push(std::move(p));
                }
        }
        if (opt.greedy_moves)
            for (const auto& [od, amount] : current.residual) {
                const std::string id = "greedy~" + od.first + "-" + od.second;
                if (plan.find(id)) continue;
                Plan p = plan;
                p.lines.push_back(PlanLine{greedy_line(ctx.scenario.network, ctx.scenario.incidents, od.first, od.second,
                                                       opt.line_params, ctx.scenario.dt_seconds, id),
                                           "greedy", 1});
                push(std::move(p));
                break;
            }
        if (moves.empty()) break;

        const auto remaining = static_cast<std::size_t>(opt.move_budget - res.evaluations);
        if (moves.size() > remaining) {
            std::shuffle(moves.begin(), moves.end(), rng);
            moves.resize(remaining);
        }
        const auto evals =
            parallel_map<PlanEvaluation>(moves.size(), [&](std::size_t i) { return evaluate_plan(moves[i], ctx); }, opt.workers);
        res.evaluations += static_cast<int>(moves.size());
        std::size_t best = moves.size();
        for (std::size_t i = 0; i < evals.size(); ++i)
            if (evals[i].objective < current.objective && (best == moves.size() || evals[i].objective < evals[best].objective))
                best = i;
        if (best == moves.size()) break;
        res.plan = std::move(moves[best]);
        current = evals[best];
        res.plan.objective = current.objective;
        res.plan.metrics = current.metrics;
        res.trace.push_back(current.objective);
    }
    return res;
}

nlohmann::json to_json(const PlanMetrics& m)
{
    return {{"average_delay_min", m.average_delay_min},
            {"delay_ge_20_min_count", m.delayed_20},
            {"overcrowding_min", m.overcrowding_min}};
}

nlohmann::json to_json(const Plan& plan, int dt_seconds)
{
    nlohmann::json lines = nlohmann::json::array();
    nlohmann::json trains = nlohmann::json::array();
    nlohmann::json buses = nlohmann::json::array();
    for (const auto& l : plan.lines) {
        nlohmann::json j{{"id", l.line.id},
                         {"mode", to_string(l.line.mode)},
                         {"role", l.role},
                         {"stations", l.line.stations},
                         {"runtimes", l.line.runtimes},
                         {"capacity", l.line.capacity},
                         {"headway", l.line.headway},
                         {"services", l.services},
                         {"headway_min", l.headway_minutes(dt_seconds)}};
        lines.push_back(j);
        const bool response = l.candidate() || l.services != 1;
        if (!response) continue;
        nlohmann::json s{{"line", l.line.id},
                         {"from", l.line.stations.front()},
                         {"to", l.line.stations.back()},
                         {"headway_min", l.headway_minutes(dt_seconds)}};
        (l.line.mode == Mode::Train ? trains : buses).push_back(s);
    }
    nlohmann::json out{{"id", plan.id},
                       {"origin", plan.origin},
                       {"lines", lines},
                       {"train_service", trains},
                       {"shuttle_bus_service", buses},
                       {"additional_trains", plan.additional_trains()},
                       {"emergency_buses", plan.emergency_buses()},
                       {"objective", plan.objective},
                       {"metrics", to_json(plan.metrics)}};
    out["mip_objective"] = plan.mip_objective ? nlohmann::json(*plan.mip_objective) : nlohmann::json();
    return out;
}

} // namespace faster
