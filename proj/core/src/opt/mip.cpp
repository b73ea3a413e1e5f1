#include "faster/opt/mip.hpp"

#include "faster/common/error.hpp"
#include "faster/common/work_queue.hpp"
#include "faster/opt/simplex.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

namespace faster {

const char* to_string(SolveMode mode)
{
    return mode == SolveMode::ExactSmall ? "exact" : "heuristic";
}

SolveMode solve_mode_from_string(const std::string& text)
{
    if (text == "exact" || text == "exact_small") return SolveMode::ExactSmall;
    if (text == "heuristic") return SolveMode::Heuristic;
    throw ValidationError("unknown solve mode '" + text + "'");
}

MipInstance build_mip(const TimeExpandedGraph& graph, const std::vector<Commodity>& commodities,
                      const std::vector<std::string>& candidate_ids, const MipOptions& options)
{
    MipInstance m;
    m.graph = graph;
    m.commodities = commodities;
    m.budget = options.budget;
    m.service_cost = options.service_cost;
    m.overflow_cost = graph.horizon() * 10;
    const auto& net = graph.network();
    const int T = graph.horizon();

    for (const auto& id : candidate_ids) require(net.find_line(id).has_value(), "unknown candidate line '" + id + "'");
    for (std::size_t l = 0; l < net.lines().size(); ++l) {
        const auto& line = net.lines()[l];
        MipLine ml;
        ml.line = static_cast<int>(l);
        ml.id = line.id;
        ml.mode = line.mode;
        ml.candidate = std::find(candidate_ids.begin(), candidate_ids.end(), line.id) != candidate_ids.end();
        ml.choices = ml.candidate ? options.candidate_choices : options.existing_choices;
        require(!ml.choices.empty(), "line " + line.id + " has no allowed service counts");
        std::sort(ml.choices.begin(), ml.choices.end());
        ml.choices.erase(std::unique(ml.choices.begin(), ml.choices.end()), ml.choices.end());
        require(ml.choices.front() >= 0, "service counts must be >= 0");
        ml.capacity = line.capacity;
        ml.headway = line.headway;
        m.lines.push_back(ml);
    }

    long total = 0;
    for (const auto& c : commodities) {
        const auto o = net.find_station(c.origin);
        const auto d = net.find_station(c.destination);
        if (!o) throw ValidationError("commodity " + c.id + ": source node missing (unknown station " + c.origin + ")");
        if (!d) throw ValidationError("commodity " + c.id + ": sink node missing (unknown station " + c.destination + ")");
        if (c.start < 0 || c.start >= T) throw ValidationError("commodity " + c.id + ": source node missing (start outside horizon)");
        require(c.demand >= 0, "commodity " + c.id + ": negative demand");
        m.source.push_back(graph.entry_node(*o, c.start));
        m.sink.push_back(graph.sink_node(*d));
        total += c.demand;
    }
    m.wait_delta = 1.0 / (4.0 * static_cast<double>(std::max<long>(1, total)) * T);

    const int N = graph.node_count();
    for (std::size_t p = 0; p < commodities.size(); ++p) {
        std::vector<char> fwd(static_cast<std::size_t>(N), 0), bwd(static_cast<std::size_t>(N), 0);
        std::vector<int> stack{m.source[p]};
        fwd[static_cast<std::size_t>(m.source[p])] = 1;
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            for (int a : graph.out_arcs(u)) {
                const auto& arc = graph.arc(a);
                if (!arc.active || fwd[static_cast<std::size_t>(arc.head)]) continue;
                fwd[static_cast<std::size_t>(arc.head)] = 1;
                stack.push_back(arc.head);
            }
        }
        stack.push_back(m.sink[p]);
        bwd[static_cast<std::size_t>(m.sink[p])] = 1;
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            for (int a : graph.in_arcs(u)) {
                const auto& arc = graph.arc(a);
                if (!arc.active || bwd[static_cast<std::size_t>(arc.tail)] || !fwd[static_cast<std::size_t>(arc.tail)]) continue;
                bwd[static_cast<std::size_t>(arc.tail)] = 1;
                stack.push_back(arc.tail);
            }
        }
        std::vector<int> usable;
        for (std::size_t a = 0; a < graph.arcs().size(); ++a) {
            const auto& arc = graph.arcs()[a];
            if (arc.active && fwd[static_cast<std::size_t>(arc.tail)] && bwd[static_cast<std::size_t>(arc.head)])
                usable.push_back(static_cast<int>(a));
        }
        // topological order: tail time, entry arcs first within a step
        std::stable_sort(usable.begin(), usable.end(), [&](int a, int b) {
            const auto& x = graph.arc(a);
            const auto& y = graph.arc(b);
            const int tx = graph.node(x.tail).time, ty = graph.node(y.tail).time;
            if (tx != ty) return tx < ty;
            return (x.kind == ArcKind::Entry) > (y.kind == ArcKind::Entry);
        });
        m.usable.push_back(std::move(usable));

        long bound = 0;
        const auto& c = commodities[p];
        for (const auto& ml : m.lines) {
            const auto& line = net.lines()[static_cast<std::size_t>(ml.line)];
            if (line.index_of(c.origin) < 0) continue;
            bound += static_cast<long>(ml.capacity) * ml.choices.back() / std::max(1, ml.headway) * (T - c.start);
        }
        if (m.usable.back().empty() || c.demand > bound) m.potentially_infeasible.push_back(static_cast<int>(p));
    }
    return m;
}

std::size_t MipInstance::conservation_rows() const
{
    return static_cast<std::size_t>(graph.node_count()) * commodities.size();
}

std::size_t MipInstance::capacity_rows() const { return graph.count_active(ArcKind::Service); }

std::size_t MipInstance::flow_variables() const
{
    return (graph.active_arc_ids().size() + 1) * commodities.size();
}

std::size_t MipInstance::reduced_variables() const
{
    std::size_t n = 0;
    for (const auto& u : usable) n += u.size() + 1;
    return n;
}

int MipInstance::capacity(int arc, const std::vector<int>& n) const
{
    const auto& a = graph.arc(arc);
    if (a.kind != ArcKind::Service || !a.active) return 0;
    const auto& ml = lines[static_cast<std::size_t>(a.line)];
    return static_cast<int>(static_cast<long>(ml.capacity) * n[static_cast<std::size_t>(a.line)] / std::max(1, ml.headway));
}

double MipInstance::solver_cost(int arc) const
{
    const auto& a = graph.arc(arc);
    double c = a.cost;
    if (a.kind == ArcKind::Wait) c += wait_delta * static_cast<double>(graph.horizon() - a.time) / graph.horizon();
    return c;
}

bool MipInstance::within_budget(const std::vector<int>& n) const
{
    long trains = 0, buses = 0;
    for (std::size_t l = 0; l < lines.size(); ++l) (lines[l].mode == Mode::Train ? trains : buses) += n[l];
    return trains <= budget.trains && buses <= budget.buses;
}

std::vector<std::vector<int>> MipInstance::n_vectors() const
{
    std::vector<std::vector<int>> out;
    std::vector<std::size_t> idx(lines.size(), 0);
    for (;;) {
        std::vector<int> n(lines.size());
        for (std::size_t l = 0; l < lines.size(); ++l) n[l] = lines[l].choices[idx[l]];
        if (within_budget(n)) out.push_back(std::move(n));
        std::size_t l = lines.size();
        while (l > 0) {
            --l;
            if (++idx[l] < lines[l].choices.size()) break;
            idx[l] = 0;
            if (l == 0) return out;
        }
        if (lines.empty()) return out;
    }
}

std::vector<int> MipInstance::nominal() const
{
    std::vector<int> n;
    for (const auto& ml : lines) {
        const int want = ml.candidate ? 0 : 1;
        int best = ml.choices.front();
        for (int c : ml.choices)
            if (std::abs(c - want) < std::abs(best - want)) best = c;
        n.push_back(best);
    }
    return n;
}

namespace {

void finalize(const MipInstance& m, FlowSolution& s)
{
    std::sort(s.flows.begin(), s.flows.end(),
              [](const FlowEntry& a, const FlowEntry& b) { return std::tie(a.commodity, a.arc) < std::tie(b.commodity, b.arc); });
    long long obj = 0;
    double solver = 0.0;
    for (const auto& f : s.flows) {
        obj += static_cast<long long>(f.amount) * m.graph.arc(f.arc).cost;
        solver += f.amount * m.solver_cost(f.arc);
    }
    for (int o : s.overflow) {
        obj += static_cast<long long>(o) * m.overflow_cost;
        solver += static_cast<double>(o) * m.overflow_cost;
    }
    const long long service = static_cast<long long>(m.service_cost) * std::accumulate(s.n.begin(), s.n.end(), 0LL);
    s.objective = obj + service;
    s.solver_objective = solver + static_cast<double>(service);
}

} // namespace

FlowSolution solve_flows_heuristic(const MipInstance& m, const std::vector<int>& n)
{
    require(n.size() == m.lines.size(), "service vector does not match the lines");
    const auto& g = m.graph;
    FlowSolution s;
    s.n = n;
    s.overflow.assign(m.commodities.size(), 0);
    std::vector<int> residual(g.arcs().size(), std::numeric_limits<int>::max());
    for (std::size_t a = 0; a < g.arcs().size(); ++a)
        if (g.arcs()[a].kind == ArcKind::Service) residual[a] = m.capacity(static_cast<int>(a), n);

    std::vector<std::size_t> order(m.commodities.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& x = m.commodities[a];
        const auto& y = m.commodities[b];
        return std::tie(x.start, x.id) < std::tie(y.start, y.id);
    });

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(static_cast<std::size_t>(g.node_count()), inf);
    std::vector<int> pred(static_cast<std::size_t>(g.node_count()), -1);
    std::map<int, int> pushed; // arc -> amount for the current commodity
    for (std::size_t p : order) {
        int remaining = m.commodities[p].demand;
        const auto& usable = m.usable[p];
        pushed.clear();
        while (remaining > 0) {
            for (int a : usable) {
                dist[static_cast<std::size_t>(g.arc(a).tail)] = inf;
                dist[static_cast<std::size_t>(g.arc(a).head)] = inf;
            }
            dist[static_cast<std::size_t>(m.source[p])] = 0.0;
            for (int a : usable) {
                if (residual[static_cast<std::size_t>(a)] <= 0) continue;
                const auto& arc = g.arc(a);
                const double du = dist[static_cast<std::size_t>(arc.tail)];
                if (du == inf) continue;
                const double dv = du + m.solver_cost(a);
                if (dv < dist[static_cast<std::size_t>(arc.head)] - 1e-12) {
                    dist[static_cast<std::size_t>(arc.head)] = dv;
                    pred[static_cast<std::size_t>(arc.head)] = a;
                }
            }
            const int sink = m.sink[p];
            if (dist[static_cast<std::size_t>(sink)] == inf || dist[static_cast<std::size_t>(sink)] >= m.solver_overflow_cost()) {
                s.overflow[p] += remaining;
                break;
            }
            int bottleneck = remaining;
            for (int v = sink; v != m.source[p];) {
                const int a = pred[static_cast<std::size_t>(v)];
                bottleneck = std::min(bottleneck, residual[static_cast<std::size_t>(a)]);
                v = g.arc(a).tail;
            }
            for (int v = sink; v != m.source[p];) {
                const int a = pred[static_cast<std::size_t>(v)];
                if (g.arc(a).kind == ArcKind::Service) residual[static_cast<std::size_t>(a)] -= bottleneck;
                pushed[a] += bottleneck;
                v = g.arc(a).tail;
            }
            remaining -= bottleneck;
        }
        for (const auto& [a, amt] : pushed) s.flows.push_back({static_cast<int>(p), a, amt});
    }
    finalize(m, s);
    return s;
}

namespace {

struct FlowModel {
    LinearProgram lp;
    std::vector<std::pair<int, int>> var; // (commodity, arc); arc -1 is the overflow arc
};

FlowModel flow_model(const MipInstance& m, const std::vector<int>& n)
{
    FlowModel fm;
    std::map<int, std::vector<int>> service_vars;
    for (std::size_t p = 0; p < m.commodities.size(); ++p) {
        for (int a : m.usable[p]) {
            if (m.graph.arc(a).kind == ArcKind::Service && m.capacity(a, n) <= 0) continue;
            if (m.graph.arc(a).kind == ArcKind::Service) service_vars[a].push_back(static_cast<int>(fm.var.size()));
            fm.var.emplace_back(static_cast<int>(p), a);
        }
        fm.var.emplace_back(static_cast<int>(p), -1);
    }
    auto& lp = fm.lp;
    lp.variables = static_cast<int>(fm.var.size());
    lp.cost.resize(lp.variables);
    for (int i = 0; i < lp.variables; ++i) {
        const int a = fm.var[static_cast<std::size_t>(i)].second;
        lp.cost[i] = a < 0 ? m.solver_overflow_cost() : m.solver_cost(a);
    }
    // conservation: inflow - outflow = +v at the sink, -v at the source, 0 elsewhere
    std::map<std::pair<int, int>, std::size_t> row_of;
    auto row = [&](int p, int node) -> LinearProgram::Row& {
        auto [it, inserted] = row_of.emplace(std::make_pair(p, node), lp.rows.size());
        if (inserted) {
            LinearProgram::Row r;
            r.sense = LinearProgram::Sense::Eq;
            const auto& c = m.commodities[static_cast<std::size_t>(p)];
            r.rhs = node == m.sink[static_cast<std::size_t>(p)] ? c.demand : node == m.source[static_cast<std::size_t>(p)] ? -c.demand : 0;
            lp.rows.push_back(r);
        }
        return lp.rows[it->second];
    };
    for (int i = 0; i < lp.variables; ++i) {
        const auto [p, a] = fm.var[static_cast<std::size_t>(i)];
        const int tail = a < 0 ? m.source[static_cast<std::size_t>(p)] : m.graph.arc(a).tail;
        const int head = a < 0 ? m.sink[static_cast<std::size_t>(p)] : m.graph.arc(a).head;
        row(p, tail).coefficients.emplace_back(i, -1.0);
        row(p, head).coefficients.emplace_back(i, 1.0);
    }
    for (const auto& [a, vars] : service_vars) {
        LinearProgram::Row r;
        r.sense = LinearProgram::Sense::Le;
        r.rhs = m.capacity(a, n);
        for (int v : vars) r.coefficients.emplace_back(v, 1.0);
        lp.rows.push_back(std::move(r));
    }
    return fm;
}

} // namespace

FlowSolution solve_flows_exact(const MipInstance& m, const std::vector<int>& n, long node_limit,
                               const FlowSolution* incumbent)
{
    require(n.size() == m.lines.size(), "service vector does not match the lines");
    FlowSolution best = incumbent ? *incumbent : solve_flows_heuristic(m, n);
    const FlowModel fm = flow_model(m, n);
    const int nv = fm.lp.variables;

    struct Node {
        std::vector<std::pair<int, double>> lower, upper;
    };
    std::vector<Node> stack{Node{}};
    long explored = 0;
    bool complete = true;
    double best_value = best.solver_objective;
    std::optional<Eigen::VectorXd> best_x;
    while (!stack.empty()) {
        if (explored >= node_limit) {
            complete = false;
            break;
        }
        Node node = std::move(stack.back());
        stack.pop_back();
        ++explored;
        LinearProgram lp = fm.lp;
        for (const auto& [v, lo] : node.lower) lp.rows.push_back({{{v, 1.0}}, LinearProgram::Sense::Ge, lo});
        for (const auto& [v, hi] : node.upper) lp.rows.push_back({{{v, 1.0}}, LinearProgram::Sense::Le, hi});
        const auto res = solve_lp(lp);
        if (res.status == LpStatus::IterationLimit) {
            complete = false;
            continue;
        }
        if (res.status != LpStatus::Optimal) continue;
        if (res.objective >= best_value - 1e-9) continue;
        int branch = -1;
        double frac_best = 1e-6;
        for (int i = 0; i < nv; ++i) {
            const double f = std::abs(res.x[i] - std::round(res.x[i]));
            if (f > frac_best) {
                frac_best = f;
                branch = i;
            }
        }
        if (branch < 0) {
            best_value = res.objective;
            best_x = res.x;
            continue;
        }
        const double v = res.x[branch];
        Node down = node, up = node;
        down.upper.emplace_back(branch, std::floor(v));
        up.lower.emplace_back(branch, std::ceil(v));
        // explore the nearer side first
        if (v - std::floor(v) < 0.5) {
            stack.push_back(std::move(up));
            stack.push_back(std::move(down));
        } else {
            stack.push_back(std::move(down));
            stack.push_back(std::move(up));
        }
    }
    if (best_x) {
        FlowSolution s;
        s.n = n;
        s.overflow.assign(m.commodities.size(), 0);
        for (int i = 0; i < nv; ++i) {
            const int amt = static_cast<int>(std::lround((*best_x)[i]));
            if (amt <= 0) continue;
            const auto [p, a] = fm.var[static_cast<std::size_t>(i)];
            if (a < 0) s.overflow[static_cast<std::size_t>(p)] += amt;
            else s.flows.push_back({p, a, amt});
        }
        finalize(m, s);
        best = std::move(s);
    }
    best.proven_optimal = complete;
    return best;
}

namespace {

bool better(const FlowSolution& a, const FlowSolution& b)
{
    if (a.objective != b.objective) return a.objective < b.objective;
    const long sa = std::accumulate(a.n.begin(), a.n.end(), 0L), sb = std::accumulate(b.n.begin(), b.n.end(), 0L);
    if (sa != sb) return sa < sb;
    return a.n < b.n;
}

} // namespace

SolveResult solve(const MipInstance& m, const SolveOptions& options)
{
    const auto started = std::chrono::steady_clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count(); };
    if (options.mode == SolveMode::ExactSmall)
        require(m.reduced_variables() <= options.exact_variable_limit,
                "instance too large for exact_small (" + std::to_string(m.reduced_variables()) + " flow variables)");

    auto eval = [&](const std::vector<int>& n) {
        return options.mode == SolveMode::ExactSmall ? solve_flows_exact(m, n) : solve_flows_heuristic(m, n);
    };

    SolveResult out;
    std::map<std::vector<int>, FlowSolution> seen;
    const auto nominal = m.nominal();
    require(m.within_budget(nominal), "the nominal service plan exceeds the fleet budget");
    seen.emplace(nominal, eval(nominal));
    out.evaluated = 1;

    const unsigned workers = options.workers == 0 ? default_worker_count() : options.workers;
    const std::size_t batch = std::max<std::size_t>(1, 2 * workers);
    auto run_batch = [&](const std::vector<std::vector<int>>& todo) {
        const auto sols = parallel_map<FlowSolution>(todo.size(), [&](std::size_t i) { return eval(todo[i]); }, workers);
        for (std::size_t i = 0; i < todo.size(); ++i) seen.emplace(todo[i], sols[i]);
        out.evaluated += todo.size();
    };

    const auto all = m.n_vectors();
    if (options.mode == SolveMode::ExactSmall || all.size() <= options.enumeration_limit) {
        std::vector<std::vector<int>> pending;
        for (const auto& n : all)
            if (!seen.count(n)) pending.push_back(n);
        std::size_t i = 0;
        while (i < pending.size()) {
            if (elapsed() >= options.budget_seconds) {
                out.timed_out = true;
                break;
            }
            const std::size_t end = std::min(pending.size(), i + batch);
            run_batch({pending.begin() + static_cast<long>(i), pending.begin() + static_cast<long>(end)});
            i = end;
        }
        out.exhaustive = !out.timed_out;
    } else {
        std::vector<std::vector<int>> beam{nominal};
        for (;;) {
            std::set<std::vector<int>> next;
            for (const auto& b : beam)
                for (std::size_t l = 0; l < m.lines.size(); ++l) {
                    const auto& ch = m.lines[l].choices;
                    const auto pos = static_cast<long>(std::find(ch.begin(), ch.end(), b[l]) - ch.begin());
                    for (long d : {-1L, 1L}) {
                        const long q = pos + d;
                        if (q < 0 || q >= static_cast<long>(ch.size())) continue;
                        auto n = b;
                        n[l] = ch[static_cast<std::size_t>(q)];
                        if (m.within_budget(n) && !seen.count(n)) next.insert(n);
                    }
                }
            if (next.empty()) break;
            if (elapsed() >= options.budget_seconds) {
                out.timed_out = true;
                break;
            }
            std::vector<std::vector<int>> todo(next.begin(), next.end());
            for (std::size_t i = 0; i < todo.size(); i += batch)
                run_batch({todo.begin() + static_cast<long>(i), todo.begin() + static_cast<long>(std::min(todo.size(), i + batch))});
            std::vector<const FlowSolution*> ranked;
            for (const auto& [n, s] : seen) ranked.push_back(&s);
            std::sort(ranked.begin(), ranked.end(), [](auto* a, auto* b) { return better(*a, *b); });
            std::vector<std::vector<int>> nb;
            for (std::size_t i = 0; i < ranked.size() && static_cast<int>(nb.size()) < options.beam_width; ++i)
                nb.push_back(ranked[i]->n);
            if (nb == beam) break;
            beam = std::move(nb);
        }
    }

    std::vector<FlowSolution> ranked;
    for (auto& [n, s] : seen) ranked.push_back(std::move(s));
    std::sort(ranked.begin(), ranked.end(), better);
    if (static_cast<int>(ranked.size()) > options.keep) ranked.resize(static_cast<std::size_t>(std::max(1, options.keep)));
    if (out.exhaustive && options.mode == SolveMode::ExactSmall && ranked.front().proven_optimal)
        out.lower_bound = static_cast<double>(ranked.front().objective);
    out.best = std::move(ranked);
    return out;
}

std::vector<std::string> check_solution(const MipInstance& m, const FlowSolution& s)
{
    std::vector<std::string> issues;
    if (s.n.size() != m.lines.size()) return {"service vector size mismatch"};
    for (std::size_t l = 0; l < m.lines.size(); ++l) {
        const auto& ch = m.lines[l].choices;
        if (std::find(ch.begin(), ch.end(), s.n[l]) == ch.end()) issues.push_back("n for " + m.lines[l].id + " not allowed");
    }
    if (!m.within_budget(s.n)) issues.push_back("fleet budget exceeded");
    if (s.overflow.size() != m.commodities.size()) return {"overflow vector size mismatch"};

    std::vector<std::map<int, long>> balance(m.commodities.size());
    std::map<int, long> load;
    long long obj = 0;
    for (const auto& f : s.flows) {
        if (f.commodity < 0 || f.commodity >= static_cast<int>(m.commodities.size()) || f.arc < 0 ||
            f.arc >= static_cast<int>(m.graph.arcs().size())) {
            issues.push_back("flow entry out of range");
            continue;
        }
        const auto& arc = m.graph.arc(f.arc);
        if (f.amount < 0) issues.push_back("negative flow");
        if (!arc.active) issues.push_back("flow on inactive arc " + std::to_string(f.arc));
        balance[static_cast<std::size_t>(f.commodity)][arc.tail] -= f.amount;
        balance[static_cast<std::size_t>(f.commodity)][arc.head] += f.amount;
        if (arc.kind == ArcKind::Service) load[f.arc] += f.amount;
        obj += static_cast<long long>(f.amount) * arc.cost;
    }
    for (std::size_t p = 0; p < m.commodities.size(); ++p) {
        if (s.overflow[p] < 0) issues.push_back("negative overflow");
        balance[p][m.source[p]] -= s.overflow[p];
        balance[p][m.sink[p]] += s.overflow[p];
        obj += static_cast<long long>(s.overflow[p]) * m.overflow_cost;
        const long v = m.commodities[p].demand;
        for (const auto& [node, b] : balance[p]) {
            const long want = node == m.sink[p] ? v : node == m.source[p] ? -v : 0;
            if (b != want)
                issues.push_back("conservation violated for " + m.commodities[p].id + " at node " + std::to_string(node));
        }
        if (v != 0 && !balance[p].count(m.sink[p])) issues.push_back("demand of " + m.commodities[p].id + " not delivered");
    }
    for (const auto& [a, l] : load)
        if (l > m.capacity(a, s.n)) issues.push_back("capacity exceeded on arc " + std::to_string(a));
    obj += static_cast<long long>(m.service_cost) * std::accumulate(s.n.begin(), s.n.end(), 0LL);
    if (obj != s.objective) issues.push_back("objective does not match the flows");
    return issues;
}

std::vector<int> wasteful_waits(const MipInstance& m, const FlowSolution& s)
{
    std::map<int, long> load;
    for (const auto& f : s.flows) load[f.arc] += f.amount;
    std::vector<int> out;
    for (const auto& [a, amount] : load) {
        const auto& arc = m.graph.arc(a);
        if (arc.kind != ArcKind::Wait || amount <= 0) continue;
        for (int b : m.graph.out_arcs(arc.tail)) {
            const auto& svc = m.graph.arc(b);
            if (svc.kind != ArcKind::Service || !svc.active) continue;
            auto it = load.find(b);
            const long used = it == load.end() ? 0 : it->second;
            if (used < m.capacity(b, s.n)) out.push_back(a);
        }
    }
    return out;
}

nlohmann::json to_json(const FlowSolution& s, const MipInstance& m)
{
    nlohmann::json j;
    j["services"] = nlohmann::json::object();
    for (std::size_t l = 0; l < m.lines.size(); ++l) j["services"][m.lines[l].id] = s.n[l];
    j["objective"] = s.objective;
    j["proven_optimal"] = s.proven_optimal;
    const auto& stations = m.graph.network().stations();
    auto flows = nlohmann::json::array();
    for (const auto& f : s.flows) {
        const auto& arc = m.graph.arc(f.arc);
        nlohmann::json e{{"commodity", m.commodities[static_cast<std::size_t>(f.commodity)].id},
                         {"kind", to_string(arc.kind)},
                         {"time", m.graph.node(arc.tail).time},
                         {"amount", f.amount}};
        if (arc.from_station >= 0) e["from"] = stations[static_cast<std::size_t>(arc.from_station)].id;
        if (arc.to_station >= 0) e["to"] = stations[static_cast<std::size_t>(arc.to_station)].id;
        if (arc.line >= 0) e["line"] = m.lines[static_cast<std::size_t>(arc.line)].id;
        flows.push_back(std::move(e));
    }
    j["flows"] = std::move(flows);
    j["overflow"] = nlohmann::json::object();
    for (std::size_t p = 0; p < m.commodities.size(); ++p)
        if (s.overflow[p] > 0) j["overflow"][m.commodities[p].id] = s.overflow[p];
    return j;
}

} // namespace faster
