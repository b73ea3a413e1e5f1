#include "faster/opt/optimize.hpp"

#include "faster/common/error.hpp"
#include "faster/common/work_queue.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>

namespace faster {

std::vector<Commodity> pool_demand(const std::vector<Commodity>& demand, int bucket)
{
    require(bucket >= 1, "demand bucket must be >= 1");
    std::map<std::tuple<int, std::string, std::string>, int> pooled;
    for (const auto& c : demand) pooled[{c.start / bucket * bucket, c.origin, c.destination}] += c.demand;
    std::vector<Commodity> out;
    for (const auto& [key, v] : pooled) {
        const auto& [start, o, d] = key;
        if (v <= 0) continue;
        out.push_back(Commodity{o + ">" + d + "@" + std::to_string(start), o, d, start, v});
    }
    return out;
}

OptimizeResult optimize(const Scenario& scenario, const OptimizeOptions& opt)
{
    require(opt.plans >= 1, "plans must be >= 1");
    require(opt.budget_seconds >= 0.0, "budget must be >= 0");
    validate_scenario(scenario);
    OptimizeResult res;
    res.dt_seconds = scenario.dt_seconds;
    const auto ctx = make_evaluation_context(scenario);

    res.candidates = generate_candidate_lines(scenario.network, scenario.incidents, opt.candidates, scenario.dt_seconds);
    std::vector<Line> extra;
    std::vector<std::string> ids;
    for (const auto& c : res.candidates.lines) {
        extra.push_back(c.line);
        ids.push_back(c.line.id);
    }
    const Network extended = scenario.network.with_lines(extra);
    TimeExpandedGraph graph(extended, scenario.graph_options());
    for (const auto& inc : pin_incident_modes(scenario.incidents, scenario.network)) graph.apply_incident_in_place(inc);

    const auto commodities = pool_demand(expand_demand(scenario), opt.demand_bucket);
    const auto instance = build_mip(graph, commodities, ids, opt.mip);
    res.mip_variables = instance.reduced_variables();
    res.conservation_rows = instance.conservation_rows();
    res.capacity_rows = instance.capacity_rows();

    SolveOptions so;
    so.mode = opt.mode;
    so.budget_seconds = opt.budget_seconds / 2.0;
    so.keep = 4 * std::max(3, opt.plans);
    so.workers = opt.workers;
    const auto solved = solve(instance, so);
    res.vectors_evaluated = solved.evaluated;
    res.exhaustive = solved.exhaustive;
    res.timed_out = solved.timed_out;

    // prefer solutions with distinct objectives; equal-cost ones often only add idle lines
    std::vector<const FlowSolution*> picked;
    std::set<long long> objectives;
    for (const auto& s : solved.best)
        if (static_cast<int>(picked.size()) < opt.plans && objectives.insert(s.objective).second) picked.push_back(&s);
    for (const auto& s : solved.best)
        if (static_cast<int>(picked.size()) < opt.plans && std::find(picked.begin(), picked.end(), &s) == picked.end())
            picked.push_back(&s);
    std::sort(picked.begin(), picked.end());
    std::vector<Plan> seeds;
    for (std::size_t i = 0; i < picked.size(); ++i)
        seeds.push_back(plan_from_solution(instance, *picked[i], res.candidates.lines, "mip-" + std::to_string(i + 1)));
    const auto evals =
        parallel_map<PlanEvaluation>(seeds.size(), [&](std::size_t i) { return evaluate_plan(seeds[i], ctx); }, opt.workers);
    res.simulations += seeds.size();
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        seeds[i].objective = evals[i].objective;
        seeds[i].metrics = evals[i].metrics;
    }

    std::vector<Plan> all = seeds;
    std::set<std::string> seen;
    for (const auto& p : seeds) seen.insert(p.signature());
    LocalSearchOptions lso;
    lso.move_budget = opt.budget_seconds > 0.0 ? opt.move_budget : 0; // zero budget: program plans only
    lso.budget = opt.mip.budget;
    lso.line_params = opt.candidates;
    lso.workers = opt.workers;
    lso.max_services = std::max(2, *std::max_element(opt.mip.candidate_choices.begin(), opt.mip.candidate_choices.end()) + 2);
    lso.budget_seconds = seeds.empty() ? 0.0 : opt.budget_seconds / 2.0 / static_cast<double>(seeds.size());
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        lso.seed = opt.seed + i;
        auto ls = local_search(seeds[i], ctx, res.candidates.lines, lso);
        res.simulations += static_cast<std::size_t>(std::max(0, ls.evaluations - 1));
        if (!seen.insert(ls.plan.signature()).second) continue;
        ls.plan.id = "ls-" + std::to_string(i + 1);
        all.push_back(std::move(ls.plan));
    }
    res.plans = rank_plans(std::move(all), opt.weights, opt.rank);
    return res;
}

nlohmann::json to_json(const OptimizeResult& r)
{
    nlohmann::json cands = nlohmann::json::array();
    for (const auto& c : r.candidates.lines) {
        auto j = to_json(c.line);
        j["kind"] = to_string(c.kind);
        j["serves"] = c.serves;
        cands.push_back(j);
    }
    nlohmann::json plans = nlohmann::json::array();
    int rank = 0;
    for (const auto& p : r.plans) {
        auto j = to_json(p, r.dt_seconds);
        j["rank"] = ++rank;
        plans.push_back(j);
    }
    return {{"candidates", cands},
            {"diagnostic", r.candidates.diagnostic},
            {"program",
             {{"variables", r.mip_variables},
              {"conservation_rows", r.conservation_rows},
              {"capacity_rows", r.capacity_rows},
              {"vectors_evaluated", r.vectors_evaluated},
              {"exhaustive", r.exhaustive},
              {"timed_out", r.timed_out}}},
            {"simulations", r.simulations},
            {"plans", plans}};
}

} // namespace faster
