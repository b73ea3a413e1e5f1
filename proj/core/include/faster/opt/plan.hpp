#pragma once

#include "faster/opt/candidates.hpp"
#include "faster/opt/mip.hpp"
#include "faster/sim/simulator.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace faster {

struct PlanLine {
    Line line;
    std::string role = "existing"; // existing, truncated, bridge, hub, greedy
    int services = 1;              // n_l: vehicles per nominal headway period

    bool candidate() const { return role != "existing"; }
    /// phi: minutes between vehicles, tau_l / n_l steps.
    double headway_minutes(int dt_seconds) const;
};

struct PlanMetrics {
    double average_delay_min = 0.0;
    long delayed_20 = 0;             // persons delayed 20 minutes or more
    double overcrowding_min = 0.0;   // station-minutes with the platform queue above capacity
    bool operator==(const PlanMetrics&) const = default;
};

/// Lines with services > 0 plus existing lines (which never drop below one service).
struct Plan {
    std::string id;
    std::string origin = "mip"; // mip, local_search
    std::vector<PlanLine> lines;
    long long objective = 0;    // simulated person-steps
    std::optional<long long> mip_objective;
    std::optional<FlowSolution> flows; // only while the lines match the program's solution
    PlanMetrics metrics;

    /// Sum over train lines of services beyond nominal (1 existing, 0 response).
    int additional_trains() const;
    /// Response bus vehicles per headway period.
    int emergency_buses() const;
    const PlanLine* find(const std::string& line_id) const;
    /// Canonical key of line ids and services, for deduplication.
    std::string signature() const;
};

/// Plan for one program solution; candidate lines are looked up in `candidates`.
Plan plan_from_solution(const MipInstance& instance, const FlowSolution& solution,
                        const std::vector<CandidateLine>& candidates, const std::string& id);

/// The plan with every existing line at one service and no response lines.
Plan nominal_plan(const Network& network, const std::string& id = "nominal");

/// Scenario running the plan: the base network plus its response lines, timetables for
/// the chosen service counts (existing lines at one service keep their scheduled
/// departures) and incidents pinned to the modes of the base network.
Scenario realize(const Plan& plan, const Scenario& scenario);

/// Delay per person is the difference of sorted per-commodity travel times between
/// `run` and `baseline` (both simulated on the same demand), clamped at 0. Unfinished
/// persons count to the horizon end. `run` needs queue lengths.
PlanMetrics compute_plan_metrics(const SimMetrics& run, const SimMetrics& baseline, const Network& network,
                                 int dt_seconds);

/// Shared inputs for evaluating plans against one incident scenario.
struct EvaluationContext {
    Scenario scenario;                  // with incidents
    std::optional<SimMetrics> baseline; // same demand, no incidents, nominal service
};

/// Simulates the scenario without incidents.
EvaluationContext make_evaluation_context(const Scenario& scenario);

struct PlanEvaluation {
    PlanMetrics metrics;
    long long objective = 0; // total simulated travel time, person-steps
    std::vector<long> boardings; // per realized network line
    std::vector<std::pair<std::pair<std::string, std::string>, long>> residual; // OD, persons not arrived or delayed, descending
};

/// Throws ValidationError when the context has no baseline.
PlanEvaluation evaluate_plan(const Plan& plan, const EvaluationContext& context);

struct MetricWeights {
    double average_delay = 1.0;
    double delayed_20 = 1.0;
    double overcrowding = 1.0;
};

enum class RankMode { WeightedSum, Lexicographic };

/// Weighted sum of each metric divided by its maximum over the plans, or lexicographic
/// in (delayed_20, overcrowding, average_delay, objective). Ties by plan id.
std::vector<Plan> rank_plans(std::vector<Plan> plans, const MetricWeights& weights = {},
                             RankMode mode = RankMode::WeightedSum);

struct LocalSearchOptions {
    int move_budget = 40;       // simulations
    std::uint64_t seed = 0;     // order in which a truncated batch samples moves
    int max_services = 4;
    FleetBudget budget;
    bool service_moves = true;
    bool swap_moves = true;
    bool greedy_moves = true;
    CandidateLineParams line_params; // for greedy lines
    double budget_seconds = 0.0;     // 0: no wall-clock limit
    unsigned workers = 0;
};

struct LocalSearchResult {
    Plan plan;
    std::vector<long long> trace; // incumbent objective, initial first
    int evaluations = 0;
};

/// Best-improvement search. Each round builds the moves (services +-1 per line, swapping
/// the least-used response line for each unused candidate, adding a line for the OD pair
/// with the largest residual), simulates a batch of them in parallel and moves to the
/// best one that strictly improves. Stops at a local optimum or when the budget runs out.
LocalSearchResult local_search(const Plan& initial, const EvaluationContext& context,
                               const std::vector<CandidateLine>& candidates, const LocalSearchOptions& options);

nlohmann::json to_json(const PlanMetrics& metrics);
/// Lines with phi in minutes, Table-style response summary and metrics.
nlohmann::json to_json(const Plan& plan, int dt_seconds);

} // namespace faster
