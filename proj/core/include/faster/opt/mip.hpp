#pragma once

#include "faster/model/commodity.hpp"
#include "faster/model/time_expanded_graph.hpp"

#include <climits>
#include <optional>
#include <string>
#include <vector>

namespace faster {

struct FleetBudget {
    int trains = INT_MAX; // sum of n_l over train lines
    int buses = INT_MAX;  // sum of n_l over bus lines
};

struct MipOptions {
    std::vector<int> existing_choices{1, 2};     // allowed n_l for lines already in service
    std::vector<int> candidate_choices{0, 1, 2}; // allowed n_l for response lines
    FleetBudget budget;
    int service_cost = 0; // objective cost per unit of n_l
};

/// One service-count variable n_l.
struct MipLine {
    int line = -1; // index in the graph's network
    std::string id;
    Mode mode = Mode::Train;
    bool candidate = false;
    std::vector<int> choices;
    int capacity = 0; // c_l
    int headway = 1;  // tau_l
};

/// The time-expanded multicommodity flow program: flows f_{p,a} >= 0 on active arcs
/// plus one overflow arc per commodity from its source to its sink, conservation at
/// every node, and sum_p f_{p,a} <= floor(c_l n_l / tau_l) on every service arc.
struct MipInstance {
    TimeExpandedGraph graph;
    std::vector<Commodity> commodities;
    std::vector<MipLine> lines; // one per graph line, in graph order
    FleetBudget budget;
    int service_cost = 0;
    int overflow_cost = 0; // horizon * 10

    std::vector<int> source; // entry node e_{o_p, s_p}
    std::vector<int> sink;   // z_{d_p}
    /// Active arcs commodity p can use on some source-sink path, ascending.
    std::vector<std::vector<int>> usable;
    /// Commodities whose demand exceeds the largest capacity leaving their origin.
    std::vector<int> potentially_infeasible;

    std::size_t conservation_rows() const;
    std::size_t capacity_rows() const;
    std::size_t flow_variables() const;
    /// Variables the solver actually carries after pruning unusable arcs.
    std::size_t reduced_variables() const;

    /// floor(c_l n_l / tau_l) for a service arc, 0 for inactive ones.
    int capacity(int arc, const std::vector<int>& n) const;
    /// Arc cost used by the solvers: h_a plus a perturbation below 1/(4 V T) total
    /// that makes earlier waits dearer, so waits happen as late as possible.
    double solver_cost(int arc) const;
    double solver_overflow_cost() const { return overflow_cost; }

    /// All n vectors within the fleet budget, in lexicographic order of choice indices.
    std::vector<std::vector<int>> n_vectors() const;
    /// n vector with each line at its nominal value (1 for existing lines, 0 for
    /// candidates), clamped into its choices.
    std::vector<int> nominal() const;
    bool within_budget(const std::vector<int>& n) const;

    double wait_delta = 0.0;
};

/// `candidate_ids` names the graph lines that are response lines.
MipInstance build_mip(const TimeExpandedGraph& graph, const std::vector<Commodity>& commodities,
                      const std::vector<std::string>& candidate_ids, const MipOptions& options = {});

struct FlowEntry {
    int commodity = -1;
    int arc = -1;
    int amount = 0;
    bool operator==(const FlowEntry&) const = default;
};

/// Solution of the program for one n vector.
struct FlowSolution {
    std::vector<int> n;
    std::vector<FlowEntry> flows;  // non-zero arc flows, sorted by (commodity, arc)
    std::vector<int> overflow;     // persons per commodity on the overflow arc
    long long objective = 0;       // sum f h + overflow + service cost, person-steps
    double solver_objective = 0.0; // with the wait perturbation
    bool proven_optimal = false;
};

enum class SolveMode { ExactSmall, Heuristic };
const char* to_string(SolveMode mode);
SolveMode solve_mode_from_string(const std::string& text);

/// Inner flow problems.
/// exact: LP relaxation by the dense simplex inside branch and bound on integer flows.
/// heuristic: commodities in (start, id) order each take successive shortest paths in
/// the residual graph; leftovers use the overflow arc.
FlowSolution solve_flows_exact(const MipInstance& instance, const std::vector<int>& n, long node_limit = 20000,
                               const FlowSolution* incumbent = nullptr);
FlowSolution solve_flows_heuristic(const MipInstance& instance, const std::vector<int>& n);

struct SolveOptions {
    SolveMode mode = SolveMode::Heuristic;
    double budget_seconds = 60.0;
    int keep = 3;                  // best distinct n vectors to return
    std::size_t enumeration_limit = 729; // larger spaces use beam search (heuristic mode)
    int beam_width = 4;
    std::size_t exact_variable_limit = 2000;
    unsigned workers = 0;
};

struct SolveResult {
    std::vector<FlowSolution> best; // ascending objective, ties by sum n then n
    std::size_t evaluated = 0;
    bool timed_out = false;
    bool exhaustive = false;
    std::optional<double> lower_bound;
};

/// Outer search over n vectors. The nominal vector is always evaluated first, so a
/// zero budget still yields that plan. Throws TimeoutError only when nothing was
/// evaluated, ValidationError when exact_small is asked for an oversized instance.
SolveResult solve(const MipInstance& instance, const SolveOptions& options);

/// Violations of conservation, non-negativity, capacity and budget, empty when feasible.
std::vector<std::string> check_solution(const MipInstance& instance, const FlowSolution& solution);

/// Wait arcs carrying flow although the service arc leaving the same node has spare
/// capacity. Inactive or missing service arcs count as full.
std::vector<int> wasteful_waits(const MipInstance& instance, const FlowSolution& solution);

nlohmann::json to_json(const FlowSolution& solution, const MipInstance& instance);

} // namespace faster
