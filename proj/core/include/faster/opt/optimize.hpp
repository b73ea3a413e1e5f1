#pragma once

#include "faster/opt/candidates.hpp"
#include "faster/opt/mip.hpp"
#include "faster/opt/plan.hpp"
#include "faster/sim/scenario.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace faster {

struct OptimizeOptions {
    CandidateLineParams candidates;
    MipOptions mip;
    SolveMode mode = SolveMode::Heuristic;
    double budget_seconds = 60.0; // split evenly between the program and local search
    int plans = 3;                // program solutions to refine
    int move_budget = 30;         // simulations per local search
    int demand_bucket = 5;        // steps; demand is pooled per OD and bucket for the program
    MetricWeights weights;
    RankMode rank = RankMode::WeightedSum;
    std::uint64_t seed = 0;
    unsigned workers = 0;
};

struct OptimizeResult {
    CandidateSet candidates;
    std::vector<Plan> plans; // ranked, best first
    std::size_t mip_variables = 0;
    std::size_t conservation_rows = 0;
    std::size_t capacity_rows = 0;
    std::size_t vectors_evaluated = 0; // n vectors solved by the program
    std::size_t simulations = 0;       // plan evaluations
    bool exhaustive = false;
    bool timed_out = false;
    int dt_seconds = 60;
};

/// Demand groups pooled per (origin, destination) and start bucket, start at the bucket
/// start, in (start, origin, destination) order.
std::vector<Commodity> pool_demand(const std::vector<Commodity>& demand, int bucket);

/// Candidate lines, program over service counts, simulation of the best solutions,
/// local search from each, deduplication and ranking.
OptimizeResult optimize(const Scenario& scenario, const OptimizeOptions& options);

nlohmann::json to_json(const OptimizeResult& result);

} // namespace faster
