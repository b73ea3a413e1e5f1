#pragma once

#include <Eigen/Dense>

#include <utility>
#include <vector>

namespace faster {

/// min cost . x subject to the rows and x >= 0.
struct LinearProgram {
    enum class Sense { Le, Ge, Eq };
    struct Row {
        std::vector<std::pair<int, double>> coefficients; // (variable, value)
        Sense sense = Sense::Le;
        double rhs = 0.0;
    };

    int variables = 0;
    Eigen::VectorXd cost;
    std::vector<Row> rows;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    double objective = 0.0;
    Eigen::VectorXd x;
    long iterations = 0;
};

/// Dense two-phase tableau simplex. Dantzig pricing, switching to Bland's rule after a
/// run of degenerate pivots so it cannot cycle. Meant for a few thousand columns at most.
LpResult solve_lp(const LinearProgram& lp, long max_iterations = 200000);

} // namespace faster
