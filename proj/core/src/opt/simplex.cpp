#include "faster/opt/simplex.hpp"

#include "faster/common/error.hpp"

#include <cmath>
#include <limits>

namespace faster {

namespace {

constexpr double kTol = 1e-9;

struct Tableau {
    Eigen::MatrixXd t; // m x (cols + 1), last column is the rhs
    std::vector<int> basis;
    int cols = 0;
    long iterations = 0;

    double rhs(int i) const { return t(i, cols); }

    void pivot(int r, int c, Eigen::VectorXd& reduced, double& objective)
    {
        const double p = t(r, c);
        t.row(r) /= p;
        const Eigen::RowVectorXd prow = t.row(r);
        for (Eigen::Index i = 0; i < t.rows(); ++i) {
            if (i == r) continue;
            const double f = t(i, c);
            if (f != 0.0) t.row(i) -= f * prow;
        }
        const double f = reduced[c];
        if (f != 0.0) {
            reduced -= f * prow.head(cols).transpose();
            objective -= f * prow[cols];
        }
        basis[static_cast<std::size_t>(r)] = c;
        ++iterations;
    }

    /// Minimizes with the given reduced costs. `allowed` masks entering columns.
    LpStatus optimize(Eigen::VectorXd& reduced, double& objective, const std::vector<bool>& allowed, long limit)
    {
        int degenerate = 0;
        while (iterations < limit) {
            const bool bland = degenerate > 50;
            int enter = -1;
            double best = -kTol;
            for (int j = 0; j < cols; ++j) {
                if (!allowed[static_cast<std::size_t>(j)] || reduced[j] >= -kTol) continue;
                if (bland) {
                    enter = j;
                    break;
                }
                if (reduced[j] < best) {
                    best = reduced[j];
                    enter = j;
                }
            }
            if (enter < 0) return LpStatus::Optimal;
            int leave = -1;
            double ratio = std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < t.rows(); ++i) {
                const double a = t(i, enter);
                if (a <= kTol) continue;
                const double q = rhs(static_cast<int>(i)) / a;
                if (q < ratio - kTol ||
                    (q <= ratio + kTol && leave >= 0 && basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
                    ratio = q;
                    leave = static_cast<int>(i);
                }
            }
            if (leave < 0) return LpStatus::Unbounded;
            degenerate = ratio <= kTol ? degenerate + 1 : 0;
            pivot(leave, enter, reduced, objective);
        }
        return LpStatus::IterationLimit;
    }
};

} // namespace

LpResult solve_lp(const LinearProgram& lp, long max_iterations)
{
    require(lp.cost.size() == lp.variables, "cost vector does not match the variable count");
    const int n = lp.variables;
    const int m = static_cast<int>(lp.rows.size());

    // normalize rows to a non-negative rhs
    std::vector<LinearProgram::Row> rows = lp.rows;
    int slacks = 0, artificials = 0;
    for (auto& r : rows) {
        for (const auto& [v, a] : r.coefficients) require(v >= 0 && v < n, "row references an unknown variable");
        if (r.rhs < 0) {
            r.rhs = -r.rhs;
            for (auto& c : r.coefficients) c.second = -c.second;
            if (r.sense == LinearProgram::Sense::Le) r.sense = LinearProgram::Sense::Ge;
            else if (r.sense == LinearProgram::Sense::Ge) r.sense = LinearProgram::Sense::Le;
        }
        if (r.sense != LinearProgram::Sense::Eq) ++slacks;
        if (r.sense != LinearProgram::Sense::Le) ++artificials;
    }

    Tableau tab;
    tab.cols = n + slacks + artificials;
    tab.t = Eigen::MatrixXd::Zero(m, tab.cols + 1);
    tab.basis.assign(static_cast<std::size_t>(m), -1);
    const int first_art = n + slacks;
    int s = n, a = first_art;
    for (int i = 0; i < m; ++i) {
        const auto& r = rows[static_cast<std::size_t>(i)];
        for (const auto& [v, c] : r.coefficients) tab.t(i, v) += c;
        tab.t(i, tab.cols) = r.rhs;
        if (r.sense == LinearProgram::Sense::Le) {
            tab.t(i, s) = 1.0;
            tab.basis[static_cast<std::size_t>(i)] = s++;
        } else {
            if (r.sense == LinearProgram::Sense::Ge) tab.t(i, s++) = -1.0;
            tab.t(i, a) = 1.0;
            tab.basis[static_cast<std::size_t>(i)] = a++;
        }
    }

    LpResult result;
    std::vector<bool> allowed(static_cast<std::size_t>(tab.cols), true);

    if (artificials > 0) {
        // phase 1: minimize the sum of artificials
        Eigen::VectorXd reduced = Eigen::VectorXd::Zero(tab.cols);
        double objective = 0.0;
        for (int j = first_art; j < tab.cols; ++j) reduced[j] = 1.0;
        for (int i = 0; i < m; ++i)
            if (tab.basis[static_cast<std::size_t>(i)] >= first_art) {
                reduced -= tab.t.row(i).head(tab.cols).transpose();
                objective -= tab.rhs(i);
            }
        const auto st = tab.optimize(reduced, objective, allowed, max_iterations);
        if (st == LpStatus::IterationLimit) {
            result.status = st;
            result.iterations = tab.iterations;
            return result;
        }
        double scale = 1.0;
        for (const auto& r : rows) scale = std::max(scale, std::abs(r.rhs));
        if (-objective > 1e-7 * scale) {
            result.status = LpStatus::Infeasible;
            result.iterations = tab.iterations;
            return result;
        }
        // drive zero-valued artificials out of the basis where possible
        for (int i = 0; i < m; ++i) {
            if (tab.basis[static_cast<std::size_t>(i)] < first_art) continue;
            for (int j = 0; j < first_art; ++j)
                if (std::abs(tab.t(i, j)) > 1e-7) {
                    double dummy = 0.0;
                    Eigen::VectorXd none = Eigen::VectorXd::Zero(tab.cols);
                    tab.pivot(i, j, none, dummy);
                    break;
                }
        }
        for (int j = first_art; j < tab.cols; ++j) allowed[static_cast<std::size_t>(j)] = false;
    }

    // phase 2
    Eigen::VectorXd reduced = Eigen::VectorXd::Zero(tab.cols);
    reduced.head(n) = lp.cost;
    double objective = 0.0;
    for (int i = 0; i < m; ++i) {
        const int b = tab.basis[static_cast<std::size_t>(i)];
        const double cb = b < n ? lp.cost[b] : 0.0;
        if (cb != 0.0) {
            reduced -= cb * tab.t.row(i).head(tab.cols).transpose();
            objective -= cb * tab.rhs(i);
        }
    }
    result.status = tab.optimize(reduced, objective, allowed, max_iterations);
    result.iterations = tab.iterations;
    result.x = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < m; ++i) {
        const int b = tab.basis[static_cast<std::size_t>(i)];
        if (b < n) result.x[b] = tab.rhs(i);
    }
    result.objective = lp.cost.dot(result.x);
    return result;
}

} // namespace faster
