#include "faster/common/kmeans.hpp"

#include "faster/common/error.hpp"

#include <limits>
#include <random>

namespace faster {

std::vector<int> kmeanspp_seeds(const Eigen::MatrixXd& points, int k, std::uint64_t seed)
{
    const int n = static_cast<int>(points.rows());
    require(k >= 1 && k <= n, "k-means++ needs 1 <= k <= number of points");
    std::mt19937_64 rng(seed);
    std::vector<int> seeds;
    seeds.reserve(k);
    seeds.push_back(std::uniform_int_distribution<int>(0, n - 1)(rng));
    Eigen::VectorXd d2(n);
    for (int i = 0; i < n; ++i) d2[i] = (points.row(i) - points.row(seeds[0])).squaredNorm();
    while (static_cast<int>(seeds.size()) < k) {
        const double total = d2.sum();
        int pick = 0;
        if (total <= 0.0) {
            // all remaining points coincide with a seed: take the first unused index
            std::vector<bool> used(n, false);
            for (int s : seeds) used[s] = true;
            while (pick < n && used[pick]) ++pick;
        } else {
            double u = std::uniform_real_distribution<double>(0.0, total)(rng);
            for (pick = 0; pick < n - 1; ++pick) {
                u -= d2[pick];
                if (u <= 0.0) break;
            }
        }
        seeds.push_back(pick);
        for (int i = 0; i < n; ++i) d2[i] = std::min(d2[i], (points.row(i) - points.row(pick)).squaredNorm());
    }
    return seeds;
}

namespace {

KMeansResult lloyd(const Eigen::MatrixXd& points, Eigen::MatrixXd centers, int max_iter)
{
    const int n = static_cast<int>(points.rows());
    const int k = static_cast<int>(centers.rows());
    KMeansResult res;
    res.labels.assign(n, -1);
    for (int iter = 0; iter < max_iter; ++iter) {
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                const double d = (points.row(i) - centers.row(c)).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (res.labels[i] != best) {
                res.labels[i] = best;
                changed = true;
            }
        }
        if (!changed && iter > 0) break;
        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
        std::vector<int> counts(k, 0);
        for (int i = 0; i < n; ++i) {
            sums.row(res.labels[i]) += points.row(i);
            ++counts[res.labels[i]];
        }
        for (int c = 0; c < k; ++c)
            if (counts[c] > 0) centers.row(c) = sums.row(c) / counts[c];
    }
    res.centers = centers;
    res.inertia = 0.0;
    for (int i = 0; i < n; ++i) res.inertia += (points.row(i) - centers.row(res.labels[i])).squaredNorm();
    return res;
}

} // namespace

KMeansResult kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed, int restarts, int max_iter)
{
    require(k >= 1 && k <= points.rows(), "k-means needs 1 <= k <= number of points");
    KMeansResult best;
    best.inertia = std::numeric_limits<double>::infinity();
    std::mt19937_64 rng(seed);
    for (int r = 0; r < std::max(1, restarts); ++r) {
        const auto seeds = kmeanspp_seeds(points, k, rng());
        Eigen::MatrixXd centers(k, points.cols());
        for (int c = 0; c < k; ++c) centers.row(c) = points.row(seeds[c]);
        auto res = lloyd(points, centers, max_iter);
        if (res.inertia < best.inertia) best = std::move(res);
    }
    return best;
}

} // namespace faster
