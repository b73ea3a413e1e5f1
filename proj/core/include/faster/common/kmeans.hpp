#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace faster {

struct KMeansResult {
    std::vector<int> labels;
    Eigen::MatrixXd centers; // k x dim
    double inertia = 0.0;
};

/// k-means++ seeding only: returns k row indices of `points` chosen with D^2 weighting.
std::vector<int> kmeanspp_seeds(const Eigen::MatrixXd& points, int k, std::uint64_t seed);

/// Lloyd iterations from k-means++ seeds, best of `restarts` by inertia.
KMeansResult kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed,
                    int restarts = 10, int max_iter = 300);

} // namespace faster
