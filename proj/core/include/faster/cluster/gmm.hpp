#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <vector>

namespace faster {

struct Gmm {
    std::vector<double> weights;
    std::vector<Eigen::VectorXd> means;
    std::vector<Eigen::MatrixXd> covariances;

    int size() const { return static_cast<int>(weights.size()); }
    int dim() const { return means.empty() ? 0 : static_cast<int>(means[0].size()); }
};

/// Centers and weights of a mixture, the input of the quadratic form distance.
struct GmmSignature {
    std::vector<Eigen::VectorXd> centers;
    std::vector<double> weights;
};

GmmSignature signature(const Gmm& gmm);

/// EM fit with k-means++ initialization; k is clipped to the number of points.
Gmm fit_gmm(const std::vector<Eigen::VectorXd>& points, int k, std::uint64_t seed, int max_iter = 100);

/// Log density evaluator with cached Cholesky factors.
class GmmDensity {
public:
    explicit GmmDensity(const Gmm& gmm);
    double log_pdf(const Eigen::VectorXd& x) const;
    Eigen::VectorXd sample(std::mt19937_64& rng) const;
    int components() const { return static_cast<int>(gmm_.weights.size()); }

private:
    Gmm gmm_;
    std::vector<Eigen::MatrixXd> chol_;
    std::vector<double> log_norm_;
};

} // namespace faster
