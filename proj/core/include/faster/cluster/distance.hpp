#pragma once

#include "faster/cluster/gmm.hpp"

#include <cstdint>
#include <vector>

namespace faster {

/// Similarity between signature centers: f_-(a, b) = -|a - b| or f_g(a, b) = exp(-alpha |a - b|^2).
struct Kernel {
    enum class Type { NegativeDistance, Gaussian } type = Type::Gaussian;
    double alpha = 1.0;

    double operator()(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;
};

/// 1 / median of squared distances between distinct centers over all signatures.
double median_alpha(const std::vector<GmmSignature>& signatures);

/// Quadratic form distance over the union of both signatures' centers.
/// `kernel_evaluations` (optional) is incremented once per kernel call.
double qfd(const GmmSignature& q, const GmmSignature& o, const Kernel& kernel, long* kernel_evaluations = nullptr);

struct KlEstimate {
    double value = 0.0;
    double standard_error = 0.0;
    long density_evaluations = 0; // component density evaluations
};

/// Monte-Carlo estimate of KL(a||b) + KL(b||a) from n_samples draws of each mixture.
/// Densities are floored at 1e-300 before taking logs.
KlEstimate symmetric_kl_mc(const Gmm& a, const Gmm& b, int n_samples, std::uint64_t seed);

} // namespace faster
