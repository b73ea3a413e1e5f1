#include "faster/cluster/gmm.hpp"

#include "faster/chmm/chmm.hpp"
#include "faster/common/error.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace faster {

GmmSignature signature(const Gmm& gmm)
{
    return {gmm.means, gmm.weights};
}

Gmm fit_gmm(const std::vector<Eigen::VectorXd>& points, int k, std::uint64_t seed, int max_iter)
{
    require(!points.empty(), "no points to fit");
    require(k >= 1, "k must be >= 1");
    k = std::min<int>(k, static_cast<int>(points.size()));
    // a mixture is a one-state CHMM whose emission row holds the component weights
    const auto fit = fit_baum_welch({points}, {1, k, max_iter, 1e-8, seed});
    Gmm g;
    for (int c = 0; c < k; ++c) g.weights.push_back(fit.model.G(0, c));
    g.means = fit.model.means;
    g.covariances = fit.model.covariances;
    return g;
}

GmmDensity::GmmDensity(const Gmm& gmm) : gmm_(gmm)
{
    require(gmm.size() >= 1, "empty mixture");
    double total = 0.0;
    for (double w : gmm.weights) {
        require(w >= 0.0, "negative mixture weight");
        total += w;
    }
    require(std::abs(total - 1.0) < 1e-6, "mixture weights must sum to 1");
    for (const auto& c : gmm.covariances) {
        Eigen::LLT<Eigen::MatrixXd> llt(c);
        if (llt.info() != Eigen::Success) throw NumericalError("mixture covariance is not positive definite");
        chol_.push_back(llt.matrixL());
        double logdet = 0.0;
        for (int i = 0; i < c.rows(); ++i) logdet += 2.0 * std::log(chol_.back()(i, i));
        log_norm_.push_back(-0.5 * (static_cast<double>(c.rows()) * std::log(2.0 * std::numbers::pi) + logdet));
    }
}

double GmmDensity::log_pdf(const Eigen::VectorXd& x) const
{
    double m = -std::numeric_limits<double>::infinity();
    std::vector<double> terms(gmm_.weights.size());
    for (std::size_t c = 0; c < terms.size(); ++c) {
        if (gmm_.weights[c] <= 0.0) {
            terms[c] = -std::numeric_limits<double>::infinity();
            continue;
        }
        Eigen::VectorXd z = chol_[c].triangularView<Eigen::Lower>().solve(x - gmm_.means[c]);
        terms[c] = std::log(gmm_.weights[c]) + log_norm_[c] - 0.5 * z.squaredNorm();
        m = std::max(m, terms[c]);
    }
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double t : terms) s += std::exp(t - m);
    return m + std::log(s);
}

Eigen::VectorXd GmmDensity::sample(std::mt19937_64& rng) const
{
    std::discrete_distribution<int> pick(gmm_.weights.begin(), gmm_.weights.end());
    const int c = pick(rng);
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::VectorXd z(gmm_.dim());
    for (int i = 0; i < z.size(); ++i) z[i] = n(rng);
    return gmm_.means[c] + chol_[c] * z;
}

} // namespace faster
