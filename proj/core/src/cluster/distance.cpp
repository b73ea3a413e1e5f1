#include "faster/cluster/distance.hpp"

#include "faster/common/error.hpp"
#include "faster/common/stats.hpp"

#include <cmath>

namespace faster {

double Kernel::operator()(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const
{
    const double d2 = (a - b).squaredNorm();
    if (type == Type::NegativeDistance) return -std::sqrt(d2);
    return std::exp(-alpha * d2);
}

double median_alpha(const std::vector<GmmSignature>& signatures)
{
    std::vector<Eigen::VectorXd> centers;
    for (const auto& s : signatures) centers.insert(centers.end(), s.centers.begin(), s.centers.end());
    std::vector<double> d2;
    for (std::size_t i = 0; i < centers.size(); ++i)
        for (std::size_t j = i + 1; j < centers.size(); ++j) {
            const double v = (centers[i] - centers[j]).squaredNorm();
            if (v > 0.0) d2.push_back(v);
        }
    if (d2.empty()) return 1.0;
    return 1.0 / stats::median(d2);
}

double qfd(const GmmSignature& q, const GmmSignature& o, const Kernel& kernel, long* kernel_evaluations)
{
    require(q.centers.size() == q.weights.size() && o.centers.size() == o.weights.size(),
            "signature centers and weights differ in length");
    std::vector<const Eigen::VectorXd*> centers;
    std::vector<double> w;
    for (std::size_t i = 0; i < q.centers.size(); ++i) {
        centers.push_back(&q.centers[i]);
        w.push_back(q.weights[i]);
    }
    for (std::size_t i = 0; i < o.centers.size(); ++i) {
        centers.push_back(&o.centers[i]);
        w.push_back(-o.weights[i]);
    }
    if (!centers.empty()) {
        const auto d = centers.front()->size();
        for (const auto* c : centers) require(c->size() == d, "signature dimension mismatch");
    }
    const std::size_t n = centers.size();
    double form = 0.0;
    long evals = 0;
    for (std::size_t i = 0; i < n; ++i) {
        form += w[i] * w[i] * kernel(*centers[i], *centers[i]);
        ++evals;
        for (std::size_t j = i + 1; j < n; ++j) {
            form += 2.0 * w[i] * w[j] * kernel(*centers[i], *centers[j]);
            ++evals;
        }
    }
    if (kernel_evaluations) *kernel_evaluations += evals;
    return std::sqrt(std::max(0.0, form));
}

KlEstimate symmetric_kl_mc(const Gmm& a, const Gmm& b, int n_samples, std::uint64_t seed)
{
    require(n_samples >= 1, "n_samples must be >= 1");
    require(a.dim() == b.dim(), "mixture dimension mismatch");
    GmmDensity da(a), db(b);
    std::mt19937_64 rng(seed);
    constexpr double floor = 1e-300;
    const double log_floor = std::log(floor);
    KlEstimate est;
    double total_var = 0.0;
    auto one_way = [&](const GmmDensity& from, const GmmDensity& to) {
        double sum = 0.0, sq = 0.0;
        for (int i = 0; i < n_samples; ++i) {
            const Eigen::VectorXd x = from.sample(rng);
            const double r = std::max(from.log_pdf(x), log_floor) - std::max(to.log_pdf(x), log_floor);
            if (!std::isfinite(r)) throw NumericalError("non-finite density ratio");
            sum += r;
            sq += r * r;
        }
        est.density_evaluations += static_cast<long>(n_samples) * (from.components() + to.components());
        const double mean = sum / n_samples;
        total_var += std::max(0.0, sq / n_samples - mean * mean) / n_samples;
        return mean;
    };
    est.value = one_way(da, db) + one_way(db, da);
    est.standard_error = std::sqrt(total_var);
    return est;
}

} // namespace faster
