#include "faster/cluster/spectral.hpp"

#include "faster/common/error.hpp"
#include "faster/common/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace faster {

namespace {

void check_affinity(const Eigen::MatrixXd& w)
{
    require(w.rows() == w.cols(), "affinity matrix must be square");
    require(w.allFinite(), "affinity matrix has non-finite entries");
    require(w.minCoeff() >= 0.0 || w.size() == 0, "affinity matrix must be non-negative");
    require((w - w.transpose()).cwiseAbs().maxCoeff() <= 1e-9 * std::max(1.0, w.cwiseAbs().maxCoeff()) ||
                w.size() == 0,
            "affinity matrix must be symmetric");
}

std::vector<int> first_appearance(const std::vector<int>& labels)
{
    std::map<int, int> remap;
    std::vector<int> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto it = remap.emplace(labels[i], static_cast<int>(remap.size())).first;
        out[i] = it->second;
    }
    return out;
}

Eigen::MatrixXd normalized_laplacian(const Eigen::MatrixXd& w)
{
    const Eigen::Index n = w.rows();
    Eigen::VectorXd inv_sqrt(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double d = w.row(i).sum();
        inv_sqrt[i] = d > 0.0 ? 1.0 / std::sqrt(d) : 0.0;
    }
    Eigen::MatrixXd L = -(inv_sqrt.asDiagonal() * w * inv_sqrt.asDiagonal());
    L.diagonal().array() += 1.0;
    return 0.5 * (L + L.transpose());
}

} // namespace

std::vector<int> connected_components(const Eigen::MatrixXd& affinity)
{
    const int n = static_cast<int>(affinity.rows());
    std::vector<int> label(n, -1);
    int next = 0;
    for (int s = 0; s < n; ++s) {
        if (label[s] >= 0) continue;
        std::vector<int> stack{s};
        label[s] = next;
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            for (int v = 0; v < n; ++v)
                if (label[v] < 0 && affinity(u, v) > 0.0) {
                    label[v] = next;
                    stack.push_back(v);
                }
        }
        ++next;
    }
    return label;
}

std::vector<int> spectral_clustering(const Eigen::MatrixXd& affinity, int k, std::uint64_t seed)
{
    check_affinity(affinity);
    const int n = static_cast<int>(affinity.rows());
    require(n >= 1, "empty affinity matrix");
    require(k >= 1, "k must be >= 1");
    if (k >= n) {
        std::vector<int> out(n);
        for (int i = 0; i < n; ++i) out[i] = i;
        return out;
    }
    if (k == 1) return std::vector<int>(n, 0);
    const auto comp = connected_components(affinity);
    const int n_comp = *std::max_element(comp.begin(), comp.end()) + 1;
    if (n_comp >= k) return comp;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(normalized_laplacian(affinity));
    if (es.info() != Eigen::Success) throw NumericalError("eigen-decomposition failed");
    Eigen::MatrixXd embed = es.eigenvectors().leftCols(k);
    for (Eigen::Index i = 0; i < embed.rows(); ++i) {
        const double norm = embed.row(i).norm();
        if (norm > 0.0) embed.row(i) /= norm;
    }
    return first_appearance(kmeans(embed, k, seed, 10).labels);
}

Eigen::VectorXd laplacian_spectrum(const Eigen::MatrixXd& affinity)
{
    check_affinity(affinity);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(normalized_laplacian(affinity), Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

int eigengap_clusters(const Eigen::MatrixXd& affinity, int max_k)
{
    const int n = static_cast<int>(affinity.rows());
    require(n >= 1, "empty affinity matrix");
    const Eigen::VectorXd ev = laplacian_spectrum(affinity);
    const int limit = std::min(max_k, n);
    // every eigenvalue near zero means the points are mutually disconnected
    if (ev[limit - 1] < 1e-8) return limit;
    int best = 1;
    double gap = -1.0;
    for (int k = 1; k < limit + (limit < n ? 1 : 0); ++k) {
        const double g = ev[k] - ev[k - 1];
        if (g > gap + 1e-12) {
            gap = g;
            best = k;
        }
    }
    return best;
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b)
{
    require(a.size() == b.size(), "label vectors differ in length");
    const auto n = static_cast<double>(a.size());
    if (a.size() < 2) return 1.0;
    std::map<std::pair<int, int>, double> table;
    std::map<int, double> ra, rb;
    for (std::size_t i = 0; i < a.size(); ++i) {
        table[{a[i], b[i]}] += 1.0;
        ra[a[i]] += 1.0;
        rb[b[i]] += 1.0;
    }
    auto c2 = [](double x) { return x * (x - 1.0) / 2.0; };
    double index = 0.0, sa = 0.0, sb = 0.0;
    for (const auto& [k, v] : table) index += c2(v);
    for (const auto& [k, v] : ra) sa += c2(v);
    for (const auto& [k, v] : rb) sb += c2(v);
    const double expected = sa * sb / c2(n);
    const double max_index = 0.5 * (sa + sb);
    if (max_index == expected) return 1.0;
    return (index - expected) / (max_index - expected);
}

} // namespace faster
