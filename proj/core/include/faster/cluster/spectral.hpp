#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace faster {

/// Connected components of the graph with an edge wherever affinity > 0.
std::vector<int> connected_components(const Eigen::MatrixXd& affinity);

/// Normalized spectral clustering: the k smallest eigenvectors of
/// L_sym = I - D^{-1/2} W D^{-1/2}, rows normalized to unit length, then k-means
/// with 10 seeded restarts. A graph with at least k components is labeled by its
/// components; k >= n gives every point its own label. Labels are renumbered in
/// order of first appearance.
std::vector<int> spectral_clustering(const Eigen::MatrixXd& affinity, int k, std::uint64_t seed);

/// Eigenvalues of L_sym in ascending order.
Eigen::VectorXd laplacian_spectrum(const Eigen::MatrixXd& affinity);

/// Number of clusters at the largest gap among the first `max_k` + 1 eigenvalues.
int eigengap_clusters(const Eigen::MatrixXd& affinity, int max_k);

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

} // namespace faster
