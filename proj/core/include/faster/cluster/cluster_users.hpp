#pragma once

#include "faster/chmm/chmm.hpp"
#include "faster/chmm/trip.hpp"
#include "faster/cluster/distance.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace faster {

/// -sum f_s ln f_s over stations with non-zero counts, in nats.
double spatial_entropy(const std::vector<double>& counts);

struct HistogramFeatures {
    std::vector<double> presence; // per station, sums to 1 (all zero for users without trips)
    std::vector<double> hourly;   // 24 entry-hour bins, sums to 1
    double entropy = 0.0;

    Eigen::VectorXd vector() const;
};

/// Presence counts both entry and exit stations; `stations` fixes the cell order.
HistogramFeatures histogram_features(const std::vector<TripObservation>& trips, const std::vector<std::string>& stations);

enum class Representation { Histogram, GmmQfd, GmmKl };

Representation representation_from_string(const std::string& text);
const char* to_string(Representation rep);

struct UserTrips {
    std::string user_id;
    std::vector<TripObservation> trips;
};

struct ClusterOptions {
    Representation representation = Representation::GmmQfd;
    int k = 2;
    std::uint64_t seed = 0;
    int gmm_components = 3;
    int kl_samples = 2000;
    unsigned workers = 0; // 0: hardware concurrency
};

struct ClusterResult {
    std::vector<std::string> user_ids;
    std::vector<int> labels;
    Eigen::MatrixXd distances;
    Eigen::MatrixXd affinity;
    double alpha = 0.0; // kernel parameter used for QFD (GMM representations)
    std::vector<std::vector<std::size_t>> members; // user indices per cluster

    /// Training set (trip sequences) for the aggregate model of one cluster.
    std::vector<std::vector<TripObservation>> training_set(const std::vector<UserTrips>& users, int cluster) const;
};

/// Pairwise distances (euclidean on histograms, QFD or symmetric MC-KL on per-user
/// mixtures), turned into affinities with a Gaussian kernel at the median
/// heuristic, then spectral clustering. Users with identical representations
/// always share a label. Throws ValidationError when there are fewer users than k.
ClusterResult cluster_users(const std::vector<UserTrips>& users, const std::vector<std::string>& stations,
                            const ClusterOptions& options);

/// Dense comma-separated matrix with a header row and column of ids.
std::string affinity_csv(const Eigen::MatrixXd& matrix, const std::vector<std::string>& ids);

/// One {user_id, cluster_id} record per line.
std::string assignments_jsonl(const ClusterResult& result);

} // namespace faster
