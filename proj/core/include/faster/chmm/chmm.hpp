#pragma once

#include "faster/chmm/trip.hpp"
#include "faster/model/network.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace faster {

using ObservationSequence = std::vector<Eigen::VectorXd>;

/// Per-dimension z-scoring. Constant dimensions keep unit scale.
struct Scaler {
    Eigen::VectorXd mean;
    Eigen::VectorXd scale;

    static Scaler fit(const std::vector<ObservationSequence>& sequences);
    Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
};

/// Continuous HMM with a discrete cluster layer between states and Gaussian
/// observations: b_j(o) = sum_k G(j,k) N(o; mean_k, cov_k).
struct Chmm {
    Eigen::VectorXd pi;
    Eigen::MatrixXd A; // states x states
    Eigen::MatrixXd G; // states x clusters
    std::vector<Eigen::VectorXd> means;
    std::vector<Eigen::MatrixXd> covariances;

    // Mapping to the transit domain; empty for models fit on raw vectors.
    Scaler scaler;
    std::vector<std::string> stations; // column labels of the tables below
    Eigen::MatrixXd exit_table;        // states x stations, P(exit station | state)
    Eigen::MatrixXd entry_table;       // states x stations, P(entry station | state)

    int n_states() const { return static_cast<int>(A.rows()); }
    int n_clusters() const { return static_cast<int>(G.cols()); }
    int dim() const { return means.empty() ? 0 : static_cast<int>(means[0].size()); }
};

struct FitOptions {
    int n_states = 3;
    int n_clusters = 8;
    int max_iter = 100;
    double tol = 1e-6; // relative log-likelihood improvement
    std::uint64_t seed = 0;
};

struct FitResult {
    Chmm model;
    std::vector<double> log_likelihood; // before each M-step, then the final model
    int iterations = 0;
    bool converged = false;
    int reseeds = 0;
};

/// Baum-Welch on sequences of observation vectors (already scaled). Throws
/// ValidationError on empty sequences or K < 1 and NumericalError on a non-finite
/// likelihood.
FitResult fit_baum_welch(const std::vector<ObservationSequence>& sequences, const FitOptions& options);

double log_likelihood(const Chmm& model, const std::vector<ObservationSequence>& sequences);

/// Smoothed state posteriors, one row per observation.
Eigen::MatrixXd state_posteriors(const Chmm& model, const ObservationSequence& sequence);

/// Picks the cluster count from `grid` with the lowest BIC.
int select_clusters(const std::vector<ObservationSequence>& sequences, int n_states, const std::vector<int>& grid,
                    std::uint64_t seed, int max_iter = 50);

/// Raw (entry_time, duration, exit_x, exit_y).
Eigen::VectorXd observation_vector(const TripObservation& trip);

/// Scales the users' trips (with `shared` when given, else a scaler fit on them),
/// fits the model and fills the station tables from posterior-weighted labels.
FitResult train_chmm(const std::vector<std::vector<TripObservation>>& users, const std::vector<std::string>& stations,
                     const FitOptions& options, const Scaler* shared = nullptr);

enum class PredictMode { Baseline, TwoStage, Online };

PredictMode predict_mode_from_string(const std::string& text);
const char* to_string(PredictMode mode);

/// What is known about the next trip before it ends.
struct NextTrip {
    double entry_time = 0.0;
    double duration = 0.0;
    std::string entry_station;
};

struct Prediction {
    std::string station;
    std::vector<std::pair<std::string, double>> distribution; // descending, ties by station id
    Eigen::VectorXd state_posterior;
};

/// Distribution of the next trip's state. `partial` holds the scaled entry time and
/// duration (two_stage, online); `entry_station` indexes the entry table (online,
/// ignored when negative or incompatible with every state).
Eigen::VectorXd predict_state(const Chmm& model, const ObservationSequence& history, PredictMode mode,
                              const Eigen::VectorXd* partial, int entry_station);

Prediction predict_exit(const Chmm& model, const std::vector<TripObservation>& history, PredictMode mode,
                        const NextTrip& next);

/// Fraction of predictions whose station lies within `radius` meters of the truth.
double accuracy(const std::vector<std::string>& predicted, const std::vector<std::string>& truth,
                const Network& network, double radius = 1000.0);

nlohmann::json to_json(const Chmm& model);
Chmm chmm_from_json(const nlohmann::json& doc);

} // namespace faster
