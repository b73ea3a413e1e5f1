#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace faster {

/// Per-feature z-scoring statistics shared by every model of a hierarchy.
struct Normalizer {
    Eigen::VectorXd mean;
    Eigen::VectorXd scale;

    static Normalizer fit(const Eigen::MatrixXd& rows);
    Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd apply(const Eigen::MatrixXd& rows) const;
};

struct LogisticModel {
    Eigen::VectorXd weights;
    double bias = 0.0;

    double probability(const Eigen::VectorXd& x) const;
};

struct TrainConfig {
    double learning_rate = 0.5;
    int epochs = 400;
    double l2 = 1e-4;
};

/// Full-batch gradient descent on the mean logistic loss plus l2/2 |w|^2, starting
/// from `init` when given (zero otherwise).
LogisticModel train_logistic(const Eigen::MatrixXd& X, const std::vector<int>& y, const TrainConfig& config,
                             const LogisticModel* init = nullptr);

struct BootstrapConfig {
    bool enabled = true;
    int resamples = 25;
};

/// Members trained on class-balanced bootstrap resamples; the prediction is their
/// mean probability. Without bootstrap there is one member trained on all rows.
struct BaggedModel {
    std::vector<LogisticModel> members;

    double probability(const Eigen::VectorXd& x) const;
};

BaggedModel train_bagged(const Eigen::MatrixXd& X, const std::vector<int>& y, const BootstrapConfig& bootstrap,
                         const TrainConfig& config, std::uint64_t seed, const BaggedModel* parent = nullptr);

using Trainer = std::function<std::function<double(const Eigen::VectorXd&)>(const Eigen::MatrixXd&, const std::vector<int>&)>;

enum class SelectionMetric { Accuracy, BalancedAccuracy };

/// Greedy forward selection by k-fold cross-validated score at threshold 0.5.
/// A feature joins only if it strictly improves the score. Throws ValidationError
/// on a single-class label vector or fewer than 2 features.
std::vector<int> forward_select(const Eigen::MatrixXd& X, const std::vector<int>& y, const Trainer& trainer, int max_k,
                                int folds = 5, std::uint64_t seed = 0,
                                SelectionMetric metric = SelectionMetric::Accuracy);

/// One labeled observation window of a station platform.
struct LabeledWindow {
    std::string station;
    std::string line;
    double time = 0.0;
    Eigen::VectorXd features; // raw values in dsg_feature_names() order
    int label = 0;
};

enum class Level { Network, Line, Station };

Level level_from_string(const std::string& text);
const char* to_string(Level level);

struct HierarchyConfig {
    BootstrapConfig bootstrap;
    TrainConfig train;
    std::vector<int> features; // selected columns; empty means all
    unsigned workers = 0;
};

/// Network -> line -> station cascade of bagged logistic models. Lower levels are
/// warm-started from their parent. A station without positive windows, or with a
/// single window, inherits its line model.
struct ModelHierarchy {
    Normalizer normalizer;
    std::vector<int> features;
    BaggedModel network;
    std::map<std::string, BaggedModel> lines;
    std::map<std::string, BaggedModel> stations;
    std::map<std::string, std::string> station_line;
    std::set<std::string> inherited;

    Eigen::VectorXd prepare(const Eigen::VectorXd& raw) const;
};

ModelHierarchy train_hierarchy(const std::vector<LabeledWindow>& windows, const HierarchyConfig& config,
                               std::uint64_t seed);

struct Classification {
    double probability = 0.0;
    bool flag = false;
    Level level = Level::Network; // level whose model answered
    bool fell_back = false;
};

/// Unknown stations at station level fall back to the line model (and unknown
/// lines to the network model) with `fell_back` set.
Classification classify(const LabeledWindow& window, const ModelHierarchy& hierarchy, Level level,
                        double threshold = 0.5);

struct DetectionScores {
    double precision = 0.0; // percent
    double recall = 0.0;
    double accuracy = 0.0;
    long tp = 0, fp = 0, fn = 0, tn = 0;
};

/// Precision (recall) is 100 when there are no predicted (actual) positives and
/// nothing was missed.
DetectionScores evaluate(const std::vector<bool>& flags, const std::vector<int>& truth);

/// Header: station,line,time,<feature names>,label
std::vector<LabeledWindow> read_windows_csv(std::istream& in);
std::string windows_csv(const std::vector<LabeledWindow>& windows);

nlohmann::json to_json(const ModelHierarchy& h);
ModelHierarchy hierarchy_from_json(const nlohmann::json& doc);

} // namespace faster
