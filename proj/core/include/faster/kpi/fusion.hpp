#pragma once

#include <json.hpp>

#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace faster {

/// Stations x time steps. Cell (s, k) covers [origin + k*step_seconds, origin + (k+1)*step_seconds).
struct KpiGrid {
    std::vector<std::string> stations;
    int steps = 0;
    double step_seconds = 60.0;
    double origin = 0.0; // seconds since midnight of the grid start

    std::size_t cells() const { return stations.size() * static_cast<std::size_t>(steps); }
    std::size_t cell(std::size_t station, int step) const { return station * static_cast<std::size_t>(steps) + step; }
    std::optional<std::size_t> station_index(const std::string& id) const;
    /// Seconds since midnight at the start of `step`.
    double time_of(int step) const { return origin + step * step_seconds; }
};

struct ExpertSample {
    std::string station;
    double t = 0.0; // seconds, same clock as KpiGrid::origin
    double value = 0.0;
    std::string latency; // free-form tag, e.g. "realtime" or "batch"
};

struct ExpertEstimate {
    std::string expert_id;
    std::string kpi;
    std::vector<ExpertSample> samples;
};

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

struct GriddedEstimate {
    std::string expert_id;
    std::string kpi;
    std::vector<double> values; // per cell, NaN when empty
    long dropped = 0;           // samples outside the grid or at unknown stations
};

/// Bins samples into cells by mean. Samples outside the horizon or at stations the
/// grid does not list are dropped and counted.
GriddedEstimate align(const ExpertEstimate& estimate, const KpiGrid& grid);

/// Prior used for cells no expert covers.
using CellPrior = std::function<std::optional<double>(std::size_t station, int step)>;

struct KpiSeries {
    std::string kpi;
    KpiGrid grid;
    std::vector<double> fused;     // NaN when neither experts nor the prior cover the cell
    std::vector<bool> from_prior;  // cell value came from the prior
    std::vector<std::map<std::string, double>> weights; // normalized contributing weights per cell
};

/// Reliability-weighted linear pooling: fused = sum w_i x_i / sum w_i over experts
/// present in the cell. Experts absent from `reliability` get weight 1. When all
/// present experts have zero weight the plain mean is used. Throws ValidationError
/// when no expert covers any cell.
KpiSeries pool(const std::vector<GriddedEstimate>& estimates, const KpiGrid& grid,
               const std::map<std::string, double>& reliability, const CellPrior& prior = {});

/// Per-KPI expert weights from exponentially smoothed MAE against ground truth.
class ReliabilityTracker {
public:
    explicit ReliabilityTracker(double decay = 0.9, double epsilon = 1e-3);

    /// Folds the MAE of `estimate` over cells where both it and `truth` are present
    /// into the running MAE: mae <- decay * mae + (1 - decay) * window_mae (the first
    /// window initializes it). Returns the expert's normalized weight afterwards; with
    /// no overlapping cell nothing changes.
    double update(const GriddedEstimate& estimate, const std::vector<double>& truth);

    /// Weights proportional to 1 / (mae + epsilon), summing to 1 per KPI.
    std::map<std::string, double> weights(const std::string& kpi) const;
    std::optional<double> running_mae(const std::string& kpi, const std::string& expert) const;

private:
    double decay_;
    double epsilon_;
    std::map<std::string, std::map<std::string, double>> mae_;
};

struct Revision {
    std::string kpi;
    std::string station;
    int step = 0;
    std::string expert_id; // arrival that triggered the revision
    double previous = 0.0;
    double revised = 0.0;
};

/// Streaming fusion: records arrive one by one, each affected cell is re-pooled, and
/// any change to an already published cell is logged as a revision rather than
/// silently overwritten.
class KpiFusion {
public:
    explicit KpiFusion(KpiGrid grid);

    /// Returns false when the record was dropped (outside the grid). Throws
    /// ValidationError if the record's time precedes the previous one of the same
    /// (expert, kpi) stream.
    bool ingest(const std::string& expert_id, const std::string& kpi, const ExpertSample& sample);
    void set_reliability(const std::string& kpi, std::map<std::string, double> weights);

    KpiSeries series(const std::string& kpi, const CellPrior& prior = {}) const;
    std::vector<std::string> kpis() const;
    const std::vector<Revision>& revisions() const { return revisions_; }
    long dropped() const { return dropped_; }
    const KpiGrid& grid() const { return grid_; }

private:
    struct Accumulator {
        double sum = 0.0;
        int count = 0;
    };
    double fuse_cell(const std::string& kpi, std::size_t cell) const;

    KpiGrid grid_;
    std::map<std::string, std::map<std::string, std::vector<Accumulator>>> cells_; // kpi -> expert -> cells
    std::map<std::string, std::vector<double>> published_;
    std::map<std::string, std::map<std::string, double>> reliability_;
    std::map<std::pair<std::string, std::string>, double> last_time_;
    std::vector<Revision> revisions_;
    long dropped_ = 0;
};

struct ExpertRecord {
    std::string expert_id;
    std::string kpi;
    ExpertSample sample;
};

/// Line-delimited {expert_id, kpi, station, t, value[, latency]}. `t` is seconds or an
/// ISO-8601 / "HH:MM" time of day.
std::vector<ExpertRecord> read_expert_jsonl(std::istream& in, bool strict, std::vector<std::pair<int, std::string>>* errors);
nlohmann::json to_json(const ExpertRecord& record);

nlohmann::json to_json(const KpiSeries& series);

} // namespace faster
