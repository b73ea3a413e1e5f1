#include "faster/kpi/fusion.hpp"

#include "faster/common/error.hpp"
#include "faster/common/io.hpp"

#include <algorithm>
#include <cmath>

namespace faster {

std::optional<std::size_t> KpiGrid::station_index(const std::string& id) const
{
    auto it = std::find(stations.begin(), stations.end(), id);
    if (it == stations.end()) return std::nullopt;
    return static_cast<std::size_t>(it - stations.begin());
}

namespace {

std::optional<std::size_t> locate(const KpiGrid& grid, const ExpertSample& s)
{
    const auto st = grid.station_index(s.station);
    if (!st) return std::nullopt;
    const double rel = (s.t - grid.origin) / grid.step_seconds;
    if (!(rel >= 0.0) || rel >= grid.steps) return std::nullopt;
    return grid.cell(*st, static_cast<int>(std::floor(rel)));
}

void check_grid(const KpiGrid& grid)
{
    require(!grid.stations.empty(), "grid has no stations");
    require(grid.steps > 0, "grid has no steps");
    require(grid.step_seconds > 0.0, "grid resolution must be positive");
}

} // namespace

GriddedEstimate align(const ExpertEstimate& estimate, const KpiGrid& grid)
{
    check_grid(grid);
    GriddedEstimate out{estimate.expert_id, estimate.kpi, std::vector<double>(grid.cells(), 0.0), 0};
    std::vector<int> counts(grid.cells(), 0);
    for (const auto& s : estimate.samples) {
        require(std::isfinite(s.value), "non-finite sample value");
        const auto c = locate(grid, s);
        if (!c) {
            ++out.dropped;
            continue;
        }
        out.values[*c] += s.value;
        ++counts[*c];
    }
    for (std::size_t i = 0; i < counts.size(); ++i) out.values[i] = counts[i] ? out.values[i] / counts[i] : kMissing;
    return out;
}

namespace {

/// Pools one cell; returns NaN when no value is present.
double pool_cell(const std::vector<std::pair<std::string, double>>& present, const std::map<std::string, double>& rel,
                 std::map<std::string, double>* weights_out)
{
    if (present.empty()) return kMissing;
    std::vector<double> w;
    double total = 0.0;
    for (const auto& [e, v] : present) {
        auto it = rel.find(e);
        const double wi = it == rel.end() ? 1.0 : std::max(0.0, it->second);
        w.push_back(wi);
        total += wi;
    }
    if (!(total > 0.0)) {
        std::fill(w.begin(), w.end(), 1.0);
        total = static_cast<double>(w.size());
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < present.size(); ++i) {
        acc += w[i] * present[i].second;
        if (weights_out) (*weights_out)[present[i].first] = w[i] / total;
    }
    // keep the result a convex combination despite rounding
    const auto [lo, hi] = std::minmax_element(present.begin(), present.end(),
                                              [](const auto& a, const auto& b) { return a.second < b.second; });
    return std::clamp(acc / total, lo->second, hi->second);
}

} // namespace

KpiSeries pool(const std::vector<GriddedEstimate>& estimates, const KpiGrid& grid,
               const std::map<std::string, double>& reliability, const CellPrior& prior)
{
    check_grid(grid);
    KpiSeries out;
    out.grid = grid;
    out.fused.assign(grid.cells(), kMissing);
    out.from_prior.assign(grid.cells(), false);
    out.weights.resize(grid.cells());
    for (const auto& e : estimates) {
        require(e.values.size() == grid.cells(), "estimate of " + e.expert_id + " is not on this grid");
        if (out.kpi.empty()) out.kpi = e.kpi;
        require(e.kpi == out.kpi, "estimates for different KPIs cannot be pooled");
    }
    bool any = false;
    for (std::size_t st = 0; st < grid.stations.size(); ++st)
        for (int k = 0; k < grid.steps; ++k) {
            const auto c = grid.cell(st, k);
            std::vector<std::pair<std::string, double>> present;
            for (const auto& e : estimates)
                if (!std::isnan(e.values[c])) present.emplace_back(e.expert_id, e.values[c]);
            if (!present.empty()) {
                any = true;
                out.fused[c] = pool_cell(present, reliability, &out.weights[c]);
            } else if (prior) {
                if (auto p = prior(st, k)) {
                    out.fused[c] = *p;
                    out.from_prior[c] = true;
                }
            }
        }
    if (!any) throw ValidationError("no expert estimate covers any cell");
    return out;
}

ReliabilityTracker::ReliabilityTracker(double decay, double epsilon) : decay_(decay), epsilon_(epsilon)
{
    require(decay >= 0.0 && decay <= 1.0, "decay must lie in [0, 1]");
    require(epsilon > 0.0, "epsilon must be positive");
}

double ReliabilityTracker::update(const GriddedEstimate& estimate, const std::vector<double>& truth)
{
    require(truth.size() == estimate.values.size(), "truth is not on the estimate's grid");
    double err = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < truth.size(); ++i)
        if (!std::isnan(truth[i]) && !std::isnan(estimate.values[i])) {
            err += std::abs(estimate.values[i] - truth[i]);
            ++n;
        }
    auto& per_kpi = mae_[estimate.kpi];
    if (n > 0) {
        const double window = err / n;
        auto it = per_kpi.find(estimate.expert_id);
        if (it == per_kpi.end()) per_kpi[estimate.expert_id] = window;
        else it->second = decay_ * it->second + (1.0 - decay_) * window;
    }
    const auto w = weights(estimate.kpi);
    auto it = w.find(estimate.expert_id);
    return it == w.end() ? 0.0 : it->second;
}

std::map<std::string, double> ReliabilityTracker::weights(const std::string& kpi) const
{
    std::map<std::string, double> out;
    auto it = mae_.find(kpi);
    if (it == mae_.end()) return out;
    double total = 0.0;
    for (const auto& [e, mae] : it->second) total += out[e] = 1.0 / (mae + epsilon_);
    for (auto& [e, w] : out) w /= total;
    return out;
}

std::optional<double> ReliabilityTracker::running_mae(const std::string& kpi, const std::string& expert) const
{
    auto it = mae_.find(kpi);
    if (it == mae_.end()) return std::nullopt;
    auto jt = it->second.find(expert);
    if (jt == it->second.end()) return std::nullopt;
    return jt->second;
}

KpiFusion::KpiFusion(KpiGrid grid) : grid_(std::move(grid))
{
    check_grid(grid_);
}

bool KpiFusion::ingest(const std::string& expert_id, const std::string& kpi, const ExpertSample& sample)
{
    require(!expert_id.empty() && !kpi.empty(), "record needs expert_id and kpi");
    require(std::isfinite(sample.value) && std::isfinite(sample.t), "non-finite record");
    const auto key = std::make_pair(expert_id, kpi);
    if (auto it = last_time_.find(key); it != last_time_.end())
        require(sample.t >= it->second, "timestamps of stream " + expert_id + "/" + kpi + " go backwards");
    last_time_[key] = sample.t;

    const auto c = locate(grid_, sample);
    if (!c) {
        ++dropped_;
        return false;
    }
    auto& cells = cells_[kpi][expert_id];
    if (cells.empty()) cells.resize(grid_.cells());
    cells[*c].sum += sample.value;
    cells[*c].count += 1;

    auto& pub = published_[kpi];
    if (pub.empty()) pub.assign(grid_.cells(), kMissing);
    const double fused = fuse_cell(kpi, *c);
    if (!std::isnan(pub[*c]) && fused != pub[*c]) {
        const auto st = *c / static_cast<std::size_t>(grid_.steps);
        revisions_.push_back({kpi, grid_.stations[st], static_cast<int>(*c % grid_.steps), expert_id, pub[*c], fused});
    }
    pub[*c] = fused;
    return true;
}

void KpiFusion::set_reliability(const std::string& kpi, std::map<std::string, double> weights)
{
    reliability_[kpi] = std::move(weights);
    // weights changed, so published values are re-pooled (not a revision of data)
    auto it = published_.find(kpi);
    if (it == published_.end()) return;
    for (std::size_t c = 0; c < it->second.size(); ++c) it->second[c] = fuse_cell(kpi, c);
}

double KpiFusion::fuse_cell(const std::string& kpi, std::size_t cell) const
{
    std::vector<std::pair<std::string, double>> present;
    auto it = cells_.find(kpi);
    if (it == cells_.end()) return kMissing;
    for (const auto& [e, cells] : it->second)
        if (cells[cell].count > 0) present.emplace_back(e, cells[cell].sum / cells[cell].count);
    static const std::map<std::string, double> none;
    auto rt = reliability_.find(kpi);
    return pool_cell(present, rt == reliability_.end() ? none : rt->second, nullptr);
}

KpiSeries KpiFusion::series(const std::string& kpi, const CellPrior& prior) const
{
    std::vector<GriddedEstimate> estimates;
    auto it = cells_.find(kpi);
    if (it == cells_.end()) throw NotFoundError("no data for KPI '" + kpi + "'");
    for (const auto& [e, cells] : it->second) {
        GriddedEstimate g{e, kpi, std::vector<double>(grid_.cells(), kMissing), 0};
        for (std::size_t c = 0; c < cells.size(); ++c)
            if (cells[c].count > 0) g.values[c] = cells[c].sum / cells[c].count;
        estimates.push_back(std::move(g));
    }
    static const std::map<std::string, double> none;
    auto rt = reliability_.find(kpi);
    return pool(estimates, grid_, rt == reliability_.end() ? none : rt->second, prior);
}

std::vector<std::string> KpiFusion::kpis() const
{
    std::vector<std::string> out;
    for (const auto& [k, v] : cells_) out.push_back(k);
    return out;
}

std::vector<ExpertRecord> read_expert_jsonl(std::istream& in, bool strict, std::vector<std::pair<int, std::string>>* errors)
{
    std::vector<ExpertRecord> out;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto doc = nlohmann::json::parse(line);
            require(doc.is_object(), "expert record must be an object");
            ExpertRecord r;
            r.expert_id = doc.at("expert_id").get<std::string>();
            r.kpi = doc.at("kpi").get<std::string>();
            r.sample.station = doc.at("station").get<std::string>();
            const auto& t = doc.at("t");
            r.sample.t = t.is_number() ? t.get<double>() : io::parse_time_of_day(t.get<std::string>());
            r.sample.value = doc.at("value").get<double>();
            r.sample.latency = doc.value("latency", "");
            require(!r.expert_id.empty() && !r.kpi.empty() && !r.sample.station.empty(), "empty identifier");
            require(std::isfinite(r.sample.value), "non-finite value");
            out.push_back(std::move(r));
        } catch (const std::exception& e) {
            if (strict) throw ValidationError("line " + std::to_string(number) + ": " + e.what());
            if (errors) errors->emplace_back(number, e.what());
        }
    }
    return out;
}

nlohmann::json to_json(const ExpertRecord& r)
{
    nlohmann::json j{{"expert_id", r.expert_id}, {"kpi", r.kpi}, {"station", r.sample.station},
                     {"t", r.sample.t}, {"value", r.sample.value}};
    if (!r.sample.latency.empty()) j["latency"] = r.sample.latency;
    return j;
}

nlohmann::json to_json(const KpiSeries& s)
{
    nlohmann::json j;
    j["kpi"] = s.kpi;
    j["origin"] = s.grid.origin;
    j["step_seconds"] = s.grid.step_seconds;
    j["steps"] = s.grid.steps;
    j["stations"] = nlohmann::json::object();
    for (std::size_t st = 0; st < s.grid.stations.size(); ++st) {
        auto values = nlohmann::json::array();
        auto prior = nlohmann::json::array();
        for (int k = 0; k < s.grid.steps; ++k) {
            const auto c = s.grid.cell(st, k);
            values.push_back(std::isnan(s.fused[c]) ? nlohmann::json(nullptr) : nlohmann::json(s.fused[c]));
            prior.push_back(static_cast<bool>(s.from_prior[c]));
        }
        j["stations"][s.grid.stations[st]] = {{"values", values}, {"from_prior", prior}};
    }
    return j;
}

} // namespace faster
