#include "faster/dsg/features.hpp"

#include "faster/cluster/spectral.hpp"
#include "faster/common/error.hpp"
#include "faster/common/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace faster {

const std::vector<std::string>& dsg_feature_names()
{
    static const std::vector<std::string> names{"waiting_count", "missed_count", "wait_q3", "wait_std", "headway"};
    return names;
}

double estimate_headway(std::vector<double> events, double sigma)
{
    require(events.size() >= 2, "insufficient departures");
    require(sigma > 0.0, "sigma must be positive");
    std::sort(events.begin(), events.end());
    const auto n = static_cast<Eigen::Index>(events.size());
    Eigen::MatrixXd w(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            const double d = events[i] - events[j];
            w(i, j) = std::exp(-d * d / (2.0 * sigma * sigma));
        }
    const int k = eigengap_clusters(w, static_cast<int>(n));
    if (k < 2) throw ValidationError("insufficient departures");
    const auto labels = spectral_clustering(w, k, 0);
    std::map<int, std::pair<double, int>> acc;
    for (Eigen::Index i = 0; i < n; ++i) {
        auto& a = acc[labels[i]];
        a.first += events[i];
        a.second += 1;
    }
    std::vector<double> centroids;
    for (const auto& [l, a] : acc) centroids.push_back(a.first / a.second);
    if (centroids.size() < 2) throw ValidationError("insufficient departures");
    std::sort(centroids.begin(), centroids.end());
    std::vector<double> gaps;
    for (std::size_t i = 1; i < centroids.size(); ++i) gaps.push_back(centroids[i] - centroids[i - 1]);
    return stats::median(gaps);
}

DsgFeatures extract_features(const std::vector<PresenceTrace>& traces, const std::vector<double>& departures,
                             double start, double end, const FeatureOptions& options)
{
    require(end > start, "empty feature window");
    DsgFeatures f;
    std::vector<double> deps(departures);
    std::sort(deps.begin(), deps.end());
    std::vector<double> in_window;
    for (double d : deps)
        if (d >= start && d < end) in_window.push_back(d);
    if (in_window.empty()) {
        auto it = std::lower_bound(deps.begin(), deps.end(), end);
        if (it != deps.end()) in_window.push_back(*it);
        else if (!deps.empty()) in_window.push_back(deps.back());
    }
    if (in_window.empty()) {
        f.flagged = true;
        f.headway_missing = true;
    }
    const double slack = options.presence_slack;
    for (double d : in_window)
        for (const auto& t : traces) {
            if (t.first_seen < d && t.last_seen >= d - slack) {
                f.waiting_count += 1.0;
                if (t.last_seen > d + slack) f.missed_count += 1.0;
            }
        }
    std::vector<double> waits;
    for (const auto& t : traces)
        if (t.last_seen >= start && t.last_seen < end) waits.push_back(std::max(0.0, t.last_seen - t.first_seen));
    if (!waits.empty()) {
        f.wait_q3 = stats::quantile(waits, 0.75);
        f.wait_std = stats::stddev(waits);
    }
    if (!f.headway_missing) {
        try {
            f.headway = estimate_headway(deps, options.headway_sigma);
        } catch (const ValidationError&) {
            f.headway_missing = true;
        }
    }
    return f;
}

std::vector<StationTrace> read_traces_jsonl(std::istream& in, bool strict, std::vector<std::pair<int, std::string>>* errors)
{
    std::vector<StationTrace> out;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto doc = nlohmann::json::parse(line);
            require(doc.is_object(), "trace record must be an object");
            StationTrace t;
            t.station = doc.at("station").get<std::string>();
            t.trace.device = doc.at("device").is_string() ? doc.at("device").get<std::string>() : doc.at("device").dump();
            t.trace.first_seen = doc.at("first_seen").get<double>();
            t.trace.last_seen = doc.at("last_seen").get<double>();
            require(!t.station.empty(), "empty station");
            require(t.trace.last_seen >= t.trace.first_seen, "last_seen before first_seen");
            out.push_back(std::move(t));
        } catch (const std::exception& e) {
            if (strict) throw ValidationError("line " + std::to_string(number) + ": " + e.what());
            if (errors) errors->emplace_back(number, e.what());
        }
    }
    return out;
}

} // namespace faster
