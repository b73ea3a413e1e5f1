#include "faster/cluster/cluster_users.hpp"

#include "faster/cluster/spectral.hpp"
#include "faster/common/error.hpp"
#include "faster/common/stats.hpp"
#include "faster/common/work_queue.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace faster {

double spatial_entropy(const std::vector<double>& counts)
{
    double total = 0.0;
    for (double c : counts) {
        require(c >= 0.0, "negative visit count");
        total += c;
    }
    require(total > 0.0, "spatial entropy of an empty visit histogram");
    double h = 0.0;
    for (double c : counts)
        if (c > 0.0) {
            const double f = c / total;
            h -= f * std::log(f);
        }
    return std::max(0.0, h);
}

Eigen::VectorXd HistogramFeatures::vector() const
{
    Eigen::VectorXd v(static_cast<Eigen::Index>(presence.size() + hourly.size()));
    Eigen::Index i = 0;
    for (double x : presence) v[i++] = x;
    for (double x : hourly) v[i++] = x;
    return v;
}

HistogramFeatures histogram_features(const std::vector<TripObservation>& trips, const std::vector<std::string>& stations)
{
    HistogramFeatures f;
    f.presence.assign(stations.size(), 0.0);
    f.hourly.assign(24, 0.0);
    if (trips.empty()) return f;
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < stations.size(); ++i) index[stations[i]] = i;
    auto cell = [&](const std::string& id) {
        auto it = index.find(id);
        if (it == index.end()) throw NotFoundError("unknown station '" + id + "'");
        return it->second;
    };
    for (const auto& t : trips) {
        f.presence[cell(t.entry_station)] += 1.0;
        f.presence[cell(t.exit_station)] += 1.0;
        const int hour = std::clamp(static_cast<int>(t.entry_time / 3600.0), 0, 23);
        f.hourly[hour] += 1.0;
    }
    f.entropy = spatial_entropy(f.presence);
    const double ps = 2.0 * static_cast<double>(trips.size());
    for (auto& x : f.presence) x /= ps;
    for (auto& x : f.hourly) x /= static_cast<double>(trips.size());
    return f;
}

Representation representation_from_string(const std::string& text)
{
    if (text == "histogram") return Representation::Histogram;
    if (text == "gmm_qfd") return Representation::GmmQfd;
    if (text == "gmm_kl") return Representation::GmmKl;
    throw ValidationError("unknown representation '" + text + "'");
}

const char* to_string(Representation rep)
{
    switch (rep) {
    case Representation::Histogram: return "histogram";
    case Representation::GmmQfd: return "gmm_qfd";
    case Representation::GmmKl: return "gmm_kl";
    }
    return "histogram";
}

std::vector<std::vector<TripObservation>> ClusterResult::training_set(const std::vector<UserTrips>& users,
                                                                     int cluster) const
{
    require(cluster >= 0 && cluster < static_cast<int>(members.size()), "unknown cluster");
    std::vector<std::vector<TripObservation>> out;
    for (std::size_t i : members[cluster]) out.push_back(users.at(i).trips);
    return out;
}

namespace {

Eigen::MatrixXd pairwise(std::size_t n, unsigned workers, const std::function<double(std::size_t, std::size_t)>& dist)
{
    auto rows = parallel_map<std::vector<double>>(
        n,
        [&](std::size_t i) {
            std::vector<double> row(n, 0.0);
            for (std::size_t j = i + 1; j < n; ++j) row[j] = dist(i, j);
            return row;
        },
        workers);
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) d(i, j) = d(j, i) = rows[i][j];
    return d;
}

} // namespace

ClusterResult cluster_users(const std::vector<UserTrips>& users, const std::vector<std::string>& stations,
                            const ClusterOptions& options)
{
    const std::size_t n = users.size();
    require(options.k >= 1, "k must be >= 1");
    require(n >= static_cast<std::size_t>(options.k), "fewer users than clusters");
    for (const auto& u : users) require(!u.trips.empty(), "user " + u.user_id + " has no trips");

    ClusterResult res;
    for (const auto& u : users) res.user_ids.push_back(u.user_id);

    if (options.representation == Representation::Histogram) {
        std::vector<Eigen::VectorXd> feats;
        for (const auto& u : users) feats.push_back(histogram_features(u.trips, stations).vector());
        res.distances = pairwise(n, options.workers, [&](std::size_t i, std::size_t j) { return (feats[i] - feats[j]).norm(); });
    } else {
        std::vector<ObservationSequence> raw;
        for (const auto& u : users) {
            ObservationSequence s;
            for (const auto& t : u.trips) s.push_back(observation_vector(t));
            raw.push_back(std::move(s));
        }
        const Scaler scaler = Scaler::fit(raw);
        for (auto& s : raw)
            for (auto& o : s) o = scaler.apply(o);
        // every user is fit with the same seed, so identical users get identical mixtures
        const auto gmms = parallel_map<Gmm>(
            n, [&](std::size_t i) { return fit_gmm(raw[i], options.gmm_components, options.seed); }, options.workers);
        if (options.representation == Representation::GmmQfd) {
            std::vector<GmmSignature> sigs;
            for (const auto& g : gmms) sigs.push_back(signature(g));
            res.alpha = median_alpha(sigs);
            const Kernel kernel{Kernel::Type::Gaussian, res.alpha};
            res.distances = pairwise(n, options.workers,
                                     [&](std::size_t i, std::size_t j) { return qfd(sigs[i], sigs[j], kernel); });
        } else {
            res.distances = pairwise(n, options.workers, [&](std::size_t i, std::size_t j) {
                return std::max(0.0, symmetric_kl_mc(gmms[i], gmms[j], options.kl_samples,
                                                     options.seed ^ (i * 7919 + j)).value);
            });
        }
    }

    // Gaussian affinity at the median heuristic over non-zero distances
    std::vector<double> d2;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (res.distances(i, j) > 0.0) d2.push_back(res.distances(i, j) * res.distances(i, j));
    const double a = d2.empty() ? 1.0 : 1.0 / stats::median(d2);
    res.affinity = (-a * res.distances.array().square()).exp().matrix();

    // users at distance 0 are interchangeable
    std::vector<int> group(n, -1);
    int groups = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (group[i] >= 0) continue;
        group[i] = groups;
        for (std::size_t j = i + 1; j < n; ++j)
            if (group[j] < 0 && res.distances(i, j) == 0.0) group[j] = groups;
        ++groups;
    }
    if (groups <= options.k) {
        res.labels = group;
    } else {
        std::vector<std::size_t> rep(groups);
        for (std::size_t i = n; i-- > 0;) rep[group[i]] = i;
        Eigen::MatrixXd reduced(groups, groups);
        for (int g = 0; g < groups; ++g)
            for (int h = 0; h < groups; ++h) reduced(g, h) = res.affinity(rep[g], rep[h]);
        const auto lab = spectral_clustering(reduced, options.k, options.seed);
        res.labels.resize(n);
        for (std::size_t i = 0; i < n; ++i) res.labels[i] = lab[group[i]];
    }
    const int n_labels = *std::max_element(res.labels.begin(), res.labels.end()) + 1;
    res.members.assign(n_labels, {});
    for (std::size_t i = 0; i < n; ++i) res.members[res.labels[i]].push_back(i);
    return res;
}

std::string affinity_csv(const Eigen::MatrixXd& m, const std::vector<std::string>& ids)
{
    require(static_cast<Eigen::Index>(ids.size()) == m.rows() && m.rows() == m.cols(), "matrix and id list disagree");
    std::ostringstream os;
    os.precision(17);
    os << "id";
    for (const auto& id : ids) os << ',' << id;
    os << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        os << ids[i];
        for (Eigen::Index j = 0; j < m.cols(); ++j) os << ',' << m(i, j);
        os << '\n';
    }
    return os.str();
}

std::string assignments_jsonl(const ClusterResult& r)
{
    std::string out;
    for (std::size_t i = 0; i < r.user_ids.size(); ++i)
        out += nlohmann::json{{"user_id", r.user_ids[i]}, {"cluster_id", r.labels[i]}}.dump() + "\n";
    return out;
}

} // namespace faster
