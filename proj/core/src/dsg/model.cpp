#include "faster/dsg/model.hpp"

#include "faster/common/error.hpp"
#include "faster/common/work_queue.hpp"
#include "faster/dsg/features.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

namespace faster {

namespace {

double sigmoid(double z)
{
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

std::uint64_t fnv1a(const std::string& s, std::uint64_t seed)
{
    std::uint64_t h = 1469598103934665603ULL ^ seed;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

void check_labels(const Eigen::MatrixXd& X, const std::vector<int>& y)
{
    require(X.rows() == static_cast<Eigen::Index>(y.size()), "feature rows and labels differ in length");
    require(X.rows() > 0, "no training rows");
    for (int v : y) require(v == 0 || v == 1, "labels must be 0 or 1");
}

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& X, const std::vector<std::size_t>& idx)
{
    Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), X.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(idx[i]));
    return out;
}

} // namespace

Normalizer Normalizer::fit(const Eigen::MatrixXd& rows)
{
    require(rows.rows() > 0, "no rows to normalize");
    Normalizer n;
    n.mean = rows.colwise().mean().transpose();
    n.scale = ((rows.rowwise() - n.mean.transpose()).array().square().colwise().mean()).sqrt().transpose();
    for (Eigen::Index i = 0; i < n.scale.size(); ++i)
        if (!(n.scale[i] > 1e-12)) n.scale[i] = 1.0;
    return n;
}

Eigen::VectorXd Normalizer::apply(const Eigen::VectorXd& x) const
{
    return (x - mean).cwiseQuotient(scale);
}

Eigen::MatrixXd Normalizer::apply(const Eigen::MatrixXd& rows) const
{
    return ((rows.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array()).matrix();
}

double LogisticModel::probability(const Eigen::VectorXd& x) const
{
    return sigmoid(weights.dot(x) + bias);
}

LogisticModel train_logistic(const Eigen::MatrixXd& X, const std::vector<int>& y, const TrainConfig& config,
                             const LogisticModel* init)
{
    check_labels(X, y);
    LogisticModel m;
    if (init && init->weights.size() == X.cols()) m = *init;
    else m.weights = Eigen::VectorXd::Zero(X.cols());
    Eigen::VectorXd target(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) target[i] = y[static_cast<std::size_t>(i)];
    const double n = static_cast<double>(X.rows());
    for (int e = 0; e < config.epochs; ++e) {
        Eigen::VectorXd z = (X * m.weights).array() + m.bias;
        Eigen::VectorXd r = z.unaryExpr([](double v) { return sigmoid(v); }) - target;
        const Eigen::VectorXd gw = X.transpose() * r / n + config.l2 * m.weights;
        const double gb = r.sum() / n;
        m.weights -= config.learning_rate * gw;
        m.bias -= config.learning_rate * gb;
    }
    return m;
}

double BaggedModel::probability(const Eigen::VectorXd& x) const
{
    require(!members.empty(), "untrained model");
    double s = 0.0;
    for (const auto& m : members) s += m.probability(x);
    return s / static_cast<double>(members.size());
}

BaggedModel train_bagged(const Eigen::MatrixXd& X, const std::vector<int>& y, const BootstrapConfig& bootstrap,
                         const TrainConfig& config, std::uint64_t seed, const BaggedModel* parent)
{
    check_labels(X, y);
    auto init_for = [&](std::size_t b) -> const LogisticModel* {
        if (!parent || parent->members.empty()) return nullptr;
        return &parent->members[b % parent->members.size()];
    };
    BaggedModel out;
    if (!bootstrap.enabled) {
        out.members.push_back(train_logistic(X, y, config, init_for(0)));
        return out;
    }
    require(bootstrap.resamples >= 1, "bootstrap needs at least one resample");
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < y.size(); ++i) (y[i] ? pos : neg).push_back(i);
    std::mt19937_64 rng(seed);
    const std::size_t n = y.size();
    for (int b = 0; b < bootstrap.resamples; ++b) {
        std::vector<std::size_t> idx;
        idx.reserve(n);
        if (pos.empty() || neg.empty()) {
            std::uniform_int_distribution<std::size_t> any(0, n - 1);
            for (std::size_t i = 0; i < n; ++i) idx.push_back(any(rng));
        } else {
            std::uniform_int_distribution<std::size_t> p(0, pos.size() - 1), q(0, neg.size() - 1);
            for (std::size_t i = 0; i < n; ++i) idx.push_back(i % 2 == 0 ? pos[p(rng)] : neg[q(rng)]);
        }
        std::vector<int> yb;
        yb.reserve(n);
        for (std::size_t i : idx) yb.push_back(y[i]);
        out.members.push_back(train_logistic(rows_of(X, idx), yb, config, init_for(static_cast<std::size_t>(b))));
    }
    return out;
}

std::vector<int> forward_select(const Eigen::MatrixXd& X, const std::vector<int>& y, const Trainer& trainer, int max_k,
                                int folds, std::uint64_t seed, SelectionMetric metric)
{
    check_labels(X, y);
    require(X.cols() >= 2, "forward selection needs at least 2 features");
    require(max_k >= 1, "max_k must be >= 1");
    require(folds >= 2, "need at least 2 folds");
    const int positives = static_cast<int>(std::count(y.begin(), y.end(), 1));
    require(positives > 0 && positives < static_cast<int>(y.size()), "labels have a single class");

    // stratified fold assignment
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < y.size(); ++i) (y[i] ? pos : neg).push_back(i);
    std::mt19937_64 rng(seed);
    std::shuffle(pos.begin(), pos.end(), rng);
    std::shuffle(neg.begin(), neg.end(), rng);
    std::vector<int> fold(y.size());
    for (std::size_t i = 0; i < pos.size(); ++i) fold[pos[i]] = static_cast<int>(i % folds);
    for (std::size_t i = 0; i < neg.size(); ++i) fold[neg[i]] = static_cast<int>(i % folds);

    auto score = [&](const std::vector<int>& cols) {
        Eigen::MatrixXd sub(X.rows(), static_cast<Eigen::Index>(cols.size()));
        for (std::size_t c = 0; c < cols.size(); ++c) sub.col(static_cast<Eigen::Index>(c)) = X.col(cols[c]);
        long tp = 0, tn = 0, fp = 0, fn = 0;
        for (int f = 0; f < folds; ++f) {
            std::vector<std::size_t> train, test;
            for (std::size_t i = 0; i < y.size(); ++i) (fold[i] == f ? test : train).push_back(i);
            if (test.empty()) continue;
            std::vector<int> yt;
            for (std::size_t i : train) yt.push_back(y[i]);
            const auto predict = trainer(rows_of(sub, train), yt);
            for (std::size_t i : test) {
                const bool flag = predict(sub.row(static_cast<Eigen::Index>(i)).transpose()) >= 0.5;
                if (flag && y[i]) ++tp;
                else if (flag) ++fp;
                else if (y[i]) ++fn;
                else ++tn;
            }
        }
        if (metric == SelectionMetric::Accuracy) return static_cast<double>(tp + tn) / static_cast<double>(y.size());
        const double tpr = tp + fn ? static_cast<double>(tp) / (tp + fn) : 1.0;
        const double tnr = tn + fp ? static_cast<double>(tn) / (tn + fp) : 1.0;
        return 0.5 * (tpr + tnr);
    };

    std::vector<int> chosen;
    double best = -std::numeric_limits<double>::infinity();
    while (static_cast<int>(chosen.size()) < std::min<int>(max_k, static_cast<int>(X.cols()))) {
        int pick = -1;
        double pick_score = best;
        for (int c = 0; c < X.cols(); ++c) {
            if (std::find(chosen.begin(), chosen.end(), c) != chosen.end()) continue;
            auto cols = chosen;
            cols.push_back(c);
            const double s = score(cols);
            if (s > pick_score) {
                pick_score = s;
                pick = c;
            }
        }
        if (pick < 0) break;
        chosen.push_back(pick);
        best = pick_score;
    }
    return chosen;
}

Level level_from_string(const std::string& text)
{
    if (text == "network") return Level::Network;
    if (text == "line") return Level::Line;
    if (text == "station") return Level::Station;
    throw ValidationError("unknown level '" + text + "'");
}

const char* to_string(Level level)
{
    switch (level) {
    case Level::Network: return "network";
    case Level::Line: return "line";
    case Level::Station: return "station";
    }
    return "network";
}

Eigen::VectorXd ModelHierarchy::prepare(const Eigen::VectorXd& raw) const
{
    require(raw.size() == normalizer.mean.size(), "feature vector has the wrong length");
    const Eigen::VectorXd z = normalizer.apply(raw);
    Eigen::VectorXd out(static_cast<Eigen::Index>(features.size()));
    for (std::size_t i = 0; i < features.size(); ++i) out[static_cast<Eigen::Index>(i)] = z[features[i]];
    return out;
}

ModelHierarchy train_hierarchy(const std::vector<LabeledWindow>& windows, const HierarchyConfig& config,
                               std::uint64_t seed)
{
    require(!windows.empty(), "no labeled windows");
    const auto d = windows.front().features.size();
    require(d > 0, "windows have no features");
    Eigen::MatrixXd raw(static_cast<Eigen::Index>(windows.size()), d);
    std::vector<int> y;
    ModelHierarchy h;
    for (std::size_t i = 0; i < windows.size(); ++i) {
        const auto& w = windows[i];
        require(w.features.size() == d, "windows differ in feature count");
        require(w.features.allFinite(), "non-finite feature value");
        raw.row(static_cast<Eigen::Index>(i)) = w.features.transpose();
        y.push_back(w.label);
        auto [it, inserted] = h.station_line.emplace(w.station, w.line);
        require(it->second == w.line, "station " + w.station + " appears on two lines");
    }
    h.normalizer = Normalizer::fit(raw);
    h.features = config.features;
    if (h.features.empty()) {
        h.features.resize(d);
        std::iota(h.features.begin(), h.features.end(), 0);
    }
    for (int f : h.features) require(f >= 0 && f < static_cast<int>(d), "selected feature out of range");

    Eigen::MatrixXd X(raw.rows(), static_cast<Eigen::Index>(h.features.size()));
    {
        const Eigen::MatrixXd z = h.normalizer.apply(raw);
        for (std::size_t c = 0; c < h.features.size(); ++c) X.col(static_cast<Eigen::Index>(c)) = z.col(h.features[c]);
    }
    h.network = train_bagged(X, y, config.bootstrap, config.train, fnv1a("network", seed));

    auto subset = [&](auto pred) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < windows.size(); ++i)
            if (pred(windows[i])) idx.push_back(i);
        return idx;
    };
    auto labels_of = [&](const std::vector<std::size_t>& idx) {
        std::vector<int> out;
        for (std::size_t i : idx) out.push_back(y[i]);
        return out;
    };

    std::vector<std::string> line_ids;
    for (const auto& [s, l] : h.station_line)
        if (std::find(line_ids.begin(), line_ids.end(), l) == line_ids.end()) line_ids.push_back(l);
    std::sort(line_ids.begin(), line_ids.end());
    const auto line_models = parallel_map<BaggedModel>(
        line_ids.size(),
        [&](std::size_t i) {
            const auto idx = subset([&](const LabeledWindow& w) { return w.line == line_ids[i]; });
            return train_bagged(rows_of(X, idx), labels_of(idx), config.bootstrap, config.train,
                                fnv1a("line:" + line_ids[i], seed), &h.network);
        },
        config.workers);
    for (std::size_t i = 0; i < line_ids.size(); ++i) h.lines[line_ids[i]] = line_models[i];

    std::vector<std::string> station_ids;
    for (const auto& [s, l] : h.station_line) station_ids.push_back(s);
    const auto station_models = parallel_map<std::optional<BaggedModel>>(
        station_ids.size(),
        [&](std::size_t i) -> std::optional<BaggedModel> {
            const auto idx = subset([&](const LabeledWindow& w) { return w.station == station_ids[i]; });
            const auto lab = labels_of(idx);
            if (idx.size() < 2 || std::count(lab.begin(), lab.end(), 1) == 0) return std::nullopt;
            const auto& parent = h.lines.at(h.station_line.at(station_ids[i]));
            return train_bagged(rows_of(X, idx), lab, config.bootstrap, config.train,
                                fnv1a("station:" + station_ids[i], seed), &parent);
        },
        config.workers);
    for (std::size_t i = 0; i < station_ids.size(); ++i) {
        if (station_models[i]) h.stations[station_ids[i]] = *station_models[i];
        else h.inherited.insert(station_ids[i]);
    }
    return h;
}

Classification classify(const LabeledWindow& window, const ModelHierarchy& h, Level level, double threshold)
{
    const Eigen::VectorXd x = h.prepare(window.features);
    Classification c;
    const BaggedModel* model = &h.network;
    c.level = Level::Network;
    if (level == Level::Station) {
        auto it = h.stations.find(window.station);
        if (it != h.stations.end()) {
            model = &it->second;
            c.level = Level::Station;
        } else if (!h.inherited.count(window.station)) {
            c.fell_back = true;
            std::cerr << "warning: no station model for '" << window.station << "', using its line model\n";
        }
    }
    if (level != Level::Network && c.level == Level::Network) {
        std::string line = window.line;
        if (auto s = h.station_line.find(window.station); s != h.station_line.end()) line = s->second;
        auto it = h.lines.find(line);
        if (it != h.lines.end()) {
            model = &it->second;
            c.level = Level::Line;
        } else {
            c.fell_back = true;
        }
    }
    c.probability = model->probability(x);
    c.flag = c.probability >= threshold;
    return c;
}

DetectionScores evaluate(const std::vector<bool>& flags, const std::vector<int>& truth)
{
    require(!flags.empty(), "nothing to evaluate");
    require(flags.size() == truth.size(), "flags and truth differ in length");
    DetectionScores s;
    for (std::size_t i = 0; i < flags.size(); ++i) {
        if (flags[i] && truth[i]) ++s.tp;
        else if (flags[i]) ++s.fp;
        else if (truth[i]) ++s.fn;
        else ++s.tn;
    }
    s.precision = s.tp + s.fp ? 100.0 * s.tp / static_cast<double>(s.tp + s.fp) : (s.fn == 0 ? 100.0 : 0.0);
    s.recall = s.tp + s.fn ? 100.0 * s.tp / static_cast<double>(s.tp + s.fn) : 100.0;
    s.accuracy = 100.0 * static_cast<double>(s.tp + s.tn) / static_cast<double>(flags.size());
    return s;
}

std::vector<LabeledWindow> read_windows_csv(std::istream& in)
{
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), "empty window file");
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::stringstream ss(s);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            if (!cell.empty() && cell.back() == '\r') cell.pop_back();
            out.push_back(cell);
        }
        return out;
    };
    const auto header = split(line);
    require(header.size() >= 5 && header[0] == "station" && header[1] == "line" && header[2] == "time" &&
                header.back() == "label",
            "window header must be station,line,time,<features>,label");
    const std::size_t nf = header.size() - 4;
    std::vector<LabeledWindow> out;
    int number = 1;
    while (std::getline(in, line)) {
        ++number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = split(line);
        require(cells.size() == header.size(), "line " + std::to_string(number) + ": wrong number of columns");
        LabeledWindow w;
        w.station = cells[0];
        w.line = cells[1];
        try {
            w.time = std::stod(cells[2]);
            w.features.resize(static_cast<Eigen::Index>(nf));
            for (std::size_t i = 0; i < nf; ++i) w.features[static_cast<Eigen::Index>(i)] = std::stod(cells[3 + i]);
            w.label = std::stoi(cells.back());
        } catch (const std::exception&) {
            throw ValidationError("line " + std::to_string(number) + ": malformed number");
        }
        require(w.label == 0 || w.label == 1, "line " + std::to_string(number) + ": label must be 0 or 1");
        out.push_back(std::move(w));
    }
    return out;
}

std::string windows_csv(const std::vector<LabeledWindow>& windows)
{
    std::ostringstream os;
    os.precision(17);
    os << "station,line,time";
    for (const auto& n : dsg_feature_names()) os << ',' << n;
    os << ",label\n";
    for (const auto& w : windows) {
        require(w.features.size() == DsgFeatures::kCount, "window feature count differs from the standard set");
        os << w.station << ',' << w.line << ',' << w.time;
        for (Eigen::Index i = 0; i < w.features.size(); ++i) os << ',' << w.features[i];
        os << ',' << w.label << '\n';
    }
    return os.str();
}

namespace {

nlohmann::json bagged_json(const BaggedModel& m)
{
    auto arr = nlohmann::json::array();
    for (const auto& mem : m.members)
        arr.push_back({{"weights", std::vector<double>(mem.weights.data(), mem.weights.data() + mem.weights.size())},
                       {"bias", mem.bias}});
    return arr;
}

BaggedModel bagged_from(const nlohmann::json& j)
{
    BaggedModel m;
    for (const auto& e : j) {
        LogisticModel l;
        const auto w = e.at("weights").get<std::vector<double>>();
        l.weights = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
        l.bias = e.at("bias").get<double>();
        m.members.push_back(l);
    }
    return m;
}

} // namespace

nlohmann::json to_json(const ModelHierarchy& h)
{
    nlohmann::json j;
    j["kind"] = "dsg_hierarchy";
    j["normalizer"] = {
        {"mean", std::vector<double>(h.normalizer.mean.data(), h.normalizer.mean.data() + h.normalizer.mean.size())},
        {"scale", std::vector<double>(h.normalizer.scale.data(), h.normalizer.scale.data() + h.normalizer.scale.size())}};
    j["features"] = h.features;
    j["network"] = bagged_json(h.network);
    j["lines"] = nlohmann::json::object();
    for (const auto& [k, v] : h.lines) j["lines"][k] = bagged_json(v);
    j["stations"] = nlohmann::json::object();
    for (const auto& [k, v] : h.stations) j["stations"][k] = bagged_json(v);
    j["station_line"] = h.station_line;
    j["inherited"] = h.inherited;
    return j;
}

ModelHierarchy hierarchy_from_json(const nlohmann::json& j)
{
    try {
        ModelHierarchy h;
        const auto mean = j.at("normalizer").at("mean").get<std::vector<double>>();
        const auto scale = j.at("normalizer").at("scale").get<std::vector<double>>();
        h.normalizer.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
        h.normalizer.scale = Eigen::Map<const Eigen::VectorXd>(scale.data(), static_cast<Eigen::Index>(scale.size()));
        h.features = j.at("features").get<std::vector<int>>();
        h.network = bagged_from(j.at("network"));
        for (const auto& [k, v] : j.at("lines").items()) h.lines[k] = bagged_from(v);
        for (const auto& [k, v] : j.at("stations").items()) h.stations[k] = bagged_from(v);
        h.station_line = j.at("station_line").get<std::map<std::string, std::string>>();
        h.inherited = j.at("inherited").get<std::set<std::string>>();
        return h;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("dsg model document: ") + e.what());
    }
}

} // namespace faster
