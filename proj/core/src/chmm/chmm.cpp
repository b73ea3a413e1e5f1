#include "faster/chmm/chmm.hpp"

#include "faster/common/error.hpp"
#include "faster/common/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace faster {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double logsumexp(const Eigen::VectorXd& v)
{
    const double m = v.maxCoeff();
    if (!std::isfinite(m)) return m;
    return m + std::log((v.array() - m).exp().sum());
}

void normalize_rows(Eigen::MatrixXd& m)
{
    for (int i = 0; i < m.rows(); ++i) {
        const double s = m.row(i).sum();
        if (s > 0.0) m.row(i) /= s;
        else m.row(i).setConstant(1.0 / static_cast<double>(m.cols()));
    }
}

void regularize(Eigen::MatrixXd& cov)
{
    const double d = static_cast<double>(cov.rows());
    // relative ridge, with a floor for components sitting on (nearly) one point
    double reg = std::max(1e-6 * cov.trace() / d, 1e-9);
    if (!std::isfinite(reg)) reg = 1e-6;
    cov = 0.5 * (cov + cov.transpose());
    cov.diagonal().array() += reg;
}

/// Cached Cholesky factors for evaluating Gaussian log densities.
struct Gaussians {
    std::vector<Eigen::LLT<Eigen::MatrixXd>> llt;
    std::vector<double> log_norm;
    const std::vector<Eigen::VectorXd>* means = nullptr;

    Gaussians(const std::vector<Eigen::VectorXd>& mu, const std::vector<Eigen::MatrixXd>& cov) : means(&mu)
    {
        for (const auto& c : cov) {
            llt.emplace_back(c);
            if (llt.back().info() != Eigen::Success) throw NumericalError("covariance is not positive definite");
            const auto& L = llt.back().matrixL();
            double logdet = 0.0;
            for (int i = 0; i < c.rows(); ++i) logdet += 2.0 * std::log(L(i, i));
            log_norm.push_back(-0.5 * (static_cast<double>(c.rows()) * std::log(2.0 * std::numbers::pi) + logdet));
        }
    }

    Eigen::VectorXd log_pdf_all(int k, const Eigen::MatrixXd& X) const
    {
        Eigen::MatrixXd Z = llt[k].matrixL().solve(X.colwise() - (*means)[k]);
        return (log_norm[k] - 0.5 * Z.colwise().squaredNorm().array()).transpose();
    }

    double log_pdf(int k, const Eigen::VectorXd& x) const
    {
        Eigen::VectorXd z = llt[k].matrixL().solve(x - (*means)[k]);
        return log_norm[k] - 0.5 * z.squaredNorm();
    }
};

Eigen::MatrixXd log_g(const Eigen::MatrixXd& G)
{
    return G.unaryExpr([](double g) { return g > 0.0 ? std::log(g) : kNegInf; });
}

struct Accumulators {
    Eigen::VectorXd pi;
    Eigen::MatrixXd A_num;
    Eigen::MatrixXd G_num;
    Eigen::VectorXd weight;
    std::vector<Eigen::VectorXd> s1;
    std::vector<Eigen::MatrixXd> s2;

    Accumulators(int S, int K, int d)
        : pi(Eigen::VectorXd::Zero(S)), A_num(Eigen::MatrixXd::Zero(S, S)), G_num(Eigen::MatrixXd::Zero(S, K)),
          weight(Eigen::VectorXd::Zero(K)), s1(K, Eigen::VectorXd::Zero(d)), s2(K, Eigen::MatrixXd::Zero(d, d))
    {
    }
};

/// Scaled forward-backward on one sequence. Returns its log-likelihood and, when
/// `acc` is set, adds the sufficient statistics. `gamma_out` receives the smoothed
/// state posteriors when set.
double forward_backward(const Chmm& m, const Gaussians& gauss, const Eigen::MatrixXd& lg,
                        const ObservationSequence& seq, Accumulators* acc, Eigen::MatrixXd* gamma_out)
{
    const int S = m.n_states();
    const int K = m.n_clusters();
    const int T = static_cast<int>(seq.size());
    const int d = static_cast<int>(seq.front().size());
    Eigen::MatrixXd X(d, T);
    for (int t = 0; t < T; ++t) X.col(t) = seq[t];
    Eigen::MatrixXd logN(T, K);
    for (int k = 0; k < K; ++k) logN.col(k) = gauss.log_pdf_all(k, X);

    Eigen::MatrixXd logB(T, S);
    for (int t = 0; t < T; ++t)
        for (int j = 0; j < S; ++j) logB(t, j) = logsumexp(lg.row(j).transpose() + logN.row(t).transpose());

    Eigen::MatrixXd Bs(T, S);
    Eigen::VectorXd offset(T);
    for (int t = 0; t < T; ++t) {
        offset[t] = logB.row(t).maxCoeff();
        if (!std::isfinite(offset[t])) throw NumericalError("observation has zero likelihood under every state");
        Bs.row(t) = (logB.row(t).array() - offset[t]).exp();
    }

    Eigen::MatrixXd alpha(T, S);
    Eigen::VectorXd c(T);
    alpha.row(0) = m.pi.transpose().array() * Bs.row(0).array();
    for (int t = 0;; ++t) {
        c[t] = alpha.row(t).sum();
        if (!(c[t] > 0.0)) throw NumericalError("forward pass underflow");
        alpha.row(t) /= c[t];
        if (t + 1 == T) break;
        alpha.row(t + 1) = (alpha.row(t) * m.A).array() * Bs.row(t + 1).array();
    }
    double ll = 0.0;
    for (int t = 0; t < T; ++t) ll += std::log(c[t]) + offset[t];

    if (!acc && !gamma_out) return ll;

    Eigen::MatrixXd beta(T, S);
    beta.row(T - 1).setOnes();
    for (int t = T - 2; t >= 0; --t) {
        Eigen::RowVectorXd w = Bs.row(t + 1).array() * beta.row(t + 1).array();
        beta.row(t) = (m.A * w.transpose()).transpose() / c[t + 1];
    }
    Eigen::MatrixXd gamma = alpha.array() * beta.array();
    for (int t = 0; t < T; ++t) gamma.row(t) /= gamma.row(t).sum();
    if (gamma_out) *gamma_out = gamma;
    if (!acc) return ll;

    acc->pi += gamma.row(0).transpose();
    for (int t = 0; t + 1 < T; ++t) {
        Eigen::RowVectorXd w = Bs.row(t + 1).array() * beta.row(t + 1).array() / c[t + 1];
        acc->A_num.array() += (alpha.row(t).transpose() * w).array() * m.A.array();
    }
    Eigen::MatrixXd cluster_w = Eigen::MatrixXd::Zero(T, K);
    for (int t = 0; t < T; ++t) {
        for (int j = 0; j < S; ++j) {
            if (gamma(t, j) <= 0.0) continue;
            for (int k = 0; k < K; ++k) {
                if (!std::isfinite(lg(j, k))) continue;
                const double r = gamma(t, j) * std::exp(lg(j, k) + logN(t, k) - logB(t, j));
                acc->G_num(j, k) += r;
                cluster_w(t, k) += r;
            }
        }
    }
    for (int k = 0; k < K; ++k) {
        const Eigen::VectorXd w = cluster_w.col(k);
        acc->weight[k] += w.sum();
        acc->s1[k] += X * w;
        acc->s2[k] += X * w.asDiagonal() * X.transpose();
    }
    return ll;
}

void check_sequences(const std::vector<ObservationSequence>& sequences)
{
    require(!sequences.empty(), "no sequences");
    const auto d = sequences.front().empty() ? 0 : sequences.front().front().size();
    for (const auto& s : sequences) {
        require(!s.empty(), "empty observation sequence");
        for (const auto& o : s) {
            require(o.size() == d, "observation dimension mismatch");
            require(o.allFinite(), "non-finite observation");
        }
    }
    require(d >= 1, "observations have no dimensions");
}

Chmm initialize(const std::vector<ObservationSequence>& sequences, const FitOptions& opt)
{
    const int S = opt.n_states;
    const int K = opt.n_clusters;
    std::size_t n = 0;
    for (const auto& s : sequences) n += s.size();
    const int d = static_cast<int>(sequences.front().front().size());
    Eigen::MatrixXd points(static_cast<Eigen::Index>(n), d);
    Eigen::Index row = 0;
    for (const auto& s : sequences)
        for (const auto& o : s) points.row(row++) = o.transpose();
    require(static_cast<Eigen::Index>(K) <= points.rows(), "more clusters than observations");

    Eigen::VectorXd gmean = points.colwise().mean();
    Eigen::MatrixXd centered = points.rowwise() - gmean.transpose();
    Eigen::MatrixXd gcov = centered.transpose() * centered / static_cast<double>(n);
    regularize(gcov);

    auto km = kmeans(points, K, opt.seed, 3, 100);
    Chmm m;
    m.means.resize(K);
    m.covariances.resize(K);
    for (int k = 0; k < K; ++k) {
        m.means[k] = km.centers.row(k).transpose();
        Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
        int count = 0;
        for (Eigen::Index i = 0; i < points.rows(); ++i)
            if (km.labels[i] == k) {
                Eigen::VectorXd x = points.row(i).transpose() - m.means[k];
                cov += x * x.transpose();
                ++count;
            }
        if (count > d) {
            cov /= count;
            regularize(cov);
            m.covariances[k] = cov;
        } else {
            m.covariances[k] = gcov;
        }
    }

    std::mt19937_64 rng(opt.seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> jitter(0.0, 0.01);
    m.pi = Eigen::VectorXd::Constant(S, 1.0 / S);
    m.A.resize(S, S);
    for (int i = 0; i < S; ++i)
        for (int j = 0; j < S; ++j) m.A(i, j) = 1.0 + jitter(rng);
    normalize_rows(m.A);
    // States start out favoring different clusters; a uniform G makes every state
    // emit identically and EM cannot break the symmetry.
    m.G.resize(S, K);
    for (int j = 0; j < S; ++j)
        for (int k = 0; k < K; ++k) {
            const bool favored = K >= S ? k % S == j : j % K == k;
            m.G(j, k) = (favored ? static_cast<double>(K) : 1.0) + jitter(rng);
        }
    normalize_rows(m.G);
    return m;
}

/// Returns the number of clusters re-seeded.
int m_step(Chmm& m, const Accumulators& acc, double total_obs, std::size_t n_sequences)
{
    const int S = m.n_states();
    const int K = m.n_clusters();
    m.pi = acc.pi / static_cast<double>(n_sequences);
    m.pi /= m.pi.sum();
    for (int i = 0; i < S; ++i) {
        const double s = acc.A_num.row(i).sum();
        if (s > 0.0) m.A.row(i) = acc.A_num.row(i) / s;
    }
    for (int j = 0; j < S; ++j) {
        const double s = acc.G_num.row(j).sum();
        if (s > 0.0) m.G.row(j) = acc.G_num.row(j) / s;
    }
    int reseeds = 0;
    const double floor = 1e-8 * total_obs;
    std::vector<int> degenerate;
    for (int k = 0; k < K; ++k) {
        if (acc.weight[k] < floor) {
            degenerate.push_back(k);
            continue;
        }
        m.means[k] = acc.s1[k] / acc.weight[k];
        Eigen::MatrixXd cov = acc.s2[k] / acc.weight[k] - m.means[k] * m.means[k].transpose();
        regularize(cov);
        m.covariances[k] = cov;
    }
    for (int k : degenerate) {
        int widest = -1;
        double best = -1.0;
        for (int c = 0; c < K; ++c)
            if (acc.weight[c] >= floor && m.covariances[c].trace() > best) {
                best = m.covariances[c].trace();
                widest = c;
            }
        if (widest < 0) throw NumericalError("every cluster collapsed");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.covariances[widest]);
        const Eigen::VectorXd axis = es.eigenvectors().col(es.eigenvalues().size() - 1);
        const double spread = std::sqrt(std::max(es.eigenvalues().maxCoeff(), 0.0));
        m.means[k] = m.means[widest] + 0.5 * spread * axis;
        m.covariances[k] = m.covariances[widest];
        ++reseeds;
    }
    normalize_rows(m.A);
    normalize_rows(m.G);
    return reseeds;
}

double total_ll(const Chmm& m, const std::vector<ObservationSequence>& sequences, Accumulators* acc)
{
    Gaussians gauss(m.means, m.covariances);
    const Eigen::MatrixXd lg = log_g(m.G);
    double ll = 0.0;
    for (const auto& s : sequences) ll += forward_backward(m, gauss, lg, s, acc, nullptr);
    if (!std::isfinite(ll)) throw NumericalError("non-finite log-likelihood");
    return ll;
}

} // namespace

Scaler Scaler::fit(const std::vector<ObservationSequence>& sequences)
{
    check_sequences(sequences);
    const auto d = sequences.front().front().size();
    Scaler s;
    s.mean = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd sq = Eigen::VectorXd::Zero(d);
    double n = 0.0;
    for (const auto& seq : sequences)
        for (const auto& o : seq) {
            s.mean += o;
            sq += o.cwiseProduct(o);
            n += 1.0;
        }
    s.mean /= n;
    s.scale = (sq / n - s.mean.cwiseProduct(s.mean)).cwiseMax(0.0).cwiseSqrt();
    for (Eigen::Index i = 0; i < s.scale.size(); ++i)
        if (!(s.scale[i] > 1e-12)) s.scale[i] = 1.0;
    return s;
}

Eigen::VectorXd Scaler::apply(const Eigen::VectorXd& x) const
{
    if (mean.size() == 0) return x;
    return (x - mean).cwiseQuotient(scale);
}

FitResult fit_baum_welch(const std::vector<ObservationSequence>& sequences, const FitOptions& options)
{
    check_sequences(sequences);
    require(options.n_states >= 1, "n_states must be >= 1");
    require(options.n_clusters >= 1, "K must be >= 1");
    require(options.max_iter >= 0, "max_iter must be >= 0");

    FitResult res;
    res.model = initialize(sequences, options);
    Chmm& m = res.model;
    const int S = m.n_states();
    const int K = m.n_clusters();
    const int d = m.dim();
    double total_obs = 0.0;
    for (const auto& s : sequences) total_obs += static_cast<double>(s.size());

    for (int iter = 0; iter < options.max_iter; ++iter) {
        Accumulators acc(S, K, d);
        const double ll = total_ll(m, sequences, &acc);
        res.log_likelihood.push_back(ll);
        if (iter > 0) {
            const double prev = res.log_likelihood[res.log_likelihood.size() - 2];
            if (ll - prev <= options.tol * std::abs(prev)) {
                res.converged = true;
                res.iterations = iter;
                return res;
            }
        }
        res.reseeds += m_step(m, acc, total_obs, sequences.size());
        res.iterations = iter + 1;
    }
    res.log_likelihood.push_back(total_ll(m, sequences, nullptr));
    return res;
}

double log_likelihood(const Chmm& model, const std::vector<ObservationSequence>& sequences)
{
    check_sequences(sequences);
    return total_ll(model, sequences, nullptr);
}

Eigen::MatrixXd state_posteriors(const Chmm& model, const ObservationSequence& sequence)
{
    require(!sequence.empty(), "empty observation sequence");
    Gaussians gauss(model.means, model.covariances);
    Eigen::MatrixXd gamma;
    forward_backward(model, gauss, log_g(model.G), sequence, nullptr, &gamma);
    return gamma;
}

int select_clusters(const std::vector<ObservationSequence>& sequences, int n_states, const std::vector<int>& grid,
                    std::uint64_t seed, int max_iter)
{
    require(!grid.empty(), "empty cluster grid");
    check_sequences(sequences);
    double n = 0.0;
    for (const auto& s : sequences) n += static_cast<double>(s.size());
    const double d = static_cast<double>(sequences.front().front().size());
    int best_k = grid.front();
    double best_bic = std::numeric_limits<double>::infinity();
    for (int k : grid) {
        if (k < 1 || k > n) continue;
        FitOptions opt{n_states, k, max_iter, 1e-6, seed};
        const auto fit = fit_baum_welch(sequences, opt);
        const double S = n_states;
        const double params = S * (S - 1) + (S - 1) + S * (k - 1) + k * (d + d * (d + 1) / 2);
        const double bic = -2.0 * fit.log_likelihood.back() + params * std::log(n);
        if (bic < best_bic) {
            best_bic = bic;
            best_k = k;
        }
    }
    return best_k;
}

Eigen::VectorXd observation_vector(const TripObservation& trip)
{
    Eigen::VectorXd v(4);
    v << trip.entry_time, trip.duration, trip.exit_position.x, trip.exit_position.y;
    return v;
}

FitResult train_chmm(const std::vector<std::vector<TripObservation>>& users, const std::vector<std::string>& stations,
                     const FitOptions& options, const Scaler* shared)
{
    require(!stations.empty(), "no stations");
    std::vector<ObservationSequence> raw;
    raw.reserve(users.size());
    for (const auto& u : users) {
        require(!u.empty(), "user without trips");
        ObservationSequence seq;
        for (const auto& t : u) seq.push_back(observation_vector(t));
        raw.push_back(std::move(seq));
    }
    const Scaler scaler = shared ? *shared : Scaler::fit(raw);
    for (auto& seq : raw)
        for (auto& o : seq) o = scaler.apply(o);

    auto res = fit_baum_welch(raw, options);
    Chmm& m = res.model;
    m.scaler = scaler;
    m.stations = stations;
    std::sort(m.stations.begin(), m.stations.end());
    auto column = [&](const std::string& id) {
        auto it = std::lower_bound(m.stations.begin(), m.stations.end(), id);
        require(it != m.stations.end() && *it == id, "trip references unknown station '" + id + "'");
        return static_cast<int>(it - m.stations.begin());
    };
    const int S = m.n_states();
    const int C = static_cast<int>(m.stations.size());
    m.exit_table = Eigen::MatrixXd::Constant(S, C, 1e-9);
    m.entry_table = Eigen::MatrixXd::Zero(S, C);
    for (std::size_t u = 0; u < users.size(); ++u) {
        const auto gamma = state_posteriors(m, raw[u]);
        for (std::size_t t = 0; t < users[u].size(); ++t) {
            m.exit_table.col(column(users[u][t].exit_station)) += gamma.row(static_cast<Eigen::Index>(t)).transpose();
            m.entry_table.col(column(users[u][t].entry_station)) += gamma.row(static_cast<Eigen::Index>(t)).transpose();
        }
    }
    normalize_rows(m.exit_table);
    normalize_rows(m.entry_table);
    return res;
}

PredictMode predict_mode_from_string(const std::string& text)
{
    if (text == "baseline") return PredictMode::Baseline;
    if (text == "two_stage") return PredictMode::TwoStage;
    if (text == "online") return PredictMode::Online;
    throw ValidationError("unknown prediction mode '" + text + "'");
}

const char* to_string(PredictMode mode)
{
    switch (mode) {
    case PredictMode::Baseline: return "baseline";
    case PredictMode::TwoStage: return "two_stage";
    case PredictMode::Online: return "online";
    }
    return "baseline";
}

Eigen::VectorXd predict_state(const Chmm& model, const ObservationSequence& history, PredictMode mode,
                              const Eigen::VectorXd* partial, int entry_station)
{
    const int S = model.n_states();
    Eigen::VectorXd prior;
    if (history.empty()) {
        prior = model.pi;
    } else {
        // forward filtering: the state of the last observed trip
        Gaussians gauss(model.means, model.covariances);
        const Eigen::MatrixXd lg = log_g(model.G);
        Eigen::RowVectorXd alpha = model.pi.transpose();
        for (std::size_t t = 0; t < history.size(); ++t) {
            if (t > 0) alpha = alpha * model.A;
            Eigen::VectorXd lb(S);
            Eigen::VectorXd logN(model.n_clusters());
            for (int k = 0; k < model.n_clusters(); ++k) logN[k] = gauss.log_pdf(k, history[t]);
            for (int j = 0; j < S; ++j) lb[j] = logsumexp(lg.row(j).transpose() + logN);
            const double off = lb.maxCoeff();
            if (!std::isfinite(off)) throw NumericalError("history has zero likelihood");
            alpha = alpha.array() * (lb.array() - off).exp().transpose();
            const double s = alpha.sum();
            if (!(s > 0.0)) throw NumericalError("history has zero likelihood");
            alpha /= s;
        }
        prior = (alpha * model.A).transpose();
    }

    Eigen::VectorXd post = prior;
    if (mode != PredictMode::Baseline && partial) {
        require(model.dim() >= partial->size(), "partial observation longer than the model dimension");
        const int p = static_cast<int>(partial->size());
        Eigen::VectorXd logN(model.n_clusters());
        for (int k = 0; k < model.n_clusters(); ++k) {
            const Eigen::MatrixXd cov = model.covariances[k].topLeftCorner(p, p);
            Eigen::LLT<Eigen::MatrixXd> llt(cov);
            if (llt.info() != Eigen::Success) throw NumericalError("marginal covariance is not positive definite");
            Eigen::VectorXd z = llt.matrixL().solve(*partial - model.means[k].head(p));
            double logdet = 0.0;
            for (int i = 0; i < p; ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
            logN[k] = -0.5 * (p * std::log(2.0 * std::numbers::pi) + logdet + z.squaredNorm());
        }
        const Eigen::MatrixXd lg = log_g(model.G);
        Eigen::VectorXd lw(S);
        for (int j = 0; j < S; ++j)
            lw[j] = (prior[j] > 0.0 ? std::log(prior[j]) : kNegInf) + logsumexp(lg.row(j).transpose() + logN);
        const double off = lw.maxCoeff();
        if (std::isfinite(off)) post = (lw.array() - off).exp();
    }
    if (mode == PredictMode::Online && entry_station >= 0 && entry_station < model.entry_table.cols()) {
        Eigen::VectorXd with_entry = post.cwiseProduct(model.entry_table.col(entry_station));
        if (with_entry.sum() > 0.0) post = with_entry;
    }
    post /= post.sum();
    return post;
}

Prediction predict_exit(const Chmm& model, const std::vector<TripObservation>& history, PredictMode mode,
                        const NextTrip& next)
{
    require(!model.stations.empty(), "model has no station tables");
    ObservationSequence seq;
    for (const auto& t : history) seq.push_back(model.scaler.apply(observation_vector(t)));
    Eigen::VectorXd raw(4);
    raw << next.entry_time, next.duration, 0.0, 0.0;
    const Eigen::VectorXd partial = model.scaler.apply(raw).head(2);
    int entry = -1;
    auto it = std::lower_bound(model.stations.begin(), model.stations.end(), next.entry_station);
    if (it != model.stations.end() && *it == next.entry_station) entry = static_cast<int>(it - model.stations.begin());

    Prediction p;
    p.state_posterior = predict_state(model, seq, mode, &partial, entry);
    Eigen::VectorXd dist = model.exit_table.transpose() * p.state_posterior;
    dist /= dist.sum();
    for (Eigen::Index s = 0; s < dist.size(); ++s) p.distribution.emplace_back(model.stations[s], dist[s]);
    std::stable_sort(p.distribution.begin(), p.distribution.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    p.station = p.distribution.front().first;
    return p;
}

double accuracy(const std::vector<std::string>& predicted, const std::vector<std::string>& truth,
                const Network& network, double radius)
{
    require(predicted.size() == truth.size(), "prediction and truth lists differ in length");
    require(!predicted.empty(), "no predictions");
    int hits = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i)
        if (distance(network.station(predicted[i]).position, network.station(truth[i]).position) <= radius) ++hits;
    return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

namespace {

nlohmann::json matrix_json(const Eigen::MatrixXd& m)
{
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Eigen::MatrixXd matrix_from(const nlohmann::json& j)
{
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto data = j.at("data").get<std::vector<double>>();
    require(static_cast<Eigen::Index>(data.size()) == rows * cols, "matrix data size mismatch");
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = data[static_cast<std::size_t>(i * cols + k)];
    return m;
}

nlohmann::json vector_json(const Eigen::VectorXd& v)
{
    return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd vector_from(const nlohmann::json& j)
{
    const auto data = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(data.data(), static_cast<Eigen::Index>(data.size()));
}

} // namespace

nlohmann::json to_json(const Chmm& m)
{
    nlohmann::json j;
    j["kind"] = "chmm";
    j["pi"] = vector_json(m.pi);
    j["A"] = matrix_json(m.A);
    j["G"] = matrix_json(m.G);
    j["means"] = nlohmann::json::array();
    j["covariances"] = nlohmann::json::array();
    for (const auto& mu : m.means) j["means"].push_back(vector_json(mu));
    for (const auto& c : m.covariances) j["covariances"].push_back(matrix_json(c));
    if (m.scaler.mean.size() > 0) j["scaler"] = {{"mean", vector_json(m.scaler.mean)}, {"scale", vector_json(m.scaler.scale)}};
    if (!m.stations.empty()) {
        j["stations"] = m.stations;
        j["exit_table"] = matrix_json(m.exit_table);
        j["entry_table"] = matrix_json(m.entry_table);
    }
    return j;
}

Chmm chmm_from_json(const nlohmann::json& j)
{
    try {
        Chmm m;
        m.pi = vector_from(j.at("pi"));
        m.A = matrix_from(j.at("A"));
        m.G = matrix_from(j.at("G"));
        for (const auto& mu : j.at("means")) m.means.push_back(vector_from(mu));
        for (const auto& c : j.at("covariances")) m.covariances.push_back(matrix_from(c));
        if (j.contains("scaler")) {
            m.scaler.mean = vector_from(j.at("scaler").at("mean"));
            m.scaler.scale = vector_from(j.at("scaler").at("scale"));
        }
        if (j.contains("stations")) {
            m.stations = j.at("stations").get<std::vector<std::string>>();
            m.exit_table = matrix_from(j.at("exit_table"));
            m.entry_table = matrix_from(j.at("entry_table"));
        }
        const int S = m.n_states();
        require(m.A.cols() == S && m.pi.size() == S && m.G.rows() == S, "inconsistent state count");
        require(static_cast<int>(m.means.size()) == m.n_clusters() && m.covariances.size() == m.means.size(),
                "inconsistent cluster count");
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("chmm document: ") + e.what());
    }
}

} // namespace faster
