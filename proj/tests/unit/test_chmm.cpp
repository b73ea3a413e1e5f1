#include <doctest.h>

#include "chmm_synth.hpp"

#include "faster/chmm/chmm.hpp"
#include "faster/common/error.hpp"
#include "faster/common/io.hpp"

#include <cmath>
#include <sstream>

using namespace faster;

namespace {

Chmm recovery_truth()
{
    auto m = testing::planted_chmm(3, 3, 4, 6.0, 1);
    m.A << 0.1, 0.7, 0.2, 0.2, 0.1, 0.7, 0.6, 0.3, 0.1;
    m.G << 0.9, 0.05, 0.05, 0.05, 0.9, 0.05, 0.05, 0.05, 0.9;
    return m;
}

void check_stochastic(const Chmm& m)
{
    CHECK(std::abs(m.pi.sum() - 1.0) < 1e-9);
    for (int i = 0; i < m.n_states(); ++i) {
        CHECK(std::abs(m.A.row(i).sum() - 1.0) < 1e-9);
        CHECK(std::abs(m.G.row(i).sum() - 1.0) < 1e-9);
    }
    CHECK(m.A.minCoeff() >= 0.0);
    CHECK(m.G.minCoeff() >= 0.0);
    for (const auto& c : m.covariances) {
        CHECK((c - c.transpose()).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(c).eigenvalues().minCoeff() > 0.0);
    }
}

/// Two states, each emitting one cluster; clusters separate on entry time only.
Chmm two_state_model()
{
    Chmm m;
    m.pi = Eigen::Vector2d(0.5, 0.5);
    m.A = Eigen::Matrix2d::Constant(0.5);
    m.G = Eigen::Matrix2d::Identity();
    Eigen::VectorXd a(4), b(4);
    a << -2, 0, 0, 0;
    b << 2, 0, 0, 0;
    m.means = {a, b};
    m.covariances = {Eigen::MatrixXd::Identity(4, 4), Eigen::MatrixXd::Identity(4, 4)};
    m.stations = {"S0", "S1"};
    m.exit_table = Eigen::Matrix2d::Identity();
    m.entry_table = Eigen::Matrix2d::Identity();
    return m;
}

} // namespace

TEST_CASE("single state, single cluster is the sample moments")
{
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n(3.0, 2.0);
    std::vector<ObservationSequence> seqs(20);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(2);
    int count = 0;
    for (auto& s : seqs)
        for (int t = 0; t < 10; ++t) {
            Eigen::VectorXd x(2);
            x << n(rng), n(rng);
            s.push_back(x);
            mean += x;
            ++count;
        }
    mean /= count;
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(2, 2);
    for (const auto& s : seqs)
        for (const auto& x : s) cov += (x - mean) * (x - mean).transpose();
    cov /= count;

    auto fit = fit_baum_welch(seqs, {1, 1, 20, 1e-10, 0});
    CHECK(fit.model.A(0, 0) == doctest::Approx(1.0));
    CHECK(fit.model.G(0, 0) == doctest::Approx(1.0));
    CHECK((fit.model.means[0] - mean).norm() < 1e-9);
    CHECK((fit.model.covariances[0] - cov).cwiseAbs().maxCoeff() < 1e-4 * cov.trace());
}

TEST_CASE("EM trace is non-decreasing and parameters stay stochastic")
{
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        std::mt19937_64 rng(seed);
        auto truth = testing::planted_chmm(3, 4, 4, 3.0, seed);
        auto data = testing::sample_chmm(truth, 60, 20, seed + 100);
        auto fit = fit_baum_welch(data, {3, 4, 60, 1e-8, seed});
        for (std::size_t i = 1; i < fit.log_likelihood.size(); ++i)
            CHECK(fit.log_likelihood[i] >= fit.log_likelihood[i - 1] - 1e-9 * std::abs(fit.log_likelihood[i - 1]));
        check_stochastic(fit.model);
    }
}

TEST_CASE("planted model is recovered")
{
    const auto truth = recovery_truth();
    auto data = testing::sample_chmm(truth, 500, 60, 9);
    auto fit = fit_baum_welch(data, {3, 3, 200, 1e-9, 9});
    CHECK(testing::aligned_transition_error(truth, fit.model) < 0.1);
}

TEST_CASE("fit input validation")
{
    CHECK_THROWS_AS(fit_baum_welch({}, {}), ValidationError);
    CHECK_THROWS_AS(fit_baum_welch({ObservationSequence{}}, {}), ValidationError);
    ObservationSequence s{Eigen::VectorXd::Zero(2), Eigen::VectorXd::Ones(2)};
    CHECK_THROWS_AS(fit_baum_welch({s}, {1, 0, 5, 1e-6, 0}), ValidationError);
}

TEST_CASE("deterministic chain predicts the successor")
{
    Chmm m;
    m.pi = Eigen::Vector3d::Constant(1.0 / 3);
    m.A.resize(3, 3);
    m.A << 0, 1, 0, 0, 0, 1, 1, 0, 0;
    m.G = Eigen::Matrix3d::Identity();
    for (int k = 0; k < 3; ++k) {
        Eigen::VectorXd mu = Eigen::VectorXd::Zero(4);
        mu[0] = 10.0 * k;
        m.means.push_back(mu);
        m.covariances.push_back(Eigen::MatrixXd::Identity(4, 4));
    }
    for (int i = 0; i < 3; ++i) {
        ObservationSequence hist{m.means[i]};
        Eigen::VectorXd partial = m.means[(i + 1) % 3].head(2);
        for (auto mode : {PredictMode::Baseline, PredictMode::TwoStage, PredictMode::Online}) {
            auto p = predict_state(m, hist, mode, mode == PredictMode::Baseline ? nullptr : &partial, -1);
            CHECK(p[(i + 1) % 3] == doctest::Approx(1.0));
        }
    }
}

TEST_CASE("two-stage sharpens the posterior when entry time is informative")
{
    auto m = two_state_model();
    ObservationSequence hist{m.means[0]};
    Eigen::VectorXd partial = Eigen::Vector2d(2.0, 0.0); // inside cluster 1
    auto base = predict_state(m, hist, PredictMode::Baseline, nullptr, -1);
    auto two = predict_state(m, hist, PredictMode::TwoStage, &partial, -1);
    CHECK(two[1] > base[1]);
    // direct Bayes: prior (0.5, 0.5), likelihood ratio exp(-8)/1 on dim 0
    CHECK(two[1] == doctest::Approx(1.0 / (1.0 + std::exp(-8.0))));
    CHECK(std::abs(two.sum() - 1.0) < 1e-9);
}

TEST_CASE("online mode with an exclusive entry station")
{
    auto m = two_state_model();
    Eigen::VectorXd partial = Eigen::Vector2d(-2.0, 0.0);
    auto p = predict_state(m, {}, PredictMode::Online, &partial, 1);
    CHECK(p[1] == doctest::Approx(1.0));
    CHECK(p[0] == doctest::Approx(0.0));
}

TEST_CASE("empty history uses the prior")
{
    auto m = two_state_model();
    m.pi = Eigen::Vector2d(0.3, 0.7);
    auto p = predict_state(m, {}, PredictMode::Baseline, nullptr, -1);
    CHECK(p[0] == doctest::Approx(0.3));
}

TEST_CASE("accuracy uses the radius rule")
{
    Network net({{"A", {0, 0}, 10}, {"B", {800, 0}, 10}, {"C", {5000, 0}, 10}}, {});
    CHECK(accuracy({"A", "B"}, {"A", "B"}, net) == 1.0);
    CHECK(accuracy({"B"}, {"A"}, net, 1000.0) == 1.0);
    CHECK(accuracy({"A", "B", "C", "C", "A"}, {"A", "A", "A", "B", "B"}, net) == doctest::Approx(0.6));
    CHECK_THROWS_AS(accuracy({"A"}, {"A", "B"}, net), ValidationError);
}

TEST_CASE("trip log parsing and training on stations")
{
    const auto net = load_network(io::read_json(FASTER_FIXTURE_DIR "/network_5station.json"));
    std::stringstream in;
    std::mt19937_64 rng(1);
    for (int u = 0; u < 20; ++u)
        for (int d = 0; d < 10; ++d) {
            in << R"({"user_id":"u)" << u << R"(","entry_station":"A","entry_time":)" << 8 * 3600 + (rng() % 600)
               << R"(,"exit_station":"E","exit_time":)" << 8 * 3600 + 1800 << "}\n";
            in << R"({"user_id":"u)" << u << R"(","entry_station":"E","entry_time":)" << 17 * 3600 + (rng() % 600)
               << R"(,"exit_station":"A","exit_time":)" << 17 * 3600 + 1800 << "}\n";
        }
    in << "not json\n";
    CHECK_THROWS_AS([&] {
        std::stringstream copy(in.str());
        read_trips_jsonl(copy, true);
    }(), ValidationError);
    auto log = read_trips_jsonl(in, false);
    CHECK(log.trips.size() == 400);
    REQUIRE(log.errors.size() == 1);
    CHECK(log.errors[0].line == 401);

    auto seqs = build_sequences(log.trips, net);
    CHECK(seqs.size() == 20);
    std::vector<std::vector<TripObservation>> users;
    for (auto& [id, s] : seqs) users.push_back(s);
    CHECK(users[0][1].duration > 0);

    std::vector<std::string> stations;
    for (const auto& s : net.stations()) stations.push_back(s.id);
    auto fit = train_chmm(users, stations, {2, 2, 50, 1e-8, 3});
    check_stochastic(fit.model);
    std::vector<TripObservation> hist(users[0].begin(), users[0].begin() + 3); // ends at E in the morning
    auto pred = predict_exit(fit.model, hist, PredictMode::TwoStage, {17 * 3600.0 + 100, 30700.0, "E"});
    CHECK(pred.station == "A");
    double total = 0.0;
    for (const auto& [s, p] : pred.distribution) total += p;
    CHECK(std::abs(total - 1.0) < 1e-9);

    auto round = chmm_from_json(nlohmann::json::parse(to_json(fit.model).dump()));
    CHECK(round.A == fit.model.A);
    CHECK(round.covariances[1] == fit.model.covariances[1]);
    CHECK(round.stations == fit.model.stations);
    auto again = predict_exit(round, hist, PredictMode::TwoStage, {17 * 3600.0 + 100, 30700.0, "E"});
    CHECK(again.distribution == pred.distribution);
}

TEST_CASE("cluster count selection returns a grid member")
{
    auto truth = testing::planted_chmm(2, 3, 2, 8.0, 2);
    auto data = testing::sample_chmm(truth, 40, 15, 5);
    const int k = select_clusters(data, 2, {1, 2, 3, 4}, 0, 40);
    CHECK(k == 3);
}
