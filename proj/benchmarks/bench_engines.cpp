#include "faster/chmm/chmm.hpp"
#include "faster/cluster/distance.hpp"
#include "faster/cluster/gmm.hpp"
#include "faster/cluster/spectral.hpp"
#include "faster/opt/optimize.hpp"
#include "faster/sim/scenario.hpp"
#include "faster/sim/simulator.hpp"

#include "chmm_synth.hpp"
#include "mip_fixture.hpp"
#include "throughput_scenario.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace faster;

static void BM_SimulateHour(benchmark::State& state)
{
    const auto scenario = testing::throughput_scenario(static_cast<int>(state.range(0)));
    long groups = 0;
    for (auto _ : state) {
        auto m = simulate(scenario);
        benchmark::DoNotOptimize(m.arrived);
        groups += state.range(0);
    }
    state.counters["groups/s"] = benchmark::Counter(static_cast<double>(groups), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_SimulateHour)->Arg(1000)->Arg(10000)->Arg(40000)->Unit(benchmark::kMillisecond);

static void BM_TimeExpandedGraph(benchmark::State& state)
{
    const auto scenario = testing::throughput_scenario(0, 1, static_cast<int>(state.range(0)));
    for (auto _ : state) {
        auto g = build_time_expanded_graph(scenario.network, scenario.graph_options());
        benchmark::DoNotOptimize(g.arcs().size());
    }
}
BENCHMARK(BM_TimeExpandedGraph)->Arg(60)->Arg(240)->Unit(benchmark::kMillisecond);

static void BM_MipOracleInstances(benchmark::State& state)
{
    const auto fixture = testing::mip_oracle_fixture();
    std::vector<MipInstance> instances;
    for (const auto& inst : fixture.at("instances")) instances.push_back(testing::oracle_instance(inst));
    SolveOptions opts;
    opts.mode = state.range(0) ? SolveMode::ExactSmall : SolveMode::Heuristic;
    opts.workers = 1;
    for (auto _ : state)
        for (const auto& m : instances) {
            auto r = solve(m, opts);
            benchmark::DoNotOptimize(r.best.front().objective);
        }
    state.SetLabel(state.range(0) ? "exact" : "heuristic");
}
BENCHMARK(BM_MipOracleInstances)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

static void BM_OptimizeFixture(benchmark::State& state)
{
    Scenario s = load_scenario(std::string(FASTER_FIXTURE_DIR) + "/scenario_5station.json");
    s.incidents.push_back(incident_from_json(io::read_json(std::string(FASTER_FIXTURE_DIR) + "/incident_bc.json"),
                                             s.origin_seconds, s.dt_seconds));
    OptimizeOptions opts;
    opts.workers = 1;
    for (auto _ : state) {
        auto r = optimize(s, opts);
        benchmark::DoNotOptimize(r.plans.size());
    }
}
BENCHMARK(BM_OptimizeFixture)->Unit(benchmark::kMillisecond);

namespace {

Gmm random_gmm(std::mt19937_64& rng, int k, int dim)
{
    std::normal_distribution<double> g(0.0, 2.0);
    Gmm m;
    for (int c = 0; c < k; ++c) {
        Eigen::VectorXd mu(dim);
        for (int i = 0; i < dim; ++i) mu[i] = g(rng);
        m.means.push_back(mu);
        m.covariances.push_back(Eigen::MatrixXd::Identity(dim, dim));
        m.weights.push_back(1.0 / k);
    }
    return m;
}

} // namespace

static void BM_Qfd(benchmark::State& state)
{
    std::mt19937_64 rng(5);
    const auto a = random_gmm(rng, 3, 4), b = random_gmm(rng, 3, 4);
    const Kernel kernel{Kernel::Type::Gaussian, 0.1};
    for (auto _ : state) benchmark::DoNotOptimize(qfd(signature(a), signature(b), kernel));
}
BENCHMARK(BM_Qfd);

static void BM_SymmetricKlMc(benchmark::State& state)
{
    std::mt19937_64 rng(5);
    const auto a = random_gmm(rng, 3, 4), b = random_gmm(rng, 3, 4);
    for (auto _ : state)
        benchmark::DoNotOptimize(symmetric_kl_mc(a, b, static_cast<int>(state.range(0)), 1).value);
}
BENCHMARK(BM_SymmetricKlMc)->Arg(1000)->Arg(10000)->Unit(benchmark::kMicrosecond);

static void BM_ChmmFit(benchmark::State& state)
{
    const auto truth = testing::planted_chmm(3, 3, 4, 5.0, 2);
    const auto data = testing::sample_chmm(truth, static_cast<int>(state.range(0)), 40, 3);
    for (auto _ : state) {
        auto fit = fit_baum_welch(data, {3, 3, 50, 1e-6, 4});
        benchmark::DoNotOptimize(fit.iterations);
    }
}
BENCHMARK(BM_ChmmFit)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

static void BM_SpectralClustering(benchmark::State& state)
{
    const int n = static_cast<int>(state.range(0));
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> noise(0.0, 0.1);
    Eigen::MatrixXd w(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) w(i, j) = w(j, i) = (i % 3 == j % 3 ? 0.9 : 0.05) + noise(rng);
    for (auto _ : state) benchmark::DoNotOptimize(spectral_clustering(w, 3, 0).size());
}
BENCHMARK(BM_SpectralClustering)->Arg(60)->Arg(240)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
