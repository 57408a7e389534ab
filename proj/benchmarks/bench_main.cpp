#include <eqdisc/evolution.hpp>
#include <eqdisc/floquet_lab.hpp>
#include <eqdisc/grid_data.hpp>
#include <eqdisc/pde_lab.hpp>
#include <eqdisc/sparse_regression.hpp>

#include <benchmark/benchmark.h>

#include <random>

using namespace eqdisc;

namespace {

RegressionProblem random_problem(int n, int p) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> normal;
    RegressionProblem prob;
    prob.features.resize(n, p);
    prob.target.resize(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j)
            prob.features(i, j) = normal(rng);
        prob.target[i] = normal(rng);
    }
    prob.lambda = 0.05 * lambda_scale(prob.features, prob.target, PenaltyScaling::Plain);
    return prob;
}

struct WaveSetup {
    Workspace ws;
    DerivativeFamily family;
};

const WaveSetup& wave_setup() {
    static const WaveSetup setup = [] {
        const GridField field = generate_field(default_wave_spec());
        Workspace ws = build_workspace(field, WorkspaceSpec{});
        DerivativeFamily fam = derivative_family(field, 2, 3);
        precompute_tokens(ws, fam);
        return WaveSetup{std::move(ws), fam};
    }();
    return setup;
}

} // namespace

static void BM_LassoFit(benchmark::State& state) {
    const RegressionProblem prob = random_problem(static_cast<int>(state.range(0)), 7);
    for (auto _ : state)
        benchmark::DoNotOptimize(lasso_fit(prob));
}
BENCHMARK(BM_LassoFit)->Arg(50)->Arg(1000)->Arg(8464);

static void BM_ComputeFitness(benchmark::State& state) {
    const WaveSetup& s = wave_setup();
    EvolutionConfig cfg;
    Rng rng(3);
    auto pop = init_population(cfg, s.family, rng);
    std::size_t i = 0;
    for (auto _ : state) {
        Individual ind = pop[i++ % pop.size()];
        benchmark::DoNotOptimize(compute_fitness(ind, s.ws, cfg));
    }
}
BENCHMARK(BM_ComputeFitness);

static void BM_Differentiate(benchmark::State& state) {
    const GridField field = generate_field(default_wave_spec());
    DiffSpec spec;
    spec.axis = 1;
    spec.order = static_cast<int>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(differentiate(field, spec));
}
BENCHMARK(BM_Differentiate)->Arg(1)->Arg(2);

static void BM_SolveForcing(benchmark::State& state) {
    RodSpec rod;
    rod.absorber_blocks = static_cast<int>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(solve_forcing(0.77, rod));
}
BENCHMARK(BM_SolveForcing)->Arg(0)->Arg(400);

static void BM_EvolveWave(benchmark::State& state) {
    const WaveSetup& s = wave_setup();
    EvolutionConfig cfg;
    cfg.n_epochs = static_cast<int>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(evolve(cfg, s.ws, s.family));
}
BENCHMARK(BM_EvolveWave)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
