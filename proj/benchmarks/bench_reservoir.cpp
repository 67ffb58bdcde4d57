#include "esncast/reservoir.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace esncast;

static void BM_UpdateState(benchmark::State& state)
{
    HyperParams hp;
    hp.n_h = state.range(0);
    const Index n_x = 40 * hp.m;
    const WeightMatrices wm = generate_weights(hp, n_x, 7);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> z;
    Vector x(n_x);
    for (Index i = 0; i < n_x; ++i)
        x(i) = z(rng);
    Vector h = Vector::Zero(hp.n_h);
    Vector scratch(hp.n_h);
    for (auto _ : state) {
        update_state_inplace(h, x, wm, hp, scratch);
        benchmark::DoNotOptimize(h.data());
    }
}
BENCHMARK(BM_UpdateState)->Arg(60)->Arg(180)->Arg(500);

static void BM_GenerateWeights(benchmark::State& state)
{
    HyperParams hp;
    hp.n_h = state.range(0);
    std::uint64_t seed = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(generate_weights(hp, 160, ++seed).rho_w);
}
BENCHMARK(BM_GenerateWeights)->Arg(60)->Arg(180);

static void BM_FitReadout(benchmark::State& state)
{
    std::mt19937_64 rng(2);
    std::normal_distribution<double> z;
    const Index n_h = state.range(0);
    Matrix h(980, n_h);
    Matrix y(980, 40);
    for (Index j = 0; j < h.cols(); ++j)
        for (Index i = 0; i < h.rows(); ++i)
            h(i, j) = z(rng);
    for (Index j = 0; j < y.cols(); ++j)
        for (Index i = 0; i < y.rows(); ++i)
            y(i, j) = z(rng);
    for (auto _ : state)
        benchmark::DoNotOptimize(fit_readout(h, y, 1e-3).b.data());
}
BENCHMARK(BM_FitReadout)->Arg(60)->Arg(180);
