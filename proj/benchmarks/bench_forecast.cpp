#include "esncast/forecasting.hpp"
#include "esncast/lorenz96.hpp"

#include <benchmark/benchmark.h>

using namespace esncast;

static void BM_IterativeForecast(benchmark::State& state)
{
    lorenz96::Config cfg;
    const Matrix y = lorenz96::simulate(cfg, 1000, 1).front();
    const Matrix train = y.topRows(980);
    HyperParams hp;
    hp.alpha = 0.0023;
    const Index n_ens = state.range(0);
    for (auto _ : state)
        benchmark::DoNotOptimize(iterative_forecast(train, hp, 20, n_ens, 1).mean.data());
    state.SetItemsProcessed(state.iterations() * n_ens);
}
BENCHMARK(BM_IterativeForecast)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

static void BM_Lorenz96Simulate(benchmark::State& state)
{
    lorenz96::Config cfg;
    for (auto _ : state)
        benchmark::DoNotOptimize(lorenz96::simulate(cfg, 1000, 1).front().data());
}
BENCHMARK(BM_Lorenz96Simulate)->Unit(benchmark::kMillisecond);
