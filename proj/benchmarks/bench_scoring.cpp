#include "esncast/scoring.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

using namespace esncast;

static void BM_CrpsEnsemble(benchmark::State& state)
{
    std::mt19937_64 rng(5);
    std::normal_distribution<double> z;
    std::vector<double> members(static_cast<std::size_t>(state.range(0)));
    for (double& v : members)
        v = z(rng);
    for (auto _ : state)
        benchmark::DoNotOptimize(crps(members, 0.3));
}
BENCHMARK(BM_CrpsEnsemble)->Arg(50)->Arg(300)->Arg(2000);

static void BM_CrpsGaussian(benchmark::State& state)
{
    double y = 0.0;
    for (auto _ : state) {
        y += 1e-6;
        benchmark::DoNotOptimize(crps_gaussian(0.1, 1.3, y));
    }
}
BENCHMARK(BM_CrpsGaussian);
