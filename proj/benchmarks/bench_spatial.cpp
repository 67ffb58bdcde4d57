#include "esncast/spatial.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace esncast;

namespace {

Locations random_sites(Index n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Locations s(n, 2);
    for (Index i = 0; i < n; ++i)
        s.row(i) << u(rng), u(rng);
    return s;
}

}  // namespace

static void BM_CorrelationMatrix(benchmark::State& state)
{
    const Locations st = random_sites(state.range(0), 6);
    const SpatialModel model(knot_grid(st), Vector::LinSpaced(6, 0.1, 0.4), 0.05);
    for (auto _ : state)
        benchmark::DoNotOptimize(model.correlation_matrix(st).data());
}
BENCHMARK(BM_CorrelationMatrix)->Arg(30)->Arg(120);

static void BM_Krige(benchmark::State& state)
{
    const Locations st = random_sites(60, 7);
    const SpatialModel model(knot_grid(st), Vector::LinSpaced(6, 0.1, 0.4), 0.05);
    const Index n = state.range(0);
    const Locations grid = regular_grid(0, 1, 0, 1, n, n);
    std::mt19937_64 rng(8);
    std::normal_distribution<double> z;
    Matrix means(20, 60);
    for (Index j = 0; j < means.cols(); ++j)
        for (Index i = 0; i < means.rows(); ++i)
            means(i, j) = z(rng);
    const Matrix sigmas = Matrix::Constant(20, 60, 0.8);
    for (auto _ : state)
        benchmark::DoNotOptimize(krige(st, means, sigmas, model, grid).mean.data());
}
BENCHMARK(BM_Krige)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);
