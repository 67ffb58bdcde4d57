#include "esncast/dependence.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace esncast;

namespace {

Matrix sample_correlation(Index n, Index rows)
{
    std::mt19937_64 rng(3);
    std::normal_distribution<double> z;
    Matrix x(rows, n);
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < rows; ++i)
            x(i, j) = z(rng) + (j > 0 ? 0.5 * x(i, j - 1) : 0.0);
    return empirical_correlation(x).c;
}

}  // namespace

static void BM_SparseCorrelation(benchmark::State& state)
{
    const Matrix c = sample_correlation(state.range(0), 400);
    for (auto _ : state)
        benchmark::DoNotOptimize(sparse_correlation(c, 0.1).model.c.data());
}
BENCHMARK(BM_SparseCorrelation)->Arg(10)->Arg(40)->Unit(benchmark::kMillisecond);

static void BM_EmpiricalCorrelation(benchmark::State& state)
{
    std::mt19937_64 rng(4);
    std::normal_distribution<double> z;
    Matrix x(400, state.range(0));
    for (Index j = 0; j < x.cols(); ++j)
        for (Index i = 0; i < x.rows(); ++i)
            x(i, j) = z(rng);
    for (auto _ : state)
        benchmark::DoNotOptimize(empirical_correlation(x).c.data());
}
BENCHMARK(BM_EmpiricalCorrelation)->Arg(40)->Arg(200);
