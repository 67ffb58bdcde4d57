#include "esncast/pipeline/lorenz_benchmark.hpp"
#include "esncast/pipeline/spatial_benchmark.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace esncast;
using namespace esncast::pipeline;

namespace {

LorenzBenchmarkSettings tiny_settings()
{
    LorenzBenchmarkSettings s;
    s.model.n_vars = 8;
    s.points = 220;
    s.realizations = 2;
    s.train = 200;
    s.test = 10;
    s.n_ens = 6;
    s.n_w = 6;
    s.hp.n_h = 40;
    s.hp.m = 2;
    s.arfima.max_p = 1;
    s.arfima.max_q = 0;
    s.arfima.d_grid = {0.0, 0.2};
    s.lambda_grid = {0.0, 0.1, 0.3};
    return s;
}

}  // namespace

TEST(LorenzBenchmark, ComparesFourMethods)
{
    const LorenzBenchmarkSettings s = tiny_settings();
    const auto data = lorenz96::simulate(s.model, s.points, s.realizations);
    const auto methods = compare_methods(data, s);
    ASSERT_EQ(methods.size(), 4u);
    EXPECT_EQ(methods[0].name, "ESN(alpha_hat)");
    EXPECT_EQ(methods[1].name, "ESN(alpha=1)");
    EXPECT_EQ(methods[2].name, "state-space");
    EXPECT_EQ(methods[3].name, "ARFIMA");
    for (const auto& m : methods) {
        ASSERT_EQ(m.mse.size(), static_cast<std::size_t>(s.model.n_vars * s.realizations)) << m.name;
        ASSERT_EQ(m.crps.size(), m.mse.size());
        for (std::size_t i = 0; i < m.mse.size(); ++i) {
            EXPECT_TRUE(std::isfinite(m.mse[i]) && m.mse[i] >= 0.0);
            EXPECT_TRUE(std::isfinite(m.crps[i]) && m.crps[i] >= 0.0);
        }
    }
    const std::string table = format_method_table(methods);
    EXPECT_NE(table.find("method"), std::string::npos);
    EXPECT_NE(table.find("ARFIMA"), std::string::npos);
    EXPECT_NE(table.find('('), std::string::npos);
    EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 5);

    const auto again = compare_methods(data, s);
    for (std::size_t k = 0; k < methods.size(); ++k)
        EXPECT_EQ(again[k].mse, methods[k].mse);
}

TEST(LorenzBenchmark, UncertaintyStudyShapes)
{
    const LorenzBenchmarkSettings s = tiny_settings();
    const auto data = lorenz96::simulate(s.model, s.points, s.realizations);
    const UncertaintyStudy u = study_uncertainty(data, s);
    ASSERT_EQ(u.runs.size(), data.size());
    EXPECT_EQ(u.test, s.test);
    EXPECT_EQ(u.levels, s.levels);
    for (const RealizationStudy& r : u.runs) {
        ASSERT_EQ(r.covered_calibrated.size(), s.levels.size());
        ASSERT_EQ(r.covered_uncalibrated.size(), s.levels.size());
        for (const Vector& v : r.covered_calibrated) {
            ASSERT_EQ(v.size(), s.model.n_vars);
            EXPECT_GE(v.minCoeff(), 0.0);
            EXPECT_LE(v.maxCoeff(), static_cast<double>(s.test));
        }
        // Wider levels cover at least as often.
        for (std::size_t i = 0; i + 1 < s.levels.size(); ++i)
            EXPECT_TRUE((r.covered_calibrated[i].array() >= r.covered_calibrated[i + 1].array()).all());
        EXPECT_GE(r.ks_calibrated, 0.0);
        EXPECT_LE(r.ks_calibrated, 1.0);
        ASSERT_EQ(r.nonzero.size(), s.lambda_grid.size());
        ASSERT_EQ(r.variance_ratio.size(), s.lambda_grid.size());
        for (std::size_t i = 0; i + 1 < r.nonzero.size(); ++i)
            EXPECT_GE(r.nonzero[i], r.nonzero[i + 1]);
        EXPECT_LT(r.lambda0_max_diff, 1e-6);
        EXPECT_EQ(r.pair_dependent.size(), s.levels.size());
        EXPECT_EQ(r.grand_dependent.size(), s.levels.size());
        EXPECT_EQ(r.grand_independent.size(), s.levels.size());
    }
    for (std::size_t i = 0; i < s.levels.size(); ++i) {
        const double c = u.median_coverage(i, true);
        EXPECT_GE(c, 0.0);
        EXPECT_LE(c, 1.0);
    }
}

TEST(SpatialBenchmark, SmallRunIsDeterministic)
{
    SpatialBenchmarkSettings s;
    s.n_stations = 30;
    s.n_calibration = 150;
    s.n_test = 300;
    const auto a = run_spatial_benchmark(s);
    const auto b = run_spatial_benchmark(s);
    EXPECT_EQ(a.shrunk, b.shrunk);
    EXPECT_EQ(a.delta, b.delta);
    EXPECT_EQ(a.stations.rows(), s.n_stations);
    ASSERT_EQ(a.shrunk.size(), s.levels.size());
    ASSERT_EQ(a.independent.size(), s.levels.size());
    EXPECT_GE(a.delta, 0.0);
    EXPECT_LE(a.delta, 1.0);
    for (std::size_t i = 0; i < s.levels.size(); ++i) {
        EXPECT_GE(a.shrunk[i], 0.0);
        EXPECT_LE(a.shrunk[i], 1.0);
        // Positively correlated stations make the independence interval too narrow.
        EXPECT_LT(a.independent[i], a.oracle[i]);
    }

    s.seed = 2;
    EXPECT_NE(run_spatial_benchmark(s).shrunk, a.shrunk);
}
