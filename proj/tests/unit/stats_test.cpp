#include "esncast/stats.hpp"

#include "test_util.hpp"

#include <cmath>
#include <numeric>

using namespace esncast;

TEST(Normal, CdfAndQuantileAreInverse)
{
    EXPECT_DOUBLE_EQ(stats::normal_cdf(0.0), 0.5);
    EXPECT_NEAR(stats::normal_cdf(1.959963984540054), 0.975, 1e-12);
    for (double p : {1e-6, 0.01, 0.2, 0.5, 0.8, 0.99, 1 - 1e-6})
        EXPECT_NEAR(stats::normal_cdf(stats::normal_quantile(p)), p, 1e-12);
    EXPECT_ERRC(stats::normal_quantile(0.0), Errc::invalid_argument);
}

TEST(Normal, CentralCriticalValues)
{
    EXPECT_NEAR(stats::central_z(0.95), 1.959964, 1e-6);
    EXPECT_NEAR(stats::central_z(0.80), 1.281552, 1e-6);
    EXPECT_NEAR(stats::central_z(0.60), 0.841621, 1e-6);
    EXPECT_ERRC(stats::central_z(1.0), Errc::bad_level);
    EXPECT_ERRC(stats::central_z(0.0), Errc::bad_level);
}

TEST(Summation, PairwiseMatchesNaiveAndIsOrderStable)
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> v(1001);
    for (double& x : v)
        x = u(rng);
    const double naive = std::accumulate(v.begin(), v.end(), 0.0);
    EXPECT_NEAR(stats::pairwise_sum(v), naive, 1e-12);
    EXPECT_EQ(stats::pairwise_sum(v), stats::pairwise_sum(v));
    EXPECT_EQ(stats::pairwise_sum(std::vector<double>{}), 0.0);
}

TEST(Moments, SampleSdUsesNMinusOne)
{
    const std::vector<double> v{1.0, 3.0};
    EXPECT_DOUBLE_EQ(stats::mean(v), 2.0);
    EXPECT_DOUBLE_EQ(stats::sample_sd(v), std::sqrt(2.0));
    EXPECT_ERRC(stats::sample_sd(std::vector<double>{1.0}), Errc::invalid_argument);
    EXPECT_ERRC(stats::mean(std::vector<double>{}), Errc::invalid_argument);
}

TEST(Quantile, LinearInterpolation)
{
    const std::vector<double> v{5, 1, 4, 2, 3};
    EXPECT_DOUBLE_EQ(stats::quantile(v, 0.3), 2.2);
    EXPECT_DOUBLE_EQ(stats::median(v), 3.0);
    EXPECT_DOUBLE_EQ(stats::iqr(v), 2.0);
    EXPECT_DOUBLE_EQ(stats::quantile(v, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(stats::quantile(v, 1.0), 5.0);
    const auto s = stats::summarize({1, 2, 3, 4});
    EXPECT_DOUBLE_EQ(s.median, 2.5);
    EXPECT_DOUBLE_EQ(s.iqr, 1.5);
}

TEST(KolmogorovSmirnov, KnownStatistic)
{
    // ECDF of {0.1, 0.2, 0.9} is furthest from the diagonal just before 0.9.
    EXPECT_NEAR(stats::ks_statistic_uniform({0.9, 0.1, 0.2}), 2.0 / 3.0 - 0.2, 1e-15);
    EXPECT_NEAR(stats::ks_statistic_uniform({0.5}), 0.5, 1e-15);
    EXPECT_GT(stats::ks_pvalue(0.01, 100), 0.99);
    EXPECT_LT(stats::ks_pvalue(0.5, 100), 1e-10);
}
