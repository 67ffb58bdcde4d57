#include "esncast/scoring.hpp"

#include "test_util.hpp"

#include <cmath>
#include <numbers>

using namespace esncast;

TEST(Mse, TrivialCases)
{
    const Matrix t = Matrix::Random(5, 3);
    EXPECT_EQ(mse(t, t).pooled, 0.0);
    const MseScores s = mse(t.array() + 1.0, t);
    EXPECT_NEAR(s.pooled, 1.0, 1e-15);
    EXPECT_NEAR(s.per_element(2), 1.0, 1e-15);
    EXPECT_ERRC(mse(t, Matrix::Zero(5, 2)), Errc::shape_mismatch);
}

TEST(Mse, MatchesHandSum)
{
    std::mt19937_64 rng(1);
    const Matrix f = testutil::random_normal(7, 4, rng);
    const Matrix y = testutil::random_normal(7, 4, rng);
    double total = 0.0;
    for (Index i = 0; i < 7; ++i)
        for (Index j = 0; j < 4; ++j)
            total += (f(i, j) - y(i, j)) * (f(i, j) - y(i, j));
    EXPECT_NEAR(mse(f, y).pooled, total / 28.0, 1e-12);
}

TEST(Crps, SmallEnsembles)
{
    EXPECT_EQ(crps(std::vector<double>{2.0, 2.0, 2.0}, 2.0), 0.0);
    EXPECT_NEAR(crps(std::vector<double>{0.0, 1.0}, 0.0), 0.25, 1e-15);
    EXPECT_NEAR(crps(std::vector<double>{3.0}, 1.0), 2.0, 1e-15);
    EXPECT_ERRC(crps(std::vector<double>{}, 0.0), Errc::empty_ensemble);
}

TEST(Crps, GaussianClosedForm)
{
    // CRPS of N(0,1) at 0 is 2 phi(0) - 1/sqrt(pi).
    EXPECT_NEAR(crps_gaussian(0.0, 1.0, 0.0), 2.0 / std::sqrt(2.0 * std::numbers::pi) - 1.0 / std::sqrt(std::numbers::pi), 1e-15);
    EXPECT_EQ(crps_gaussian(1.0, 0.0, 3.5), 2.5);
    EXPECT_NEAR(crps_gaussian(2.0, 3.0, 1.0), 3.0 * crps_gaussian(0.0, 1.0, -1.0 / 3.0), 1e-14);
    EXPECT_ERRC(crps_gaussian(0.0, -1.0, 0.0), Errc::invalid_argument);
}

TEST(Crps, LargeEnsembleApproachesGaussian)
{
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n(1.0, 2.0);
    std::vector<double> m(20000);
    for (double& v : m)
        v = n(rng);
    EXPECT_NEAR(crps(m, 0.3), crps_gaussian(1.0, 2.0, 0.3), 0.02);
}

TEST(Crps, TrueDistributionScoresBetter)
{
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n;
    std::vector<double> truth_members(200);
    std::vector<double> shifted(200);
    std::vector<double> diff;
    for (int i = 0; i < 10000; ++i) {
        const double y = n(rng);
        diff.push_back(crps_gaussian(0.0, 1.0, y) - crps_gaussian(0.5, 1.0, y));
    }
    double mean = 0.0;
    for (double d : diff)
        mean += d;
    mean /= static_cast<double>(diff.size());
    double var = 0.0;
    for (double d : diff)
        var += (d - mean) * (d - mean);
    const double se = std::sqrt(var / static_cast<double>(diff.size() - 1) / static_cast<double>(diff.size()));
    EXPECT_LT(mean + 3.0 * se, 0.0);

    // The same ordering with finite ensembles.
    double better = 0.0;
    for (int i = 0; i < 2000; ++i) {
        for (std::size_t k = 0; k < truth_members.size(); ++k) {
            truth_members[k] = n(rng);
            shifted[k] = truth_members[k] + 0.5;
        }
        const double y = n(rng);
        better += crps(truth_members, y) - crps(shifted, y);
    }
    EXPECT_LT(better, 0.0);
}

TEST(Crps, TableShape)
{
    ForecastEnsemble e;
    e.members = {Matrix::Zero(2, 3), Matrix::Ones(2, 3)};
    e.mean = Matrix::Constant(2, 3, 0.5);
    const Matrix t = crps_table(e, Matrix::Zero(2, 3));
    EXPECT_EQ(t.rows(), 2);
    EXPECT_NEAR(t(1, 2), 0.25, 1e-15);
    EXPECT_ERRC(crps_table(e, Matrix::Zero(3, 3)), Errc::shape_mismatch);
}
