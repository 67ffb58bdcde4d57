#include "esncast/exposure.hpp"
#include "esncast/stats.hpp"

#include "test_util.hpp"

#include <cmath>

using namespace esncast;

namespace {

District square(const std::string& id, double x0, double y0, double side, std::int64_t pop)
{
    return {id, {{Point(x0, y0), Point(x0 + side, y0), Point(x0 + side, y0 + side), Point(x0, y0 + side)}}, pop};
}

// Inside-or-on test for a counter-clockwise convex polygon.
bool convex_contains(const Ring& r, const Point& p)
{
    for (std::size_t i = 0; i < r.size(); ++i) {
        const Point a = r[i];
        const Point b = r[(i + 1) % r.size()];
        if ((b - a).x() * (p - a).y() - (b - a).y() * (p - a).x() < -1e-12)
            return false;
    }
    return true;
}

InterpolatedField field_on(const Locations& grid, const Matrix& mean)
{
    InterpolatedField f;
    f.grid = grid;
    f.mean = mean;
    f.sd = Matrix::Zero(mean.rows(), mean.cols());
    f.sigma = Matrix::Constant(mean.rows(), mean.cols(), 0.5);
    return f;
}

}  // namespace

TEST(Polygons, RingContainmentAndEdges)
{
    const District d = square("a", 0, 0, 1, 10);
    EXPECT_TRUE(point_in_district(Point(0.5, 0.5), d));
    EXPECT_TRUE(point_in_district(Point(1.0, 0.5), d));
    EXPECT_TRUE(point_in_district(Point(0.0, 0.0), d));
    EXPECT_FALSE(point_in_district(Point(1.01, 0.5), d));
    // An L-shaped concave ring.
    const Ring l{Point(0, 0), Point(2, 0), Point(2, 1), Point(1, 1), Point(1, 2), Point(0, 2)};
    EXPECT_TRUE(point_in_ring(Point(0.5, 1.5), l));
    EXPECT_FALSE(point_in_ring(Point(1.5, 1.5), l));
    District multi{"m", {square("x", 0, 0, 1, 0).parts[0], square("y", 5, 5, 1, 0).parts[0]}, 3};
    EXPECT_TRUE(point_in_district(Point(5.5, 5.5), multi));
}

TEST(Polygons, SelfIntersectionAndValidation)
{
    const Ring bowtie{Point(0, 0), Point(1, 1), Point(1, 0), Point(0, 1)};
    EXPECT_TRUE(self_intersects(bowtie));
    EXPECT_FALSE(self_intersects(square("a", 0, 0, 1, 0).parts[0]));
    DistrictSet set;
    set.districts = {square("a", 0, 0, 1, 5), square("b", 1, 0, 1, 7)};
    EXPECT_NO_THROW(set.validate());
    EXPECT_EQ(set.total_population(), 12);
    set.districts[1].population = -1;
    EXPECT_ERRC(set.validate(), Errc::invalid_argument);
    set.districts[1] = {"c", {bowtie}, 1};
    EXPECT_ERRC(set.validate(), Errc::invalid_argument);
    set.districts[1] = {"d", {{Point(0, 0), Point(1, 1)}}, 1};
    EXPECT_ERRC(set.validate(), Errc::invalid_argument);
}

TEST(DistrictMeans, ConstantAndSinglePointDistricts)
{
    DistrictSet set;
    set.districts = {square("a", 0, 0, 1, 5), square("b", 2, 0, 1, 7)};
    const Locations grid = regular_grid(0, 3, 0, 1, 31, 11);
    const DistrictField c = district_means(field_on(grid, Matrix::Constant(2, grid.rows(), 4.2)), set);
    EXPECT_TRUE(c.mean.isApproxToConstant(4.2));
    EXPECT_TRUE(c.sd.isApproxToConstant(0.5));

    Locations one(2, 2);
    one << 0.5, 0.5, 2.5, 0.5;
    Matrix v(1, 2);
    v << -1.0, 9.0;
    const DistrictField s = district_means(field_on(one, v), set);
    EXPECT_EQ(s.mean(0, 0), -1.0);
    EXPECT_EQ(s.mean(0, 1), 9.0);
    EXPECT_DOUBLE_EQ(s.centroids(1, 0), 2.5);

    set.districts.push_back(square("empty", 10, 10, 1, 1));
    EXPECT_ERRC(district_means(field_on(one, v), set), Errc::empty_district);
}

TEST(DistrictMeans, MatchesBruteForceMembership)
{
    std::mt19937_64 rng(1);
    DistrictSet set;
    set.districts.push_back({"tri", {{Point(0, 0), Point(1, 0), Point(0.2, 0.9)}}, 1});
    set.districts.push_back({"quad", {{Point(1.1, 0.1), Point(1.9, 0.2), Point(1.8, 0.9), Point(1.2, 0.8)}}, 1});
    set.districts.push_back({"pent", {{Point(0.5, 1.0), Point(1.0, 1.1), Point(1.1, 1.6), Point(0.7, 1.9), Point(0.4, 1.5)}}, 1});
    const Locations grid = regular_grid(0, 2, 0, 2, 41, 41);
    const Matrix values = testutil::random_normal(3, grid.rows(), rng);
    const DistrictField f = district_means(field_on(grid, values), set);
    for (Index d = 0; d < 3; ++d) {
        const Ring& r = set.districts[static_cast<std::size_t>(d)].parts[0];
        for (Index t = 0; t < 3; ++t) {
            double s = 0.0;
            int n = 0;
            for (Index g = 0; g < grid.rows(); ++g)
                if (convex_contains(r, grid.row(g).transpose())) {
                    s += values(t, g);
                    ++n;
                }
            ASSERT_GT(n, 0);
            EXPECT_NEAR(f.mean(t, d), s / n, 1e-12);
        }
    }
}

TEST(Exposure, FarBelowThresholdIsZero)
{
    const double low = std::log(12.1) - 10.0;
    const ExposureSeries e = exposure_series(Matrix::Constant(4, 3, low), Matrix::Constant(4, 3, 1.0),
                                             Matrix::Identity(3, 3), {100, 200, 300});
    EXPECT_TRUE(e.mean_exposed.isZero(0.0));
    for (std::size_t t = 0; t < 4; ++t) {
        EXPECT_EQ(e.lo[t], 0);
        EXPECT_EQ(e.hi[t], 0);
    }
}

TEST(Exposure, SingleDistrictAboveThreshold)
{
    Matrix m(1, 2);
    m << std::log(30.0), std::log(2.0);
    const ExposureSeries e =
        exposure_series(m, Matrix::Constant(1, 2, 1e-9), Matrix::Identity(2, 2), {5000, 800});
    EXPECT_EQ(e.mean_exposed(0), 5000.0);
    EXPECT_EQ(e.lo[0], 5000);
    EXPECT_EQ(e.hi[0], 5000);
}

TEST(Exposure, ExceedanceMatchesNormalTail)
{
    Matrix c(3, 3);
    c << 1.0, 0.6, 0.2, 0.6, 1.0, 0.4, 0.2, 0.4, 1.0;
    Matrix mu(1, 3);
    mu << 2.3, 2.6, 2.0;
    Matrix sd(1, 3);
    sd << 0.3, 0.5, 0.4;
    ExposureOptions o;
    o.n_draws = 20000;
    o.seed = 4;
    const ExposureSeries e = exposure_series(mu, sd, c, {10, 20, 30}, o);
    double analytic_mean = 0.0;
    const std::int64_t pops[3] = {10, 20, 30};
    for (Index d = 0; d < 3; ++d) {
        const double p = 1.0 - stats::normal_cdf((std::log(12.1) - mu(0, d)) / sd(0, d));
        const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(o.n_draws));
        EXPECT_NEAR(e.exceedance(0, d), p, 3.0 * se);
        analytic_mean += p * static_cast<double>(pops[d]);
    }
    EXPECT_NEAR(e.mean_exposed(0), analytic_mean, 0.5);
}

TEST(Exposure, MonotoneInThresholdAndBounded)
{
    std::mt19937_64 rng(2);
    const Matrix mu = 2.5 + 0.3 * testutil::random_normal(5, 4, rng).array();
    const Matrix sd = Matrix::Constant(5, 4, 0.4);
    Matrix c = Matrix::Constant(4, 4, 0.3);
    c.diagonal().setOnes();
    const std::vector<std::int64_t> pop{100, 250, 40, 610};
    ExposureSeries prev;
    for (double thr : {20.0, 15.0, 12.1, 8.0}) {
        ExposureOptions o;
        o.threshold = thr;
        const ExposureSeries e = exposure_series(mu, sd, c, pop, o);
        for (std::size_t t = 0; t < 5; ++t) {
            EXPECT_GE(e.lo[t], 0);
            EXPECT_LE(e.hi[t], 1000);
            EXPECT_LE(e.lo[t], e.hi[t]);
            EXPECT_GE(e.mean_exposed(static_cast<Index>(t)), static_cast<double>(e.lo[t]));
            if (prev.lo.size() == 5) {
                EXPECT_GE(e.mean_exposed(static_cast<Index>(t)), prev.mean_exposed(static_cast<Index>(t)));
                EXPECT_GE(e.lo[t], prev.lo[t]);
                EXPECT_GE(e.hi[t], prev.hi[t]);
            }
        }
        prev = e;
    }
}

TEST(Exposure, LogScaleEqualsExponentiatedThreshold)
{
    std::mt19937_64 rng(3);
    const Matrix mu = 2.4 + 0.2 * testutil::random_normal(3, 3, rng).array();
    const Matrix sd = Matrix::Constant(3, 3, 0.3);
    ExposureOptions log_opts;
    const ExposureSeries a = exposure_series(mu, sd, Matrix::Identity(3, 3), {1, 2, 3}, log_opts);
    ExposureOptions raw_opts;
    raw_opts.log_scale = false;
    raw_opts.threshold = std::log(12.1);
    const ExposureSeries b = exposure_series(mu, sd, Matrix::Identity(3, 3), {1, 2, 3}, raw_opts);
    EXPECT_TRUE(a.mean_exposed == b.mean_exposed);
    EXPECT_EQ(a.lo, b.lo);
    EXPECT_EQ(a.hi, b.hi);
}

TEST(Exposure, Errors)
{
    const Matrix m = Matrix::Zero(1, 2);
    const Matrix c = Matrix::Identity(2, 2);
    ExposureOptions o;
    o.threshold = 0.0;
    EXPECT_ERRC(exposure_series(m, m, c, {1, 1}, o), Errc::bad_threshold);
    o.threshold = std::nan("");
    EXPECT_ERRC(exposure_series(m, m, c, {1, 1}, o), Errc::bad_threshold);
    o = {};
    o.level = 1.0;
    EXPECT_ERRC(exposure_series(m, m, c, {1, 1}, o), Errc::bad_level);
    EXPECT_ERRC(exposure_series(m, m, c, {1}), Errc::dimension_mismatch);
    EXPECT_ERRC(exposure_series(m, m, c, {1, -1}), Errc::invalid_argument);
}
