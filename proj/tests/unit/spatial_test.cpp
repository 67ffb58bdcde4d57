#include "esncast/spatial.hpp"

#include "checks.hpp"
#include "test_util.hpp"

#include <cmath>

using namespace esncast;

namespace {

Locations random_sites(Index n, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Locations s(n, 2);
    for (Index i = 0; i < n; ++i)
        s.row(i) << u(rng), u(rng);
    return s;
}

Matrix draw(const Matrix& c, Index rows, std::mt19937_64& rng)
{
    const Matrix l = Eigen::LLT<Matrix>(c).matrixL();
    return testutil::random_normal(rows, c.rows(), rng) * l.transpose();
}

// Scalar form of the isotropic closed form with kernel variances v_s, v_t.
double isotropic_oracle(double v_s, double v_t, double dist, double nugget)
{
    const double avg = 0.5 * (v_s + v_t);
    return (1.0 - nugget) * std::sqrt(v_s * v_t) / avg * std::exp(-dist / std::sqrt(avg));
}

}  // namespace

TEST(SpatialLayout, GridsAndBandwidth)
{
    Locations pts(2, 2);
    pts << 0.0, 0.0, 4.0, 6.0;
    const Locations k = knot_grid(pts, 2, 3);
    ASSERT_EQ(k.rows(), 6);
    EXPECT_DOUBLE_EQ(k(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(k(0, 1), 1.0);
    EXPECT_DOUBLE_EQ(k(5, 0), 3.0);
    EXPECT_DOUBLE_EQ(k(5, 1), 5.0);
    EXPECT_DOUBLE_EQ(min_distance(k), 2.0);
    EXPECT_DOUBLE_EQ(default_bandwidth(k), 1.0);
    EXPECT_DOUBLE_EQ(default_bandwidth(k.topRows(1)), 1.0);
    const Locations g = regular_grid(0, 1, 10, 12, 3, 2);
    EXPECT_EQ(g.rows(), 6);
    EXPECT_DOUBLE_EQ(g(1, 0), 0.5);
    EXPECT_DOUBLE_EQ(g(4, 1), 12.0);
    EXPECT_ERRC(regular_grid(0, 1, 0, 1, 0, 2), Errc::invalid_argument);
    EXPECT_TRUE(std::isinf(min_distance(k.topRows(1))));
}

TEST(SpatialModel, WeightsSumToOne)
{
    Locations k(3, 2);
    k << 0, 0, 1, 0, 0, 1;
    const SpatialModel m(k, Vector::Constant(3, 0.3), 0.0);
    const Vector w = m.weights(Point(0.2, 0.7));
    EXPECT_NEAR(w.sum(), 1.0, 1e-15);
    EXPECT_GT(w(2), w(1));
    // Far away from all knots the softmax stays finite.
    EXPECT_TRUE(m.weights(Point(1e3, -1e3)).allFinite());
}

TEST(SpatialModel, CoincidentSitesCorrelateFully)
{
    Locations k(2, 2);
    k << 0, 0, 1, 0;
    Vector r(2);
    r << 0.1, 0.6;
    const SpatialModel m(k, r, 0.2);
    EXPECT_EQ(m.correlation(Point(0.3, 0.3), Point(0.3, 0.3)), 1.0);
    EXPECT_EQ(m.correlation_matrix(k).diagonal().minCoeff(), 1.0);
}

TEST(SpatialModel, ConstantKernelIsExponential)
{
    Locations k(3, 2);
    k << 0, 0, 1, 0, 0, 1;
    const SpatialModel m(k, Vector::Constant(3, 0.4), 0.0);
    const Point s(0.1, 0.2);
    const Point t(0.7, 0.5);
    EXPECT_NEAR(m.correlation(s, t), std::exp(-(s - t).norm() / 0.4), 1e-14);
}

TEST(SpatialModel, TwoKnotHandEvaluation)
{
    Locations k(2, 2);
    k << 0.0, 0.0, 1.0, 0.0;
    Vector r(2);
    r << 0.2, 0.5;
    const SpatialModel m(k, r, 0.1);
    EXPECT_DOUBLE_EQ(m.bandwidth(), 0.25);
    const Point s(0.3, 0.1);
    const Point t(0.8, -0.2);
    auto kernel_var = [&](const Point& p) {
        const double a = std::exp(-p.squaredNorm() / 0.5);
        const double b = std::exp(-(p - Point(1.0, 0.0)).squaredNorm() / 0.5);
        return (a * 0.04 + b * 0.25) / (a + b);
    };
    EXPECT_NEAR(m.correlation(s, t), isotropic_oracle(kernel_var(s), kernel_var(t), (s - t).norm(), 0.1), 1e-10);
    EXPECT_NEAR(m.kernel_at(s)(0, 0), kernel_var(s), 1e-14);
    EXPECT_EQ(m.kernel_at(s)(0, 1), 0.0);
    EXPECT_NEAR(m.ranges()(1), 0.5, 1e-15);
}

TEST(SpatialModel, AnisotropicKernels)
{
    Locations k(1, 2);
    k << 0.5, 0.5;
    Matrix2 v;
    v << 0.09, 0.0, 0.0, 0.01;
    const SpatialModel m(k, {v}, 1.0, 0.0);
    // Distance in kernel units: along x 0.3 -> 1, along y 0.1 -> 1.
    EXPECT_NEAR(m.correlation(Point(0, 0), Point(0.3, 0)), std::exp(-1.0), 1e-14);
    EXPECT_NEAR(m.correlation(Point(0, 0), Point(0, 0.1)), std::exp(-1.0), 1e-14);
    Matrix2 bad;
    bad << 1.0, 2.0, 2.0, 1.0;
    EXPECT_ERRC(SpatialModel(k, {bad}, 1.0, 0.0), Errc::invalid_argument);
}

TEST(SpatialModel, ConstructorErrors)
{
    Locations k(2, 2);
    k << 0, 0, 1, 1;
    EXPECT_ERRC(SpatialModel(k, Vector::Ones(3), 0.0), Errc::dimension_mismatch);
    EXPECT_ERRC(SpatialModel(k, Vector::Ones(2), 1.0), Errc::invalid_argument);
    EXPECT_ERRC(SpatialModel(k, -Vector::Ones(2), 0.0), Errc::invalid_argument);
    Locations dup(2, 2);
    dup << 0, 0, 0, 0;
    EXPECT_ERRC(SpatialModel(dup, Vector::Ones(2), 0.0), Errc::invalid_argument);
}

TEST(SpatialModel, CorrelationMatricesArePsd)
{
    std::mt19937_64 rng(1);
    for (int rep = 0; rep < 20; ++rep) {
        const Locations k = knot_grid(random_sites(10, rng), 2, 3);
        Vector r = Vector::Constant(6, 0.05) + 0.5 * Vector::Random(6).cwiseAbs();
        const SpatialModel m(k, r, 0.05 * rep / 20.0);
        DependenceModel d;
        d.c = m.correlation_matrix(random_sites(40, rng));
        EXPECT_TRUE(d.is_valid(1e-10));
    }
}

TEST(LocalFit, RecoversStationaryRange)
{
    std::mt19937_64 rng(2);
    const Locations st = random_sites(30, rng);
    Locations one(1, 2);
    one << 0.5, 0.5;
    const SpatialModel truth(one, Vector::Constant(1, 0.3), 0.0);
    const Matrix samples = draw(truth.correlation_matrix(st), 200, rng);
    const SpatialModel fit = fit_local_ranges(st, samples, one);
    EXPECT_NEAR(fit.ranges()(0), 0.3, 0.25 * 0.3);
    EXPECT_LT(fit.nugget(), 0.05);
}

TEST(LocalFit, OrdersTwoRegimes)
{
    std::mt19937_64 rng(3);
    const Locations st = random_sites(60, rng);
    Locations k(2, 2);
    k << 0.25, 0.5, 0.75, 0.5;
    Vector r(2);
    r << 0.08, 0.5;
    const SpatialModel truth(k, r, 0.05);
    const Matrix samples = draw(truth.correlation_matrix(st), 300, rng);
    const SpatialModel fit = fit_local_ranges(st, samples, k);
    EXPECT_LT(fit.ranges()(0), fit.ranges()(1));
    EXPECT_NEAR(fit.nugget(), 0.05, 0.05);
}

TEST(LocalFit, Errors)
{
    std::mt19937_64 rng(4);
    const Locations st = random_sites(10, rng);
    Locations k(1, 2);
    k << 0.5, 0.5;
    EXPECT_ERRC(fit_local_ranges(st, Matrix::Ones(5, 9), k), Errc::dimension_mismatch);
    EXPECT_ERRC(fit_local_ranges(st.topRows(2), Matrix::Ones(5, 2), k), Errc::insufficient_local_data);
    // The eastern knot sees one station only; the rest sit in a western strip.
    Locations two(2, 2);
    two << 0.25, 0.5, 0.75, 0.5;
    Locations lone = st;
    for (Index i = 0; i < lone.rows(); ++i)
        lone(i, 0) *= 0.1;
    lone.row(0) << 0.75, 0.5;
    EXPECT_ERRC(fit_local_ranges(lone, testutil::random_normal(20, 10, rng), two), Errc::insufficient_local_data);
}

TEST(Shrink, Endpoints)
{
    Matrix a = Matrix::Identity(3, 3);
    Matrix b = Matrix::Constant(3, 3, 0.5);
    b.diagonal().setOnes();
    EXPECT_TRUE(shrink(a, b, 0.0).c == a);
    EXPECT_TRUE(shrink(a, b, 1.0).c == b);
    const DependenceModel mid = shrink(a, b, 0.4);
    EXPECT_DOUBLE_EQ(mid.c(0, 1), 0.2);
    EXPECT_EQ(mid.provenance, Provenance::shrunk);
    EXPECT_EQ(mid.delta_c, 0.4);
    EXPECT_TRUE(mid.is_valid());
    EXPECT_ERRC(shrink(a, b, 1.1), Errc::invalid_argument);
    EXPECT_ERRC(shrink(a, Matrix::Identity(2, 2), 0.5), Errc::dimension_mismatch);
}

TEST(Shrink, SelectsSpatialWhenEmpiricalIsNoisy)
{
    std::mt19937_64 rng(5);
    const Locations st = random_sites(40, rng);
    Locations k(2, 2);
    k << 0.25, 0.5, 0.75, 0.5;
    Vector r(2);
    r << 0.1, 0.4;
    const SpatialModel truth(k, r, 0.05);
    const Matrix c = truth.correlation_matrix(st);
    const DependenceModel c_hat = empirical_correlation(draw(c, 45, rng));
    const Matrix samples = draw(c, 2000, rng);
    const DeltaSelection sel = select_delta(c, c_hat.c, samples);
    EXPECT_LT(sel.delta, 0.5);
    EXPECT_EQ(sel.grid.size(), 21U);
    EXPECT_EQ(sel.grid.size(), sel.loss.size());
    const Matrix shrunk = shrink(c, c_hat.c, sel.delta).c;
    for (double level : default_levels()) {
        const double dep = grand_mean_coverage(shrunk, samples, level);
        const double ind = grand_mean_coverage(Matrix::Identity(40, 40), samples, level);
        EXPECT_LT(std::abs(dep - level), std::abs(ind - level));
    }
    EXPECT_ERRC(select_delta(c, c_hat.c, samples, {}, 0.05), Errc::empty_grid);
    EXPECT_ERRC(select_delta(c, c_hat.c, samples, default_levels(), 0.0), Errc::invalid_argument);
}

TEST(Kriging, WeightsMatchDenseSolve)
{
    const auto r = checks::kriging_vs_dense_solve();
    EXPECT_TRUE(r.passed) << r.value;
    EXPECT_ERRC(kriging_weights(-Matrix::Identity(2, 2), Vector::Ones(2)), Errc::singular_kriging_system);
}

TEST(Kriging, ExactAtStations)
{
    std::mt19937_64 rng(6);
    const Locations st = random_sites(8, rng);
    Locations k(1, 2);
    k << 0.5, 0.5;
    const SpatialModel m(k, Vector::Constant(1, 0.3), 0.0);
    const Matrix means = testutil::random_normal(3, 8, rng);
    const Matrix sig = Matrix::Constant(3, 8, 0.5) + 0.1 * testutil::random_normal(3, 8, rng).cwiseAbs();
    const InterpolatedField f = krige(st, means, sig, m, st);
    EXPECT_LT((f.mean - means).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LT(f.sd.maxCoeff(), 1e-3);
    EXPECT_LT((f.sigma - sig).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Kriging, RevertsToBaselineFarAway)
{
    std::mt19937_64 rng(7);
    const Locations st = random_sites(8, rng);
    Locations k(1, 2);
    k << 0.5, 0.5;
    const SpatialModel m(k, Vector::Constant(1, 0.1), 0.1);
    const Matrix means = testutil::random_normal(2, 8, rng);
    const Matrix sig = Matrix::Constant(2, 8, 0.7);
    Locations far(1, 2);
    far << 100.0, 100.0;
    const InterpolatedField f = krige(st, means, sig, m, far);
    for (Index t = 0; t < 2; ++t) {
        EXPECT_NEAR(f.mean(t, 0), means.row(t).mean(), 1e-12);
        EXPECT_NEAR(f.sd(t, 0), 0.7, 1e-12);
        EXPECT_NEAR(f.total_sd()(t, 0), 0.7 * std::sqrt(2.0), 1e-12);
    }
}

TEST(Kriging, VarianceWithinBounds)
{
    std::mt19937_64 rng(8);
    const Locations st = random_sites(15, rng);
    const Locations k = knot_grid(st, 2, 3);
    const SpatialModel m(k, Vector::Constant(6, 0.2), 0.05);
    const Matrix sig = Matrix::Constant(1, 15, 1.3);
    const InterpolatedField f = krige(st, Matrix::Zero(1, 15), sig, m, regular_grid(0, 1, 0, 1, 20, 20));
    EXPECT_GE(f.sd.minCoeff(), 0.0);
    EXPECT_LE(f.sd.maxCoeff(), 1.3 + 1e-12);
    EXPECT_ERRC(krige(st, Matrix::Zero(1, 14), sig, m, k), Errc::dimension_mismatch);
    EXPECT_ERRC(krige(st, Matrix::Zero(1, 15), Matrix::Zero(1, 15), m, k), Errc::zero_sigma);
}

TEST(Idw, ExactAndAveraging)
{
    Locations st(2, 2);
    st << 0, 0, 2, 0;
    Vector v(2);
    v << 1.0, 3.0;
    Locations g(2, 2);
    g << 0, 0, 1, 0;
    const Vector out = idw(st, v, g);
    EXPECT_EQ(out(0), 1.0);
    EXPECT_DOUBLE_EQ(out(1), 2.0);
    EXPECT_ERRC(idw(st, Vector::Ones(3), g), Errc::dimension_mismatch);
}
