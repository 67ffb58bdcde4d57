#include "esncast/pipeline/spatial_benchmark.hpp"

#include "esncast/dependence.hpp"

#include <random>

namespace esncast::pipeline {

SpatialBenchmarkResult run_spatial_benchmark(const SpatialBenchmarkSettings& s)
{
    std::mt19937_64 rng(s.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> normal;

    SpatialBenchmarkResult out;
    out.stations.resize(s.n_stations, 2);
    for (Index i = 0; i < s.n_stations; ++i)
        out.stations.row(i) << unif(rng), unif(rng);

    Locations knots(2, 2);
    knots << 0.25, 0.5, 0.75, 0.5;
    Vector ranges(2);
    ranges << s.short_range, s.long_range;
    out.truth = SpatialModel(knots, ranges, s.nugget);
    const Matrix c_true = out.truth.correlation_matrix(out.stations);
    const Matrix l = Eigen::LLT<Matrix>(c_true).matrixL();

    // e_t = ar e_{t-1} + sqrt(1 - ar^2) L z_t; the oracle predicts ar e_{t-1}.
    const Index n_rows = s.n_calibration + s.n_test;
    const double scale = std::sqrt(1.0 - s.ar * s.ar);
    Vector e = l * Vector::NullaryExpr(s.n_stations, [&](Index) { return normal(rng); });
    Matrix residuals(n_rows, s.n_stations);
    for (Index t = 0; t < n_rows; ++t) {
        const Vector z = Vector::NullaryExpr(s.n_stations, [&](Index) { return normal(rng); });
        const Vector next = s.ar * e + scale * (l * z);
        residuals.row(t) = (next - s.ar * e).transpose();
        e = next;
    }
    const Matrix calib = residuals.topRows(s.n_calibration);
    const RowVector sd = (calib.array().square().colwise().sum() / static_cast<double>(s.n_calibration - 1)).sqrt();
    const Matrix z_cal = (calib.array().rowwise() / sd.array()).matrix();
    const Matrix z_test = (residuals.bottomRows(s.n_test).array().rowwise() / sd.array()).matrix();

    const DependenceModel c_hat = empirical_correlation(z_cal);
    out.fitted = fit_local_ranges(out.stations, z_cal, knot_grid(out.stations));
    const Matrix c_spatial = out.fitted.correlation_matrix(out.stations);
    const DeltaSelection sel = select_delta(c_spatial, c_hat.c, z_cal, s.levels);
    out.delta = sel.delta;
    const DependenceModel shrunk = shrink(c_spatial, c_hat.c, sel.delta);
    const Matrix identity = Matrix::Identity(s.n_stations, s.n_stations);
    for (double level : s.levels) {
        out.shrunk.push_back(grand_mean_coverage(shrunk.c, z_test, level));
        out.spatial.push_back(grand_mean_coverage(c_spatial, z_test, level));
        out.empirical.push_back(grand_mean_coverage(c_hat.c, z_test, level));
        out.independent.push_back(grand_mean_coverage(identity, z_test, level));
        out.oracle.push_back(grand_mean_coverage(c_true, z_test, level));
    }
    return out;
}

}  // namespace esncast::pipeline
