#include "checks.hpp"

#include "esncast/baselines.hpp"
#include "esncast/lorenz96.hpp"
#include "esncast/reservoir.hpp"
#include "esncast/scoring.hpp"
#include "esncast/spatial.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace esncast::checks {

namespace {

Matrix random_matrix(Index r, Index c, std::mt19937_64& rng)
{
    std::normal_distribution<double> n;
    return Matrix::NullaryExpr(r, c, [&](Index, Index) { return n(rng); });
}

CheckResult make(std::string name, double value, double tol, std::string detail = {})
{
    return {std::move(name), value <= tol, value, tol, std::move(detail)};
}

}  // namespace

CheckResult ridge_vs_dense_solve()
{
    std::mt19937_64 rng(101);
    double worst = 0.0;
    for (int rep = 0; rep < 5; ++rep) {
        const Matrix h = random_matrix(300, 60, rng);
        const Matrix y = random_matrix(300, 7, rng);
        const double lambda = rep == 0 ? 1e-3 : 0.01 * rep;
        const Matrix a = h.transpose() * h + lambda * Matrix::Identity(60, 60);
        const Matrix dense = a.fullPivLu().solve(h.transpose() * y);
        const Readout r = fit_readout(h, y, lambda);
        worst = std::max(worst, (r.b - dense).norm() / dense.norm());
        const Readout g = solve_readout(h.transpose() * h, h.transpose() * y, lambda);
        worst = std::max(worst, (g.b - dense).norm() / dense.norm());
    }
    return make("ridge readout vs dense solve (relative)", worst, 1e-8);
}

CheckResult crps_vs_double_sum()
{
    std::mt19937_64 rng(102);
    std::normal_distribution<double> n(0.0, 2.0);
    double worst = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> m(static_cast<std::size_t>(1 + rep * 15));
        for (double& v : m)
            v = n(rng);
        const double y = n(rng);
        double a = 0.0;
        double b = 0.0;
        for (double mi : m) {
            a += std::abs(mi - y);
            for (double mj : m)
                b += std::abs(mi - mj);
        }
        const auto k = static_cast<double>(m.size());
        const double oracle = a / k - 0.5 * b / (k * k);
        worst = std::max(worst, std::abs(crps(m, y) - oracle));
    }
    return make("CRPS vs brute-force double sum", worst, 1e-12);
}

CheckResult rk4_vs_fine_euler()
{
    lorenz96::Config cfg;
    cfg.seed = 103;
    const Vector y0 = lorenz96::simulate(cfg, 1, 1).front().row(0).transpose();
    const Vector rk4 = lorenz96::integrate(y0, cfg.forcing, 0.01, 100, 100).row(0).transpose();
    // Forward Euler on a grid 10^4 times finer than the RK4 step.
    const double h = 1e-6;
    Vector y = y0;
    const Index n = y.size();
    Vector d(n);
    for (long s = 0; s < 1000000; ++s) {
        for (Index l = 0; l < n; ++l)
            d(l) = (y((l + 1) % n) - y((l + n - 2) % n)) * y((l + n - 1) % n) - y(l) + cfg.forcing;
        y += h * d;
    }
    return make("RK4 (dt=0.01) vs fine Euler over one time unit", (rk4 - y).cwiseAbs().maxCoeff(), 1e-4);
}

CheckResult kriging_vs_dense_solve()
{
    std::mt19937_64 rng(104);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int rep = 0; rep < 10; ++rep) {
        Locations st(5, 2);
        for (Index i = 0; i < 5; ++i)
            st.row(i) << u(rng), u(rng);
        Locations knots(2, 2);
        knots << 0.2, 0.5, 0.8, 0.5;
        Vector ranges(2);
        ranges << 0.1 + 0.3 * u(rng), 0.1 + 0.3 * u(rng);
        const SpatialModel model(knots, ranges, 0.1 * u(rng));
        const Matrix c_ss = model.correlation_matrix(st);
        Locations target(1, 2);
        target << u(rng), u(rng);
        const Vector c_s0 = model.cross_correlation(st, target).col(0);
        const Vector dense = c_ss.fullPivLu().solve(c_s0);
        worst = std::max(worst, (kriging_weights(c_ss, c_s0) - dense).cwiseAbs().maxCoeff());
    }
    return make("kriging weights vs dense solve (5 stations)", worst, 1e-10);
}

CheckResult frac_diff_vs_gamma_ratio()
{
    double worst = 0.0;
    for (double d : {0.05, 0.2, 0.3, 0.4, 0.45}) {
        const std::vector<double> pi = frac_diff_coeffs(d, 30);
        for (int k = 0; k <= 30; ++k) {
            const double oracle = std::tgamma(k - d) / (std::tgamma(-d) * std::tgamma(k + 1.0));
            worst = std::max(worst, std::abs(pi[static_cast<std::size_t>(k)] - oracle));
        }
    }
    return make("fractional differencing vs Gamma ratio", worst, 1e-12);
}

std::vector<CheckResult> oracle_suite()
{
    return {ridge_vs_dense_solve(), crps_vs_double_sum(), rk4_vs_fine_euler(), kriging_vs_dense_solve(),
            frac_diff_vs_gamma_ratio()};
}

}  // namespace esncast::checks
