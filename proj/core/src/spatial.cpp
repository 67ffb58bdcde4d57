#include "esncast/spatial.hpp"

#include "esncast/stats.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace esncast {

SpatialModel::SpatialModel(Locations knots, Vector ranges, double nugget)
    : knots_(std::move(knots)), bandwidth_(default_bandwidth(knots_)), nugget_(nugget)
{
    if (knots_.rows() < 1 || ranges.size() != knots_.rows())
        throw Error(Errc::dimension_mismatch, "one range per knot is required");
    if (!(nugget_ >= 0.0 && nugget_ < 1.0))
        throw Error(Errc::invalid_argument, "nugget must lie in [0, 1)");
    for (Index z = 0; z < ranges.size(); ++z) {
        if (!(ranges(z) > 0.0))
            throw Error(Errc::invalid_argument, "ranges must be positive");
        kernels_.push_back(ranges(z) * ranges(z) * Matrix2::Identity());
    }
}

SpatialModel::SpatialModel(Locations knots, std::vector<Matrix2> kernels, double bandwidth, double nugget)
    : knots_(std::move(knots)), kernels_(std::move(kernels)), bandwidth_(bandwidth), nugget_(nugget)
{
    if (knots_.rows() < 1 || static_cast<Index>(kernels_.size()) != knots_.rows())
        throw Error(Errc::dimension_mismatch, "one kernel per knot is required");
    if (!(bandwidth_ > 0.0))
        throw Error(Errc::invalid_argument, "bandwidth must be positive");
    if (!(nugget_ >= 0.0 && nugget_ < 1.0))
        throw Error(Errc::invalid_argument, "nugget must lie in [0, 1)");
    for (const Matrix2& v : kernels_) {
        Eigen::SelfAdjointEigenSolver<Matrix2> es(v);
        if ((v - v.transpose()).cwiseAbs().maxCoeff() > 1e-12 || !(es.eigenvalues().minCoeff() > 0.0))
            throw Error(Errc::invalid_argument, "knot kernels must be symmetric positive definite");
    }
}

Vector SpatialModel::ranges() const
{
    Vector out(knot_count());
    for (Index z = 0; z < out.size(); ++z)
        out(z) = std::sqrt(kernels_[static_cast<std::size_t>(z)](0, 0));
    return out;
}

Vector SpatialModel::weights(const Point& s) const
{
    const Index nz = knot_count();
    Vector e(nz);
    for (Index z = 0; z < nz; ++z)
        e(z) = -(s - knots_.row(z).transpose()).squaredNorm() / (2.0 * bandwidth_);
    e.array() -= e.maxCoeff();
    e = e.array().exp();
    return e / e.sum();
}

Matrix2 SpatialModel::kernel_at(const Point& s) const
{
    const Vector w = weights(s);
    Matrix2 v = Matrix2::Zero();
    for (Index z = 0; z < w.size(); ++z)
        v += w(z) * kernels_[static_cast<std::size_t>(z)];
    return v;
}

double SpatialModel::correlation(const Point& s, const Point& t) const
{
    if (s == t)
        return 1.0;
    const Matrix2 vs = kernel_at(s);
    const Matrix2 vt = kernel_at(t);
    const Matrix2 avg = 0.5 * (vs + vt);
    const double pref = std::pow(vs.determinant(), 0.25) * std::pow(vt.determinant(), 0.25) /
                        std::sqrt(avg.determinant());
    const Point d = s - t;
    const double q = d.dot(avg.inverse() * d);
    return (1.0 - nugget_) * pref * std::exp(-std::sqrt(q));
}

Matrix SpatialModel::correlation_matrix(const Locations& sites) const
{
    const Index n = sites.rows();
    Matrix c = Matrix::Identity(n, n);
    std::vector<Matrix2> v(static_cast<std::size_t>(n));
    std::vector<double> det4(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        v[static_cast<std::size_t>(i)] = kernel_at(sites.row(i).transpose());
        det4[static_cast<std::size_t>(i)] = std::pow(v[static_cast<std::size_t>(i)].determinant(), 0.25);
    }
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j) {
            const Point d = sites.row(i).transpose() - sites.row(j).transpose();
            double r = 1.0;
            if (d.squaredNorm() > 0.0) {
                const Matrix2 avg = 0.5 * (v[static_cast<std::size_t>(i)] + v[static_cast<std::size_t>(j)]);
                const double pref = det4[static_cast<std::size_t>(i)] * det4[static_cast<std::size_t>(j)] /
                                    std::sqrt(avg.determinant());
                r = (1.0 - nugget_) * pref * std::exp(-std::sqrt(d.dot(avg.inverse() * d)));
            }
            c(i, j) = r;
            c(j, i) = r;
        }
    return c;
}

Matrix SpatialModel::cross_correlation(const Locations& a, const Locations& b) const
{
    Matrix out(a.rows(), b.rows());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < b.rows(); ++j)
            out(i, j) = correlation(a.row(i).transpose(), b.row(j).transpose());
    return out;
}

double min_distance(const Locations& points)
{
    double best = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < points.rows(); ++i)
        for (Index j = i + 1; j < points.rows(); ++j)
            best = std::min(best, (points.row(i) - points.row(j)).norm());
    return best;
}

double default_bandwidth(const Locations& knots)
{
    if (knots.rows() < 2)
        return 1.0;
    const double half = 0.5 * min_distance(knots);
    if (!(half > 0.0))
        throw Error(Errc::invalid_argument, "knots must be distinct");
    return half * half;
}

Locations regular_grid(double x0, double x1, double y0, double y1, Index nx, Index ny)
{
    if (nx < 1 || ny < 1)
        throw Error(Errc::invalid_argument, "grid needs at least one point per axis");
    Locations g(nx * ny, 2);
    for (Index iy = 0; iy < ny; ++iy)
        for (Index ix = 0; ix < nx; ++ix) {
            const double fx = nx == 1 ? 0.5 : static_cast<double>(ix) / static_cast<double>(nx - 1);
            const double fy = ny == 1 ? 0.5 : static_cast<double>(iy) / static_cast<double>(ny - 1);
            g(iy * nx + ix, 0) = x0 + fx * (x1 - x0);
            g(iy * nx + ix, 1) = y0 + fy * (y1 - y0);
        }
    return g;
}

Locations knot_grid(const Locations& points, Index nx, Index ny)
{
    if (points.rows() < 1 || nx < 1 || ny < 1)
        throw Error(Errc::invalid_argument, "knot grid needs points and positive counts");
    const Eigen::RowVector2d lo = points.colwise().minCoeff();
    const Eigen::RowVector2d hi = points.colwise().maxCoeff();
    Locations k(nx * ny, 2);
    for (Index iy = 0; iy < ny; ++iy)
        for (Index ix = 0; ix < nx; ++ix) {
            k(iy * nx + ix, 0) = lo(0) + (static_cast<double>(ix) + 0.5) * (hi(0) - lo(0)) / static_cast<double>(nx);
            k(iy * nx + ix, 1) = lo(1) + (static_cast<double>(iy) + 0.5) * (hi(1) - lo(1)) / static_cast<double>(ny);
        }
    return k;
}

namespace {

struct PairStats {
    double dist;
    double sum_sq; // sum_t x_t^2 + y_t^2
    double sum_xy; // sum_t x_t y_t
};

// Pairwise Gaussian log-likelihood of unit-variance pairs with correlation rho.
double pair_loglik(const PairStats& p, double n_rep, double rho)
{
    const double one_m = 1.0 - rho * rho;
    return -0.5 * n_rep * std::log(one_m) - (p.sum_sq - 2.0 * rho * p.sum_xy) / (2.0 * one_m);
}

}  // namespace

SpatialModel fit_local_ranges(const Locations& stations, const Matrix& samples, const Locations& knots,
                              const LocalFitOptions& options)
{
    const Index ns = stations.rows();
    if (samples.cols() != ns)
        throw Error(Errc::dimension_mismatch, "sample columns must match the stations");
    if (ns < 3 || samples.rows() < 1)
        throw Error(Errc::insufficient_local_data, "need at least three stations with samples");
    if (knots.rows() < 1)
        throw Error(Errc::invalid_argument, "at least one knot is required");

    // Weights come from a provisional model with unit ranges; only the knots
    // and bandwidth matter for them.
    const SpatialModel layout(knots, Vector::Ones(knots.rows()), 0.0);
    const Index nz = knots.rows();
    Matrix u(ns, nz);
    for (Index i = 0; i < ns; ++i)
        u.row(i) = layout.weights(stations.row(i).transpose()).transpose();
    for (Index z = 0; z < nz; ++z) {
        const double s1 = u.col(z).sum();
        const double s2 = u.col(z).squaredNorm();
        if (s1 * s1 / s2 < options.min_effective_stations)
            throw Error(Errc::insufficient_local_data,
                        "knot " + std::to_string(z) + " has too few effective stations");
    }

    std::vector<PairStats> pairs;
    std::vector<std::array<Index, 2>> index;
    double d_min = std::numeric_limits<double>::infinity();
    double d_max = 0.0;
    for (Index i = 0; i < ns; ++i)
        for (Index j = i + 1; j < ns; ++j) {
            const double d = (stations.row(i) - stations.row(j)).norm();
            if (!(d > 0.0))
                continue;
            pairs.push_back({d, samples.col(i).squaredNorm() + samples.col(j).squaredNorm(),
                             samples.col(i).dot(samples.col(j))});
            index.push_back({i, j});
            d_min = std::min(d_min, d);
            d_max = std::max(d_max, d);
        }
    if (pairs.empty())
        throw Error(Errc::insufficient_local_data, "stations are not distinct");
    const auto n_rep = static_cast<double>(samples.rows());
    const double lo = std::log(d_min / 20.0);
    const double hi = std::log(d_max * 20.0);
    constexpr int bits = 40;

    auto knot_fit = [&](Index z, double nugget, double& best_log_phi) {
        auto neg = [&](double log_phi) {
            const double phi = std::exp(log_phi);
            double acc = 0.0;
            for (std::size_t k = 0; k < pairs.size(); ++k) {
                const double wgt = u(index[k][0], z) * u(index[k][1], z);
                const double rho = (1.0 - nugget) * std::exp(-pairs[k].dist / phi);
                acc += wgt * pair_loglik(pairs[k], n_rep, rho);
            }
            return -acc;
        };
        const auto r = boost::math::tools::brent_find_minima(neg, lo, hi, bits);
        best_log_phi = r.first;
        return r.second;
    };

    auto total = [&](double nugget) {
        double acc = 0.0;
        double ignored = 0.0;
        for (Index z = 0; z < nz; ++z)
            acc += knot_fit(z, nugget, ignored);
        return acc;
    };
    // The profile in the nugget can be flat near zero; compare the boundary
    // explicitly with the interior optimum.
    const auto inner = boost::math::tools::brent_find_minima(total, 0.0, options.nugget_max, bits);
    double nugget = inner.first;
    if (total(0.0) <= inner.second)
        nugget = 0.0;

    Vector ranges(nz);
    for (Index z = 0; z < nz; ++z) {
        double log_phi = 0.0;
        knot_fit(z, nugget, log_phi);
        ranges(z) = std::exp(log_phi);
    }
    return SpatialModel(knots, ranges, nugget);
}

DependenceModel shrink(const Matrix& c_spatial, const Matrix& c_hat, double delta)
{
    if (!(delta >= 0.0 && delta <= 1.0))
        throw Error(Errc::invalid_argument, "shrinkage weight must lie in [0, 1]");
    if (c_spatial.rows() != c_hat.rows() || c_spatial.cols() != c_hat.cols())
        throw Error(Errc::dimension_mismatch, "correlation matrices differ in shape");
    DependenceModel m;
    if (delta == 0.0)
        m.c = c_spatial;
    else if (delta == 1.0)
        m.c = c_hat;
    else
        m.c = (1.0 - delta) * c_spatial + delta * c_hat;
    m.provenance = Provenance::shrunk;
    m.delta_c = delta;
    return m;
}

std::span<const double> default_levels()
{
    static constexpr std::array<double, 3> levels{0.60, 0.80, 0.95};
    return levels;
}

double grand_mean_coverage(const Matrix& c, const Matrix& samples, double level)
{
    if (samples.cols() != c.rows())
        throw Error(Errc::dimension_mismatch, "samples and correlation differ in size");
    if (samples.rows() < 1)
        throw Error(Errc::insufficient_data, "coverage of an empty set");
    const double half = stats::central_z(level) * std::sqrt(grand_mean_variance(c));
    Index inside = 0;
    for (Index t = 0; t < samples.rows(); ++t)
        if (std::abs(samples.row(t).mean()) <= half)
            ++inside;
    return static_cast<double>(inside) / static_cast<double>(samples.rows());
}

DeltaSelection select_delta(const Matrix& c_spatial, const Matrix& c_hat, const Matrix& samples,
                            std::span<const double> levels, double step)
{
    if (levels.empty())
        throw Error(Errc::empty_grid, "no coverage levels given");
    if (!(step > 0.0 && step <= 1.0))
        throw Error(Errc::invalid_argument, "delta step must lie in (0, 1]");
    DeltaSelection out;
    const auto n_steps = static_cast<Index>(std::floor(1.0 / step + 1e-9));
    for (Index k = 0; k <= n_steps; ++k)
        out.grid.push_back(std::min(1.0, static_cast<double>(k) * step));
    if (out.grid.back() < 1.0)
        out.grid.push_back(1.0);
    double best = std::numeric_limits<double>::infinity();
    for (double delta : out.grid) {
        const DependenceModel m = shrink(c_spatial, c_hat, delta);
        double loss = 0.0;
        for (double level : levels)
            loss += std::abs(grand_mean_coverage(m.c, samples, level) - level);
        loss /= static_cast<double>(levels.size());
        out.loss.push_back(loss);
        if (loss < best) {
            best = loss;
            out.delta = delta;
        }
    }
    return out;
}

Vector kriging_weights(const Matrix& c_ss, const Vector& c_s0)
{
    Eigen::LLT<Matrix> llt(c_ss);
    if (llt.info() != Eigen::Success)
        throw Error(Errc::singular_kriging_system, "station correlation matrix is not positive definite");
    return llt.solve(c_s0);
}

Matrix InterpolatedField::total_sd() const
{
    return (sd.array().square() + sigma.array().square()).sqrt().matrix();
}

Vector idw(const Locations& stations, const Vector& values, const Locations& grid)
{
    if (values.size() != stations.rows() || stations.rows() == 0)
        throw Error(Errc::dimension_mismatch, "one value per station is required");
    Vector out(grid.rows());
    for (Index g = 0; g < grid.rows(); ++g) {
        double num = 0.0;
        double den = 0.0;
        bool exact = false;
        for (Index i = 0; i < stations.rows(); ++i) {
            const double d2 = (grid.row(g) - stations.row(i)).squaredNorm();
            if (d2 == 0.0) {
                out(g) = values(i);
                exact = true;
                break;
            }
            num += values(i) / d2;
            den += 1.0 / d2;
        }
        if (!exact)
            out(g) = num / den;
    }
    return out;
}

InterpolatedField krige(const Locations& stations, const Matrix& means, const Matrix& sigmas,
                        const SpatialModel& model, const Locations& grid)
{
    const Index ns = stations.rows();
    if (means.cols() != ns || sigmas.rows() != means.rows() || sigmas.cols() != ns)
        throw Error(Errc::dimension_mismatch, "station means and SDs must be n_t x n_stations");
    if (!(sigmas.array() > 0.0).all())
        throw Error(Errc::zero_sigma, "station SDs must be positive");
    Matrix c_ss = model.correlation_matrix(stations);
    if (model.nugget() == 0.0)
        c_ss.diagonal().array() += 1e-8;
    Eigen::LLT<Matrix> llt(c_ss);
    if (llt.info() != Eigen::Success)
        throw Error(Errc::singular_kriging_system, "station correlation matrix is not positive definite");
    // Station-to-grid correlations; coincident points are exactly 1.
    const Matrix c_s0 = model.cross_correlation(stations, grid);
    const Matrix lambda = llt.solve(c_s0); // n_s x n_grid
    const Vector explained = (c_s0.array() * lambda.array()).colwise().sum().transpose();

    const Index nt = means.rows();
    InterpolatedField f;
    f.grid = grid;
    f.mean.resize(nt, grid.rows());
    f.sd.resize(nt, grid.rows());
    f.sigma.resize(nt, grid.rows());
    const Vector factor = (1.0 - explained.array()).max(0.0).sqrt().matrix();
    parallel_for(nt, [&](Index t) {
        const Vector sig0 = idw(stations, sigmas.row(t).transpose(), grid);
        const double base = means.row(t).mean();
        const Vector anomaly = ((means.row(t).array() - base) / sigmas.row(t).array()).matrix().transpose();
        const Vector kriged = lambda.transpose() * anomaly;
        f.mean.row(t) = (base + sig0.array() * kriged.array()).matrix().transpose();
        f.sd.row(t) = (sig0.array() * factor.array()).matrix().transpose();
        f.sigma.row(t) = sig0.transpose();
    });
    return f;
}

}  // namespace esncast
