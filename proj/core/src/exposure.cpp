#include "esncast/exposure.hpp"

#include "esncast/dependence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace esncast {

std::int64_t DistrictSet::total_population() const
{
    std::int64_t total = 0;
    for (const District& d : districts)
        total += d.population;
    return total;
}

void DistrictSet::validate() const
{
    for (const District& d : districts) {
        if (d.population < 0)
            throw Error(Errc::invalid_argument, "district " + d.id + " has a negative population");
        if (d.parts.empty())
            throw Error(Errc::invalid_argument, "district " + d.id + " has no polygon");
        for (const Ring& r : d.parts) {
            if (r.size() < 3)
                throw Error(Errc::invalid_argument, "district " + d.id + " has a degenerate ring");
            if (self_intersects(r))
                throw Error(Errc::invalid_argument, "district " + d.id + " has a self-intersecting ring");
        }
    }
}

namespace {

double cross(const Point& o, const Point& a, const Point& b)
{
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

bool on_segment(const Point& p, const Point& a, const Point& b)
{
    if (std::abs(cross(a, b, p)) > 1e-12 * std::max(1.0, (b - a).squaredNorm()))
        return false;
    return p.x() >= std::min(a.x(), b.x()) && p.x() <= std::max(a.x(), b.x()) &&
           p.y() >= std::min(a.y(), b.y()) && p.y() <= std::max(a.y(), b.y());
}

bool segments_meet(const Point& a, const Point& b, const Point& c, const Point& d)
{
    const double d1 = cross(c, d, a);
    const double d2 = cross(c, d, b);
    const double d3 = cross(a, b, c);
    const double d4 = cross(a, b, d);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
        return true;
    return on_segment(a, c, d) || on_segment(b, c, d) || on_segment(c, a, b) || on_segment(d, a, b);
}

}  // namespace

bool point_in_ring(const Point& p, const Ring& ring)
{
    const std::size_t n = ring.size();
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point& a = ring[i];
        const Point& b = ring[j];
        if (on_segment(p, a, b))
            return true;
        if ((a.y() > p.y()) != (b.y() > p.y())) {
            const double x = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
            if (p.x() < x)
                inside = !inside;
        }
    }
    return inside;
}

bool point_in_district(const Point& p, const District& d)
{
    return std::any_of(d.parts.begin(), d.parts.end(), [&](const Ring& r) { return point_in_ring(p, r); });
}

bool self_intersects(const Ring& ring)
{
    const std::size_t n = ring.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            // Skip edges that share a vertex.
            if (j == i + 1 || (i == 0 && j == n - 1))
                continue;
            if (segments_meet(ring[i], ring[(i + 1) % n], ring[j], ring[(j + 1) % n]))
                return true;
        }
    return false;
}

std::vector<std::vector<Index>> district_membership(const Locations& grid, const DistrictSet& districts)
{
    std::vector<std::vector<Index>> out(districts.districts.size());
    for (std::size_t d = 0; d < out.size(); ++d) {
        for (Index g = 0; g < grid.rows(); ++g)
            if (point_in_district(grid.row(g).transpose(), districts.districts[d]))
                out[d].push_back(g);
        if (out[d].empty())
            throw Error(Errc::empty_district, "district " + districts.districts[d].id + " contains no grid point");
    }
    return out;
}

Matrix district_average(const Matrix& values, const std::vector<std::vector<Index>>& membership)
{
    Matrix out(values.rows(), static_cast<Index>(membership.size()));
    for (std::size_t d = 0; d < membership.size(); ++d) {
        const auto& idx = membership[d];
        if (idx.empty())
            throw Error(Errc::empty_district, "district " + std::to_string(d) + " contains no grid point");
        for (Index t = 0; t < values.rows(); ++t) {
            double s = 0.0;
            for (Index g : idx)
                s += values(t, g);
            out(t, static_cast<Index>(d)) = s / static_cast<double>(idx.size());
        }
    }
    return out;
}

DistrictField district_means(const InterpolatedField& field, const DistrictSet& districts)
{
    const auto membership = district_membership(field.grid, districts);
    DistrictField out;
    out.mean = district_average(field.mean, membership);
    out.sd = district_average(field.total_sd(), membership);
    out.centroids.resize(static_cast<Index>(membership.size()), 2);
    for (std::size_t d = 0; d < membership.size(); ++d) {
        Eigen::RowVector2d c = Eigen::RowVector2d::Zero();
        for (Index g : membership[d])
            c += field.grid.row(g);
        out.centroids.row(static_cast<Index>(d)) = c / static_cast<double>(membership[d].size());
    }
    return out;
}

ExposureSeries exposure_series(const Matrix& log_means, const Matrix& log_sds, const Matrix& c,
                               const std::vector<std::int64_t>& populations, const ExposureOptions& options)
{
    if (!(options.threshold > 0.0) || !std::isfinite(options.threshold))
        throw Error(Errc::bad_threshold, "threshold must be a positive finite concentration");
    if (!(options.level > 0.0 && options.level < 1.0))
        throw Error(Errc::bad_level, "interval level must lie in (0, 1)");
    if (options.n_draws < 1)
        throw Error(Errc::invalid_argument, "at least one draw is required");
    const Index nt = log_means.rows();
    const Index nd = log_means.cols();
    if (log_sds.rows() != nt || log_sds.cols() != nd || c.rows() != nd || c.cols() != nd ||
        static_cast<Index>(populations.size()) != nd)
        throw Error(Errc::dimension_mismatch, "exposure inputs disagree on the district count");
    if (std::any_of(populations.begin(), populations.end(), [](std::int64_t p) { return p < 0; }))
        throw Error(Errc::invalid_argument, "populations must be nonnegative");

    Eigen::LLT<Matrix> llt(c);
    if (llt.info() != Eigen::Success)
        llt.compute(floor_correlation(c));
    const Matrix l = llt.matrixL();
    const double cut = options.log_scale ? std::log(options.threshold) : options.threshold;
    const double tail = 0.5 * (1.0 - options.level);
    const Index n = options.n_draws;
    const auto k_lo = static_cast<std::size_t>(std::floor(tail * static_cast<double>(n - 1)));
    const auto k_hi = static_cast<std::size_t>(std::ceil((1.0 - tail) * static_cast<double>(n - 1)));

    ExposureSeries out;
    out.mean_exposed.resize(nt);
    out.lo.resize(static_cast<std::size_t>(nt));
    out.hi.resize(static_cast<std::size_t>(nt));
    out.exceedance = Matrix::Zero(nt, nd);
    parallel_for(nt, [&](Index t) {
        std::mt19937_64 rng(derive_seed(options.seed, static_cast<std::uint64_t>(t)));
        std::normal_distribution<double> normal;
        std::vector<std::int64_t> counts(static_cast<std::size_t>(n));
        Vector z(nd);
        Vector hits = Vector::Zero(nd);
        for (Index k = 0; k < n; ++k) {
            for (Index d = 0; d < nd; ++d)
                z(d) = normal(rng);
            const Vector draw = log_means.row(t).transpose() + log_sds.row(t).transpose().cwiseProduct(l * z);
            std::int64_t exposed = 0;
            for (Index d = 0; d < nd; ++d)
                if (draw(d) > cut) {
                    exposed += populations[static_cast<std::size_t>(d)];
                    hits(d) += 1.0;
                }
            counts[static_cast<std::size_t>(k)] = exposed;
        }
        const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
        out.mean_exposed(t) = total / static_cast<double>(n);
        out.exceedance.row(t) = hits.transpose() / static_cast<double>(n);
        std::sort(counts.begin(), counts.end());
        out.lo[static_cast<std::size_t>(t)] = counts[k_lo];
        out.hi[static_cast<std::size_t>(t)] = counts[k_hi];
    });
    return out;
}

}  // namespace esncast
