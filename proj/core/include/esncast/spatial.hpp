#pragma once

// Nonstationary kernel-convolution correlation with kernels mixed at knots,
// local-likelihood range fitting, generalized shrinkage and kriging.

#include "esncast/dependence.hpp"

#include <span>
#include <vector>

namespace esncast {

using Point = Eigen::Vector2d;
using Matrix2 = Eigen::Matrix2d;

/// Planar locations stored row-wise (n x 2).
using Locations = Eigen::Matrix<double, Eigen::Dynamic, 2>;

class SpatialModel {
public:
    SpatialModel() = default;

    /// Isotropic kernels V_z = phi_z^2 I at each knot. The bandwidth defaults
    /// to (d_min / 2)^2 where d_min is the smallest inter-knot distance, or 1
    /// for a single knot.
    SpatialModel(Locations knots, Vector ranges, double nugget);

    SpatialModel(Locations knots, std::vector<Matrix2> kernels, double bandwidth, double nugget);

    Index knot_count() const noexcept { return knots_.rows(); }
    const Locations& knots() const noexcept { return knots_; }
    const std::vector<Matrix2>& kernels() const noexcept { return kernels_; }
    double bandwidth() const noexcept { return bandwidth_; }
    double nugget() const noexcept { return nugget_; }

    /// Range of each isotropic knot kernel (sqrt of the first diagonal entry).
    Vector ranges() const;

    /// w_z(s) proportional to exp(-|s - b_z|^2 / (2 lambda)), summing to one.
    Vector weights(const Point& s) const;

    /// V(s) = sum_z w_z(s) V_z.
    Matrix2 kernel_at(const Point& s) const;

    /// Correlation between two sites; 1 when they coincide, scaled by
    /// (1 - nugget) otherwise.
    double correlation(const Point& s, const Point& t) const;

    /// Correlation among all rows of `sites`.
    Matrix correlation_matrix(const Locations& sites) const;

    /// Cross-correlation between `a` (rows) and `b` (columns).
    Matrix cross_correlation(const Locations& a, const Locations& b) const;

private:
    Locations knots_;
    std::vector<Matrix2> kernels_;
    double bandwidth_ = 1.0;
    double nugget_ = 0.0;
};

/// Smallest pairwise distance between rows (infinity for fewer than two rows).
double min_distance(const Locations& points);

/// (d_min / 2)^2 for the given knots; 1 for a single knot.
double default_bandwidth(const Locations& knots);

/// nx x ny knots at the cell centres of the bounding box of `points`.
Locations knot_grid(const Locations& points, Index nx = 2, Index ny = 3);

/// nx x ny regular grid spanning [x0, x1] x [y0, y1], x varying fastest.
Locations regular_grid(double x0, double x1, double y0, double y1, Index nx, Index ny);

struct LocalFitOptions {
    double nugget_max = 0.95;
    double min_effective_stations = 3.0;
};

/// Per-knot ranges and a shared nugget maximizing a pairwise Gaussian
/// composite likelihood of the samples (rows = replicates, columns =
/// stations), with station pairs weighted by w_z(s_i) w_z(s_j). Throws
/// insufficient_local_data when a knot's Kish effective station count falls
/// below the minimum.
SpatialModel fit_local_ranges(const Locations& stations, const Matrix& samples, const Locations& knots,
                              const LocalFitOptions& options = {});

/// (1 - delta) C_spatial + delta C_hat.
DependenceModel shrink(const Matrix& c_spatial, const Matrix& c_hat, double delta);

/// Nominal levels {0.60, 0.80, 0.95}.
std::span<const double> default_levels();

struct DeltaSelection {
    double delta = 0.0;
    std::vector<double> grid;
    std::vector<double> loss; ///< mean |coverage - level| per grid point
};

/// Coverage of the grand mean of each sample row (standardized residuals)
/// under variance 1'C1/n^2, at the given level.
double grand_mean_coverage(const Matrix& c, const Matrix& samples, double level);

/// Grid search over delta in {0, step, ..., 1} minimizing the mean absolute
/// gap between grand-mean coverage and nominal across levels; ties go to the
/// smaller delta.
DeltaSelection select_delta(const Matrix& c_spatial, const Matrix& c_hat, const Matrix& samples,
                            std::span<const double> levels = default_levels(), double step = 0.05);

/// Simple-kriging weights C_ss^{-1} c_s0. Throws singular_kriging_system.
Vector kriging_weights(const Matrix& c_ss, const Vector& c_s0);

struct InterpolatedField {
    Locations grid;
    Matrix mean;  ///< n_t x n_grid
    Matrix sd;    ///< kriging SD: sigma0 sqrt(1 - c' C^{-1} c), zero at stations
    Matrix sigma; ///< inverse-distance interpolation of the station SDs

    /// Combined uncertainty sqrt(sd^2 + sigma^2).
    Matrix total_sd() const;
};

/// Inverse-distance-squared interpolation; exact at coinciding stations.
Vector idw(const Locations& stations, const Vector& values, const Locations& grid);

/// Interpolates station forecasts (n_t x n_s means and SDs) onto the grid.
/// Anomalies from the per-time cross-station mean are standardized by the
/// station SD, kriged, and rescaled by the interpolated SD. A jitter of 1e-8
/// is added to the station correlation diagonal when the nugget is zero.
InterpolatedField krige(const Locations& stations, const Matrix& means, const Matrix& sigmas,
                        const SpatialModel& model, const Locations& grid);

}  // namespace esncast
