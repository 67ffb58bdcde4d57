#pragma once

// District aggregation of interpolated fields and exposed-population counts.

#include "esncast/spatial.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace esncast {

/// Closed ring of vertices; the closing vertex is implicit.
using Ring = std::vector<Point>;

struct District {
    std::string id;
    std::vector<Ring> parts; ///< one ring per polygon of a multipolygon
    std::int64_t population = 0;
};

struct DistrictSet {
    std::vector<District> districts;

    Index size() const noexcept { return static_cast<Index>(districts.size()); }
    std::int64_t total_population() const;

    /// Throws invalid_argument for negative populations, rings with fewer than
    /// three vertices or self-intersecting rings.
    void validate() const;
};

/// Even-odd ray casting; points on an edge count as inside.
bool point_in_ring(const Point& p, const Ring& ring);
bool point_in_district(const Point& p, const District& d);

/// True when two non-adjacent edges of the ring cross or touch.
bool self_intersects(const Ring& ring);

/// Grid indices falling in each district. Throws empty_district when a
/// district receives no grid point.
std::vector<std::vector<Index>> district_membership(const Locations& grid, const DistrictSet& districts);

/// Per-district averages of a field given as n_t x n_grid.
Matrix district_average(const Matrix& values, const std::vector<std::vector<Index>>& membership);

struct DistrictField {
    Matrix mean;          ///< n_t x n_d
    Matrix sd;            ///< n_t x n_d, average total SD of member grid points
    Locations centroids;  ///< mean location of member grid points
};

/// Arithmetic means of the grid values whose locations fall inside each district.
DistrictField district_means(const InterpolatedField& field, const DistrictSet& districts);

struct ExposureOptions {
    double threshold = 12.1; ///< on the original (exponentiated) scale
    bool log_scale = true;   ///< means and SDs describe the logarithm of the field
    Index n_draws = 2000;
    double level = 0.95;
    std::uint64_t seed = 1;
};

struct ExposureSeries {
    Vector mean_exposed;                 ///< n_t
    std::vector<std::int64_t> lo;        ///< lower PI bound per time
    std::vector<std::int64_t> hi;        ///< upper PI bound per time
    Matrix exceedance;                   ///< n_t x n_d exceedance frequency over draws
};

/// Monte Carlo exposed-population series. Each draw of the log-scale field at
/// time t is N(mean_t, diag(sd_t) C diag(sd_t)); a district is exposed when its
/// draw exceeds log(threshold), or the threshold itself without log_scale. PI bounds are order statistics of the draws.
/// Throws bad_threshold when the threshold is not a positive finite number.
ExposureSeries exposure_series(const Matrix& log_means, const Matrix& log_sds, const Matrix& c,
                               const std::vector<std::int64_t>& populations,
                               const ExposureOptions& options = {});

}  // namespace esncast
