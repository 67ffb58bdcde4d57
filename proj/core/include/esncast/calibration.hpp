#pragma once

// Post hoc marginal calibration of ensemble forecasts from windowed residuals.

#include "esncast/forecasting.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace esncast {

/// Forecasts issued every n_f rows from origin T, window w covering rows
/// T + w n_f + j for j = 0..n_f-1 (zero-based w and j).
struct WindowedForecasts {
    Index origin = 0;
    Index n_w = 0;
    Index n_f = 0;
    std::vector<Matrix> forecast;    ///< n_w blocks of n_f x n_l ensemble means
    std::vector<Matrix> ensemble_sd; ///< n_w blocks of n_f x n_l member SDs
    std::vector<Matrix> truth;       ///< n_w blocks of n_f x n_l observations

    Index elements() const { return forecast.empty() ? 0 : forecast.front().cols(); }

    /// The n_w forecasts of element l at step j (zero-based).
    Vector forecasts_at(Index l, Index j) const;
    Vector truths_at(Index l, Index j) const;

    /// Row index of the observation matched with window w, step j.
    Index row_of(Index w, Index j) const { return origin + w * n_f + j; }
};

/// Runs the ensemble forecaster from origins T, T + n_f, ..., T + (n_w - 1) n_f
/// over data that holds at least T + n_w n_f rows. Inputs are standardized on
/// the first T rows. Throws insufficient_data when the series is too short.
WindowedForecasts build_windowed_forecasts(const Matrix& data, Index origin, const HyperParams& hp,
                                           Index n_w, Index n_f, Index n_ens, std::uint64_t seed);

/// Same, reusing an existing forecaster (origins must not precede earlier calls).
WindowedForecasts build_windowed_forecasts(EnsembleForecaster& engine, const Matrix& data,
                                           Index origin, Index n_w, Index n_f);

struct ResidualTable {
    std::vector<Matrix> residuals; ///< n_w blocks of n_f x n_l, truth minus forecast
    Matrix sigma_hat;              ///< n_f x n_l SD over windows, denominator n_w - 1
};

/// Throws too_few_windows when n_w < 2.
ResidualTable residuals_and_sd(const WindowedForecasts& wf);

/// Least-squares non-decreasing fit (pool adjacent violators).
std::vector<double> isotonic_regression(std::span<const double> y);

/// Monotone piecewise-cubic Hermite interpolant with Fritsch-Carlson slopes.
/// Requires strictly increasing x and non-decreasing y.
class MonotoneCubic {
public:
    MonotoneCubic(std::vector<double> x, std::vector<double> y);

    double operator()(double t) const;
    double derivative(double t) const;
    const std::vector<double>& slopes() const noexcept { return m_; }

private:
    std::size_t segment(double t) const;

    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<double> m_;
};

inline constexpr double sigma_floor = 1e-8;

/// Non-decreasing smoothing of one element's SD profile over steps 1..n_f:
/// isotonic projection, then a monotone cubic through the projected values,
/// evaluated at the steps and floored at sigma_floor.
std::vector<double> monotone_spline(std::span<const double> sigma_hat);

/// Residuals divided by the smoothed SD of their step and element. Throws
/// zero_sigma when a divisor is not positive.
std::vector<Matrix> standardize(const std::vector<Matrix>& residuals, const Matrix& sigma_tilde);

/// Standard normal CDF of a standardized residual.
double pit(double r);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// mean -/+ z_{(1+level)/2} sigma. Throws bad_level outside (0, 1).
Interval interval(double mean, double sigma, double level);

/// Fraction of truths inside [lo, hi] (inclusive).
double coverage(std::span<const Interval> intervals, std::span<const double> truth);

/// Fraction of truth cells inside elementwise bounds.
double coverage(const Matrix& lo, const Matrix& hi, const Matrix& truth);

struct CalibrationModel {
    Index n_w = 0;
    Index n_f = 0;
    Matrix sigma_hat;                 ///< n_f x n_l
    Matrix sigma_tilde;               ///< n_f x n_l, non-decreasing down each column
    std::vector<Matrix> residuals;    ///< n_w blocks of n_f x n_l
    std::vector<Matrix> standardized; ///< residuals / sigma_tilde

    Index elements() const { return sigma_tilde.cols(); }

    /// Standardized residuals stacked as (n_w n_f) x n_l samples.
    Matrix pooled_standardized() const;

    /// Elementwise interval bounds for an n_f x n_l point forecast.
    std::pair<Matrix, Matrix> intervals(const Matrix& mean, double level) const;
};

/// Residuals, per-step SDs, monotone smoothing and standardization in one pass.
CalibrationModel calibrate(const WindowedForecasts& wf);

}  // namespace esncast
