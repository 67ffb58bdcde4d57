#pragma once

// Classical comparators: per-element ARFIMA(p, d, q) and the linear
// state-space special case of the echo-state network.

#include "esncast/forecasting.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace esncast {

/// Binomial-series coefficients of (1 - B)^d: pi_0 = 1, pi_k = pi_{k-1} (k - 1 - d) / k.
std::vector<double> frac_diff_coeffs(double d, Index k);

struct ArfimaModel {
    int p = 0;
    int q = 0;
    double d = 0.0;
    std::vector<double> phi;   ///< AR coefficients phi_1..phi_p
    std::vector<double> theta; ///< MA coefficients theta_1..theta_q
    double mean = 0.0;         ///< series mean removed before filtering
    double sigma2 = 0.0;       ///< innovation variance
    double aic = 0.0;
    Index truncation = 0;      ///< length of the fractional filter

    /// Coefficients c_k of the truncated AR(inf) form, c_0 = 1, so that
    /// sum_k c_k (x_{t-k} - mean) = e_t.
    std::vector<double> ar_infinity() const;

    /// MA(inf) weights psi_0..psi_{n-1} of the same model.
    std::vector<double> psi_weights(Index n) const;
};

struct ArfimaOptions {
    int max_p = 2;
    int max_q = 2;
    std::vector<double> d_grid = {0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45};
    Index max_truncation = 1000;
    int max_evaluations = 4000;
};

/// Conditional-sum-of-squares fit of every (p, d, q) candidate on the demeaned
/// series; the lowest AIC wins, ties going to the earlier candidate (d outer,
/// then p, then q). Throws insufficient_data below 50 points,
/// optimizer_failed when no candidate yields a finite objective and
/// non_stationary_fit when the chosen AR polynomial has a root on or inside
/// the unit circle.
ArfimaModel fit_arfima(std::span<const double> series, const ArfimaOptions& options = {});

/// Fitted CSS for one fixed order, used by fit_arfima.
ArfimaModel fit_arfima_order(std::span<const double> series, int p, double d, int q,
                             const ArfimaOptions& options = {});

struct ArfimaForecast {
    std::vector<double> mean; ///< point forecasts for steps 1..n_f
    std::vector<double> sd;   ///< Gaussian predictive SD
};

ArfimaForecast forecast_arfima(const ArfimaModel& model, std::span<const double> series, Index n_f);

/// Per-element ARFIMA forecasts for a T x n_l block; returns (mean, sd), each n_f x n_l.
struct ArfimaBlockForecast {
    Matrix mean;
    Matrix sd;
    std::vector<ArfimaModel> models;
};
ArfimaBlockForecast arfima_block_forecast(const Matrix& train, Index n_f,
                                          const ArfimaOptions& options = {});

/// Echo-state forecast with identity activation and alpha = 1, i.e. a linear
/// state-space model with random fixed weights.
ForecastEnsemble state_space_forecast(const Matrix& train, HyperParams hp, Index n_f, Index n_ens,
                                      std::uint64_t seed);

}  // namespace esncast
