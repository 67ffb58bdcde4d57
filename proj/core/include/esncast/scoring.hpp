#pragma once

#include "esncast/forecasting.hpp"

#include <span>

namespace esncast {

struct MseScores {
    Vector per_element; ///< column-wise mean squared error
    double pooled = 0.0;
};

/// Throws shape_mismatch when the two blocks differ in shape.
MseScores mse(const Matrix& forecast, const Matrix& truth);

/// Empirical-ensemble CRPS: mean|m_i - y| - 0.5 * mean_{i,j}|m_i - m_j|.
double crps(std::span<const double> members, double y);

/// Closed-form CRPS of N(mu, sigma^2); reduces to |mu - y| when sigma = 0.
double crps_gaussian(double mu, double sigma, double y);

/// CRPS of every (step, element) cell of an ensemble (n_f x n_l).
Matrix crps_table(const ForecastEnsemble& ensemble, const Matrix& truth);

}  // namespace esncast
