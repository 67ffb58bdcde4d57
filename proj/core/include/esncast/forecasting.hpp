#pragma once

// Recursive long-lead ensemble forecasting with echo-state networks.

#include "esncast/reservoir.hpp"

#include <cstdint>
#include <memory>
#include <vector>

namespace esncast {

/// Per-column z-scoring fitted on a training block.
struct Standardizer {
    RowVector mean;
    RowVector sd;

    static Standardizer fit(const Matrix& y);
    Matrix apply(const Matrix& y) const;
    Matrix invert(const Matrix& z) const;
};

/// Writes the embedded input x_t = (z_{t-tau}, ..., z_{t-m*tau}[, 1]) for row t
/// of the standardized series z. Requires t >= m * tau.
void embed_input(const Matrix& z, Index t, const HyperParams& hp, Eigen::Ref<Vector> x);

/// Inputs for rows [t_begin, t_end) stacked row-wise.
Matrix embed_inputs(const Matrix& z, Index t_begin, Index t_end, const HyperParams& hp);

struct ForecastEnsemble {
    Index origin = 0;              ///< number of observed rows the forecast conditions on
    std::vector<Matrix> members;   ///< n_ens matrices of n_f x n_l
    Matrix mean;                   ///< n_f x n_l point forecast (member average)
    std::vector<std::uint64_t> member_seeds;

    Index horizon() const noexcept { return mean.rows(); }
    Index size() const noexcept { return static_cast<Index>(members.size()); }

    /// Cross-member standard deviation per step and element (n_f x n_l).
    Matrix member_sd() const;
};

/// Ensemble of reservoirs conditioned on one observed multivariate series.
///
/// Each member keeps fixed weights. Forecasts proceed one step at a time:
/// every member predicts the next value, the cross-member mean is appended as
/// a pseudo-observation, and each member refits its readout on the extended
/// history before the next step. Reservoir inputs are z-scored with moments
/// of the first `standardize_rows` rows, so forecasts from later origins share
/// one input scaling; the readout maps states to the series on its observed
/// scale, without an intercept.
class EnsembleForecaster {
public:
    EnsembleForecaster(Matrix data, Index standardize_rows, HyperParams hp, Index n_ens,
                       std::uint64_t seed);
    ~EnsembleForecaster();
    EnsembleForecaster(EnsembleForecaster&&) noexcept;
    EnsembleForecaster& operator=(EnsembleForecaster&&) noexcept;

    /// Forecasts rows [origin, origin + n_f) conditioning on rows [0, origin).
    /// Origins must be passed in non-decreasing order.
    ForecastEnsemble forecast_from(Index origin, Index n_f);

    const HyperParams& hyper_params() const noexcept;
    const Standardizer& standardizer() const noexcept;
    Index ensemble_size() const noexcept;

    /// Smallest admissible origin: m * tau + washout + 1.
    Index min_origin() const noexcept;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Forecast n_f steps beyond the end of `train`.
ForecastEnsemble iterative_forecast(const Matrix& train, const HyperParams& hp, Index n_f,
                                    Index n_ens, std::uint64_t seed);

struct ValidationResult {
    std::vector<HyperParams> grid;
    std::vector<double> scores; ///< pooled validation MSE per candidate
    Index best = 0;

    const HyperParams& best_params() const { return grid.at(static_cast<std::size_t>(best)); }
};

/// Scores every candidate by pooled forecast MSE on rows [split, end) of `data`,
/// forecasting consecutive blocks of n_f steps. Common seeds across candidates;
/// ties go to the earliest candidate.
ValidationResult validate_hyperparameters(const Matrix& data, Index split, Index n_f,
                                          const std::vector<HyperParams>& grid, Index n_ens,
                                          std::uint64_t seed);

}  // namespace esncast
