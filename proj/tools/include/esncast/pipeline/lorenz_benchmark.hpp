#pragma once

// Lorenz-96 method comparison and uncertainty study, shared by the
// `benchmark` command and the acceptance suite.

#include "esncast/baselines.hpp"
#include "esncast/lorenz96.hpp"
#include "esncast/stats.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace esncast::pipeline {

struct LorenzBenchmarkSettings {
    lorenz96::Config model;
    Index points = 1000;
    Index realizations = 10;
    Index train = 980;
    Index test = 20;
    Index n_ens = 300;
    HyperParams hp;           ///< alpha is overridden per method
    double alpha_hat = 0.0023;
    ArfimaOptions arfima;
    Index n_w = 20;           ///< calibration windows ending at `train`
    std::vector<double> levels{0.95, 0.80, 0.60};
    std::vector<double> lambda_grid{0.0, 0.02, 0.04, 0.06, 0.08, 0.1, 0.12, 0.14, 0.16, 0.18, 0.2};
    double pair_lo = 0.4;     ///< |C_hat| band for the mild-correlation pairs
    double pair_hi = 0.6;
    std::uint64_t seed = 1;
};

struct MethodScores {
    std::string name;
    std::vector<double> mse;  ///< per element and realization
    std::vector<double> crps; ///< per element and realization, averaged over steps
    double seconds = 0.0;

    stats::Summary mse_summary() const { return stats::summarize(mse); }
    stats::Summary crps_summary() const { return stats::summarize(crps); }
};

/// ESN(alpha_hat), ESN(alpha = 1), linear state-space and ARFIMA, each trained
/// on the first `train` rows and scored on the next `test`.
std::vector<MethodScores> compare_methods(const std::vector<Matrix>& realizations,
                                          const LorenzBenchmarkSettings& s);

/// Median (IQR) table with one row per method.
std::string format_method_table(const std::vector<MethodScores>& methods);

struct RealizationStudy {
    // Marginal calibration on the test block, one entry per level.
    std::vector<Vector> covered_calibrated;   ///< per element, hits out of `test`
    std::vector<Vector> covered_uncalibrated; ///< ensemble-SD intervals
    double ks_calibrated = 0.0;
    double ks_uncalibrated = 0.0;

    // Sparse correlation path over lambda_grid.
    std::vector<double> nonzero;
    std::vector<double> variance_ratio; ///< grand-mean variance relative to C_hat
    double lambda0_max_diff = 0.0;

    // In-sample coverage over the residual archive, one entry per level.
    Vector neighbour_correlation; ///< C_hat(l, l+1) around the ring
    Index pair_count = 0;
    std::vector<double> pair_dependent;
    std::vector<double> pair_independent;
    std::vector<double> grand_dependent;
    std::vector<double> grand_independent;
};

struct UncertaintyStudy {
    std::vector<double> levels;
    Index test = 0;
    std::vector<RealizationStudy> runs;
    double seconds = 0.0;

    /// Median over elements of the per-element coverage, pooled over runs.
    double median_coverage(std::size_t level, bool calibrated) const;
};

/// Calibrates ESN(alpha_hat) on n_w windows of `test` steps that end at
/// `train`, then scores the forecast of the test block and the dependence
/// models of the standardized residuals.
UncertaintyStudy study_uncertainty(const std::vector<Matrix>& realizations, const LorenzBenchmarkSettings& s);

}  // namespace esncast::pipeline
