#include "esncast/pipeline/lorenz_benchmark.hpp"

#include "esncast/calibration.hpp"
#include "esncast/dependence.hpp"
#include "esncast/scoring.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace esncast::pipeline {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void record(MethodScores& m, const Matrix& mean, const Matrix& crps, const Matrix& truth)
{
    const MseScores e = mse(mean, truth);
    for (Index l = 0; l < truth.cols(); ++l) {
        m.mse.push_back(e.per_element(l));
        m.crps.push_back(crps.col(l).mean());
    }
}

}  // namespace

std::vector<MethodScores> compare_methods(const std::vector<Matrix>& realizations,
                                          const LorenzBenchmarkSettings& s)
{
    std::vector<MethodScores> out(4);
    out[0].name = "ESN(alpha_hat)";
    out[1].name = "ESN(alpha=1)";
    out[2].name = "state-space";
    out[3].name = "ARFIMA";
    for (std::size_t r = 0; r < realizations.size(); ++r) {
        const Matrix train = realizations[r].topRows(s.train);
        const Matrix truth = realizations[r].middleRows(s.train, s.test);
        const std::uint64_t seed = derive_seed(s.seed, r);

        for (int k = 0; k < 2; ++k) {
            const auto t0 = std::chrono::steady_clock::now();
            HyperParams hp = s.hp;
            hp.alpha = k == 0 ? s.alpha_hat : 1.0;
            const ForecastEnsemble fc = iterative_forecast(train, hp, s.test, s.n_ens, seed);
            record(out[static_cast<std::size_t>(k)], fc.mean, crps_table(fc, truth), truth);
            out[static_cast<std::size_t>(k)].seconds += seconds_since(t0);
        }
        {
            const auto t0 = std::chrono::steady_clock::now();
            const ForecastEnsemble fc = state_space_forecast(train, s.hp, s.test, s.n_ens, seed);
            record(out[2], fc.mean, crps_table(fc, truth), truth);
            out[2].seconds += seconds_since(t0);
        }
        {
            const auto t0 = std::chrono::steady_clock::now();
            const ArfimaBlockForecast fc = arfima_block_forecast(train, s.test, s.arfima);
            Matrix c(truth.rows(), truth.cols());
            for (Index j = 0; j < c.rows(); ++j)
                for (Index l = 0; l < c.cols(); ++l)
                    c(j, l) = crps_gaussian(fc.mean(j, l), fc.sd(j, l), truth(j, l));
            record(out[3], fc.mean, c, truth);
            out[3].seconds += seconds_since(t0);
        }
    }
    return out;
}

std::string format_method_table(const std::vector<MethodScores>& methods)
{
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof line, "%-16s %-18s %-18s\n", "method", "MSE", "CRPS");
    out << line;
    for (const MethodScores& m : methods) {
        const auto a = m.mse_summary();
        const auto b = m.crps_summary();
        char mse[40];
        char crps[40];
        std::snprintf(mse, sizeof mse, "%.2f (%.2f)", a.median, a.iqr);
        std::snprintf(crps, sizeof crps, "%.2f (%.2f)", b.median, b.iqr);
        std::snprintf(line, sizeof line, "%-16s %-18s %-18s\n", m.name.c_str(), mse, crps);
        out << line;
    }
    return out.str();
}

double UncertaintyStudy::median_coverage(std::size_t level, bool calibrated) const
{
    if (runs.empty())
        return 0.0;
    const Index n_l = runs.front().covered_calibrated.at(level).size();
    std::vector<double> per_element;
    for (Index l = 0; l < n_l; ++l) {
        double hits = 0.0;
        for (const RealizationStudy& r : runs)
            hits += (calibrated ? r.covered_calibrated : r.covered_uncalibrated).at(level)(l);
        per_element.push_back(hits / static_cast<double>(runs.size() * static_cast<std::size_t>(test)));
    }
    return stats::median(per_element);
}

UncertaintyStudy study_uncertainty(const std::vector<Matrix>& realizations, const LorenzBenchmarkSettings& s)
{
    const auto t0 = std::chrono::steady_clock::now();
    UncertaintyStudy study;
    study.levels = s.levels;
    study.test = s.test;
    const std::size_t n_lev = s.levels.size();
    const Index n_f = s.test;
    const Index origin = s.train - s.n_w * n_f;
    if (origin < 2)
        throw Error(Errc::insufficient_data, "training block is too short for the calibration windows");
    HyperParams hp = s.hp;
    hp.alpha = s.alpha_hat;

    for (std::size_t r = 0; r < realizations.size(); ++r) {
        const Matrix& data = realizations[r];
        const Index n_l = data.cols();
        RealizationStudy run;
        EnsembleForecaster engine(data.topRows(s.train + s.test), origin, hp, s.n_ens, derive_seed(s.seed, r));
        const CalibrationModel cm = calibrate(build_windowed_forecasts(engine, data, origin, s.n_w, n_f));
        const ForecastEnsemble fc = engine.forecast_from(s.train, n_f);
        const Matrix truth = data.middleRows(s.train, n_f);
        const Matrix member_sd = fc.member_sd();

        std::vector<double> pit_cal;
        std::vector<double> pit_unc;
        run.covered_calibrated.assign(n_lev, Vector::Zero(n_l));
        run.covered_uncalibrated.assign(n_lev, Vector::Zero(n_l));
        for (Index j = 0; j < n_f; ++j)
            for (Index l = 0; l < n_l; ++l) {
                const double e = truth(j, l) - fc.mean(j, l);
                pit_cal.push_back(pit(e / cm.sigma_tilde(j, l)));
                pit_unc.push_back(pit(e / member_sd(j, l)));
                for (std::size_t k = 0; k < n_lev; ++k) {
                    const double z = stats::central_z(s.levels[k]);
                    run.covered_calibrated[k](l) += std::abs(e) <= z * cm.sigma_tilde(j, l) ? 1.0 : 0.0;
                    run.covered_uncalibrated[k](l) += std::abs(e) <= z * member_sd(j, l) ? 1.0 : 0.0;
                }
            }
        run.ks_calibrated = stats::ks_statistic_uniform(pit_cal);
        run.ks_uncalibrated = stats::ks_statistic_uniform(pit_unc);

        const DependenceModel c_hat = empirical_correlation(cm.pooled_standardized());
        const double base_var = grand_mean_variance(c_hat.c);
        Matrix warm;
        for (std::size_t k = 0; k < s.lambda_grid.size(); ++k) {
            const SparseResult sp = sparse_correlation(c_hat.c, s.lambda_grid[k], {}, warm);
            warm = sp.model.c;
            run.nonzero.push_back(nonzero_proportion(sp.model.c));
            run.variance_ratio.push_back(grand_mean_variance(sp.model.c) / base_var);
            if (s.lambda_grid[k] == 0.0)
                run.lambda0_max_diff = (sp.model.c - c_hat.c).cwiseAbs().maxCoeff();
        }

        // Adjacent ring pairs with mild estimated correlation.
        std::vector<std::pair<Index, Index>> pairs;
        run.neighbour_correlation = Vector::Zero(n_l);
        for (Index l = 0; l < n_l; ++l) {
            const Index b = (l + 1) % n_l;
            run.neighbour_correlation(l) = c_hat.c(l, b);
            const double rho = std::abs(c_hat.c(l, b));
            if (b != l && rho >= s.pair_lo && rho <= s.pair_hi)
                pairs.emplace_back(l, b);
        }
        run.pair_count = static_cast<Index>(pairs.size());
        run.pair_dependent.assign(n_lev, 0.0);
        run.pair_independent.assign(n_lev, 0.0);
        run.grand_dependent.assign(n_lev, 0.0);
        run.grand_independent.assign(n_lev, 0.0);
        const Matrix identity = Matrix::Identity(n_l, n_l);
        double n_pair_points = 0.0;
        double n_grand_points = 0.0;
        for (Index w = 0; w < cm.n_w; ++w)
            for (Index j = 0; j < cm.n_f; ++j) {
                const Matrix& res = cm.residuals[static_cast<std::size_t>(w)];
                const Vector sigma = cm.sigma_tilde.row(j).transpose();
                for (const auto& [a, b] : pairs) {
                    const double d = res(j, a) - res(j, b);
                    const double v_dep = difference_variance(c_hat.c, a, b, sigma(a), sigma(b));
                    const double v_ind = difference_variance(identity, a, b, sigma(a), sigma(b));
                    for (std::size_t k = 0; k < n_lev; ++k) {
                        const double z = stats::central_z(s.levels[k]);
                        run.pair_dependent[k] += std::abs(d) <= z * std::sqrt(v_dep) ? 1.0 : 0.0;
                        run.pair_independent[k] += std::abs(d) <= z * std::sqrt(v_ind) ? 1.0 : 0.0;
                    }
                    n_pair_points += 1.0;
                }
                const double g = res.row(j).mean();
                const double v_dep = grand_mean_variance(c_hat.c, sigma);
                const double v_ind = grand_mean_variance(identity, sigma);
                for (std::size_t k = 0; k < n_lev; ++k) {
                    const double z = stats::central_z(s.levels[k]);
                    run.grand_dependent[k] += std::abs(g) <= z * std::sqrt(v_dep) ? 1.0 : 0.0;
                    run.grand_independent[k] += std::abs(g) <= z * std::sqrt(v_ind) ? 1.0 : 0.0;
                }
                n_grand_points += 1.0;
            }
        for (std::size_t k = 0; k < n_lev; ++k) {
            if (n_pair_points > 0.0) {
                run.pair_dependent[k] /= n_pair_points;
                run.pair_independent[k] /= n_pair_points;
            }
            run.grand_dependent[k] /= n_grand_points;
            run.grand_independent[k] /= n_grand_points;
        }
        study.runs.push_back(std::move(run));
    }
    study.seconds = seconds_since(t0);
    return study;
}

}  // namespace esncast::pipeline
