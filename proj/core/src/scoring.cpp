#include "esncast/scoring.hpp"

#include "esncast/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace esncast {

MseScores mse(const Matrix& forecast, const Matrix& truth)
{
    if (forecast.rows() != truth.rows() || forecast.cols() != truth.cols())
        throw Error(Errc::shape_mismatch, "forecast and truth blocks differ in shape");
    if (forecast.size() == 0)
        throw Error(Errc::shape_mismatch, "empty forecast block");
    const Matrix sq = (forecast - truth).array().square().matrix();
    MseScores out;
    out.per_element = sq.colwise().mean().transpose();
    out.pooled = sq.mean();
    return out;
}

double crps(std::span<const double> members, double y)
{
    if (members.empty())
        throw Error(Errc::empty_ensemble, "CRPS needs at least one member");
    std::vector<double> sorted(members.begin(), members.end());
    std::sort(sorted.begin(), sorted.end());
    const auto n = static_cast<double>(sorted.size());
    double abs_dev = 0.0;
    // sum_{i,j} |x_i - x_j| = 2 * sum_k (2k - n + 1) x_(k) over sorted values
    double spread = 0.0;
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        abs_dev += std::abs(sorted[k] - y);
        spread += (2.0 * static_cast<double>(k) - n + 1.0) * sorted[k];
    }
    return abs_dev / n - spread / (n * n);
}

double crps_gaussian(double mu, double sigma, double y)
{
    if (!(sigma >= 0.0))
        throw Error(Errc::invalid_argument, "CRPS needs a nonnegative SD");
    if (sigma == 0.0)
        return std::abs(mu - y);
    const double z = (y - mu) / sigma;
    const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    return sigma * (z * (2.0 * stats::normal_cdf(z) - 1.0) + 2.0 * pdf - std::numbers::inv_sqrtpi);
}

Matrix crps_table(const ForecastEnsemble& ensemble, const Matrix& truth)
{
    if (truth.rows() != ensemble.horizon() || truth.cols() != ensemble.mean.cols())
        throw Error(Errc::shape_mismatch, "truth block does not match the ensemble");
    Matrix out(truth.rows(), truth.cols());
    std::vector<double> values(ensemble.members.size());
    for (Index j = 0; j < truth.rows(); ++j)
        for (Index l = 0; l < truth.cols(); ++l) {
            for (std::size_t k = 0; k < values.size(); ++k)
                values[k] = ensemble.members[k](j, l);
            out(j, l) = crps(values, truth(j, l));
        }
    return out;
}

}  // namespace esncast
