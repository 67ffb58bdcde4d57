#include "esncast/calibration.hpp"

#include "esncast/stats.hpp"

#include <algorithm>
#include <cmath>

namespace esncast {

Vector WindowedForecasts::forecasts_at(Index l, Index j) const
{
    Vector out(n_w);
    for (Index w = 0; w < n_w; ++w)
        out(w) = forecast[static_cast<std::size_t>(w)](j, l);
    return out;
}

Vector WindowedForecasts::truths_at(Index l, Index j) const
{
    Vector out(n_w);
    for (Index w = 0; w < n_w; ++w)
        out(w) = truth[static_cast<std::size_t>(w)](j, l);
    return out;
}

WindowedForecasts build_windowed_forecasts(EnsembleForecaster& engine, const Matrix& data,
                                           Index origin, Index n_w, Index n_f)
{
    if (n_w < 1 || n_f < 1)
        throw Error(Errc::invalid_argument, "n_w and n_f must be >= 1");
    if (data.rows() < origin + n_w * n_f)
        throw Error(Errc::insufficient_data,
                    "series holds " + std::to_string(data.rows()) + " rows, windows need " +
                        std::to_string(origin + n_w * n_f));
    WindowedForecasts wf;
    wf.origin = origin;
    wf.n_w = n_w;
    wf.n_f = n_f;
    for (Index w = 0; w < n_w; ++w) {
        const Index start = origin + w * n_f;
        ForecastEnsemble fc = engine.forecast_from(start, n_f);
        wf.ensemble_sd.push_back(fc.member_sd());
        wf.forecast.push_back(std::move(fc.mean));
        wf.truth.push_back(data.middleRows(start, n_f));
    }
    return wf;
}

WindowedForecasts build_windowed_forecasts(const Matrix& data, Index origin, const HyperParams& hp,
                                           Index n_w, Index n_f, Index n_ens, std::uint64_t seed)
{
    if (data.rows() < origin + n_w * n_f)
        throw Error(Errc::insufficient_data,
                    "series holds " + std::to_string(data.rows()) + " rows, windows need " +
                        std::to_string(origin + n_w * n_f));
    EnsembleForecaster engine(data, origin, hp, n_ens, seed);
    return build_windowed_forecasts(engine, data, origin, n_w, n_f);
}

ResidualTable residuals_and_sd(const WindowedForecasts& wf)
{
    if (wf.n_w < 2)
        throw Error(Errc::too_few_windows, "residual SDs need at least two windows");
    ResidualTable out;
    const Index n_l = wf.elements();
    for (Index w = 0; w < wf.n_w; ++w)
        out.residuals.push_back(wf.truth[static_cast<std::size_t>(w)] - wf.forecast[static_cast<std::size_t>(w)]);
    out.sigma_hat.resize(wf.n_f, n_l);
    std::vector<double> r(static_cast<std::size_t>(wf.n_w));
    for (Index j = 0; j < wf.n_f; ++j)
        for (Index l = 0; l < n_l; ++l) {
            for (Index w = 0; w < wf.n_w; ++w)
                r[static_cast<std::size_t>(w)] = out.residuals[static_cast<std::size_t>(w)](j, l);
            out.sigma_hat(j, l) = stats::sample_sd(r);
        }
    return out;
}

std::vector<double> isotonic_regression(std::span<const double> y)
{
    struct Block {
        double sum;
        double count;
    };
    std::vector<Block> blocks;
    blocks.reserve(y.size());
    for (double v : y) {
        blocks.push_back({v, 1.0});
        while (blocks.size() > 1) {
            const Block& b = blocks.back();
            const Block& a = blocks[blocks.size() - 2];
            if (a.sum / a.count <= b.sum / b.count)
                break;
            const Block merged{a.sum + b.sum, a.count + b.count};
            blocks.pop_back();
            blocks.back() = merged;
        }
    }
    std::vector<double> out;
    out.reserve(y.size());
    for (const Block& b : blocks)
        out.insert(out.end(), static_cast<std::size_t>(b.count), b.sum / b.count);
    return out;
}

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y))
{
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n)
        throw Error(Errc::invalid_argument, "monotone cubic needs at least two matching knots");
    for (std::size_t i = 1; i < n; ++i) {
        if (!(x_[i] > x_[i - 1]))
            throw Error(Errc::invalid_argument, "knots must be strictly increasing");
        if (y_[i] < y_[i - 1])
            throw Error(Errc::invalid_argument, "knot values must be non-decreasing");
    }
    std::vector<double> delta(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i)
        delta[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
    m_.assign(n, 0.0);
    m_[0] = delta[0];
    m_[n - 1] = delta[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i)
        m_[i] = (delta[i - 1] == 0.0 || delta[i] == 0.0) ? 0.0 : 0.5 * (delta[i - 1] + delta[i]);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (delta[i] == 0.0) {
            m_[i] = 0.0;
            m_[i + 1] = 0.0;
            continue;
        }
        const double a = m_[i] / delta[i];
        const double b = m_[i + 1] / delta[i];
        const double s = a * a + b * b;
        if (s > 9.0) {
            const double tau = 3.0 / std::sqrt(s);
            m_[i] = tau * a * delta[i];
            m_[i + 1] = tau * b * delta[i];
        }
    }
}

std::size_t MonotoneCubic::segment(double t) const
{
    if (t <= x_.front())
        return 0;
    if (t >= x_.back())
        return x_.size() - 2;
    const auto it = std::upper_bound(x_.begin(), x_.end(), t);
    return static_cast<std::size_t>(it - x_.begin()) - 1;
}

double MonotoneCubic::operator()(double t) const
{
    if (t <= x_.front())
        return y_.front();
    if (t >= x_.back())
        return y_.back();
    const std::size_t i = segment(t);
    const double h = x_[i + 1] - x_[i];
    const double s = (t - x_[i]) / h;
    const double s2 = s * s;
    const double s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * y_[i] + (s3 - 2 * s2 + s) * h * m_[i] +
           (-2 * s3 + 3 * s2) * y_[i + 1] + (s3 - s2) * h * m_[i + 1];
}

double MonotoneCubic::derivative(double t) const
{
    if (t < x_.front() || t > x_.back())
        return 0.0;
    const std::size_t i = segment(t);
    const double h = x_[i + 1] - x_[i];
    const double s = (t - x_[i]) / h;
    const double s2 = s * s;
    return ((6 * s2 - 6 * s) * y_[i] + (-6 * s2 + 6 * s) * y_[i + 1]) / h +
           (3 * s2 - 4 * s + 1) * m_[i] + (3 * s2 - 2 * s) * m_[i + 1];
}

std::vector<double> monotone_spline(std::span<const double> sigma_hat)
{
    if (sigma_hat.size() < 2)
        throw Error(Errc::invalid_argument, "monotone smoothing needs at least two steps");
    for (double v : sigma_hat)
        if (!(v >= 0.0))
            throw Error(Errc::invalid_argument, "standard deviations must be nonnegative");
    std::vector<double> iso = isotonic_regression(sigma_hat);
    std::vector<double> steps(iso.size());
    for (std::size_t j = 0; j < steps.size(); ++j)
        steps[j] = static_cast<double>(j + 1);
    const MonotoneCubic curve(steps, iso);
    std::vector<double> out(iso.size());
    for (std::size_t j = 0; j < out.size(); ++j)
        out[j] = std::max(curve(steps[j]), sigma_floor);
    // Guard against rounding in the Hermite basis.
    for (std::size_t j = 1; j < out.size(); ++j)
        out[j] = std::max(out[j], out[j - 1]);
    return out;
}

std::vector<Matrix> standardize(const std::vector<Matrix>& residuals, const Matrix& sigma_tilde)
{
    if (!(sigma_tilde.array() > 0.0).all())
        throw Error(Errc::zero_sigma, "standardization needs strictly positive SDs");
    std::vector<Matrix> out;
    out.reserve(residuals.size());
    for (const Matrix& r : residuals) {
        if (r.rows() != sigma_tilde.rows() || r.cols() != sigma_tilde.cols())
            throw Error(Errc::shape_mismatch, "residual block and SD table differ in shape");
        out.push_back(r.cwiseQuotient(sigma_tilde));
    }
    return out;
}

double pit(double r) { return stats::normal_cdf(r); }

Interval interval(double mean, double sigma, double level)
{
    const double half = stats::central_z(level) * sigma;
    return {mean - half, mean + half};
}

double coverage(std::span<const Interval> intervals, std::span<const double> truth)
{
    if (intervals.size() != truth.size())
        throw Error(Errc::shape_mismatch, "interval and truth counts differ");
    if (truth.empty())
        throw Error(Errc::insufficient_data, "coverage of an empty set");
    std::size_t inside = 0;
    for (std::size_t i = 0; i < truth.size(); ++i)
        if (truth[i] >= intervals[i].lo && truth[i] <= intervals[i].hi)
            ++inside;
    return static_cast<double>(inside) / static_cast<double>(truth.size());
}

double coverage(const Matrix& lo, const Matrix& hi, const Matrix& truth)
{
    if (lo.rows() != truth.rows() || lo.cols() != truth.cols() || hi.rows() != truth.rows() ||
        hi.cols() != truth.cols())
        throw Error(Errc::shape_mismatch, "interval bounds and truth differ in shape");
    if (truth.size() == 0)
        throw Error(Errc::insufficient_data, "coverage of an empty set");
    const auto inside = ((truth.array() >= lo.array()) && (truth.array() <= hi.array())).count();
    return static_cast<double>(inside) / static_cast<double>(truth.size());
}

Matrix CalibrationModel::pooled_standardized() const
{
    const Index n_l = elements();
    Matrix out(static_cast<Index>(standardized.size()) * n_f, n_l);
    for (std::size_t w = 0; w < standardized.size(); ++w)
        out.middleRows(static_cast<Index>(w) * n_f, n_f) = standardized[w];
    return out;
}

std::pair<Matrix, Matrix> CalibrationModel::intervals(const Matrix& mean, double level) const
{
    if (mean.rows() > sigma_tilde.rows() || mean.cols() != sigma_tilde.cols())
        throw Error(Errc::shape_mismatch, "forecast block does not match the calibration table");
    const double z = stats::central_z(level);
    const Matrix half = z * sigma_tilde.topRows(mean.rows());
    return {mean - half, mean + half};
}

CalibrationModel calibrate(const WindowedForecasts& wf)
{
    ResidualTable table = residuals_and_sd(wf);
    CalibrationModel model;
    model.n_w = wf.n_w;
    model.n_f = wf.n_f;
    model.sigma_hat = table.sigma_hat;
    const Index n_l = wf.elements();
    model.sigma_tilde.resize(wf.n_f, n_l);
    parallel_for(n_l, [&](Index l) {
        const Vector col = model.sigma_hat.col(l);
        const std::vector<double> smooth =
            monotone_spline(std::span<const double>(col.data(), static_cast<std::size_t>(col.size())));
        for (Index j = 0; j < wf.n_f; ++j)
            model.sigma_tilde(j, l) = smooth[static_cast<std::size_t>(j)];
    });
    model.residuals = std::move(table.residuals);
    model.standardized = standardize(model.residuals, model.sigma_tilde);
    return model;
}

}  // namespace esncast
