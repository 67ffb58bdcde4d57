#include "esncast/stats.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>

namespace esncast::stats {

namespace {
const boost::math::normal standard_normal{0.0, 1.0};
}

double normal_cdf(double x)
{
    if (std::isinf(x))
        return x > 0 ? 1.0 : 0.0;
    return boost::math::cdf(standard_normal, x);
}

double normal_quantile(double p)
{
    if (!(p > 0.0 && p < 1.0))
        throw Error(Errc::invalid_argument, "normal quantile needs p in (0,1)");
    return boost::math::quantile(standard_normal, p);
}

double central_z(double level)
{
    if (!(level > 0.0 && level < 1.0))
        throw Error(Errc::bad_level, "interval level must lie in (0,1), got " + std::to_string(level));
    return normal_quantile(0.5 * (1.0 + level));
}

double pairwise_sum(std::span<const double> values)
{
    constexpr std::size_t block = 8;
    if (values.size() <= block) {
        double s = 0.0;
        for (double v : values)
            s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double mean(std::span<const double> values)
{
    if (values.empty())
        throw Error(Errc::invalid_argument, "mean of an empty range");
    return pairwise_sum(values) / static_cast<double>(values.size());
}

double sample_sd(std::span<const double> values)
{
    if (values.size() < 2)
        throw Error(Errc::invalid_argument, "sample SD needs at least two values");
    const double m = mean(values);
    double ss = 0.0;
    for (double v : values)
        ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

double quantile(std::vector<double> values, double p)
{
    if (values.empty())
        throw Error(Errc::invalid_argument, "quantile of an empty range");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

double iqr(std::vector<double> values)
{
    return quantile(values, 0.75) - quantile(std::move(values), 0.25);
}

Summary summarize(const std::vector<double>& values) { return {median(values), iqr(values)}; }

double ks_statistic_uniform(std::vector<double> samples)
{
    if (samples.empty())
        throw Error(Errc::invalid_argument, "KS statistic of an empty sample");
    std::sort(samples.begin(), samples.end());
    const auto n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double u = std::clamp(samples[i], 0.0, 1.0);
        d = std::max({d, (static_cast<double>(i) + 1.0) / n - u, u - static_cast<double>(i) / n});
    }
    return d;
}

double ks_pvalue(double statistic, Index n)
{
    // Kolmogorov limiting distribution with Stephens' small-sample correction.
    const double rn = std::sqrt(static_cast<double>(n));
    const double lambda = (rn + 0.12 + 0.11 / rn) * statistic;
    if (lambda < 1e-3)
        return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 200; ++k) {
        const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
        sum += term;
        if (std::abs(term) < 1e-16)
            break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace esncast::stats
