#pragma once

#include "esncast/common.hpp"

#include <span>
#include <vector>

namespace esncast::stats {

double normal_cdf(double x);
double normal_quantile(double p);

/// Two-sided Gaussian critical value z_{(1+level)/2}. Throws bad_level
/// unless level lies in (0, 1).
double central_z(double level);

/// Pairwise (cascade) summation; the result depends only on element order.
double pairwise_sum(std::span<const double> values);

double mean(std::span<const double> values);

/// Sample standard deviation with denominator n-1.
double sample_sd(std::span<const double> values);

/// Linear-interpolated quantile (R type 7).
double quantile(std::vector<double> values, double p);
double median(std::vector<double> values);
double iqr(std::vector<double> values);

/// Median with interquartile range, the summary used in benchmark tables.
struct Summary {
    double median = 0.0;
    double iqr = 0.0;
};
Summary summarize(const std::vector<double>& values);

/// One-sample Kolmogorov-Smirnov statistic against Uniform(0, 1).
double ks_statistic_uniform(std::vector<double> samples);

/// Asymptotic p-value of the KS statistic for sample size n.
double ks_pvalue(double statistic, Index n);

}  // namespace esncast::stats
