#include "esncast/baselines.hpp"

#include "esncast/stats.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace esncast {

std::vector<double> frac_diff_coeffs(double d, Index k)
{
    if (k < 1)
        throw Error(Errc::invalid_argument, "fractional filter needs K >= 1");
    std::vector<double> out(static_cast<std::size_t>(k + 1));
    out[0] = 1.0;
    for (Index i = 1; i <= k; ++i)
        out[static_cast<std::size_t>(i)] =
            out[static_cast<std::size_t>(i - 1)] * (static_cast<double>(i) - 1.0 - d) / static_cast<double>(i);
    return out;
}

namespace {

// Maps unconstrained reals to the coefficients of a polynomial whose roots lie
// outside the unit circle, through partial autocorrelations in (-1, 1)
// (Durbin-Levinson recursion).
std::vector<double> pacf_to_coeffs(std::span<const double> raw)
{
    const std::size_t n = raw.size();
    std::vector<double> a(n), prev(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double r = std::tanh(raw[k]);
        prev = a;
        a[k] = r;
        for (std::size_t j = 0; j < k; ++j)
            a[j] = prev[j] - r * prev[k - 1 - j];
    }
    return a;
}

bool stationary(std::span<const double> phi)
{
    // A polynomial 1 - sum phi_i z^i has all roots outside the unit circle iff
    // the backward Durbin-Levinson recursion keeps every |pacf| < 1.
    std::vector<double> a(phi.begin(), phi.end());
    for (std::size_t k = a.size(); k-- > 0;) {
        const double r = a[k];
        if (!(std::abs(r) < 1.0))
            return false;
        std::vector<double> next(k);
        for (std::size_t j = 0; j < k; ++j)
            next[j] = (a[j] + r * a[k - 1 - j]) / (1.0 - r * r);
        a = std::move(next);
    }
    return true;
}

struct CssProblem {
    const std::vector<double>* u = nullptr; // fractionally differenced series
    int p = 0;
    int q = 0;
    std::vector<double> resid;

    double sum_squares(std::span<const double> phi, std::span<const double> theta)
    {
        const auto& x = *u;
        const std::size_t n = x.size();
        resid.assign(n, 0.0);
        double ss = 0.0;
        for (std::size_t t = static_cast<std::size_t>(p); t < n; ++t) {
            double e = x[t];
            for (int i = 0; i < p; ++i)
                e -= phi[static_cast<std::size_t>(i)] * x[t - 1 - static_cast<std::size_t>(i)];
            for (int j = 0; j < q && static_cast<std::size_t>(j) < t; ++j)
                e -= theta[static_cast<std::size_t>(j)] * resid[t - 1 - static_cast<std::size_t>(j)];
            resid[t] = e;
            ss += e * e;
        }
        return ss;
    }

    double objective(const double* raw)
    {
        const std::vector<double> phi = pacf_to_coeffs(std::span<const double>(raw, static_cast<std::size_t>(p)));
        // MA side: theta(B) = 1 + sum theta_j B^j, invertible iff -theta is a stationary AR.
        std::vector<double> neg = pacf_to_coeffs(std::span<const double>(raw + p, static_cast<std::size_t>(q)));
        for (double& v : neg)
            v = -v;
        const double ss = sum_squares(phi, neg);
        return std::isfinite(ss) ? ss : std::numeric_limits<double>::max();
    }
};

double css_callback(const gsl_vector* v, void* params)
{
    auto* prob = static_cast<CssProblem*>(params);
    return prob->objective(v->data);
}

std::vector<double> demeaned(std::span<const double> series, double& mean)
{
    mean = stats::mean(series);
    std::vector<double> out(series.begin(), series.end());
    for (double& v : out)
        v -= mean;
    return out;
}

std::vector<double> frac_filter(const std::vector<double>& x, double d, Index k_max)
{
    const Index n = static_cast<Index>(x.size());
    const Index k = std::min(n, k_max);
    const std::vector<double> pi = frac_diff_coeffs(d, std::max<Index>(k, 1));
    std::vector<double> u(x.size(), 0.0);
    for (Index t = 0; t < n; ++t) {
        double acc = 0.0;
        const Index lim = std::min(t, k);
        for (Index j = 0; j <= lim; ++j)
            acc += pi[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(t - j)];
        u[static_cast<std::size_t>(t)] = acc;
    }
    return u;
}

ArfimaModel fit_filtered(const std::vector<double>& u, double mean, int p, double d, int q,
                         Index truncation, const ArfimaOptions& options)
{
    CssProblem prob;
    prob.u = &u;
    prob.p = p;
    prob.q = q;
    const int n_par = p + q;

    ArfimaModel model;
    model.p = p;
    model.q = q;
    model.d = d;
    model.mean = mean;
    model.truncation = truncation;

    double ss = 0.0;
    if (n_par == 0) {
        ss = prob.sum_squares({}, {});
    } else {
        gsl_multimin_function fn;
        fn.n = static_cast<std::size_t>(n_par);
        fn.f = &css_callback;
        fn.params = &prob;
        gsl_vector* x = gsl_vector_calloc(fn.n);
        gsl_vector* step = gsl_vector_alloc(fn.n);
        gsl_vector_set_all(step, 0.3);
        gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, fn.n);
        gsl_multimin_fminimizer_set(s, &fn, x, step);
        int status = GSL_CONTINUE;
        for (int iter = 0; iter < options.max_evaluations && status == GSL_CONTINUE; ++iter) {
            if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS)
                break;
            status = gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), 1e-7);
        }
        std::vector<double> raw(s->x->data, s->x->data + n_par);
        ss = s->fval;
        gsl_multimin_fminimizer_free(s);
        gsl_vector_free(step);
        gsl_vector_free(x);
        model.phi = pacf_to_coeffs(std::span<const double>(raw.data(), static_cast<std::size_t>(p)));
        model.theta = pacf_to_coeffs(std::span<const double>(raw.data() + p, static_cast<std::size_t>(q)));
        for (double& v : model.theta)
            v = -v;
    }
    if (!std::isfinite(ss) || ss >= std::numeric_limits<double>::max())
        throw Error(Errc::optimizer_failed, "conditional sum of squares is not finite");
    const auto n_eff = static_cast<double>(u.size() - static_cast<std::size_t>(p));
    model.sigma2 = ss / n_eff;
    const int k = p + q + 1 + (d > 0.0 ? 1 : 0);
    model.aic = n_eff * std::log(std::max(model.sigma2, 1e-300)) + 2.0 * k;
    return model;
}

}  // namespace

std::vector<double> ArfimaModel::ar_infinity() const
{
    const Index k = std::max<Index>(truncation, 1);
    const std::vector<double> pi = frac_diff_coeffs(d, k);
    // a(B) = phi(B) (1 - B)^d with phi(B) = 1 - sum phi_i B^i
    std::vector<double> a(pi);
    for (std::size_t i = 0; i < phi.size(); ++i)
        for (std::size_t j = 0; j + i + 1 < a.size(); ++j)
            a[j + i + 1] -= phi[i] * pi[j];
    // c(B) = a(B) / theta(B) with theta(B) = 1 + sum theta_j B^j
    std::vector<double> c(a.size());
    for (std::size_t n = 0; n < c.size(); ++n) {
        double v = a[n];
        for (std::size_t j = 0; j < theta.size() && j < n; ++j)
            v -= theta[j] * c[n - 1 - j];
        c[n] = v;
    }
    return c;
}

std::vector<double> ArfimaModel::psi_weights(Index n) const
{
    const std::vector<double> c = ar_infinity();
    std::vector<double> psi(static_cast<std::size_t>(std::max<Index>(n, 1)), 0.0);
    psi[0] = 1.0;
    for (std::size_t k = 1; k < psi.size(); ++k) {
        double v = 0.0;
        for (std::size_t j = 1; j <= k && j < c.size(); ++j)
            v -= c[j] * psi[k - j];
        psi[k] = v;
    }
    return psi;
}

ArfimaModel fit_arfima_order(std::span<const double> series, int p, double d, int q,
                             const ArfimaOptions& options)
{
    if (series.size() < 50)
        throw Error(Errc::insufficient_data, "ARFIMA fitting needs at least 50 points");
    if (p < 0 || q < 0 || d < 0.0 || d >= 0.5)
        throw Error(Errc::invalid_argument, "ARFIMA orders out of range");
    double mean = 0.0;
    const std::vector<double> x = demeaned(series, mean);
    const Index k = std::min(static_cast<Index>(x.size()), options.max_truncation);
    const std::vector<double> u = d == 0.0 ? x : frac_filter(x, d, k);
    ArfimaModel m = fit_filtered(u, mean, p, d, q, k, options);
    if (!stationary(m.phi))
        throw Error(Errc::non_stationary_fit, "fitted AR polynomial is not stationary");
    return m;
}

ArfimaModel fit_arfima(std::span<const double> series, const ArfimaOptions& options)
{
    if (series.size() < 50)
        throw Error(Errc::insufficient_data, "ARFIMA fitting needs at least 50 points");
    if (options.d_grid.empty() || options.max_p < 0 || options.max_q < 0)
        throw Error(Errc::empty_grid, "ARFIMA candidate grid is empty");
    double mean = 0.0;
    const std::vector<double> x = demeaned(series, mean);
    const Index k = std::min(static_cast<Index>(x.size()), options.max_truncation);

    ArfimaModel best;
    bool have = false;
    for (double d : options.d_grid) {
        if (d < 0.0 || d >= 0.5)
            throw Error(Errc::invalid_argument, "d must lie in [0, 0.5)");
        const std::vector<double> u = d == 0.0 ? x : frac_filter(x, d, k);
        for (int p = 0; p <= options.max_p; ++p)
            for (int q = 0; q <= options.max_q; ++q) {
                ArfimaModel m;
                try {
                    m = fit_filtered(u, mean, p, d, q, k, options);
                } catch (const Error& e) {
                    if (e.code() != Errc::optimizer_failed)
                        throw;
                    continue;
                }
                if (!have || m.aic < best.aic) {
                    best = std::move(m);
                    have = true;
                }
            }
    }
    if (!have)
        throw Error(Errc::optimizer_failed, "no ARFIMA candidate produced a finite fit");
    if (!stationary(best.phi))
        throw Error(Errc::non_stationary_fit, "fitted AR polynomial is not stationary");
    return best;
}

ArfimaForecast forecast_arfima(const ArfimaModel& model, std::span<const double> series, Index n_f)
{
    if (n_f < 1)
        throw Error(Errc::invalid_argument, "forecast horizon must be >= 1");
    if (series.empty())
        throw Error(Errc::insufficient_data, "no history to forecast from");
    const std::vector<double> c = model.ar_infinity();
    const std::size_t n = series.size();
    std::vector<double> path(n + static_cast<std::size_t>(n_f));
    for (std::size_t t = 0; t < n; ++t)
        path[t] = series[t] - model.mean;
    for (std::size_t h = 0; h < static_cast<std::size_t>(n_f); ++h) {
        const std::size_t t = n + h;
        double v = 0.0;
        for (std::size_t k = 1; k < c.size() && k <= t; ++k)
            v -= c[k] * path[t - k];
        path[t] = v;
    }
    const std::vector<double> psi = model.psi_weights(n_f);
    ArfimaForecast out;
    out.mean.resize(static_cast<std::size_t>(n_f));
    out.sd.resize(static_cast<std::size_t>(n_f));
    double acc = 0.0;
    for (std::size_t h = 0; h < static_cast<std::size_t>(n_f); ++h) {
        acc += psi[h] * psi[h];
        out.mean[h] = path[n + h] + model.mean;
        out.sd[h] = std::sqrt(model.sigma2 * acc);
    }
    return out;
}

ArfimaBlockForecast arfima_block_forecast(const Matrix& train, Index n_f, const ArfimaOptions& options)
{
    const Index n_l = train.cols();
    ArfimaBlockForecast out;
    out.mean.resize(n_f, n_l);
    out.sd.resize(n_f, n_l);
    out.models.resize(static_cast<std::size_t>(n_l));
    parallel_for(n_l, [&](Index l) {
        const Vector col = train.col(l);
        const std::span<const double> s(col.data(), static_cast<std::size_t>(col.size()));
        ArfimaModel m = fit_arfima(s, options);
        const ArfimaForecast fc = forecast_arfima(m, s, n_f);
        for (Index j = 0; j < n_f; ++j) {
            out.mean(j, l) = fc.mean[static_cast<std::size_t>(j)];
            out.sd(j, l) = fc.sd[static_cast<std::size_t>(j)];
        }
        out.models[static_cast<std::size_t>(l)] = std::move(m);
    });
    return out;
}

ForecastEnsemble state_space_forecast(const Matrix& train, HyperParams hp, Index n_f, Index n_ens,
                                      std::uint64_t seed)
{
    hp.activation = Activation::identity;
    hp.alpha = 1.0;
    return iterative_forecast(train, hp, n_f, n_ens, seed);
}

}  // namespace esncast
