#include "esncast/lorenz96.hpp"

#include <random>

namespace esncast::lorenz96 {

void Config::validate() const
{
    if (n_vars < 4)
        throw Error(Errc::invalid_argument, "Lorenz-96 needs at least 4 variables");
    if (!(dt > 0.0))
        throw Error(Errc::invalid_argument, "dt must be positive");
    if (sample_every < 1 || spinup < 0)
        throw Error(Errc::invalid_argument, "sample_every must be >= 1 and spinup >= 0");
}

Vector derivative(const Vector& y, double forcing)
{
    const Index n = y.size();
    if (n < 4)
        throw Error(Errc::invalid_argument, "Lorenz-96 needs at least 4 variables");
    Vector d(n);
    for (Index l = 0; l < n; ++l) {
        const double ahead = y((l + 1) % n);
        const double back1 = y((l + n - 1) % n);
        const double back2 = y((l + n - 2) % n);
        d(l) = (ahead - back2) * back1 - y(l) + forcing;
    }
    return d;
}

Vector rk4_step(const Vector& y, double forcing, double dt)
{
    const Vector k1 = derivative(y, forcing);
    const Vector k2 = derivative(y + 0.5 * dt * k1, forcing);
    const Vector k3 = derivative(y + 0.5 * dt * k2, forcing);
    const Vector k4 = derivative(y + dt * k3, forcing);
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Matrix integrate(const Vector& y0, double forcing, double dt, Index steps, Index record_every)
{
    if (record_every < 1 || steps < 0 || !(dt > 0.0) || !std::isfinite(dt))
        throw Error(Errc::invalid_argument, "invalid integration schedule");
    Matrix out(steps / record_every, y0.size());
    Vector y = y0;
    for (Index s = 1; s <= steps; ++s) {
        y = rk4_step(y, forcing, dt);
        if (!y.allFinite())
            throw Error(Errc::diverged, "Lorenz-96 state diverged at step " + std::to_string(s));
        if (s % record_every == 0)
            out.row(s / record_every - 1) = y.transpose();
    }
    return out;
}

std::vector<Matrix> simulate(const Config& cfg, Index n_points, Index n_realizations)
{
    cfg.validate();
    if (n_points < 1)
        throw Error(Errc::invalid_argument, "need at least one recorded point");
    std::vector<Matrix> out(static_cast<std::size_t>(n_realizations));
    parallel_for(n_realizations, [&](Index r) {
        std::mt19937_64 rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(r)));
        std::normal_distribution<double> perturb(0.0, cfg.initial_sd);
        Vector y(cfg.n_vars);
        for (Index l = 0; l < cfg.n_vars; ++l)
            y(l) = cfg.forcing + perturb(rng);
        for (Index s = 0; s < cfg.spinup; ++s) {
            y = rk4_step(y, cfg.forcing, cfg.dt);
            if (!y.allFinite())
                throw Error(Errc::diverged, "Lorenz-96 state diverged during spin-up");
        }
        out[static_cast<std::size_t>(r)] =
            integrate(y, cfg.forcing, cfg.dt, n_points * cfg.sample_every, cfg.sample_every);
    });
    return out;
}

}  // namespace esncast::lorenz96
