#pragma once

#include "esncast/common.hpp"

#include <cstdint>
#include <vector>

namespace esncast::lorenz96 {

/// Integration and sampling settings. The defaults record one point every
/// dt * sample_every = 0.1 time units.
struct Config {
    Index n_vars = 40;
    double forcing = 4.5;
    double dt = 0.01;
    Index sample_every = 10;
    Index spinup = 2000;        ///< integrator steps discarded before recording
    double initial_sd = 0.5;    ///< perturbation of the initial state around the forcing
    std::uint64_t seed = 1;

    void validate() const;
};

/// dY_l/dt = (Y_{l+1} - Y_{l-2}) Y_{l-1} - Y_l + F with cyclic indices.
Vector derivative(const Vector& y, double forcing);

/// One classical Runge-Kutta step of size dt.
Vector rk4_step(const Vector& y, double forcing, double dt);

/// Integrates from y0 for `steps` RK4 steps, recording every `record_every`
/// steps (the initial state is not recorded). Throws diverged on overflow.
Matrix integrate(const Vector& y0, double forcing, double dt, Index steps, Index record_every);

/// Independent realizations of n_points x n_vars each. Realization r starts from
/// forcing + N(0, initial_sd^2) drawn from a stream derived from (seed, r).
std::vector<Matrix> simulate(const Config& cfg, Index n_points, Index n_realizations);

}  // namespace esncast::lorenz96
