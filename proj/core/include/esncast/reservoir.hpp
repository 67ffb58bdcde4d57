#pragma once

// Sparse stochastic reservoirs: spike-and-slab weight generation, leaky state
// updates and the ridge readout.

#include "esncast/common.hpp"

#include <cstdint>
#include <random>

namespace esncast {

enum class Activation { tanh, relu, identity };

Activation parse_activation(std::string_view name);
std::string_view to_string(Activation a) noexcept;

/// Reduced hyper-parameter vector plus the fixed settings of the network.
/// Weight entries are standard normal where present, so no slab scale
/// parameters appear here.
struct HyperParams {
    Index n_h = 60;          ///< reservoir size
    Index m = 4;             ///< input embedding depth (lags tau, ..., m*tau)
    Index tau = 1;           ///< forecast lead time
    double nu = 0.55;        ///< spectral-radius target, in (0, 1)
    double lambda_r = 0.001; ///< ridge penalty
    double alpha = 1.0;      ///< leaking rate, in (0, 1]
    double pi_w = 0.1;       ///< reservoir density
    double pi_win = 0.1;     ///< input density
    Activation activation = Activation::tanh;
    bool include_bias = false;
    Index washout = 0;

    /// Throws invalid_argument when an invariant is violated.
    void validate() const;

    /// Input width for n_out series: n_out * m, plus one with a bias.
    Index input_width(Index n_out) const noexcept { return n_out * m + (include_bias ? 1 : 0); }

    bool operator==(const HyperParams&) const = default;
};

struct WeightMatrices {
    SparseMatrix w;     ///< n_h x n_h reservoir matrix (unscaled)
    SparseMatrix w_in;  ///< n_h x n_x input matrix
    double rho_w = 0.0; ///< spectral radius of w
    std::uint64_t seed = 0;

    /// Multiplier nu / rho_w applied to w in the state update.
    double scale(double nu) const { return nu / rho_w; }
};

struct SpectralRadiusOptions {
    double tolerance = 1e-8;
    int max_iterations = 10000;
    Index dense_fallback_limit = 512;
};

/// Largest eigenvalue modulus of a square sparse matrix. Power iteration from a
/// random start; falls back to a dense eigendecomposition for small matrices
/// when the iteration does not settle (e.g. a dominant complex pair).
double spectral_radius(const SparseMatrix& a, std::mt19937_64& rng,
                       const SpectralRadiusOptions& options = {});

/// Draws W and W_in entrywise as Bernoulli(pi) * N(0, 1). Deterministic for a
/// given seed. Throws degenerate_reservoir when the spectral radius of W is
/// below 1e-12; the caller decides whether to retry with another seed.
WeightMatrices generate_weights(const HyperParams& hp, Index n_x, std::uint64_t seed);

/// One leaky update: (1 - alpha) h + alpha * f(nu / rho * W h + W_in x).
Vector update_state(const Vector& h_prev, const Vector& x, const WeightMatrices& wm,
                    const HyperParams& hp);

/// In-place variant used on hot paths; scratch must have n_h rows.
void update_state_inplace(Vector& h, const Eigen::Ref<const Vector>& x,
                          const WeightMatrices& wm, const HyperParams& hp, Vector& scratch);

struct StateMatrix {
    Matrix h;          ///< T x n_h, row t is h_t
    Vector h_last;     ///< final state
    Index washout = 0; ///< leading rows excluded from readout fitting

    /// Rows usable for fitting (washout removed).
    Eigen::Block<const Matrix> fit_rows() const
    {
        return h.bottomRows(h.rows() - washout);
    }
};

/// Runs the reservoir over T input rows (T x n_x), starting from h0 (zero when
/// empty). Throws non_finite_state if a state overflows.
StateMatrix run_reservoir(const Matrix& inputs, const WeightMatrices& wm, const HyperParams& hp,
                          const Vector& h0 = Vector());

struct Readout {
    Matrix b; ///< n_h x n_out coefficients
};

/// Ridge estimate (H'H + lambda I)^{-1} H'Y via a Cholesky factorisation.
/// Throws singular_system when lambda = 0 and H'H is rank deficient.
Readout fit_readout(const Matrix& h, const Matrix& y, double lambda_r);

/// Same estimate from accumulated normal-equation terms G = H'H and C = H'Y.
Readout solve_readout(const Matrix& gram, const Matrix& cross, double lambda_r);

}  // namespace esncast
