#include "esncast/reservoir.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <vector>

namespace esncast {

Activation parse_activation(std::string_view name)
{
    if (name == "tanh")
        return Activation::tanh;
    if (name == "relu")
        return Activation::relu;
    if (name == "identity" || name == "linear")
        return Activation::identity;
    throw Error(Errc::invalid_argument, "unknown activation '" + std::string(name) + "'");
}

std::string_view to_string(Activation a) noexcept
{
    switch (a) {
    case Activation::tanh: return "tanh";
    case Activation::relu: return "relu";
    case Activation::identity: return "identity";
    }
    return "tanh";
}

void HyperParams::validate() const
{
    auto fail = [](const std::string& msg) { throw Error(Errc::invalid_argument, msg); };
    if (n_h < 1)
        fail("n_h must be >= 1");
    if (m < 1)
        fail("m must be >= 1");
    if (tau < 1)
        fail("tau must be >= 1");
    if (!(nu > 0.0 && nu < 1.0))
        fail("nu must lie in (0,1)");
    if (!(alpha > 0.0 && alpha <= 1.0))
        fail("alpha must lie in (0,1]");
    if (!(lambda_r >= 0.0))
        fail("lambda_r must be >= 0");
    if (!(pi_w >= 0.0 && pi_w <= 1.0) || !(pi_win >= 0.0 && pi_win <= 1.0))
        fail("densities must lie in [0,1]");
    if (washout < 0)
        fail("washout must be >= 0");
}

namespace {

SparseMatrix spike_and_slab(Index rows, Index cols, double density, std::mt19937_64& rng)
{
    std::bernoulli_distribution spike(density);
    std::normal_distribution<double> slab(0.0, 1.0);
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(static_cast<std::size_t>(static_cast<double>(rows * cols) * density) + 16);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j)
            if (spike(rng))
                entries.emplace_back(i, j, slab(rng));
    SparseMatrix m(rows, cols);
    m.setFromTriplets(entries.begin(), entries.end());
    m.makeCompressed();
    return m;
}

double dense_spectral_radius(const SparseMatrix& a)
{
    Eigen::EigenSolver<Matrix> solver(Matrix(a), /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success)
        throw Error(Errc::degenerate_reservoir, "dense eigendecomposition failed");
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

template <class Vec>
void activate(Vec&& v, Activation a)
{
    switch (a) {
    case Activation::tanh: v = v.array().tanh(); break;
    case Activation::relu: v = v.array().max(0.0); break;
    case Activation::identity: break;
    }
}

}  // namespace

double spectral_radius(const SparseMatrix& a, std::mt19937_64& rng,
                       const SpectralRadiusOptions& options)
{
    if (a.rows() != a.cols())
        throw Error(Errc::dimension_mismatch, "spectral radius of a non-square matrix");
    const Index n = a.rows();
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector v(n);
    for (Index i = 0; i < n; ++i)
        v(i) = normal(rng);
    v.normalize();

    // Stop on the eigen-residual ||A v - mu v|| rather than on successive norm
    // changes, which stall long before convergence when the eigenvalue gap is small.
    Vector next(n);
    for (int it = 0; it < options.max_iterations; ++it) {
        next.noalias() = a * v;
        const double norm = next.norm();
        if (norm == 0.0)
            return 0.0; // nilpotent direction: the iterate vanished
        const double mu = v.dot(next);
        if ((next - mu * v).norm() <= options.tolerance * std::abs(mu))
            return std::abs(mu);
        v = next / norm;
    }
    if (n <= options.dense_fallback_limit)
        return dense_spectral_radius(a);
    throw Error(Errc::degenerate_reservoir,
                "power iteration did not converge and the matrix is too large for a dense fallback");
}

WeightMatrices generate_weights(const HyperParams& hp, Index n_x, std::uint64_t seed)
{
    hp.validate();
    if (n_x < 1)
        throw Error(Errc::invalid_argument, "n_x must be >= 1");
    std::mt19937_64 rng(seed);
    WeightMatrices wm;
    wm.seed = seed;
    wm.w = spike_and_slab(hp.n_h, hp.n_h, hp.pi_w, rng);
    wm.w_in = spike_and_slab(hp.n_h, n_x, hp.pi_win, rng);
    wm.rho_w = wm.w.nonZeros() == 0 ? 0.0 : spectral_radius(wm.w, rng);
    if (!(wm.rho_w >= 1e-12))
        throw Error(Errc::degenerate_reservoir,
                    "reservoir spectral radius " + std::to_string(wm.rho_w) + " for seed " +
                        std::to_string(seed));
    return wm;
}

void update_state_inplace(Vector& h, const Eigen::Ref<const Vector>& x, const WeightMatrices& wm,
                          const HyperParams& hp, Vector& scratch)
{
    scratch.noalias() = wm.w * h;
    scratch *= wm.scale(hp.nu);
    scratch.noalias() += wm.w_in * x;
    activate(scratch, hp.activation);
    if (hp.alpha == 1.0)
        h.swap(scratch);
    else
        h = (1.0 - hp.alpha) * h + hp.alpha * scratch;
}

Vector update_state(const Vector& h_prev, const Vector& x, const WeightMatrices& wm,
                    const HyperParams& hp)
{
    if (h_prev.size() != wm.w.rows() || x.size() != wm.w_in.cols())
        throw Error(Errc::dimension_mismatch, "state or input size does not match the weights");
    if (!(wm.rho_w > 0.0))
        throw Error(Errc::degenerate_reservoir, "weights carry a zero spectral radius");
    Vector h = h_prev;
    Vector scratch(h.size());
    update_state_inplace(h, x, wm, hp, scratch);
    return h;
}

StateMatrix run_reservoir(const Matrix& inputs, const WeightMatrices& wm, const HyperParams& hp,
                          const Vector& h0)
{
    if (inputs.rows() < 1)
        throw Error(Errc::insufficient_history, "reservoir needs at least one input row");
    if (inputs.cols() != wm.w_in.cols())
        throw Error(Errc::dimension_mismatch, "input width does not match W_in");
    const Index n_h = wm.w.rows();
    if (h0.size() != 0 && h0.size() != n_h)
        throw Error(Errc::dimension_mismatch, "initial state has the wrong length");

    StateMatrix out;
    out.h.resize(inputs.rows(), n_h);
    out.washout = std::min(hp.washout, inputs.rows());
    Vector h = h0.size() == 0 ? Vector::Zero(n_h) : h0;
    Vector scratch(n_h);
    for (Index t = 0; t < inputs.rows(); ++t) {
        update_state_inplace(h, inputs.row(t).transpose(), wm, hp, scratch);
        if (!h.allFinite())
            throw Error(Errc::non_finite_state, "state became non-finite at row " + std::to_string(t));
        out.h.row(t) = h.transpose();
    }
    out.h_last = h;
    return out;
}

Readout solve_readout(const Matrix& gram, const Matrix& cross, double lambda_r)
{
    if (gram.rows() != gram.cols() || gram.rows() != cross.rows())
        throw Error(Errc::dimension_mismatch, "normal equations are not conformable");
    if (!(lambda_r >= 0.0))
        throw Error(Errc::invalid_argument, "lambda_r must be >= 0");
    Matrix a = gram;
    a.diagonal().array() += lambda_r;
    Eigen::LLT<Matrix> llt(a);
    bool ok = llt.info() == Eigen::Success;
    if (ok && lambda_r == 0.0) {
        // Cholesky may "succeed" on a numerically singular Gram matrix; reject a
        // factor whose pivots collapse relative to the largest one.
        const Vector d = llt.matrixLLT().diagonal();
        ok = d.minCoeff() > 1e-7 * d.maxCoeff();
    }
    if (!ok)
        throw Error(Errc::singular_system, "H'H + lambda I is not positive definite");
    Readout r{llt.solve(cross)};
    if (!r.b.allFinite())
        throw Error(Errc::singular_system, "ridge solution is not finite");
    return r;
}

Readout fit_readout(const Matrix& h, const Matrix& y, double lambda_r)
{
    if (h.rows() != y.rows())
        throw Error(Errc::dimension_mismatch, "state and target rows are not aligned");
    Matrix gram = Matrix::Zero(h.cols(), h.cols());
    gram.selfadjointView<Eigen::Lower>().rankUpdate(h.transpose());
    gram = gram.selfadjointView<Eigen::Lower>();
    return solve_readout(gram, h.transpose() * y, lambda_r);
}

}  // namespace esncast
