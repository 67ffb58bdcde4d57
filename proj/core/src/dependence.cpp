#include "esncast/dependence.hpp"

#include <cmath>
#include <limits>

namespace esncast {

std::string_view to_string(Provenance p) noexcept
{
    switch (p) {
    case Provenance::empirical: return "empirical";
    case Provenance::sparse: return "sparse";
    case Provenance::spatial: return "spatial";
    case Provenance::shrunk: return "shrunk";
    case Provenance::identity: return "identity";
    }
    return "unknown";
}

bool DependenceModel::is_valid(double tol) const
{
    if (c.rows() != c.cols() || c.rows() == 0 || !c.allFinite())
        return false;
    if ((c - c.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        return false;
    if ((c.diagonal().array() - 1.0).abs().maxCoeff() > 1e-12)
        return false;
    if (c.cwiseAbs().maxCoeff() > 1.0 + 1e-12)
        return false;
    Eigen::SelfAdjointEigenSolver<Matrix> es(c, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() >= -tol;
}

DependenceModel DependenceModel::identity(Index n)
{
    DependenceModel m;
    m.c = Matrix::Identity(n, n);
    m.provenance = Provenance::identity;
    return m;
}

DependenceModel empirical_correlation(const Matrix& samples)
{
    if (samples.rows() < 2)
        throw Error(Errc::insufficient_data, "correlation needs at least two samples");
    const Matrix centered = samples.rowwise() - samples.colwise().mean();
    Matrix cov = centered.transpose() * centered;
    const Vector sd = cov.diagonal().cwiseSqrt();
    for (Index i = 0; i < sd.size(); ++i)
        if (!(sd(i) > 0.0))
            throw Error(Errc::zero_variance, "column " + std::to_string(i) + " has zero variance");
    DependenceModel m;
    m.c = sd.cwiseInverse().asDiagonal() * cov * sd.cwiseInverse().asDiagonal();
    m.c = 0.5 * (m.c + m.c.transpose());
    m.c = m.c.cwiseMax(-1.0).cwiseMin(1.0);
    m.c.diagonal().setOnes();
    m.provenance = Provenance::empirical;
    return m;
}

Matrix floor_correlation(const Matrix& c, double floor)
{
    Matrix out = 0.5 * (c + c.transpose());
    for (int pass = 0; pass < 100; ++pass) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(out);
        if (es.eigenvalues().minCoeff() >= floor && (out.diagonal().array() - 1.0).abs().maxCoeff() == 0.0)
            return out;
        // Aim slightly above the floor so the rescaling does not undo it.
        const Vector lam = es.eigenvalues().cwiseMax(floor * (1.0 + 1e-3) * (1.0 + pass));
        out = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
        const Vector d = out.diagonal().cwiseSqrt().cwiseInverse();
        out = d.asDiagonal() * out * d.asDiagonal();
        out = 0.5 * (out + out.transpose());
        out.diagonal().setOnes();
    }
    return out;
}

namespace {

double offdiag_l1(const Matrix& c)
{
    return c.cwiseAbs().sum() - c.diagonal().cwiseAbs().sum();
}

void soft_threshold_offdiag(Matrix& c, double t)
{
    for (Index j = 0; j < c.cols(); ++j)
        for (Index i = 0; i < c.rows(); ++i) {
            if (i == j)
                continue;
            const double v = c(i, j);
            c(i, j) = v > t ? v - t : (v < -t ? v + t : 0.0);
        }
}

// Smooth part of the convex surrogate: tr(A C) + tr(C^{-1} S), A = C0^{-1}.
struct Surrogate {
    const Matrix& a;
    const Matrix& s;

    bool value(const Matrix& c, double& out, Matrix* grad) const
    {
        Eigen::LLT<Matrix> llt(c);
        if (llt.info() != Eigen::Success)
            return false;
        const Matrix cinv_s = llt.solve(s);
        out = (a.cwiseProduct(c)).sum() + cinv_s.trace();
        if (grad) {
            const Matrix cinv = llt.solve(Matrix::Identity(c.rows(), c.cols()));
            *grad = a - cinv_s * cinv;
            *grad = 0.5 * (*grad + grad->transpose());
        }
        return std::isfinite(out);
    }
};

}  // namespace

double sparse_objective(const Matrix& c, const Matrix& c_hat, double lambda_s)
{
    Eigen::LLT<Matrix> llt(c);
    if (llt.info() != Eigen::Success)
        return std::numeric_limits<double>::infinity();
    const Matrix l = llt.matrixL();
    const double logdet = 2.0 * l.diagonal().array().log().sum();
    return logdet + llt.solve(c_hat).trace() + lambda_s * offdiag_l1(c);
}

SparseResult sparse_correlation(const Matrix& c_hat, double lambda_s, const SparseOptions& options,
                                const Matrix& start)
{
    if (c_hat.rows() != c_hat.cols() || c_hat.rows() == 0)
        throw Error(Errc::dimension_mismatch, "correlation matrix must be square");
    if (!(lambda_s >= 0.0))
        throw Error(Errc::invalid_argument, "penalty must be nonnegative");
    const Index n = c_hat.rows();
    const Matrix s = 0.5 * (c_hat + c_hat.transpose());

    Matrix c = start.size() == 0 ? s : Matrix(start);
    if (start.size() != 0 && (start.rows() != n || start.cols() != n))
        throw Error(Errc::dimension_mismatch, "start matrix does not match C_hat");
    {
        Eigen::SelfAdjointEigenSolver<Matrix> es(c, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < options.eigen_floor)
            c = floor_correlation(c, options.eigen_floor);
    }

    SparseResult result;
    double f = sparse_objective(c, s, lambda_s);
    result.objective.push_back(f);
    double step0 = 1.0;

    for (int outer = 0; outer < options.max_outer; ++outer) {
        const Matrix a = Eigen::LLT<Matrix>(c).solve(Matrix::Identity(n, n));
        const Surrogate sur{a, s};
        Matrix x = c;
        double gx = 0.0;
        Matrix grad;
        sur.value(x, gx, &grad);
        double hx = gx + lambda_s * offdiag_l1(x);
        for (int inner = 0; inner < options.max_inner; ++inner) {
            double t = step0;
            Matrix next;
            double gn = 0.0;
            bool accepted = false;
            for (int halving = 0; halving < 60; ++halving, t *= 0.5) {
                next = x - t * grad;
                soft_threshold_offdiag(next, t * lambda_s);
                next.diagonal().setOnes();
                if (!sur.value(next, gn, nullptr))
                    continue;
                const Matrix diff = next - x;
                if (gn <= gx + grad.cwiseProduct(diff).sum() + diff.squaredNorm() / (2.0 * t)) {
                    accepted = true;
                    break;
                }
            }
            if (!accepted)
                break;
            const double hn = gn + lambda_s * offdiag_l1(next);
            const double change = (next - x).cwiseAbs().maxCoeff();
            if (hn > hx)
                break;
            x = std::move(next);
            hx = hn;
            step0 = std::min(1.0, 2.0 * t);
            sur.value(x, gx, &grad);
            if (change < options.inner_tolerance)
                break;
        }
        const double fn = sparse_objective(x, s, lambda_s);
        ++result.iterations;
        if (!(fn <= f)) {
            // The surrogate step failed to descend; keep the current iterate.
            result.converged = true;
            break;
        }
        const double delta = f - fn;
        c = std::move(x);
        f = fn;
        result.objective.push_back(f);
        if (delta < options.tolerance) {
            result.converged = true;
            break;
        }
    }

    c = 0.5 * (c + c.transpose());
    c.diagonal().setOnes();
    Eigen::SelfAdjointEigenSolver<Matrix> es(c, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < options.eigen_floor)
        c = floor_correlation(c, options.eigen_floor);
    result.model.c = std::move(c);
    result.model.provenance = Provenance::sparse;
    result.model.lambda_s = lambda_s;
    return result;
}

double grand_mean_variance(const Matrix& c)
{
    const auto n = static_cast<double>(c.rows());
    if (c.rows() == 0)
        throw Error(Errc::dimension_mismatch, "empty correlation matrix");
    return c.sum() / (n * n);
}

double grand_mean_variance(const Matrix& c, const Vector& sigma)
{
    if (sigma.size() != c.rows())
        throw Error(Errc::dimension_mismatch, "sigma length does not match C");
    const auto n = static_cast<double>(c.rows());
    return sigma.dot(c * sigma) / (n * n);
}

double difference_variance(const Matrix& c, Index a, Index b)
{
    return difference_variance(c, a, b, 1.0, 1.0);
}

double difference_variance(const Matrix& c, Index a, Index b, double sigma_a, double sigma_b)
{
    if (a < 0 || b < 0 || a >= c.rows() || b >= c.rows())
        throw Error(Errc::index_out_of_range, "element index outside the correlation matrix");
    return sigma_a * sigma_a * c(a, a) + sigma_b * sigma_b * c(b, b) - 2.0 * sigma_a * sigma_b * c(a, b);
}

double nonzero_proportion(const Matrix& c)
{
    const Index n = c.rows();
    if (n < 2)
        return 0.0;
    Index count = 0;
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < n; ++i)
            if (i != j && std::abs(c(i, j)) > 1e-10)
                ++count;
    return static_cast<double>(count) / static_cast<double>(n * (n - 1));
}

}  // namespace esncast
