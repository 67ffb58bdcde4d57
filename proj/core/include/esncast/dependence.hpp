#pragma once

// Joint dependence of standardized residuals: empirical and penalized sparse
// correlation, plus the variances of linear combinations they imply.

#include "esncast/common.hpp"

#include <string_view>
#include <vector>

namespace esncast {

enum class Provenance { empirical, sparse, spatial, shrunk, identity };

std::string_view to_string(Provenance p) noexcept;

struct DependenceModel {
    Matrix c;
    Provenance provenance = Provenance::identity;
    double lambda_s = 0.0; ///< penalty, when sparse
    double delta_c = 0.0;  ///< shrinkage weight, when shrunk

    Index size() const noexcept { return c.rows(); }

    /// Symmetric, unit diagonal, entries in [-1, 1] and smallest eigenvalue
    /// >= -tol.
    bool is_valid(double tol = 1e-10) const;

    static DependenceModel identity(Index n);
};

/// Pearson correlation of the columns of an N x n sample. Throws
/// insufficient_data for N < 2 and zero_variance for a constant column.
DependenceModel empirical_correlation(const Matrix& samples);

/// Raises eigenvalues to at least `floor` and rescales to a unit diagonal,
/// repeating until the rescaled matrix satisfies the floor.
Matrix floor_correlation(const Matrix& c, double floor = 1e-8);

struct SparseOptions {
    double tolerance = 1e-6;  ///< outer stop on objective change
    int max_outer = 500;
    int max_inner = 200;
    double inner_tolerance = 1e-8;
    double eigen_floor = 1e-8;
};

struct SparseResult {
    DependenceModel model;
    bool converged = false;
    int iterations = 0;
    std::vector<double> objective; ///< penalized objective after each outer step
};

/// log det C + tr(C^{-1} C_hat) + lambda * sum_{i != j} |c_ij|, minimized over
/// positive-definite matrices with unit diagonal by majorize-minimize: the
/// log-determinant is linearized at the current iterate and the convex
/// surrogate is solved by proximal gradient with halving line search.
/// `start` defaults to C_hat. When the outer loop hits its cap the best
/// iterate is returned with converged = false.
SparseResult sparse_correlation(const Matrix& c_hat, double lambda_s, const SparseOptions& options = {},
                                const Matrix& start = Matrix());

/// The penalized objective itself (infinity outside the positive-definite cone).
double sparse_objective(const Matrix& c, const Matrix& c_hat, double lambda_s);

/// 1' C 1 / n^2.
double grand_mean_variance(const Matrix& c);

/// sigma' C sigma / n^2: variance of the mean of sigma_l-scaled components.
double grand_mean_variance(const Matrix& c, const Vector& sigma);

/// C_aa + C_bb - 2 C_ab. Throws index_out_of_range.
double difference_variance(const Matrix& c, Index a, Index b);

/// Variance of sigma_a z_a - sigma_b z_b.
double difference_variance(const Matrix& c, Index a, Index b, double sigma_a, double sigma_b);

/// Fraction of off-diagonal entries with |c| > 1e-10.
double nonzero_proportion(const Matrix& c);

}  // namespace esncast
