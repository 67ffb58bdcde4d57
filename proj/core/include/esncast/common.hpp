#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

namespace esncast {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Failure categories raised by the library. Each operation documents the
/// subset it can produce.
enum class Errc {
    invalid_argument,
    dimension_mismatch,
    degenerate_reservoir,
    non_finite_state,
    singular_system,
    insufficient_history,
    non_finite_forecast,
    empty_grid,
    shape_mismatch,
    empty_ensemble,
    insufficient_data,
    too_few_windows,
    zero_sigma,
    bad_level,
    zero_variance,
    index_out_of_range,
    insufficient_local_data,
    singular_kriging_system,
    diverged,
    non_stationary_fit,
    optimizer_failed,
    empty_district,
    bad_threshold,
    io_error,
    parse_error,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {
    }

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

/// Derives an independent 64-bit stream seed from a base seed and an index
/// (splitmix64 finalizer over the pair).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept;

/// Runs body(i) for i in [0, n), possibly in parallel. Results must be written
/// to per-index slots; no ordering is guaranteed.
void parallel_for(Index n, const std::function<void(Index)>& body);

/// Caps the worker count used by parallel_for (0 = hardware default).
/// The returned guard restores the previous limit on destruction.
class ThreadLimit {
public:
    explicit ThreadLimit(int threads);
    ~ThreadLimit();
    ThreadLimit(const ThreadLimit&) = delete;
    ThreadLimit& operator=(const ThreadLimit&) = delete;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace esncast
