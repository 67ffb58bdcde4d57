#include "esncast/forecasting.hpp"

#include "esncast/scoring.hpp"
#include "esncast/stats.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace esncast {

Standardizer Standardizer::fit(const Matrix& y)
{
    if (y.rows() < 2)
        throw Error(Errc::insufficient_history, "standardization needs at least two rows");
    Standardizer s;
    s.mean = y.colwise().mean();
    s.sd = ((y.rowwise() - s.mean).array().square().colwise().sum() /
            static_cast<double>(y.rows() - 1))
               .sqrt();
    // Constant columns keep unit scale so they pass through unchanged.
    for (Index j = 0; j < s.sd.size(); ++j)
        if (!(s.sd(j) > 0.0))
            s.sd(j) = 1.0;
    return s;
}

Matrix Standardizer::apply(const Matrix& y) const
{
    return ((y.rowwise() - mean).array().rowwise() / sd.array()).matrix();
}

Matrix Standardizer::invert(const Matrix& z) const
{
    return ((z.array().rowwise() * sd.array()).rowwise() + mean.array()).matrix();
}

void embed_input(const Matrix& z, Index t, const HyperParams& hp, Eigen::Ref<Vector> x)
{
    const Index n_l = z.cols();
    for (Index k = 1; k <= hp.m; ++k)
        x.segment((k - 1) * n_l, n_l) = z.row(t - k * hp.tau).transpose();
    if (hp.include_bias)
        x(x.size() - 1) = 1.0;
}

Matrix embed_inputs(const Matrix& z, Index t_begin, Index t_end, const HyperParams& hp)
{
    if (t_begin < hp.m * hp.tau || t_end > z.rows() || t_end < t_begin)
        throw Error(Errc::insufficient_history, "embedding window exceeds the series");
    Matrix out(t_end - t_begin, hp.input_width(z.cols()));
    Vector x(out.cols());
    for (Index t = t_begin; t < t_end; ++t) {
        embed_input(z, t, hp, x);
        out.row(t - t_begin) = x.transpose();
    }
    return out;
}

Matrix ForecastEnsemble::member_sd() const
{
    if (members.empty())
        throw Error(Errc::empty_ensemble, "ensemble has no members");
    Matrix out = Matrix::Zero(mean.rows(), mean.cols());
    if (members.size() < 2)
        return out;
    for (const Matrix& m : members)
        out.array() += (m - mean).array().square();
    return (out / static_cast<double>(members.size() - 1)).array().sqrt().matrix();
}

struct EnsembleForecaster::Impl {
    struct Member {
        WeightMatrices weights;
        Vector h;       // state after processing rows [0, cursor)
        Matrix gram;    // lower triangle of H'H over fitted rows
        Matrix cross;   // H'Z over fitted rows
        Index cursor = 0;
    };

    Matrix y; // observed series (readout targets)
    Matrix z; // standardized series (reservoir inputs)
    Standardizer scaler;
    HyperParams hp;
    std::vector<Member> members;
    Index n_l = 0;
    Index first_state = 0; // first row that receives a state (m * tau)

    void advance(Member& mem, Index origin) const
    {
        const Index begin = std::max(mem.cursor, first_state);
        if (origin <= begin) {
            mem.cursor = std::max(mem.cursor, origin);
            return;
        }
        const Index rows = origin - begin;
        Matrix states(rows, hp.n_h);
        Vector x(hp.input_width(n_l));
        Vector scratch(hp.n_h);
        for (Index t = begin; t < origin; ++t) {
            embed_input(z, t, hp, x);
            update_state_inplace(mem.h, x, mem.weights, hp, scratch);
            if (!mem.h.allFinite())
                throw Error(Errc::non_finite_state, "reservoir state diverged at row " + std::to_string(t));
            states.row(t - begin) = mem.h.transpose();
        }
        // Rows before first_state + washout are excluded from the fit.
        const Index fit_from = std::max(begin, first_state + hp.washout);
        if (fit_from < origin) {
            const Index skip = fit_from - begin;
            const auto h_fit = states.bottomRows(rows - skip);
            mem.gram.selfadjointView<Eigen::Lower>().rankUpdate(h_fit.transpose());
            mem.cross.noalias() += h_fit.transpose() * y.middleRows(fit_from, rows - skip);
        }
        mem.cursor = origin;
    }
};

EnsembleForecaster::EnsembleForecaster(Matrix data, Index standardize_rows, HyperParams hp,
                                       Index n_ens, std::uint64_t seed)
    : impl_(std::make_unique<Impl>())
{
    hp.validate();
    if (n_ens < 1)
        throw Error(Errc::empty_ensemble, "ensemble size must be >= 1");
    if (standardize_rows < 2 || standardize_rows > data.rows())
        throw Error(Errc::insufficient_history, "standardization block is out of range");
    if (!data.allFinite())
        throw Error(Errc::invalid_argument, "observed series contains non-finite values");
    auto& s = *impl_;
    s.hp = hp;
    s.n_l = data.cols();
    s.first_state = hp.m * hp.tau;
    s.scaler = Standardizer::fit(data.topRows(standardize_rows));
    s.z = s.scaler.apply(data);
    s.y = std::move(data);
    s.members.resize(static_cast<std::size_t>(n_ens));
    const Index n_x = hp.input_width(s.n_l);
    parallel_for(n_ens, [&](Index k) {
        auto& mem = s.members[static_cast<std::size_t>(k)];
        const std::uint64_t member_seed = derive_seed(seed, static_cast<std::uint64_t>(k));
        // Zero-radius reservoirs are redrawn from a derived stream.
        for (std::uint64_t attempt = 0;; ++attempt) {
            try {
                mem.weights = generate_weights(hp, n_x, attempt == 0 ? member_seed
                                                                     : derive_seed(member_seed, attempt));
                break;
            } catch (const Error& e) {
                if (e.code() != Errc::degenerate_reservoir || attempt >= 100)
                    throw;
            }
        }
        mem.h = Vector::Zero(hp.n_h);
        mem.gram = Matrix::Zero(hp.n_h, hp.n_h);
        mem.cross = Matrix::Zero(hp.n_h, s.n_l);
    });
}

EnsembleForecaster::~EnsembleForecaster() = default;
EnsembleForecaster::EnsembleForecaster(EnsembleForecaster&&) noexcept = default;
EnsembleForecaster& EnsembleForecaster::operator=(EnsembleForecaster&&) noexcept = default;

const HyperParams& EnsembleForecaster::hyper_params() const noexcept { return impl_->hp; }
const Standardizer& EnsembleForecaster::standardizer() const noexcept { return impl_->scaler; }
Index EnsembleForecaster::ensemble_size() const noexcept
{
    return static_cast<Index>(impl_->members.size());
}
Index EnsembleForecaster::min_origin() const noexcept
{
    return impl_->first_state + impl_->hp.washout + 1;
}

ForecastEnsemble EnsembleForecaster::forecast_from(Index origin, Index n_f)
{
    auto& s = *impl_;
    if (n_f < 1)
        throw Error(Errc::invalid_argument, "forecast horizon must be >= 1");
    if (origin < min_origin())
        throw Error(Errc::insufficient_history,
                    "origin " + std::to_string(origin) + " leaves no rows to fit the readout (need > " +
                        std::to_string(min_origin() - 1) + ")");
    if (origin > s.y.rows())
        throw Error(Errc::insufficient_history, "origin lies beyond the observed series");
    for (const auto& mem : s.members)
        if (mem.cursor > origin)
            throw Error(Errc::invalid_argument, "forecast origins must be non-decreasing");

    const Index n_ens = ensemble_size();
    parallel_for(n_ens, [&](Index k) { s.advance(s.members[static_cast<std::size_t>(k)], origin); });

    // History shared by all members: observations, then appended ensemble means.
    Matrix history(origin + n_f, s.n_l);
    history.topRows(origin) = s.z.topRows(origin);
    Matrix mean_path(n_f, s.n_l);

    struct Scratch {
        Vector h;
        Matrix cross;
        Eigen::LLT<Matrix> factor;
        Matrix pred; // n_f x n_l
    };
    std::vector<Scratch> work(static_cast<std::size_t>(n_ens));
    parallel_for(n_ens, [&](Index k) {
        const auto& mem = s.members[static_cast<std::size_t>(k)];
        auto& w = work[static_cast<std::size_t>(k)];
        w.h = mem.h;
        w.cross = mem.cross;
        Matrix a = mem.gram;
        a.diagonal().array() += s.hp.lambda_r;
        w.factor.compute(a);
        if (w.factor.info() != Eigen::Success)
            throw Error(Errc::singular_system, "readout normal equations are not positive definite");
        w.pred.resize(n_f, s.n_l);
    });

    const Index n_x = s.hp.input_width(s.n_l);
    std::vector<double> column(static_cast<std::size_t>(n_ens));
    for (Index j = 0; j < n_f; ++j) {
        const Index t = origin + j;
        parallel_for(n_ens, [&](Index k) {
            const auto& mem = s.members[static_cast<std::size_t>(k)];
            auto& w = work[static_cast<std::size_t>(k)];
            Vector x(n_x);
            Vector scratch(s.hp.n_h);
            embed_input(history, t, s.hp, x);
            update_state_inplace(w.h, x, mem.weights, s.hp, scratch);
            // Prediction B'h with B = A^{-1} C, evaluated as C' (A^{-1} h).
            const Vector v = w.factor.solve(w.h);
            w.pred.row(j) = (w.cross.transpose() * v).transpose();
        });
        for (Index l = 0; l < s.n_l; ++l) {
            for (Index k = 0; k < n_ens; ++k)
                column[static_cast<std::size_t>(k)] = work[static_cast<std::size_t>(k)].pred(j, l);
            mean_path(j, l) = stats::pairwise_sum(column) / static_cast<double>(n_ens);
        }
        history.row(t) = s.scaler.apply(mean_path.row(j));
        if (!mean_path.row(j).allFinite())
            throw Error(Errc::non_finite_forecast, "ensemble forecast diverged at step " + std::to_string(j + 1));
        if (j + 1 == n_f)
            break;
        // Refit every readout on the history extended by the ensemble mean.
        const RowVector appended = mean_path.row(j);
        parallel_for(n_ens, [&](Index k) {
            auto& w = work[static_cast<std::size_t>(k)];
            w.factor.rankUpdate(w.h, 1.0);
            w.cross.noalias() += w.h * appended;
        });
    }

    ForecastEnsemble out;
    out.origin = origin;
    out.members.resize(static_cast<std::size_t>(n_ens));
    out.member_seeds.resize(static_cast<std::size_t>(n_ens));
    for (Index k = 0; k < n_ens; ++k) {
        out.members[static_cast<std::size_t>(k)] = std::move(work[static_cast<std::size_t>(k)].pred);
        out.member_seeds[static_cast<std::size_t>(k)] = s.members[static_cast<std::size_t>(k)].weights.seed;
    }
    out.mean = std::move(mean_path);
    return out;
}

ForecastEnsemble iterative_forecast(const Matrix& train, const HyperParams& hp, Index n_f,
                                    Index n_ens, std::uint64_t seed)
{
    if (train.rows() <= hp.m * hp.tau + hp.washout)
        throw Error(Errc::insufficient_history, "training series is too short for the embedding");
    EnsembleForecaster engine(train, train.rows(), hp, n_ens, seed);
    return engine.forecast_from(train.rows(), n_f);
}

ValidationResult validate_hyperparameters(const Matrix& data, Index split, Index n_f,
                                          const std::vector<HyperParams>& grid, Index n_ens,
                                          std::uint64_t seed)
{
    if (grid.empty())
        throw Error(Errc::empty_grid, "hyper-parameter grid is empty");
    if (n_f < 1 || split < 2 || data.rows() - split < n_f)
        throw Error(Errc::insufficient_data, "validation block must hold at least n_f rows");

    ValidationResult result;
    result.grid = grid;
    result.scores.reserve(grid.size());
    for (const HyperParams& hp : grid) {
        std::vector<double> errors;
        try {
            EnsembleForecaster engine(data, split, hp, n_ens, seed);
            for (Index origin = split; origin + n_f <= data.rows(); origin += n_f) {
                const ForecastEnsemble fc = engine.forecast_from(origin, n_f);
                const Matrix diff = fc.mean - data.middleRows(origin, n_f);
                for (Index i = 0; i < diff.size(); ++i)
                    errors.push_back(diff.data()[i] * diff.data()[i]);
            }
        } catch (const Error& e) {
            // A diverging candidate loses the comparison instead of aborting it.
            if (e.code() != Errc::non_finite_forecast && e.code() != Errc::non_finite_state)
                throw;
            result.scores.push_back(std::numeric_limits<double>::infinity());
            continue;
        }
        result.scores.push_back(stats::mean(errors));
    }
    for (std::size_t i = 1; i < result.scores.size(); ++i)
        if (result.scores[i] < result.scores[static_cast<std::size_t>(result.best)])
            result.best = static_cast<Index>(i);
    return result;
}

}  // namespace esncast
