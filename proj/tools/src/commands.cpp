#include "esncast/pipeline/commands.hpp"

#include "esncast/calibration.hpp"
#include "esncast/dependence.hpp"
#include "esncast/exposure.hpp"
#include "esncast/pipeline/lorenz_benchmark.hpp"
#include "esncast/scoring.hpp"
#include "esncast/spatial.hpp"

#include <boost/version.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>

#ifndef ESNCAST_VERSION
#define ESNCAST_VERSION "unknown"
#endif

namespace esncast::pipeline {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json to_json(const Matrix& m)
{
    json rows = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Index j = 0; j < m.cols(); ++j)
            row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& rows)
{
    const auto n = static_cast<Index>(rows.size());
    const Index k = n == 0 ? 0 : static_cast<Index>(rows.at(0).size());
    Matrix m(n, k);
    for (Index i = 0; i < n; ++i) {
        if (static_cast<Index>(rows.at(static_cast<std::size_t>(i)).size()) != k)
            throw Error(Errc::parse_error, "ragged matrix in JSON artifact");
        for (Index j = 0; j < k; ++j)
            m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].get<double>();
    }
    return m;
}

json to_json(const HyperParams& hp)
{
    return {{"n_h", hp.n_h},           {"m", hp.m},           {"tau", hp.tau},
            {"nu", hp.nu},             {"lambda_r", hp.lambda_r}, {"alpha", hp.alpha},
            {"pi_w", hp.pi_w},         {"pi_win", hp.pi_win}, {"activation", to_string(hp.activation)},
            {"bias", hp.include_bias}, {"washout", hp.washout}};
}

HyperParams hyper_params_from_json(const json& j)
{
    HyperParams hp;
    hp.n_h = j.at("n_h").get<Index>();
    hp.m = j.at("m").get<Index>();
    hp.tau = j.at("tau").get<Index>();
    hp.nu = j.at("nu").get<double>();
    hp.lambda_r = j.at("lambda_r").get<double>();
    hp.alpha = j.at("alpha").get<double>();
    hp.pi_w = j.at("pi_w").get<double>();
    hp.pi_win = j.at("pi_win").get<double>();
    hp.activation = parse_activation(j.at("activation").get<std::string>());
    hp.include_bias = j.at("bias").get<bool>();
    hp.washout = j.at("washout").get<Index>();
    hp.validate();
    return hp;
}

json read_json(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(Errc::io_error, "cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(Errc::parse_error, path.string() + ": " + e.what());
    }
}

void write_json(const fs::path& path, const json& j)
{
    std::ofstream out(path);
    if (!out)
        throw Error(Errc::io_error, "cannot write " + path.string());
    out << j.dump(2) << '\n';
}

std::ofstream open_csv(const fs::path& path)
{
    std::ofstream out(path);
    if (!out)
        throw Error(Errc::io_error, "cannot write " + path.string());
    return out;
}

std::string num(double v) { return io::format_double(v); }

HyperParams resolve_params(Context& ctx, bool use_validation)
{
    if (!use_validation)
        return ctx.cfg.reservoir;
    const json v = read_json(ctx.artifact("validation.json"));
    return hyper_params_from_json(v.at("best"));
}

Index training_rows(const io::Series& s, Index holdout)
{
    if (holdout < 0 || holdout >= s.values.rows())
        throw Error(Errc::invalid_argument, "holdout must leave at least one training row");
    return s.values.rows() - holdout;
}

std::string time_label(const io::Series& s, Index row)
{
    return row < static_cast<Index>(s.time.size()) ? s.time[static_cast<std::size_t>(row)] : std::to_string(row);
}

struct CalibrationArtifact {
    Index origin = 0;
    Index n_w = 0;
    Index n_f = 0;
    Index n_ens = 0;
    Index train_rows = 0;
    HyperParams hp;
    std::vector<std::string> elements;
    Matrix sigma_tilde;
};

CalibrationArtifact load_calibration(Context& ctx)
{
    const json j = read_json(ctx.artifact("calibration.json"));
    CalibrationArtifact a;
    a.origin = j.at("origin").get<Index>();
    a.n_w = j.at("n_w").get<Index>();
    a.n_f = j.at("n_f").get<Index>();
    a.n_ens = j.at("n_ens").get<Index>();
    a.train_rows = j.at("train_rows").get<Index>();
    a.hp = hyper_params_from_json(j.at("hyper_params"));
    a.elements = j.at("elements").get<std::vector<std::string>>();
    a.sigma_tilde = matrix_from_json(j.at("sigma_tilde"));
    return a;
}

/// Column order of `wanted` within `names`; throws when one is absent.
std::vector<Index> column_order(const std::vector<std::string>& names, const std::vector<std::string>& wanted,
                                const std::string& what)
{
    std::map<std::string, Index> pos;
    for (std::size_t i = 0; i < names.size(); ++i)
        pos[names[i]] = static_cast<Index>(i);
    std::vector<Index> out;
    for (const auto& w : wanted) {
        const auto it = pos.find(w);
        if (it == pos.end())
            throw Error(Errc::invalid_argument, what + ": no entry for '" + w + "'");
        out.push_back(it->second);
    }
    return out;
}

io::Stations load_stations(Context& ctx, const fs::path& override_path)
{
    const fs::path p = override_path.empty() ? ctx.cfg.data.stations : override_path;
    if (p.empty())
        throw Error(Errc::io_error, "no station file given (data.stations or --stations)");
    return io::read_stations(ctx.input(p));
}

SpatialModel load_spatial_model(Context& ctx)
{
    const json j = read_json(ctx.artifact("spatial.json"));
    const Matrix k = matrix_from_json(j.at("knots"));
    Locations knots = k;
    const std::vector<double> r = j.at("ranges").get<std::vector<double>>();
    return SpatialModel(knots, Eigen::Map<const Vector>(r.data(), static_cast<Index>(r.size())),
                        j.at("nugget").get<double>());
}

}  // namespace

fs::path Context::output(const std::string& name)
{
    fs::create_directories(out_dir);
    const fs::path p = out_dir / name;
    outputs.push_back(p);
    return p;
}

fs::path Context::input(const fs::path& p)
{
    if (!fs::exists(p))
        throw Error(Errc::io_error, "missing input " + p.string());
    inputs.push_back(p);
    return p;
}

fs::path Context::artifact(const std::string& name)
{
    const fs::path p = out_dir / name;
    if (!fs::exists(p))
        throw Error(Errc::io_error, "missing input " + p.string() + " (run the stage that produces it first)");
    inputs.push_back(p);
    return p;
}

void Context::write_manifest() const
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    json files_in = json::array();
    for (const auto& p : inputs)
        files_in.push_back(p.string());
    json files_out = json::array();
    for (const auto& p : outputs)
        files_out.push_back(p.filename().string());
    const json m = {{"command", command},
                    {"seed", cfg.seed},
                    {"config_hash", config_hash(cfg)},
                    {"threads", cfg.threads},
                    {"created_utc", stamp},
                    {"versions",
                     {{"esncast", ESNCAST_VERSION},
                      {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                    "." + std::to_string(EIGEN_MINOR_VERSION)},
                      {"boost", BOOST_LIB_VERSION}}},
                    {"inputs", files_in},
                    {"outputs", files_out}};
    fs::create_directories(out_dir);
    write_json(out_dir / ("manifest_" + command + ".json"), m);
}

void write_matrix(const fs::path& path, const std::vector<std::string>& names, const Matrix& m)
{
    if (static_cast<Index>(names.size()) != m.rows() || m.rows() != m.cols())
        throw Error(Errc::dimension_mismatch, "matrix labels do not match its size");
    auto out = open_csv(path);
    out << "element";
    for (const auto& n : names)
        out << ',' << n;
    out << '\n';
    for (Index i = 0; i < m.rows(); ++i) {
        out << names[static_cast<std::size_t>(i)];
        for (Index j = 0; j < m.cols(); ++j)
            out << ',' << num(m(i, j));
        out << '\n';
    }
}

Matrix read_matrix(const fs::path& path, std::vector<std::string>* names)
{
    std::ifstream in(path);
    if (!in)
        throw Error(Errc::io_error, "cannot open " + path.string());
    std::string line;
    std::getline(in, line);
    const auto header = io::split_csv_line(line);
    if (header.size() < 2 || header.front() != "element")
        throw Error(Errc::parse_error, path.string() + ": header must be element,<names>");
    const auto n = static_cast<Index>(header.size() - 1);
    Matrix m(n, n);
    for (Index i = 0; i < n; ++i) {
        if (!std::getline(in, line))
            throw Error(Errc::parse_error, path.string() + ": too few rows");
        const auto cells = io::split_csv_line(line);
        if (static_cast<Index>(cells.size()) != n + 1)
            throw Error(Errc::parse_error, path.string() + ": ragged row " + std::to_string(i + 2));
        for (Index j = 0; j < n; ++j)
            m(i, j) = io::parse_double(cells[static_cast<std::size_t>(j + 1)], path.string());
    }
    if (names)
        names->assign(header.begin() + 1, header.end());
    return m;
}

io::Series load_series(Context& ctx, const fs::path& override_path)
{
    const fs::path p = override_path.empty() ? ctx.cfg.data.series : override_path;
    if (p.empty())
        throw Error(Errc::io_error, "no series file given (data.series or --series)");
    io::Series s = io::read_series(ctx.input(p));
    if (ctx.cfg.data.transform == Transform::log) {
        if ((s.values.array() <= 0.0).any())
            throw Error(Errc::invalid_argument, "log transform needs strictly positive values");
        s.values = s.values.array().log().matrix();
    }
    return s;
}

void run_simulate(Context& ctx, const SimulateOptions& o)
{
    const Index n_real = o.realizations.value_or(ctx.cfg.lorenz96.realizations);
    const Index n_pts = o.points.value_or(ctx.cfg.lorenz96.points);
    if (n_real < 1 || n_pts < 1)
        throw Error(Errc::invalid_argument, "realizations and points must be positive");
    lorenz96::Config model = ctx.cfg.lorenz96.model;
    model.seed = ctx.cfg.seed;
    const auto runs = lorenz96::simulate(model, n_pts, n_real);
    for (Index r = 0; r < n_real; ++r) {
        io::Series s;
        for (Index l = 0; l < model.n_vars; ++l)
            s.names.push_back("x" + std::to_string(l + 1));
        s.values = runs[static_cast<std::size_t>(r)];
        char name[64];
        std::snprintf(name, sizeof name, "lorenz96_r%02d.csv", static_cast<int>(r));
        io::write_series(ctx.output(name), s);
    }
}

void run_validate(Context& ctx, const SeriesOptions& o)
{
    const io::Series s = load_series(ctx, o.series);
    const Index t = training_rows(s, o.holdout);
    const Matrix train = s.values.topRows(t);
    const auto split = static_cast<Index>(std::floor(ctx.cfg.validation.split_fraction * static_cast<double>(t)));
    const auto grid = ctx.cfg.validation_grid();
    std::cerr << "validating " << grid.size() << " candidates\n";
    const ValidationResult v = validate_hyperparameters(train, split, ctx.cfg.validation.n_f, grid,
                                                        ctx.cfg.validation.n_ens, ctx.cfg.seed);
    json cands = json::array();
    for (std::size_t i = 0; i < v.grid.size(); ++i) {
        json c = to_json(v.grid[i]);
        c["mse"] = std::isfinite(v.scores[i]) ? json(v.scores[i]) : json(nullptr);
        cands.push_back(std::move(c));
    }
    write_json(ctx.output("validation.json"), {{"split", split},
                                               {"train_rows", t},
                                               {"n_f", ctx.cfg.validation.n_f},
                                               {"best_index", v.best},
                                               {"best", to_json(v.best_params())},
                                               {"best_mse", v.scores[static_cast<std::size_t>(v.best)]},
                                               {"candidates", cands}});
}

void run_calibrate(Context& ctx, const SeriesOptions& o)
{
    const io::Series s = load_series(ctx, o.series);
    const Index t = training_rows(s, o.holdout);
    const CalibrationSection& c = ctx.cfg.calibration;
    const Index origin = c.origin > 0 ? c.origin : t - c.n_w * c.n_f;
    if (origin < 2 || origin + c.n_w * c.n_f > t)
        throw Error(Errc::insufficient_data, "training rows cannot hold " + std::to_string(c.n_w) +
                                                 " windows of " + std::to_string(c.n_f) + " steps");
    const HyperParams hp = resolve_params(ctx, o.use_validation);
    const Matrix train = s.values.topRows(t);
    const WindowedForecasts wf = build_windowed_forecasts(train, origin, hp, c.n_w, c.n_f, c.n_ens, ctx.cfg.seed);
    const CalibrationModel cm = calibrate(wf);

    write_json(ctx.output("calibration.json"), {{"origin", origin},
                                                {"n_w", c.n_w},
                                                {"n_f", c.n_f},
                                                {"n_ens", c.n_ens},
                                                {"train_rows", t},
                                                {"hyper_params", to_json(hp)},
                                                {"elements", s.names},
                                                {"sigma_hat", to_json(cm.sigma_hat)},
                                                {"sigma_tilde", to_json(cm.sigma_tilde)}});
    io::Series res;
    res.names = s.names;
    res.values = cm.pooled_standardized();
    io::write_series(ctx.output("residuals.csv"), res);
    io::Series raw;
    raw.names = s.names;
    raw.values.resize(cm.n_w * cm.n_f, cm.elements());
    for (Index w = 0; w < cm.n_w; ++w)
        raw.values.middleRows(w * cm.n_f, cm.n_f) = cm.residuals[static_cast<std::size_t>(w)];
    io::write_series(ctx.output("residuals_raw.csv"), raw);
}

void run_forecast(Context& ctx, const ForecastOptions& o)
{
    const io::Series s = load_series(ctx, o.series.series);
    const Index t = training_rows(s, o.series.holdout);
    const Matrix train = s.values.topRows(t);

    ForecastEnsemble fc;
    std::optional<CalibrationArtifact> cal;
    Index horizon = o.horizon > 0 ? o.horizon : ctx.cfg.calibration.n_f;
    if (o.with_intervals) {
        cal = load_calibration(ctx);
        if (cal->elements != s.names)
            throw Error(Errc::invalid_argument, "calibration was fitted on different elements");
        if (cal->train_rows != t)
            throw Error(Errc::invalid_argument, "calibration used " + std::to_string(cal->train_rows) +
                                                    " training rows, forecast has " + std::to_string(t));
        if (o.horizon == 0)
            horizon = cal->n_f;
        if (horizon > cal->n_f)
            throw Error(Errc::invalid_argument, "horizon exceeds the calibrated steps");
        EnsembleForecaster engine(train, cal->origin, cal->hp, cal->n_ens, ctx.cfg.seed);
        fc = engine.forecast_from(t, horizon);
    } else {
        fc = iterative_forecast(train, resolve_params(ctx, o.series.use_validation), horizon,
                                ctx.cfg.calibration.n_ens, ctx.cfg.seed);
    }
    const Matrix sd = fc.member_sd();

    {
        auto out = open_csv(ctx.output("forecast.csv"));
        out << "time,element,mean,ensemble_sd\n";
        for (Index j = 0; j < horizon; ++j)
            for (Index l = 0; l < fc.mean.cols(); ++l)
                out << time_label(s, t + j) << ',' << s.names[static_cast<std::size_t>(l)] << ','
                    << num(fc.mean(j, l)) << ',' << num(sd(j, l)) << '\n';
    }
    if (o.members) {
        auto out = open_csv(ctx.output("members.csv"));
        out << "time,element,member_id,value\n";
        for (Index j = 0; j < horizon; ++j)
            for (Index l = 0; l < fc.mean.cols(); ++l)
                for (Index k = 0; k < fc.size(); ++k)
                    out << time_label(s, t + j) << ',' << s.names[static_cast<std::size_t>(l)] << ',' << k << ','
                        << num(fc.members[static_cast<std::size_t>(k)](j, l)) << '\n';
    }

    const bool scored = o.series.holdout > 0;
    const Index n_scored = scored ? std::min(horizon, o.series.holdout) : 0;
    json scores;
    if (scored) {
        const Matrix truth = s.values.middleRows(t, n_scored);
        const MseScores e = mse(fc.mean.topRows(n_scored), truth);
        ForecastEnsemble head = fc;
        head.mean.conservativeResize(n_scored, Eigen::NoChange);
        for (auto& m : head.members)
            m.conservativeResize(n_scored, Eigen::NoChange);
        const Matrix c = crps_table(head, truth);
        std::vector<double> crps_el;
        for (Index l = 0; l < c.cols(); ++l)
            crps_el.push_back(c.col(l).mean());
        std::vector<double> mse_el(e.per_element.data(), e.per_element.data() + e.per_element.size());
        const auto ms = stats::summarize(mse_el);
        const auto cs = stats::summarize(crps_el);
        scores = {{"steps", n_scored},
                  {"mse_pooled", e.pooled},
                  {"mse_median", ms.median},
                  {"mse_iqr", ms.iqr},
                  {"crps_median", cs.median},
                  {"crps_iqr", cs.iqr},
                  {"mse_per_element", mse_el}};
    }

    if (cal) {
        auto out = open_csv(ctx.output("intervals.csv"));
        out << "time,element,level,mean,lo,hi,exp_lo,exp_hi\n";
        json coverage = json::object();
        for (double level : ctx.cfg.calibration.levels) {
            const Matrix st = cal->sigma_tilde.topRows(horizon);
            CalibrationModel cm;
            cm.sigma_tilde = st;
            const auto [lo, hi] = cm.intervals(fc.mean, level);
            for (Index j = 0; j < horizon; ++j)
                for (Index l = 0; l < lo.cols(); ++l)
                    out << time_label(s, t + j) << ',' << s.names[static_cast<std::size_t>(l)] << ',' << num(level)
                        << ',' << num(fc.mean(j, l)) << ',' << num(lo(j, l)) << ',' << num(hi(j, l)) << ','
                        << num(std::exp(lo(j, l))) << ',' << num(std::exp(hi(j, l))) << '\n';
            if (scored)
                coverage[num(level)] = esncast::coverage(lo.topRows(n_scored), hi.topRows(n_scored),
                                                         s.values.middleRows(t, n_scored));
        }
        if (scored)
            scores["coverage"] = coverage;
    }
    if (scored)
        write_json(ctx.output("scores.json"), scores);
}

void run_dependence(Context& ctx)
{
    const io::Series res = io::read_series(ctx.artifact("residuals.csv"));
    const DependenceModel c_hat = empirical_correlation(res.values);
    const double base = grand_mean_variance(c_hat.c);
    json path = json::array();
    Matrix warm;
    DependenceModel chosen = c_hat;
    bool found = false;
    for (double lam : ctx.cfg.dependence.lambda_grid) {
        const SparseResult sp = sparse_correlation(c_hat.c, lam, {}, warm);
        warm = sp.model.c;
        if (!sp.model.is_valid(1e-8))
            throw Error(Errc::invalid_argument, "sparse estimate left the correlation cone");
        path.push_back({{"lambda", lam},
                        {"nonzero", nonzero_proportion(sp.model.c)},
                        {"variance_ratio", grand_mean_variance(sp.model.c) / base},
                        {"iterations", sp.iterations},
                        {"converged", sp.converged}});
        if (std::abs(lam - ctx.cfg.dependence.lambda) < 1e-12) {
            chosen = sp.model;
            found = true;
        }
    }
    if (!found)
        chosen = sparse_correlation(c_hat.c, ctx.cfg.dependence.lambda).model;
    write_matrix(ctx.output("correlation_empirical.csv"), res.names, c_hat.c);
    write_matrix(ctx.output("correlation_sparse.csv"), res.names, chosen.c);
    write_json(ctx.output("dependence.json"), {{"samples", res.values.rows()},
                                               {"lambda", ctx.cfg.dependence.lambda},
                                               {"nonzero", nonzero_proportion(chosen.c)},
                                               {"path", path}});
}

void run_spatial(Context& ctx, const SpatialOptions& o)
{
    const io::Stations st = load_stations(ctx, o.stations);
    const io::Series res = io::read_series(ctx.artifact("residuals.csv"));
    const auto order = column_order(res.names, st.id, "residuals");
    Matrix samples(res.values.rows(), static_cast<Index>(order.size()));
    for (std::size_t i = 0; i < order.size(); ++i)
        samples.col(static_cast<Index>(i)) = res.values.col(order[i]);
    const DependenceModel c_hat = empirical_correlation(samples);

    const Locations knots = knot_grid(st.coords, ctx.cfg.spatial.knots_x, ctx.cfg.spatial.knots_y);
    LocalFitOptions lf;
    lf.nugget_max = ctx.cfg.spatial.nugget_max;
    const SpatialModel model = fit_local_ranges(st.coords, samples, knots, lf);
    const Matrix c_spatial = model.correlation_matrix(st.coords);
    const DeltaSelection sel = select_delta(c_spatial, c_hat.c, samples, default_levels(), ctx.cfg.spatial.delta_step);
    const DependenceModel shrunk = shrink(c_spatial, c_hat.c, sel.delta);
    if (!shrunk.is_valid(1e-8))
        throw Error(Errc::invalid_argument, "shrunk correlation is not positive semi-definite");

    json cover = json::object();
    const Matrix identity = Matrix::Identity(samples.cols(), samples.cols());
    for (double level : default_levels())
        cover[num(level)] = {{"shrunk", grand_mean_coverage(shrunk.c, samples, level)},
                             {"spatial", grand_mean_coverage(c_spatial, samples, level)},
                             {"empirical", grand_mean_coverage(c_hat.c, samples, level)},
                             {"independent", grand_mean_coverage(identity, samples, level)}};
    const Vector r = model.ranges();
    write_json(ctx.output("spatial.json"), {{"knots", to_json(Matrix(knots))},
                                            {"ranges", std::vector<double>(r.data(), r.data() + r.size())},
                                            {"nugget", model.nugget()},
                                            {"bandwidth", model.bandwidth()},
                                            {"delta", sel.delta},
                                            {"delta_grid", sel.grid},
                                            {"delta_loss", sel.loss},
                                            {"grand_mean_coverage", cover}});
    write_matrix(ctx.output("correlation_spatial.csv"), st.id, c_spatial);
    write_matrix(ctx.output("correlation_shrunk.csv"), st.id, shrunk.c);
}

void run_interpolate(Context& ctx, const SpatialOptions& o)
{
    const io::Stations st = load_stations(ctx, o.stations);
    const SpatialModel model = load_spatial_model(ctx);
    const CalibrationArtifact cal = load_calibration(ctx);

    // forecast.csv is long format: time, element, mean, ensemble_sd.
    std::ifstream in(ctx.artifact("forecast.csv"));
    std::string line;
    std::getline(in, line);
    if (io::split_csv_line(line) != std::vector<std::string>{"time", "element", "mean", "ensemble_sd"})
        throw Error(Errc::parse_error, "forecast.csv has an unexpected header");
    std::vector<std::string> times;
    std::map<std::string, Index> element_pos;
    for (std::size_t i = 0; i < cal.elements.size(); ++i)
        element_pos[cal.elements[i]] = static_cast<Index>(i);
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        const auto c = io::split_csv_line(line);
        if (c.size() != 4)
            throw Error(Errc::parse_error, "forecast.csv: malformed row");
        if (times.empty() || times.back() != c[0]) {
            times.push_back(c[0]);
            rows.emplace_back(cal.elements.size(), std::nan(""));
        }
        const auto it = element_pos.find(c[1]);
        if (it == element_pos.end())
            throw Error(Errc::parse_error, "forecast.csv: unknown element " + c[1]);
        rows.back()[static_cast<std::size_t>(it->second)] = io::parse_double(c[2], "forecast.csv mean");
    }
    const auto n_t = static_cast<Index>(rows.size());
    if (n_t == 0 || n_t > cal.n_f)
        throw Error(Errc::invalid_argument, "forecast horizon must be between 1 and the calibrated steps");
    const auto order = column_order(cal.elements, st.id, "forecast");
    Matrix means(n_t, static_cast<Index>(order.size()));
    Matrix sigmas(n_t, static_cast<Index>(order.size()));
    for (Index j = 0; j < n_t; ++j)
        for (std::size_t i = 0; i < order.size(); ++i) {
            means(j, static_cast<Index>(i)) = rows[static_cast<std::size_t>(j)][static_cast<std::size_t>(order[i])];
            sigmas(j, static_cast<Index>(i)) = cal.sigma_tilde(j, order[i]);
        }
    if (!means.allFinite())
        throw Error(Errc::parse_error, "forecast.csv misses values for some stations");

    std::vector<double> bb = ctx.cfg.spatial.bbox;
    if (bb.empty()) {
        const Eigen::RowVector2d lo = st.coords.colwise().minCoeff();
        const Eigen::RowVector2d hi = st.coords.colwise().maxCoeff();
        bb = {lo(0), hi(0), lo(1), hi(1)};
    }
    const Locations grid = regular_grid(bb[0], bb[1], bb[2], bb[3], ctx.cfg.spatial.grid_nx, ctx.cfg.spatial.grid_ny);
    const InterpolatedField f = krige(st.coords, means, sigmas, model, grid);
    const Matrix total = f.total_sd();
    auto out = open_csv(ctx.output("field.csv"));
    out << "lon,lat,time,mean,sd,sigma,total_sd\n";
    for (Index j = 0; j < n_t; ++j)
        for (Index g = 0; g < grid.rows(); ++g)
            out << num(grid(g, 0)) << ',' << num(grid(g, 1)) << ',' << times[static_cast<std::size_t>(j)] << ','
                << num(f.mean(j, g)) << ',' << num(f.sd(j, g)) << ',' << num(f.sigma(j, g)) << ','
                << num(total(j, g)) << '\n';
}

void run_exposure(Context& ctx, const ExposureCommandOptions& o)
{
    const fs::path dpath = o.districts.empty() ? ctx.cfg.data.districts : o.districts;
    if (dpath.empty())
        throw Error(Errc::io_error, "no district file given (data.districts or --districts)");
    const DistrictSet districts = io::read_districts(ctx.input(dpath));
    const SpatialModel model = load_spatial_model(ctx);

    std::ifstream in(ctx.artifact("field.csv"));
    std::string line;
    std::getline(in, line);
    if (io::split_csv_line(line) != std::vector<std::string>{"lon", "lat", "time", "mean", "sd", "sigma", "total_sd"})
        throw Error(Errc::parse_error, "field.csv has an unexpected header");
    std::vector<std::string> times;
    std::vector<Point> pts;
    std::vector<std::vector<double>> mean_rows;
    std::vector<std::vector<double>> sd_rows;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        const auto c = io::split_csv_line(line);
        if (c.size() != 7)
            throw Error(Errc::parse_error, "field.csv: malformed row");
        if (times.empty() || times.back() != c[2]) {
            times.push_back(c[2]);
            mean_rows.emplace_back();
            sd_rows.emplace_back();
        }
        if (times.size() == 1)
            pts.emplace_back(io::parse_double(c[0], "field.csv lon"), io::parse_double(c[1], "field.csv lat"));
        mean_rows.back().push_back(io::parse_double(c[3], "field.csv mean"));
        sd_rows.back().push_back(io::parse_double(c[6], "field.csv total_sd"));
    }
    InterpolatedField field;
    const auto n_g = static_cast<Index>(pts.size());
    const auto n_t = static_cast<Index>(times.size());
    field.grid.resize(n_g, 2);
    for (Index g = 0; g < n_g; ++g)
        field.grid.row(g) = pts[static_cast<std::size_t>(g)].transpose();
    field.mean.resize(n_t, n_g);
    field.sd = Matrix::Zero(n_t, n_g);
    field.sigma.resize(n_t, n_g);
    for (Index j = 0; j < n_t; ++j) {
        if (static_cast<Index>(mean_rows[static_cast<std::size_t>(j)].size()) != n_g)
            throw Error(Errc::parse_error, "field.csv: time slices differ in size");
        for (Index g = 0; g < n_g; ++g) {
            field.mean(j, g) = mean_rows[static_cast<std::size_t>(j)][static_cast<std::size_t>(g)];
            field.sigma(j, g) = sd_rows[static_cast<std::size_t>(j)][static_cast<std::size_t>(g)];
        }
    }

    const DistrictField dm = district_means(field, districts);
    const Matrix c = model.correlation_matrix(dm.centroids);
    std::vector<std::int64_t> pops;
    for (const District& d : districts.districts)
        pops.push_back(d.population);
    ExposureOptions eo;
    eo.threshold = ctx.cfg.exposure.threshold;
    eo.n_draws = ctx.cfg.exposure.draws;
    eo.level = ctx.cfg.exposure.level;
    eo.seed = ctx.cfg.seed;
    eo.log_scale = ctx.cfg.data.transform == Transform::log;
    const ExposureSeries e = exposure_series(dm.mean, dm.sd, c, pops, eo);
    const double cut = eo.log_scale ? std::log(eo.threshold) : eo.threshold;

    {
        auto out = open_csv(ctx.output("exposure.csv"));
        out << "time,mean_exposed,lo,hi\n";
        for (Index j = 0; j < n_t; ++j)
            out << times[static_cast<std::size_t>(j)] << ',' << num(e.mean_exposed(j)) << ','
                << e.lo[static_cast<std::size_t>(j)] << ',' << e.hi[static_cast<std::size_t>(j)] << '\n';
    }
    auto out = open_csv(ctx.output("exceedance.csv"));
    out << "time,district,mean,probability,exceeds\n";
    for (Index j = 0; j < n_t; ++j)
        for (Index d = 0; d < districts.size(); ++d)
            out << times[static_cast<std::size_t>(j)] << ',' << districts.districts[static_cast<std::size_t>(d)].id
                << ',' << num(dm.mean(j, d)) << ',' << num(e.exceedance(j, d)) << ','
                << (dm.mean(j, d) > cut ? 1 : 0) << '\n';
}

void run_benchmark(Context& ctx, const BenchmarkOptions& o)
{
    LorenzBenchmarkSettings s;
    s.model = ctx.cfg.lorenz96.model;
    s.model.seed = ctx.cfg.seed;
    s.realizations = o.realizations.value_or(ctx.cfg.lorenz96.realizations);
    s.points = ctx.cfg.lorenz96.points;
    s.train = ctx.cfg.benchmark.train;
    s.test = ctx.cfg.benchmark.test;
    s.n_ens = o.n_ens.value_or(ctx.cfg.benchmark.n_ens);
    s.hp = ctx.cfg.reservoir;
    s.alpha_hat = ctx.cfg.benchmark.alpha_hat;
    s.arfima = ctx.cfg.benchmark.arfima;
    s.n_w = ctx.cfg.calibration.n_w;
    s.levels = ctx.cfg.calibration.levels;
    s.lambda_grid = ctx.cfg.dependence.lambda_grid;
    s.seed = ctx.cfg.seed;
    const auto runs = lorenz96::simulate(s.model, s.points, s.realizations);

    const auto methods = compare_methods(runs, s);
    const std::string table = format_method_table(methods);
    std::cout << table;
    {
        std::ofstream out(ctx.output("benchmark.txt"));
        out << table;
    }
    json rows = json::array();
    for (const MethodScores& m : methods) {
        const auto a = m.mse_summary();
        const auto b = m.crps_summary();
        rows.push_back({{"method", m.name},
                        {"mse_median", a.median},
                        {"mse_iqr", a.iqr},
                        {"crps_median", b.median},
                        {"crps_iqr", b.iqr},
                        {"seconds", m.seconds}});
    }
    json report = {{"realizations", s.realizations}, {"n_ens", s.n_ens}, {"methods", rows}};
    if (o.uncertainty) {
        const UncertaintyStudy u = study_uncertainty(runs, s);
        json cov = json::array();
        for (std::size_t k = 0; k < u.levels.size(); ++k)
            cov.push_back({{"level", u.levels[k]},
                           {"calibrated", u.median_coverage(k, true)},
                           {"uncalibrated", u.median_coverage(k, false)}});
        int ks_better = 0;
        for (const auto& r : u.runs)
            ks_better += r.ks_calibrated < r.ks_uncalibrated ? 1 : 0;
        report["coverage"] = cov;
        report["ks_improved"] = ks_better;
        std::cout << "\nlevel  calibrated  uncalibrated\n";
        for (const auto& c : cov) {
            char line[96];
            std::snprintf(line, sizeof line, "%.2f   %6.1f      %6.1f\n", c["level"].get<double>(),
                          100.0 * c["calibrated"].get<double>(), 100.0 * c["uncalibrated"].get<double>());
            std::cout << line;
        }
    }
    write_json(ctx.output("benchmark.json"), report);
}

}  // namespace esncast::pipeline
