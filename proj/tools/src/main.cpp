#include "esncast/pipeline/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

constexpr int exit_usage = 1;
constexpr int exit_runtime = 2;

}  // namespace

int main(int argc, char** argv)
{
    using namespace esncast;
    using namespace esncast::pipeline;

    CLI::App app{"Echo-state ensemble forecasting with calibrated uncertainty"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::string out_dir = ".";
    app.add_option("--config", config_path, "INI run configuration")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "Override run.seed");
    app.add_option("--threads", threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
    app.add_option("--out-dir", out_dir, "Directory for artifacts");

    SimulateOptions sim;
    auto* c_sim = app.add_subcommand("simulate-lorenz96", "Write seeded Lorenz-96 realizations");
    c_sim->add_option("--realizations", sim.realizations, "Number of realizations");
    c_sim->add_option("--points", sim.points, "Recorded points per realization");

    auto add_series = [](CLI::App* c, SeriesOptions& o) {
        c->add_option("--series", o.series, "Series CSV (overrides data.series)");
        c->add_option("--holdout", o.holdout, "Trailing rows withheld from fitting");
        c->add_flag("--use-validation", o.use_validation, "Use the best candidate from validation.json");
    };
    SeriesOptions val;
    auto* c_val = app.add_subcommand("validate", "Select hyper-parameters by validation MSE");
    add_series(c_val, val);

    SeriesOptions cal;
    auto* c_cal = app.add_subcommand("calibrate", "Windowed residual SDs with monotone smoothing");
    add_series(c_cal, cal);

    ForecastOptions fc;
    auto* c_fc = app.add_subcommand("forecast", "Recursive ensemble forecast");
    add_series(c_fc, fc.series);
    c_fc->add_option("--horizon", fc.horizon, "Steps ahead (default calibration.n_f)");
    c_fc->add_flag("--with-intervals", fc.with_intervals, "Emit calibrated intervals (needs calibration.json)");
    c_fc->add_flag("--members", fc.members, "Also write every ensemble member");

    auto* c_dep = app.add_subcommand("dependence", "Empirical and sparse residual correlation");

    SpatialOptions sp;
    auto* c_sp = app.add_subcommand("spatial", "Fit the nonstationary spatial model and shrinkage weight");
    c_sp->add_option("--stations", sp.stations, "Station CSV (overrides data.stations)");
    auto* c_int = app.add_subcommand("interpolate", "Krige the forecast onto a regular grid");
    c_int->add_option("--stations", sp.stations, "Station CSV (overrides data.stations)");

    ExposureCommandOptions ex;
    auto* c_ex = app.add_subcommand("exposure", "Exposed population per time step");
    c_ex->add_option("--districts", ex.districts, "District GeoJSON (overrides data.districts)");

    BenchmarkOptions bm;
    auto* c_bm = app.add_subcommand("benchmark", "Lorenz-96 method comparison");
    c_bm->add_flag("--uncertainty", bm.uncertainty, "Also report calibrated coverage");
    c_bm->add_option("--realizations", bm.realizations, "Override lorenz96.realizations");
    c_bm->add_option("--n-ens", bm.n_ens, "Override benchmark.n_ens");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_usage;
    }

    Context ctx;
    try {
        if (!config_path.empty())
            ctx.cfg = load_config(config_path);
        if (seed)
            ctx.cfg.seed = *seed;
        if (threads)
            ctx.cfg.threads = *threads;
        ctx.cfg.lorenz96.model.seed = ctx.cfg.seed;
        ctx.cfg.validate();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    }
    ctx.out_dir = out_dir;
    ctx.command = app.get_subcommands().front()->get_name();
    if (!config_path.empty())
        ctx.inputs.emplace_back(config_path);

    try {
        const ThreadLimit limit(ctx.cfg.threads);
        if (c_sim->parsed())
            run_simulate(ctx, sim);
        else if (c_val->parsed())
            run_validate(ctx, val);
        else if (c_cal->parsed())
            run_calibrate(ctx, cal);
        else if (c_fc->parsed())
            run_forecast(ctx, fc);
        else if (c_dep->parsed())
            run_dependence(ctx);
        else if (c_sp->parsed())
            run_spatial(ctx, sp);
        else if (c_int->parsed())
            run_interpolate(ctx, sp);
        else if (c_ex->parsed())
            run_exposure(ctx, ex);
        else if (c_bm->parsed())
            run_benchmark(ctx, bm);
        ctx.write_manifest();
    } catch (const std::exception& e) {
        std::cerr << "error: " << ctx.command << ": " << e.what() << '\n';
        return exit_runtime;
    }
    return 0;
}
