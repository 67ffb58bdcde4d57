#include "esncast/pipeline/config.hpp"

#include "esncast/io.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace esncast::pipeline {

namespace pt = boost::property_tree;

namespace {

std::vector<double> range(double start, double step, double stop)
{
    std::vector<double> out;
    const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9));
    for (long k = 0; k <= n; ++k)
        out.push_back(std::round((start + static_cast<double>(k) * step) / step) * step);
    return out;
}

}  // namespace

std::vector<double> parse_grid(const std::string& text)
{
    std::vector<double> out;
    if (text.find_first_not_of(" \t") == std::string::npos)
        return out;
    if (text.find(':') != std::string::npos) {
        std::vector<double> parts;
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ':'))
            parts.push_back(io::parse_double(io::split_csv_line(item).front(), "grid '" + text + "'"));
        if (parts.size() != 3 || !(parts[1] > 0.0) || parts[2] < parts[0])
            throw Error(Errc::parse_error, "grid '" + text + "' must be start:step:stop with a positive step");
        return range(parts[0], parts[1], parts[2]);
    }
    for (const std::string& cell : io::split_csv_line(text))
        out.push_back(io::parse_double(cell, "grid '" + text + "'"));
    return out;
}

std::string format_grid(const std::vector<double>& values)
{
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i)
            out += ',';
        out += io::format_double(values[i]);
    }
    return out;
}

RunConfig::RunConfig()
{
    reservoir.alpha = benchmark.alpha_hat;
    for (int s = 0; s <= 5; ++s)
        validation.n_h.push_back(30.0 + 30.0 * s);
    validation.m = {2, 3, 4, 5, 6};
    // nu = 1 is excluded: the update needs a spectral radius below one.
    for (int s = 1; s <= 19; ++s)
        validation.nu.push_back(0.05 * s);
    validation.lambda_r = {0.001, 0.005, 0.01};
    for (int s = 1; s <= 100; ++s)
        validation.alpha.push_back(1e-4 * s);
    for (int s = 2; s <= 100; ++s)
        validation.alpha.push_back(1e-2 * s);
    dependence.lambda_grid = range(0.0, 0.02, 0.2);
}

void RunConfig::validate() const
{
    auto fail = [](const std::string& msg) { throw Error(Errc::parse_error, msg); };
    try {
        reservoir.validate();
        lorenz96.model.validate();
    } catch (const Error& e) {
        fail(e.what());
    }
    for (const auto* g : {&validation.n_h, &validation.m, &validation.nu, &validation.lambda_r, &validation.alpha})
        if (g->empty())
            fail("validation grids must be non-empty");
    if (dependence.lambda_grid.empty())
        fail("dependence.lambda_grid must be non-empty");
    if (!(validation.split_fraction > 0.0 && validation.split_fraction < 1.0))
        fail("validation.split_fraction must lie in (0, 1)");
    if (calibration.n_w < 2 || calibration.n_f < 1 || calibration.n_ens < 1 || calibration.origin < 0)
        fail("calibration needs n_w >= 2, n_f >= 1, n_ens >= 1 and origin >= 0");
    for (double l : calibration.levels)
        if (!(l > 0.0 && l < 1.0))
            fail("calibration levels must lie in (0, 1)");
    if (spatial.knots_x < 1 || spatial.knots_y < 1 || spatial.grid_nx < 1 || spatial.grid_ny < 1)
        fail("spatial knot and grid counts must be positive");
    if (!spatial.bbox.empty() && spatial.bbox.size() != 4)
        fail("spatial.bbox must hold x0,x1,y0,y1");
    if (!(spatial.nugget_max > 0.0 && spatial.nugget_max < 1.0))
        fail("spatial.nugget_max must lie in (0, 1)");
    if (!(exposure.threshold > 0.0) || exposure.draws < 1 || !(exposure.level > 0.0 && exposure.level < 1.0))
        fail("exposure needs a positive threshold, draws >= 1 and a level in (0, 1)");
    if (lorenz96.points < 2 || lorenz96.realizations < 1)
        fail("lorenz96 needs points >= 2 and realizations >= 1");
    if (benchmark.train < 50 || benchmark.test < 1 || benchmark.n_ens < 1)
        fail("benchmark needs train >= 50, test >= 1 and n_ens >= 1");
    if (benchmark.train + benchmark.test > lorenz96.points)
        fail("benchmark.train + benchmark.test exceeds lorenz96.points");
}

std::vector<HyperParams> RunConfig::validation_grid() const
{
    std::vector<HyperParams> grid;
    for (double n_h : validation.n_h)
        for (double m : validation.m)
            for (double nu : validation.nu)
                for (double lam : validation.lambda_r)
                    for (double alpha : validation.alpha) {
                        HyperParams hp = reservoir;
                        hp.n_h = static_cast<Index>(std::lround(n_h));
                        hp.m = static_cast<Index>(std::lround(m));
                        hp.nu = nu;
                        hp.lambda_r = lam;
                        hp.alpha = alpha;
                        grid.push_back(hp);
                    }
    return grid;
}

namespace {

const std::set<std::string>& known_keys()
{
    static const std::set<std::string> keys{
        "run.seed", "run.threads",
        "data.series", "data.stations", "data.districts", "data.transform",
        "reservoir.n_h", "reservoir.m", "reservoir.tau", "reservoir.nu", "reservoir.lambda_r",
        "reservoir.alpha", "reservoir.pi_w", "reservoir.pi_win", "reservoir.activation",
        "reservoir.bias", "reservoir.washout",
        "validation.n_h", "validation.m", "validation.nu", "validation.lambda_r", "validation.alpha",
        "validation.split_fraction", "validation.n_f", "validation.n_ens",
        "calibration.origin", "calibration.n_w", "calibration.n_f", "calibration.n_ens",
        "calibration.levels",
        "dependence.lambda_grid", "dependence.lambda",
        "spatial.knots_x", "spatial.knots_y", "spatial.grid_nx", "spatial.grid_ny", "spatial.bbox",
        "spatial.nugget_max", "spatial.delta_step",
        "exposure.threshold", "exposure.draws", "exposure.level",
        "lorenz96.n_vars", "lorenz96.forcing", "lorenz96.dt", "lorenz96.sample_every",
        "lorenz96.spinup", "lorenz96.initial_sd", "lorenz96.points", "lorenz96.realizations",
        "benchmark.train", "benchmark.test", "benchmark.n_ens", "benchmark.alpha_hat",
        "benchmark.arfima_max_p", "benchmark.arfima_max_q", "benchmark.arfima_d_grid",
    };
    return keys;
}

class Reader {
public:
    explicit Reader(const pt::ptree& tree) : tree_(tree) {}

    template <class T>
    void get(const std::string& key, T& out) const
    {
        const auto v = tree_.get_optional<std::string>(key);
        if (!v)
            return;
        const std::string& text = *v;
        if constexpr (std::is_same_v<T, std::string>) {
            out = text;
        } else if constexpr (std::is_same_v<T, bool>) {
            if (text == "true" || text == "1" || text == "yes")
                out = true;
            else if (text == "false" || text == "0" || text == "no")
                out = false;
            else
                throw Error(Errc::parse_error, key + ": expected a boolean, got '" + text + "'");
        } else if constexpr (std::is_floating_point_v<T>) {
            out = io::parse_double(text, key);
        } else {
            const double d = io::parse_double(text, key);
            if (d != std::floor(d))
                throw Error(Errc::parse_error, key + ": expected an integer, got '" + text + "'");
            out = static_cast<T>(d);
        }
    }

    void grid(const std::string& key, std::vector<double>& out) const
    {
        if (const auto v = tree_.get_optional<std::string>(key))
            out = parse_grid(*v);
    }

    void path(const std::string& key, std::filesystem::path& out, const std::filesystem::path& base) const
    {
        std::string text;
        get(key, text);
        if (text.empty())
            return;
        out = std::filesystem::path(text);
        if (out.is_relative() && !base.empty())
            out = base / out;
    }

private:
    const pt::ptree& tree_;
};

}  // namespace

RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir)
{
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw Error(Errc::parse_error, std::string("config: ") + e.what());
    }
    for (const auto& [section, body] : tree) {
        if (body.empty())
            throw Error(Errc::parse_error, "config: key '" + section + "' must sit inside a section");
        for (const auto& [key, value] : body)
            if (!known_keys().count(section + "." + key))
                throw Error(Errc::parse_error, "config: unknown key " + section + "." + key);
    }

    RunConfig c;
    const Reader r(tree);
    r.get("run.seed", c.seed);
    r.get("run.threads", c.threads);

    r.path("data.series", c.data.series, base_dir);
    r.path("data.stations", c.data.stations, base_dir);
    r.path("data.districts", c.data.districts, base_dir);
    std::string transform = "none";
    r.get("data.transform", transform);
    if (transform == "log")
        c.data.transform = Transform::log;
    else if (transform != "none")
        throw Error(Errc::parse_error, "data.transform must be none or log");

    HyperParams& hp = c.reservoir;
    r.get("reservoir.n_h", hp.n_h);
    r.get("reservoir.m", hp.m);
    r.get("reservoir.tau", hp.tau);
    r.get("reservoir.nu", hp.nu);
    r.get("reservoir.lambda_r", hp.lambda_r);
    r.get("reservoir.alpha", hp.alpha);
    r.get("reservoir.pi_w", hp.pi_w);
    r.get("reservoir.pi_win", hp.pi_win);
    r.get("reservoir.bias", hp.include_bias);
    r.get("reservoir.washout", hp.washout);
    std::string act(to_string(hp.activation));
    r.get("reservoir.activation", act);
    try {
        hp.activation = parse_activation(act);
    } catch (const Error& e) {
        throw Error(Errc::parse_error, e.what());
    }

    r.grid("validation.n_h", c.validation.n_h);
    r.grid("validation.m", c.validation.m);
    r.grid("validation.nu", c.validation.nu);
    r.grid("validation.lambda_r", c.validation.lambda_r);
    r.grid("validation.alpha", c.validation.alpha);
    r.get("validation.split_fraction", c.validation.split_fraction);
    r.get("validation.n_f", c.validation.n_f);
    r.get("validation.n_ens", c.validation.n_ens);

    r.get("calibration.origin", c.calibration.origin);
    r.get("calibration.n_w", c.calibration.n_w);
    r.get("calibration.n_f", c.calibration.n_f);
    r.get("calibration.n_ens", c.calibration.n_ens);
    r.grid("calibration.levels", c.calibration.levels);

    r.grid("dependence.lambda_grid", c.dependence.lambda_grid);
    r.get("dependence.lambda", c.dependence.lambda);

    r.get("spatial.knots_x", c.spatial.knots_x);
    r.get("spatial.knots_y", c.spatial.knots_y);
    r.get("spatial.grid_nx", c.spatial.grid_nx);
    r.get("spatial.grid_ny", c.spatial.grid_ny);
    r.grid("spatial.bbox", c.spatial.bbox);
    r.get("spatial.nugget_max", c.spatial.nugget_max);
    r.get("spatial.delta_step", c.spatial.delta_step);

    r.get("exposure.threshold", c.exposure.threshold);
    r.get("exposure.draws", c.exposure.draws);
    r.get("exposure.level", c.exposure.level);

    lorenz96::Config& lz = c.lorenz96.model;
    r.get("lorenz96.n_vars", lz.n_vars);
    r.get("lorenz96.forcing", lz.forcing);
    r.get("lorenz96.dt", lz.dt);
    r.get("lorenz96.sample_every", lz.sample_every);
    r.get("lorenz96.spinup", lz.spinup);
    r.get("lorenz96.initial_sd", lz.initial_sd);
    r.get("lorenz96.points", c.lorenz96.points);
    r.get("lorenz96.realizations", c.lorenz96.realizations);

    r.get("benchmark.train", c.benchmark.train);
    r.get("benchmark.test", c.benchmark.test);
    r.get("benchmark.n_ens", c.benchmark.n_ens);
    r.get("benchmark.alpha_hat", c.benchmark.alpha_hat);
    r.get("benchmark.arfima_max_p", c.benchmark.arfima.max_p);
    r.get("benchmark.arfima_max_q", c.benchmark.arfima.max_q);
    r.grid("benchmark.arfima_d_grid", c.benchmark.arfima.d_grid);

    c.lorenz96.model.seed = c.seed;
    c.validate();
    return c;
}

RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(Errc::io_error, "cannot open config " + path.string());
    return parse_config(in, path.parent_path());
}

std::string dump_config(const RunConfig& c)
{
    auto num = [](double v) { return io::format_double(v); };
    auto integer = [](Index v) { return std::to_string(v); };
    std::ostringstream out;
    out << "[run]\nseed = " << c.seed << "\nthreads = " << c.threads << "\n\n";
    out << "[data]\nseries = " << c.data.series.string() << "\nstations = " << c.data.stations.string()
        << "\ndistricts = " << c.data.districts.string()
        << "\ntransform = " << (c.data.transform == Transform::log ? "log" : "none") << "\n\n";
    const HyperParams& hp = c.reservoir;
    out << "[reservoir]\nn_h = " << integer(hp.n_h) << "\nm = " << integer(hp.m) << "\ntau = " << integer(hp.tau)
        << "\nnu = " << num(hp.nu) << "\nlambda_r = " << num(hp.lambda_r) << "\nalpha = " << num(hp.alpha)
        << "\npi_w = " << num(hp.pi_w) << "\npi_win = " << num(hp.pi_win)
        << "\nactivation = " << to_string(hp.activation) << "\nbias = " << (hp.include_bias ? "true" : "false")
        << "\nwashout = " << integer(hp.washout) << "\n\n";
    out << "[validation]\nn_h = " << format_grid(c.validation.n_h) << "\nm = " << format_grid(c.validation.m)
        << "\nnu = " << format_grid(c.validation.nu) << "\nlambda_r = " << format_grid(c.validation.lambda_r)
        << "\nalpha = " << format_grid(c.validation.alpha)
        << "\nsplit_fraction = " << num(c.validation.split_fraction) << "\nn_f = " << integer(c.validation.n_f)
        << "\nn_ens = " << integer(c.validation.n_ens) << "\n\n";
    out << "[calibration]\norigin = " << integer(c.calibration.origin) << "\nn_w = " << integer(c.calibration.n_w)
        << "\nn_f = " << integer(c.calibration.n_f) << "\nn_ens = " << integer(c.calibration.n_ens)
        << "\nlevels = " << format_grid(c.calibration.levels) << "\n\n";
    out << "[dependence]\nlambda_grid = " << format_grid(c.dependence.lambda_grid)
        << "\nlambda = " << num(c.dependence.lambda) << "\n\n";
    out << "[spatial]\nknots_x = " << integer(c.spatial.knots_x) << "\nknots_y = " << integer(c.spatial.knots_y)
        << "\ngrid_nx = " << integer(c.spatial.grid_nx) << "\ngrid_ny = " << integer(c.spatial.grid_ny)
        << "\nbbox = " << format_grid(c.spatial.bbox) << "\nnugget_max = " << num(c.spatial.nugget_max)
        << "\ndelta_step = " << num(c.spatial.delta_step) << "\n\n";
    out << "[exposure]\nthreshold = " << num(c.exposure.threshold) << "\ndraws = " << integer(c.exposure.draws)
        << "\nlevel = " << num(c.exposure.level) << "\n\n";
    const lorenz96::Config& lz = c.lorenz96.model;
    out << "[lorenz96]\nn_vars = " << integer(lz.n_vars) << "\nforcing = " << num(lz.forcing)
        << "\ndt = " << num(lz.dt) << "\nsample_every = " << integer(lz.sample_every)
        << "\nspinup = " << integer(lz.spinup) << "\ninitial_sd = " << num(lz.initial_sd)
        << "\npoints = " << integer(c.lorenz96.points) << "\nrealizations = " << integer(c.lorenz96.realizations)
        << "\n\n";
    out << "[benchmark]\ntrain = " << integer(c.benchmark.train) << "\ntest = " << integer(c.benchmark.test)
        << "\nn_ens = " << integer(c.benchmark.n_ens) << "\nalpha_hat = " << num(c.benchmark.alpha_hat)
        << "\narfima_max_p = " << c.benchmark.arfima.max_p << "\narfima_max_q = " << c.benchmark.arfima.max_q
        << "\narfima_d_grid = " << format_grid(c.benchmark.arfima.d_grid) << "\n";
    return out.str();
}

std::string config_hash(const RunConfig& cfg)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : dump_config(cfg)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << h;
    return out.str();
}

}  // namespace esncast::pipeline
