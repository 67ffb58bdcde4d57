#pragma once

// Run configuration: an INI file of sections and keys, defaults filled in for
// everything that is absent.

#include "esncast/baselines.hpp"
#include "esncast/lorenz96.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace esncast::pipeline {

enum class Transform { none, log };

struct DataSection {
    std::filesystem::path series;
    std::filesystem::path stations;
    std::filesystem::path districts;
    Transform transform = Transform::none;
};

struct ValidationSection {
    std::vector<double> n_h;
    std::vector<double> m;
    std::vector<double> nu;
    std::vector<double> lambda_r;
    std::vector<double> alpha;
    double split_fraction = 0.8; ///< share of the training rows used to fit
    Index n_f = 20;
    Index n_ens = 300;
};

struct CalibrationSection {
    Index origin = 0; ///< 0 = training rows - n_w * n_f
    Index n_w = 20;
    Index n_f = 20;
    Index n_ens = 300;
    std::vector<double> levels{0.95, 0.80, 0.60};
};

struct DependenceSection {
    std::vector<double> lambda_grid;
    double lambda = 0.1;
};

struct SpatialSection {
    Index knots_x = 2;
    Index knots_y = 3;
    Index grid_nx = 40;
    Index grid_ny = 40;
    std::vector<double> bbox; ///< x0, x1, y0, y1; empty = station bounding box
    double nugget_max = 0.95;
    double delta_step = 0.05;
};

struct ExposureSection {
    double threshold = 12.1;
    Index draws = 2000;
    double level = 0.95;
};

struct LorenzSection {
    lorenz96::Config model;
    Index points = 1000;
    Index realizations = 10;
};

struct BenchmarkSection {
    Index train = 980;
    Index test = 20;
    Index n_ens = 300;
    double alpha_hat = 0.0023;
    ArfimaOptions arfima;
};

struct RunConfig {
    std::uint64_t seed = 1;
    int threads = 0;
    DataSection data;
    HyperParams reservoir;
    ValidationSection validation;
    CalibrationSection calibration;
    DependenceSection dependence;
    SpatialSection spatial;
    ExposureSection exposure;
    LorenzSection lorenz96;
    BenchmarkSection benchmark;

    RunConfig();

    /// Throws Error(parse_error) for inconsistent settings.
    void validate() const;

    /// Reservoir settings crossed with every validation grid value.
    std::vector<HyperParams> validation_grid() const;
};

/// Relative data paths are resolved against the directory of the file.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {});

/// Canonical INI text holding every effective setting.
std::string dump_config(const RunConfig& cfg);

/// 64-bit FNV-1a of the canonical text, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

/// Parses "a,b,c" or "start:step:stop" (inclusive, rounded to the step).
std::vector<double> parse_grid(const std::string& text);
std::string format_grid(const std::vector<double>& values);

}  // namespace esncast::pipeline
