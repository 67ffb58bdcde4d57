#pragma once

// Pipeline stages. Each reads earlier artifacts from the output directory,
// writes its own and records a manifest_<stage>.json.

#include "esncast/io.hpp"
#include "esncast/pipeline/config.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace esncast::pipeline {

struct Context {
    RunConfig cfg;
    std::filesystem::path out_dir = ".";
    std::string command;
    std::vector<std::filesystem::path> inputs;
    std::vector<std::filesystem::path> outputs;

    std::filesystem::path output(const std::string& name);
    std::filesystem::path input(const std::filesystem::path& p);
    std::filesystem::path artifact(const std::string& name); ///< earlier-stage file in out_dir

    /// Writes manifest_<command>.json with seed, config hash, versions and files.
    void write_manifest() const;
};

/// Reads the series (override or config path), applying the configured transform.
io::Series load_series(Context& ctx, const std::filesystem::path& override_path = {});

struct SimulateOptions {
    std::optional<Index> realizations;
    std::optional<Index> points;
};
void run_simulate(Context& ctx, const SimulateOptions& o);

struct SeriesOptions {
    std::filesystem::path series;
    Index holdout = 0;
    bool use_validation = false; ///< take hyper-parameters from validation.json
};
void run_validate(Context& ctx, const SeriesOptions& o);
void run_calibrate(Context& ctx, const SeriesOptions& o);

struct ForecastOptions {
    SeriesOptions series;
    Index horizon = 0; ///< 0 = calibration.n_f
    bool with_intervals = false;
    bool members = false;
};
void run_forecast(Context& ctx, const ForecastOptions& o);

void run_dependence(Context& ctx);

struct SpatialOptions {
    std::filesystem::path stations;
};
void run_spatial(Context& ctx, const SpatialOptions& o);
void run_interpolate(Context& ctx, const SpatialOptions& o);

struct ExposureCommandOptions {
    std::filesystem::path districts;
};
void run_exposure(Context& ctx, const ExposureCommandOptions& o);

struct BenchmarkOptions {
    bool uncertainty = false;
    std::optional<Index> realizations;
    std::optional<Index> n_ens;
};
void run_benchmark(Context& ctx, const BenchmarkOptions& o);

/// Matrix CSV with a header `element,<names>` and one named row per line.
void write_matrix(const std::filesystem::path& path, const std::vector<std::string>& names, const Matrix& m);
Matrix read_matrix(const std::filesystem::path& path, std::vector<std::string>* names = nullptr);

}  // namespace esncast::pipeline
