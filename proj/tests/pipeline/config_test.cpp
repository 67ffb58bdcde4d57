#include "esncast/pipeline/config.hpp"

#include <gtest/gtest.h>

#include <optional>
#include <sstream>

using namespace esncast;
using namespace esncast::pipeline;

namespace {

RunConfig parse(const std::string& text, const std::filesystem::path& base = {})
{
    std::istringstream in(text);
    return parse_config(in, base);
}

std::optional<Errc> parse_errc(const std::string& text)
{
    try {
        parse(text);
    } catch (const Error& e) {
        return e.code();
    }
    return std::nullopt;
}

}  // namespace

TEST(Config, EmptyFileGivesDefaults)
{
    const RunConfig c = parse("");
    EXPECT_EQ(c.seed, 1u);
    EXPECT_EQ(c.calibration.n_w, 20);
    EXPECT_EQ(c.calibration.n_f, 20);
    EXPECT_EQ(c.calibration.n_ens, 300);
    EXPECT_DOUBLE_EQ(c.reservoir.alpha, 0.0023);
    EXPECT_EQ(c.lorenz96.model.n_vars, 40);
    EXPECT_EQ(c.lorenz96.model.sample_every, 10);
    EXPECT_DOUBLE_EQ(c.exposure.threshold, 12.1);
    EXPECT_EQ(c.data.transform, Transform::none);
    ASSERT_EQ(c.dependence.lambda_grid.size(), 11u);
    EXPECT_NEAR(c.dependence.lambda_grid.back(), 0.2, 1e-12);
    EXPECT_EQ(c.validation.nu.size(), 19u);
    EXPECT_LT(c.validation.nu.back(), 1.0);
}

TEST(Config, OverridesAreApplied)
{
    const RunConfig c = parse("[run]\nseed = 42\nthreads = 2\n"
                              "[reservoir]\nn_h = 25\nactivation = identity\nbias = true\n"
                              "[calibration]\nn_w = 5\nlevels = 0.9,0.5\n"
                              "[data]\ntransform = log\n"
                              "[lorenz96]\nforcing = 8\n");
    EXPECT_EQ(c.seed, 42u);
    EXPECT_EQ(c.threads, 2);
    EXPECT_EQ(c.reservoir.n_h, 25);
    EXPECT_EQ(c.reservoir.activation, Activation::identity);
    EXPECT_TRUE(c.reservoir.include_bias);
    EXPECT_EQ(c.calibration.n_w, 5);
    EXPECT_EQ(c.calibration.levels, (std::vector<double>{0.9, 0.5}));
    EXPECT_EQ(c.data.transform, Transform::log);
    EXPECT_DOUBLE_EQ(c.lorenz96.model.forcing, 8.0);
    EXPECT_EQ(c.lorenz96.model.seed, 42u);
}

TEST(Config, RejectsBadInput)
{
    EXPECT_EQ(parse_errc("[reservoir]\nsize = 3\n"), Errc::parse_error);
    EXPECT_EQ(parse_errc("[nonsense]\nx = 1\n"), Errc::parse_error);
    EXPECT_EQ(parse_errc("seed = 3\n"), Errc::parse_error);
    EXPECT_EQ(parse_errc("[reservoir]\nn_h = 2.5\n"), Errc::parse_error);
    EXPECT_EQ(parse_errc("[reservoir]\nnu = abc\n"), Errc::parse_error);
    EXPECT_EQ(parse_errc("[reservoir]\nnu = 1.5\n"), Errc::parse_error);
    EXPECT_EQ(parse_errc("[reservoir]\nbias = maybe\n"), Errc::parse_error);
    EXPECT_EQ(parse_errc("[reservoir]\nactivation = sigmoid\n"), Errc::parse_error);
    EXPECT_EQ(parse_errc("[data]\ntransform = sqrt\n"), Errc::parse_error);
    EXPECT_EQ(parse_errc("[calibration]\nn_w = 1\n"), Errc::parse_error);
    EXPECT_EQ(parse_errc("[calibration]\nlevels = 0.5,1.0\n"), Errc::parse_error);
    EXPECT_EQ(parse_errc("[validation]\nsplit_fraction = 1\n"), Errc::parse_error);
    EXPECT_EQ(parse_errc("[spatial]\nbbox = 0,1,0\n"), Errc::parse_error);
    EXPECT_EQ(parse_errc("[exposure]\nthreshold = 0\n"), Errc::parse_error);
    EXPECT_EQ(parse_errc("[benchmark]\ntrain = 990\ntest = 20\n"), Errc::parse_error);
    EXPECT_EQ(parse_errc("[dependence]\nlambda_grid = 0:-1:1\n"), Errc::parse_error);
}

TEST(Config, GridSyntax)
{
    EXPECT_EQ(parse_grid("1, 2,3"), (std::vector<double>{1, 2, 3}));
    EXPECT_TRUE(parse_grid("  ").empty());
    const auto r = parse_grid("0:0.05:0.2");
    ASSERT_EQ(r.size(), 5u);
    EXPECT_NEAR(r[3], 0.15, 1e-15);
    EXPECT_NEAR(r[4], 0.2, 1e-15);
    EXPECT_EQ(parse_grid("0:0.3:1").size(), 4u);
    EXPECT_EQ(parse_grid(format_grid({0.1, 2.5, 1e-4})), (std::vector<double>{0.1, 2.5, 1e-4}));
    EXPECT_THROW(parse_grid("1:2"), Error);
    EXPECT_THROW(parse_grid("1,x"), Error);
}

TEST(Config, EmptyValidationGridIsRejected)
{
    EXPECT_EQ(parse_errc("[validation]\nm =\n"), Errc::parse_error);
    RunConfig c;
    c.validation.m.clear();
    EXPECT_THROW(c.validate(), Error);
}

TEST(Config, RelativePathsResolveAgainstBase)
{
    const RunConfig c = parse("[data]\nseries = in/s.csv\nstations = /abs/st.csv\n", "/work/cfg");
    EXPECT_EQ(c.data.series, std::filesystem::path("/work/cfg/in/s.csv"));
    EXPECT_EQ(c.data.stations, std::filesystem::path("/abs/st.csv"));
    EXPECT_TRUE(c.data.districts.empty());
}

TEST(Config, DumpRoundTripsWithStableHash)
{
    RunConfig c = parse("[run]\nseed = 7\n[reservoir]\nnu = 0.35\n[validation]\nalpha = 0.001,0.5,1\n"
                        "[spatial]\nbbox = 0,2,0,1\n[benchmark]\narfima_d_grid = 0:0.1:0.4\n");
    const std::string text = dump_config(c);
    const RunConfig back = parse(text);
    EXPECT_EQ(dump_config(back), text);
    EXPECT_EQ(config_hash(back), config_hash(c));
    EXPECT_EQ(config_hash(c).size(), 16u);
    EXPECT_EQ(back.reservoir, c.reservoir);

    RunConfig other = c;
    other.seed = 8;
    EXPECT_NE(config_hash(other), config_hash(c));
}

TEST(Config, ValidationGridIsTheCrossProduct)
{
    const RunConfig c = parse("[reservoir]\npi_w = 0.2\n[validation]\nn_h = 10,20\nm = 2\nnu = 0.1,0.2,0.3\n"
                              "lambda_r = 0.01\nalpha = 0.5,1\n");
    const auto grid = c.validation_grid();
    ASSERT_EQ(grid.size(), 12u);
    EXPECT_EQ(grid.front().n_h, 10);
    EXPECT_DOUBLE_EQ(grid.front().nu, 0.1);
    EXPECT_DOUBLE_EQ(grid.front().alpha, 0.5);
    EXPECT_EQ(grid.back().n_h, 20);
    EXPECT_DOUBLE_EQ(grid.back().nu, 0.3);
    EXPECT_DOUBLE_EQ(grid.back().alpha, 1.0);
    for (const auto& hp : grid) {
        EXPECT_DOUBLE_EQ(hp.pi_w, 0.2);
        EXPECT_EQ(hp.m, 2);
    }
}

TEST(Config, LoadConfigReportsMissingFile)
{
    try {
        load_config("/nonexistent/run.ini");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::io_error);
    }
}
