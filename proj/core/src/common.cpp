#include "esncast/common.hpp"

#include <oneapi/tbb/global_control.h>
#include <oneapi/tbb/parallel_for.h>

namespace esncast {

std::string_view to_string(Errc code) noexcept
{
    switch (code) {
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::degenerate_reservoir: return "DegenerateReservoir";
    case Errc::non_finite_state: return "NonFiniteState";
    case Errc::singular_system: return "SingularSystem";
    case Errc::insufficient_history: return "InsufficientHistory";
    case Errc::non_finite_forecast: return "NonFiniteForecast";
    case Errc::empty_grid: return "EmptyGrid";
    case Errc::shape_mismatch: return "ShapeMismatch";
    case Errc::empty_ensemble: return "EmptyEnsemble";
    case Errc::insufficient_data: return "InsufficientData";
    case Errc::too_few_windows: return "TooFewWindows";
    case Errc::zero_sigma: return "ZeroSigma";
    case Errc::bad_level: return "BadLevel";
    case Errc::zero_variance: return "ZeroVariance";
    case Errc::index_out_of_range: return "IndexOutOfRange";
    case Errc::insufficient_local_data: return "InsufficientLocalData";
    case Errc::singular_kriging_system: return "SingularKrigingSystem";
    case Errc::diverged: return "Diverged";
    case Errc::non_stationary_fit: return "NonStationaryFit";
    case Errc::optimizer_failed: return "OptimizerFailed";
    case Errc::empty_district: return "EmptyDistrict";
    case Errc::bad_threshold: return "BadThreshold";
    case Errc::io_error: return "IoError";
    case Errc::parse_error: return "ParseError";
    }
    return "Unknown";
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept
{
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return mix(mix(base) ^ (index * 0xd1b54a32d192ed03ULL + 1));
}

void parallel_for(Index n, const std::function<void(Index)>& body)
{
    if (n <= 0)
        return;
    if (n == 1) {
        body(0);
        return;
    }
    tbb::parallel_for(Index{0}, n, [&](Index i) { body(i); });
}

struct ThreadLimit::Impl {
    std::unique_ptr<tbb::global_control> control;
};

ThreadLimit::ThreadLimit(int threads) : impl_(std::make_unique<Impl>())
{
    if (threads > 0)
        impl_->control = std::make_unique<tbb::global_control>(
            tbb::global_control::max_allowed_parallelism, static_cast<std::size_t>(threads));
}

ThreadLimit::~ThreadLimit() = default;

}  // namespace esncast
