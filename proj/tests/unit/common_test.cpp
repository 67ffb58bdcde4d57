#include "test_util.hpp"

#include <atomic>
#include <set>
#include <vector>

using namespace esncast;

TEST(DeriveSeed, DeterministicAndDistinct)
{
    EXPECT_EQ(derive_seed(7, 3), derive_seed(7, 3));
    std::set<std::uint64_t> seen;
    for (std::uint64_t base : {0ULL, 1ULL, 2ULL})
        for (std::uint64_t i = 0; i < 500; ++i)
            seen.insert(derive_seed(base, i));
    EXPECT_EQ(seen.size(), 1500U);
}

TEST(Error, CarriesCodeAndMessage)
{
    const Error e(Errc::zero_sigma, "bad sd");
    EXPECT_EQ(e.code(), Errc::zero_sigma);
    EXPECT_NE(std::string(e.what()).find("bad sd"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find(to_string(Errc::zero_sigma)), std::string::npos);
}

TEST(ParallelFor, VisitsEveryIndexOnce)
{
    std::vector<int> hits(1000, 0);
    parallel_for(1000, [&](Index i) { ++hits[static_cast<std::size_t>(i)]; });
    for (int h : hits)
        EXPECT_EQ(h, 1);
    parallel_for(0, [&](Index) { ADD_FAILURE(); });
}

TEST(ThreadLimit, NestsAndRestores)
{
    std::atomic<int> count{0};
    {
        const ThreadLimit one(1);
        {
            const ThreadLimit two(2);
            parallel_for(50, [&](Index) { ++count; });
        }
        parallel_for(50, [&](Index) { ++count; });
    }
    parallel_for(50, [&](Index) { ++count; });
    EXPECT_EQ(count.load(), 150);
}
