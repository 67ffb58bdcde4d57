#include "checks.hpp"

#include <gtest/gtest.h>

using namespace esncast::checks;

TEST(OracleSuite, AllWithinTolerance)
{
    for (const CheckResult& r : oracle_suite())
        EXPECT_TRUE(r.passed) << r.name << ": " << r.value << " > " << r.tolerance;
}

TEST(PropertySuite, EnsembleReproducibility)
{
    const CheckResult r = ensemble_bit_reproducibility(5);
    EXPECT_TRUE(r.passed) << r.detail;
}
