#include "checks.hpp"

#include <cstdio>

int main()
{
    int failed = 0;
    for (const auto& r : esncast::checks::property_suite()) {
        std::printf("%s  %s (%s)\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
        failed += r.passed ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
