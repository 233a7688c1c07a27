// Acceptance driver: one line per criterion, nonzero exit if any fails.

#include <cstdio>
#include <cstdlib>
#include <string>

#include "czlab/acceptance.hpp"

int main(int argc, char** argv) {
    std::uint64_t seed = 20240601;  // same default as configs/acceptance.json
    if (argc > 1) seed = std::strtoull(argv[1], nullptr, 10);
    const auto results = czlab::acceptance::run_suite(seed);
    int failed = 0;
    for (const auto& r : results) {
        std::printf("[%s] %s %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
        failed += r.pass ? 0 : 1;
    }
    std::printf("%zu/%zu criteria passed\n", results.size() - failed, results.size());
    return failed ? 1 : 0;
}
