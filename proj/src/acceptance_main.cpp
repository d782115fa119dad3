#include <tori/selftest.hpp>

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

int main(int argc, char** argv) {
    std::vector<int> which;
    bool expect_documented = false;
    std::uint64_t seed = 20260822ull;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--criterion" && i + 1 < argc) {
            which.push_back(std::atoi(argv[++i]));
        } else if (arg == "--expect-documented") {
            expect_documented = true;
        } else if (arg == "--seed" && i + 1 < argc) {
            seed = std::strtoull(argv[++i], nullptr, 10);
        } else {
            std::fprintf(stderr,
                         "usage: acceptance [--criterion K]... [--expect-documented] "
                         "[--seed S]\n");
            return 2;
        }
    }
    try {
        return tori::selftest_main(which, expect_documented, seed);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
