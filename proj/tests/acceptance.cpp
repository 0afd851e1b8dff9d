// Runs the ten acceptance criteria and prints one line per criterion.
// Optional args: a list of ids; VCRYSTAL_ACCEPT_DIR sets the CSV output dir.
#include "vcrystal/checks.hpp"

#include <cstdio>
#include <cstdlib>
#include <string>

int main(int argc, char** argv)
{
    std::vector<int> ids;
    for (int i = 1; i < argc; ++i)
        ids.push_back(std::atoi(argv[i]));
    vcrystal::CheckOptions opt;
    if (const char* d = std::getenv("VCRYSTAL_ACCEPT_DIR"))
        opt.out_dir = d;

    const auto results = vcrystal::run_checks(ids, opt);
    int failed = 0;
    for (const auto& r : results) {
        std::printf("criterion %2d %s: %s | %s (%.1f s)\n", r.id, r.passed ? "PASS" : "FAIL",
                    r.name.c_str(), r.measured.c_str(), r.seconds);
        if (!r.passed) {
            ++failed;
            if (!r.detail.empty())
                std::printf("    %s\n", r.detail.c_str());
        }
        std::fflush(stdout);
    }
    std::printf("%zu criteria, %d failed\n", results.size(), failed);
    return failed == 0 ? 0 : 1;
}
