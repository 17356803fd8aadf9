// Acceptance suite: runs every criterion at its stated tolerance and prints
// one pass/fail line per criterion. Nonzero exit on any failure.

#include <cstdio>
#include <string>

#include "ewm/acceptance.hpp"

int main(int argc, char** argv) {
    ewm::acceptance::Options opt;
    for (int i = 1; i < argc; ++i) {
        std::string arg = argv[i];
        if (arg == "--inject-fault" && i + 1 < argc) opt.fault = argv[++i];
        if (arg == "--seed" && i + 1 < argc) opt.seed = std::stoull(argv[++i]);
    }

    int failures = 0;
    auto results = ewm::acceptance::run_all(opt, [&](const ewm::acceptance::CriterionResult& r) {
        std::printf("%s  criterion %2d: %s  [%.1fs]  %s\n", r.pass ? "PASS" : "FAIL", r.id,
                    r.name.c_str(), r.seconds, r.detail.c_str());
        std::fflush(stdout);
        if (!r.pass) ++failures;
    });
    std::printf("%d/%zu criteria passed\n", static_cast<int>(results.size()) - failures, results.size());
    return failures == 0 ? 0 : 1;
}
