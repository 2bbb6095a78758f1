// Runs the full acceptance matrix and prints one line per criterion.
// Exit status is nonzero when any criterion fails.

#include <cstdio>
#include <cstdlib>
#include <cstring>

#include "levyruin/validation.hpp"

int main(int argc, char** argv) {
    levyruin::ValidationOptions opts;
    for (int i = 1; i < argc; ++i) {
        if (!std::strcmp(argv[i], "--seed") && i + 1 < argc) opts.seed = std::strtoull(argv[++i], nullptr, 10);
        else if (!std::strcmp(argv[i], "--threads") && i + 1 < argc) opts.threads = std::atoi(argv[++i]);
        else if (!std::strcmp(argv[i], "--inject-fault")) opts.inject_fault = true;
    }
    int failed = 0;
    levyruin::run_validation(opts, {}, [&](const levyruin::CriterionResult& r) {
        failed += !r.pass;
        std::printf("%s  [%.1fs]\n", levyruin::format_result(r).c_str(), r.seconds);
        std::fflush(stdout);
    });
    std::printf("%d/%d criteria passed\n", levyruin::kCriterionCount - failed, levyruin::kCriterionCount);
    return failed == 0 ? 0 : 1;
}
