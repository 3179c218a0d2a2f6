#include <cstdio>
#include <string>

#include "hpbl/harness.hpp"
#include "hpbl/io.hpp"

// Runs acceptance criteria 1-14 and prints one PASS/FAIL line each. Optional argument: JSON summary path.
int main(int argc, char** argv) {
    hpbl::AcceptOptions opt;
    const auto results = hpbl::run_acceptance(opt, [](const hpbl::CriterionResult& r) {
        std::printf("%s\n", hpbl::criterion_line(r).c_str());
        std::fflush(stdout);
    });
    int failed = 0;
    for (const auto& r : results) failed += !r.pass;
    std::printf("%d of %zu criteria passed\n", static_cast<int>(results.size()) - failed, results.size());
    if (argc > 1) hpbl::write_text_file(argv[1], hpbl::acceptance_json(results).dump(2) + "\n");
    return failed ? 1 : 0;
}
