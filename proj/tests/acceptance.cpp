// Runs every registry entry and prints one line per acceptance criterion.
// Failing checks are listed on stderr. Exit status is the number of failures.

#include "warpflow/registry.hpp"

#include <fmt/format.h>

#include <cstdio>
#include <optional>
#include <string>

using namespace warpflow;

int main(int argc, char** argv) {
    std::optional<std::filesystem::path> out;
    std::optional<std::string> only;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--out" && i + 1 < argc)
            out = argv[++i];
        else
            only = a;
    }
    int failed = 0;
    for (const auto& e : registry()) {
        if (only && e.name != *only) continue;
        const Verdict v = run_entry(e, out);
        std::string first_bad;
        for (const auto& c : v.checks)
            if (!c.ok && first_bad.empty()) first_bad = c.what;
        fmt::print("[{}] criterion {:2d} {:<28} {:8.2f} s{}\n", v.passed ? "PASS" : "FAIL", v.criterion, v.name,
                   v.seconds, v.passed ? "" : "  " + first_bad);
        std::fflush(stdout);
        if (!v.passed) {
            ++failed;
            for (const auto& c : v.checks)
                if (!c.ok) fmt::print(stderr, "    {}: {}\n", v.name, c.what);
        }
    }
    return failed;
}
