#include "minsurf/cli_io.hpp"

#include <iostream>
#include <map>

// One PASS/FAIL line per acceptance criterion, preceded by the individual measurements.
int main() {
    const auto checks = minsurf::run_verification(minsurf::RunConfig{}, false);
    std::map<int, bool> verdict;
    for (const auto& c : checks) {
        std::cout << "  " << c.line() << "\n";
        auto [it, fresh] = verdict.emplace(c.criterion, c.pass);
        if (!fresh) it->second = it->second && c.pass;
    }
    bool all = true;
    for (int ac = 1; ac <= 9; ++ac) {
        const auto it = verdict.find(ac);
        const bool pass = it != verdict.end() && it->second;
        all = all && pass;
        std::cout << "AC" << ac << ": " << (pass ? "PASS" : "FAIL") << "\n";
    }
    return all ? 0 : 1;
}
