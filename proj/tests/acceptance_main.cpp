// Acceptance gate: runs every verification experiment at the default
// measurement configuration (64x64 grid and fan, step 1/256, curved
// conformal background) and prints one PASS/FAIL line per criterion.
// Tolerances live inside the drivers; nothing here is tunable.

#include <chrono>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "paratomo/experiments.hpp"

int main() {
    paratomo::ExperimentConfig cfg;
    cfg.metric_kind = "conformal";
    cfg.metric_amplitude = 0.15;
    cfg.out_dir.clear();  // the gate writes no artifacts

    bool all = true;
    int idx = 0;
    for (const std::string& name : paratomo::experiment_names()) {
        ++idx;
        const auto t0 = std::chrono::steady_clock::now();
        bool pass = false;
        std::vector<std::string> notes;
        try {
            const paratomo::ExperimentResult r = paratomo::run_named_experiment(name, cfg);
            pass = r.pass;
            notes = r.notes;
        } catch (const std::exception& e) {
            notes.push_back(std::string("aborted: ") + e.what());
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s criterion %02d %s (%.1fs)\n", pass ? "PASS" : "FAIL", idx, name.c_str(),
                    secs);
        for (const std::string& n : notes) std::printf("        %s\n", n.c_str());
        std::fflush(stdout);
        all = all && pass;
    }
    std::printf(all ? "acceptance: all criteria passed\n" : "acceptance: FAILURES above\n");
    return all ? 0 : 1;
}
