#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "paratomo/config.hpp"

namespace paratomo {

/// Outcome of one named verification experiment.  Each experiment checks a
/// quantitative property of the transform machinery against tolerances fixed
/// in the driver itself; `notes` holds the measured numbers in printable form.
struct ExperimentResult {
    std::string name;
    bool pass = false;
    std::vector<std::string> notes;
};

/// Names accepted by run_named_experiment, in canonical order.
const std::vector<std::string>& experiment_names();

/// Runs a single experiment.  Grid sizes, step, seeds and solver settings come
/// from cfg; each driver fixes its own system rank and tolerances (the checks
/// are statements about specific configurations, not knobs).  Unknown name
/// throws ValidationError.
ExperimentResult run_named_experiment(const std::string& name, const ExperimentConfig& cfg);

/// Runs cfg.experiment, or every experiment when cfg.experiment is empty.
/// Prints one PASS/FAIL line per experiment to log (unless quiet, in which
/// case only the final summary), writes report.txt plus per-experiment CSV
/// artifacts into cfg.out_dir when it is nonempty.  Returns 0 when all pass,
/// 2 otherwise.
int run_experiment_main(const ExperimentConfig& cfg, std::ostream& log, bool quiet = false);

}  // namespace paratomo
