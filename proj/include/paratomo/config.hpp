#pragma once

#include <cstdint>
#include <string>

#include "paratomo/grid_field.hpp"
#include "paratomo/metric.hpp"
#include "paratomo/pair.hpp"

namespace paratomo {

/// One experiment run, fully determined by this struct (same config, same
/// bits out).  Parsed from sectioned key = value text; every scale knob is
/// the target of a measured smoothness norm, not a bare coefficient.
struct ExperimentConfig {
    // [metric]
    std::string metric_kind = "euclidean";  // euclidean | conformal | general
    double metric_amplitude = 0.15;         // C^4 size of the deviation from flat
    std::uint64_t metric_seed = 101;

    // [pair]
    int rank = 1;
    double pair_scale = 0.15;  // C^3 target of the attenuation pair
    std::uint64_t pair_seed = 202;
    double pair_b_scale = 0.0;  // second pair; 0 leaves it out
    std::uint64_t pair_b_seed = 303;

    // [grid]
    int n_r = 64, n_theta = 64;
    int n_beta = 64, n_alpha = 64;
    int n_dir = 64;

    // [solver]
    double step = 1.0 / 256.0;
    double tol = 1e-3;
    int max_iter = 100;

    // [run]
    std::string experiment;
    std::string out_dir = ".";
    std::uint64_t seed = 404;

    bool operator==(const ExperimentConfig&) const = default;
};

/// Parse sectioned key = value text ('#' and ';' comments).  metric.kind is
/// mandatory; unknown sections or keys are rejected by name; malformed lines
/// raise ParseError with the line number.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config(const std::string& path);

/// Canonical emission; parse(emit(c)) == c.
std::string emit_config(const ExperimentConfig& cfg);

/// Seeded problem instance: metric, pair(s) and a trial field, with the
/// smoothness norms measured on the generated objects.
struct PhantomSet {
    MetricField metric;
    PairPtr pair_a;
    PairPtr pair_b;  // null when pair_b_scale == 0
    PairField h;     // rank components on the core grid
    double pair_c3 = 0.0;
    double pair_b_c3 = 0.0;
    double metric_c4 = 0.0;  // deviation from the flat metric
};

PhantomSet phantom_gen(const ExperimentConfig& cfg);

}  // namespace paratomo
