#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "paratomo/metric.hpp"
#include "paratomo/types.hpp"

namespace paratomo {

/// Fan-beam grid on the inward boundary sphere bundle of a disk.  Nodes are
/// (beta_i, alpha_j): beta is the boundary angle measured counterclockwise
/// from the positive x axis, alpha the direction angle measured from the
/// inward normal toward increasing beta, with |alpha| < pi/2.  beta is
/// uniform starting at 0; alpha uses midpoints so the tangential endpoints are
/// never sampled.  Each node carries the boundary measure weight
/// mu = cos(alpha) * (boundary length density) * dbeta * dalpha; quadratures
/// over the data space additionally drop a fixed near-tangential band.
struct FanBeamGrid {
    Domain domain = Domain::M;
    double radius = 1.0;
    int n_beta = 0;
    int n_alpha = 0;
    std::vector<double> beta;
    std::vector<double> alpha;
    std::vector<double> mu;    ///< n_beta * n_alpha raw weights
    std::vector<double> quad;  ///< mu with the tangential band zeroed

    /// Half-width (radians) trimmed from each tangential end in quadratures.
    static constexpr double kTangentBand = 0.05;

    int idx(int i, int j) const { return i * n_alpha + j; }
    int count() const { return n_beta * n_alpha; }
    bool in_band(int j) const { return std::abs(alpha[j]) > M_PI / 2.0 - kTangentBand; }
    double dbeta() const { return 2.0 * M_PI / n_beta; }
    double dalpha() const { return M_PI / n_alpha; }

    bool same_layout(const FanBeamGrid& o) const {
        return domain == o.domain && n_beta == o.n_beta && n_alpha == o.n_alpha;
    }
};

FanBeamGrid make_fan_grid(const MetricField& m, Domain domain, int n_beta, int n_alpha);

using FanPtr = std::shared_ptr<const FanBeamGrid>;
FanPtr make_fan_ptr(const MetricField& m, Domain domain, int n_beta, int n_alpha);

/// Inward phase point for continuous fan coordinates.
PhasePoint phase_from_fan(const MetricField& m, Domain domain, double beta, double alpha);

/// Inward phase point at a grid node.
PhasePoint node_phase(const MetricField& m, const FanBeamGrid& grid, int i, int j);

/// Fan coordinates (beta in [0, 2pi), alpha in [-pi, pi]) of a phase point on
/// the boundary circle; |alpha| < pi/2 exactly when the direction points
/// inward.
std::pair<double, double> fan_of_phase(const MetricField& m, Domain domain, const PhasePoint& p);

}  // namespace paratomo
