#pragma once

#include "paratomo/grid_field.hpp"
#include "paratomo/pair.hpp"

namespace paratomo {

/// Nodal gauge: an invertible k x k matrix field with its Cartesian gradient
/// carried alongside (analytic when available, else fourth-order differences
/// of the nodal values).
struct GaugeField {
    int k = 1;
    Field p;          ///< k*k packed matrices
    Field dp1, dp2;   ///< Cartesian gradient components, k*k each
};

/// Wrap nodal matrices, differentiating them on the grid.
GaugeField gauge_from_nodes(Field p);

/// Sample a closed-form gauge with its exact derivative.
GaugeField gauge_from_analytic(const AnalyticGauge& g, GridPtr grid);

double min_abs_det(const GaugeField& g);
bool gauge_is_boundary_identity(const GaugeField& g, double tol = 1e-12);

/// The pair differential of a vector field:  d p = [grad p + A p, Phi p].
/// p holds rank*q components (q columns handled blockwise); the gradient is
/// the grid's fourth-order Cartesian gradient.
PairField d_pair(const AttenuationPair& pair, const Field& p);

/// Formal adjoint of d_pair under the metric L2 pairing:
///   -div_g(alpha) + sum_ij g^ij A_i^dagger alpha_j + Phi^dagger f,
/// with the divergence in flux form (1/sqrt g) d_i(sqrt g g^ij alpha_j) built
/// from the same difference stencils as d_pair.
Field delta_pair(const MetricField& m, const AttenuationPair& pair, const PairField& h);

/// Composition delta_pair(d_pair(p)); reduces to -Laplace for a flat metric
/// and vanishing pair.
Field laplacian_pair(const MetricField& m, const AttenuationPair& pair, const Field& p);

/// Nodal gauge action (p^-1 (dp_j + A_j p), p^-1 Phi p); the result has k^2
/// components per slot (packed matrices).  Throws SingularGauge when |det p|
/// falls below 1e-10 at any node.
PairField gauge_transform_nodes(const AttenuationPair& pair, const GaugeField& g, GridPtr grid);

// -- boundary collar --------------------------------------------------------

/// Width of the boundary collar used by the normalization and jet
/// constructions, in grid radius units.
inline constexpr double kCollarWidth = 0.2;

/// Quintic smoothstep supported in the collar [r_max - 0.2, r_max]: zero
/// below, one on the half adjacent to the boundary [r_max - 0.1, r_max].
double collar_cutoff(double r, double r_max);

/// Metric length of the radial segment from radius r to r_max at angle theta
/// (the boundary-distance coordinate of the collar).
double collar_distance(const MetricField& m, double r, double theta, double r_max);

/// Normal-component removal near the boundary: solves the linear transport
/// problem d phi/ds + A_n phi = alpha_n along inward-pointing radii (s =
/// distance to the boundary, phi = 0 on it), then subtracts d_pair of the
/// cut-off potential.  The returned field has a vanishing normal alpha
/// component where the cutoff is identically one.  phi is returned raw
/// (supported in the collar, before the cutoff).
struct CollarNormalization {
    PairField h_tilde;
    Field phi;
};
CollarNormalization boundary_normalize(const MetricField& m, const AttenuationPair& pair,
                                       const PairField& h);

/// First-order boundary gauge between two pairs whose tangential traces
/// agree: p = id + cutoff(r) * s * N(theta) with N the normal component of
/// (B - A) at the boundary projection, so that p = id and dp = B - A hold on
/// the boundary circle.  Throws JetMismatch when the tangential one-form
/// traces or the potentials differ on the boundary beyond 1e-8, and
/// SingularGauge when the correction loses invertibility.
GaugeField boundary_jet_gauge(const MetricField& m, const AttenuationPair& a,
                              const AttenuationPair& b, GridPtr grid);

}  // namespace paratomo
