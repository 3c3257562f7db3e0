#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "paratomo/gauge_ops.hpp"
#include "paratomo/grid_field.hpp"
#include "paratomo/pair.hpp"

namespace paratomo {

/// Result of the solenoidal/potential splitting h = h_s + d p.
struct Decomposition {
    PairField h_s;
    Field p;
    double residual_delta = 0.0;  ///< interior L2 norm of delta applied to h_s
};

/// Assembled and factorized Dirichlet problem for the pair Laplacian
/// delta(d(.)) on one grid: second-order stencils, the pole reduced to a
/// single shared unknown, zero values pinned on the boundary ring.  Building
/// is the expensive part; solves against many right-hand sides reuse the
/// factorization.  The metric and pair must outlive the operator.
class DirichletOperator {
  public:
    DirichletOperator(const MetricField& m, const AttenuationPair& pair, GridPtr grid, int comps);
    ~DirichletOperator();
    DirichletOperator(DirichletOperator&&) noexcept;

    /// Solve delta(d p) = source in weak form (the discrete delta is the
    /// adjoint of the discrete d under the grid inner products) with p = 0 on
    /// the boundary ring; the relative residual of the reduced system must
    /// come out below 1e-8, otherwise SingularSystem is thrown.
    Field solve(const Field& source) const;

    /// h = h_s + d p with h_s orthogonal to the whole discrete gauge space
    /// {d q : q interior} in the pair inner product, up to the direct-solver
    /// residual.  residual_delta still reports the finite-difference delta of
    /// h_s, which measures how far the discrete complement sits from the
    /// continuum solenoidal condition (second order in the grid spacing).
    Decomposition split(const PairField& h) const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// One-shot conveniences (assemble, solve, discard).
Field dirichlet_solve(const MetricField& m, const AttenuationPair& pair, const Field& source);
Decomposition split(const MetricField& m, const AttenuationPair& pair, const PairField& h);

/// L2 norm of delta h over the nodes strictly inside the boundary ring.
double interior_delta_norm(const MetricField& m, const AttenuationPair& pair, const PairField& h);

/// Max over seeded test potentials q (zero on the boundary) of
/// |<h_s, d q>| / (|h_s| |d q|), the discrete orthogonality defect.
struct OrthogonalityReport {
    double max_ratio = 0.0;
    std::vector<double> ratios;
};
OrthogonalityReport orthogonality_check(const MetricField& m, const AttenuationPair& pair,
                                        const PairField& h, int trials, std::uint64_t seed);

/// Difference of solenoidal projections under size-eps perturbations of the
/// metric and the pair, measured on seeded trial fields and reported
/// relative to eps.
struct PerturbationReport {
    double eps = 0.0;
    double max_diff = 0.0;
    double ratio_to_eps = 0.0;
};
PerturbationReport projection_perturbation_probe(const MetricField& m, PairPtr pair, GridPtr grid,
                                                 double eps, int trials, std::uint64_t seed);

}  // namespace paratomo
