#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "paratomo/decomp.hpp"
#include "paratomo/gauge_ops.hpp"
#include "paratomo/xray.hpp"

namespace paratomo {

/// Attenuation acting on flattened k x k matrices: U -> A_B U - U A_A,
/// represented column-major as (id (x) A_B) - (A_A^T (x) id) of rank k^2.
/// Its transport weight maps U to W_B U W_A^{-1}, which is the identity on
/// inflow boundary states; the difference of the two scattering data sets
/// therefore equals the transform of B - A in this system.
class HatPair final : public AttenuationPair {
  public:
    HatPair(PairPtr a, PairPtr b);
    int rank() const override { return kk_; }
    void eval(const Vec2& x, CMat& a1, CMat& a2, CMat& phi) const override;
    std::string describe() const override;
    int base_rank() const { return k_; }
    const PairPtr& pair_a() const { return a_; }
    const PairPtr& pair_b() const { return b_; }

  private:
    PairPtr a_, b_;
    int k_ = 1, kk_ = 1;
};

/// Pair of attenuations with their flattened difference system.  Building it
/// spot-checks the transport identity d/dt (U_A^T (x) W_B) = (U_A^T (x) W_B)
/// times the hat attenuation along a few seeded rays; the worst relative
/// finite-difference defect is recorded (it scales like dt^2).
struct HatSystem {
    PairPtr pair_a, pair_b;
    std::shared_ptr<const HatPair> hat;
    double transport_residual = 0.0;
};

HatSystem hat_system(PairPtr pair_a, PairPtr pair_b, const MetricField& m,
                     const TraceOptions& opt = {}, std::uint64_t seed = 11);

/// Per fan node, flatten(C_B^{-1} C_A - id): the exact data of the flattened
/// difference system.  Throws SingularData when some C_B is not invertible.
FanData pseudolin_sinogram(const FanData& data_a, const FanData& data_b);

struct ReconstructOptions {
    int max_iter = 100;
    double tol = 1e-3;           ///< relative data-residual target
    bool solenoidal_projection = true;
    /// Tikhonov damping relative to the leading Rayleigh quotient of the
    /// normal operator.  Keeps late iterations from drifting along
    /// directions the data barely sees (residual gauge noise the discrete
    /// projection cannot remove) while biasing well-resolved modes only at
    /// this relative level.
    double damp_ratio = 1e-6;
    /// Weight of the second-difference roughness penalty, also relative to
    /// the leading Rayleigh quotient.  Ray sampling averages neighbouring
    /// grid rings, so fields alternating at the grid scale are nearly data
    /// invisible; this term resolves them toward zero instead of leaving
    /// them to chance, at a bias on smooth fields that shrinks with the
    /// squared grid spacing.
    double smooth_ratio = 1e-4;
    TraceOptions trace;
};

struct ReconstructionResult {
    PairField h;                    ///< best iterate (on the core grid)
    std::vector<double> residuals;  ///< relative data residual per iteration
    int iterations = 0;
    bool stagnated = false;  ///< plateau above tol before max_iter
};

/// Least-squares inversion of the attenuated transform: conjugate-gradient
/// iteration on the damped normal equations, pairing the tabulated forward
/// map with its exact discrete transpose, each search direction re-projected
/// onto solenoidal fields (the potential part is invisible to the data and
/// is not recoverable).  Data given on the core fan is first lifted to an
/// extended fan of the same shape.  Returns the best iterate by damped
/// objective.
ReconstructionResult linear_reconstruct(const AttenuationPair& attn, const MetricField& m,
                                        const FanData& data, GridPtr grid,
                                        const ReconstructOptions& opt = {});

/// Same iteration against a prebuilt forward table (the expensive part);
/// data must already live on the table fan.  For running several
/// reconstructions of one fixed system.
ReconstructionResult linear_reconstruct_with(const ForwardTable& fwd, const MetricField& m,
                                             const AttenuationPair& attn, const FanData& data,
                                             const ReconstructOptions& opt = {});

inline ReconstructionResult linear_reconstruct(const HatSystem& sys, const MetricField& m,
                                               const FanData& data, GridPtr grid,
                                               const ReconstructOptions& opt = {}) {
    return linear_reconstruct(*sys.hat, m, data, grid, opt);
}

/// Same iteration for the function-only transform (no one-form part, no
/// gauge kernel, hence no projection step).
struct FunctionReconstruction {
    Field f;
    std::vector<double> residuals;
    int iterations = 0;
    bool stagnated = false;
};

FunctionReconstruction function_reconstruct(const AttenuationPair& attn, const MetricField& m,
                                            const FanData& data, GridPtr grid,
                                            const ReconstructOptions& opt = {});

/// Nodal solution of the flattened transport problem u' + hat(x, v) u = 0,
/// u = id on the inflow boundary, evaluated by backward tracing through each
/// grid node and inverted into the gauge p = u^{-1}.  Well-definedness is
/// probed with a second incoming direction per node; the worst gap is
/// reported, and a gap beyond consistency_tol throws GaugeInconsistent (the
/// signal that the two scattering data sets differ).  Taking pair_b from a
/// reconstruction (wrapped as a grid-backed pair) covers the measured-data
/// route with the same call.
struct GaugeIntegration {
    GaugeField p;
    double discrepancy = 0.0;
};

GaugeIntegration gauge_integrate(const HatSystem& sys, const MetricField& m, GridPtr grid,
                                 double consistency_tol = 1e-5, const TraceOptions& opt = {});

/// Scaling probe of the nonlinear stability estimate: for each scale t the
/// pair B_t = A + t (B0 - A0) is gauge-matched at the boundary through the
/// collar jet gauge, and the ratio of interior misfit to scattering-data
/// difference is tabulated.
struct StabilityRow {
    double t = 0.0;
    double lhs = 0.0;    ///< L2 misfit between B_t and the gauge-moved A
    double rhs = 0.0;    ///< H1 fan norm of the scattering-data difference
    double ratio = 0.0;  ///< lhs / rhs, 0 when rhs vanishes
};

struct StabilityReport {
    std::vector<StabilityRow> rows;
    double ratio_spread = 0.0;  ///< max ratio / min ratio over usable rows
};

StabilityReport nonlinear_stability_probe(PairPtr pair_a, PairPtr pair_b, const MetricField& m,
                                          const std::vector<double>& scales, GridPtr grid,
                                          FanPtr fan, const TraceOptions& opt = {});

}  // namespace paratomo
