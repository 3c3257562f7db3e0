#pragma once

#include <functional>

#include "paratomo/transport.hpp"

namespace paratomo {

/// Attenuated ray transform of a nodal pair: per fan node, the trapezoid
/// quadrature along the traced geodesic of W(t) (alpha(v) + f) with the
/// weight W solving dW/dt = W A from the identity at the entry.  The nodal
/// field is sampled bilinearly and treated as zero outside its grid radius;
/// quadrature intervals are split where the ray crosses that support circle.
/// The field must have rank*q components (packed rank x q matrices); the
/// result holds rank x q values.
FanData forward_pair(const MetricField& m, const AttenuationPair& attn, const PairField& h,
                     FanPtr grid, const TraceOptions& opt = {});

/// Same transform with the integrand evaluated in closed form; used when the
/// integrand is itself an attenuation pair (alpha = its one-form part, f =
/// its potential part), removing grid interpolation from the error budget.
FanData forward_pair_analytic(const MetricField& m, const AttenuationPair& attn,
                              const AttenuationPair& integrand, FanPtr grid,
                              const TraceOptions& opt = {});

/// Same transform with the integrand supplied pointwise by a callback that
/// writes packed rank x q blocks (a1, a2, f); covers closed-form integrands
/// that are not attenuation pairs themselves, e.g. exact derivative fields.
using PairSampler = std::function<void(const Vec2&, Complex* a1, Complex* a2, Complex* f)>;
FanData forward_pair_sampled(const MetricField& m, const AttenuationPair& attn, int q,
                             const PairSampler& sampler, FanPtr grid,
                             const TraceOptions& opt = {});

/// Function-only transform with the weight induced by a pair.
FanData forward_function(const MetricField& m, const AttenuationPair& attn, const Field& f,
                         FanPtr grid, const TraceOptions& opt = {});

/// Function transform with an explicit weight evaluated pointwise on the
/// sphere bundle; throws SingularWeight when |det W| drops below 1e-10.
using WeightFn = std::function<CMat(const PhasePoint&)>;
FanData forward_function_weighted(const MetricField& m, const WeightFn& weight, int k,
                                  const Field& f, FanPtr grid, const TraceOptions& opt = {});

/// Conversion factor between the transforms on the extended and core disks:
/// for a ray of the extended disk, the weight of the extended problem at the
/// first core-entry point.  Along the core segment the extended weight equals
/// this constant matrix times the core weight, so extended data = factor *
/// core data for integrands supported in the core.  Throws RayMissesM when
/// the ray never reaches the core circle.
CMat extension_factor(const MetricField& m, const AttenuationPair& attn,
                      const PhasePoint& entry_m1, const TraceOptions& opt = {},
                      PhasePoint* core_entry = nullptr);

/// Transfer of data from the core fan to an extended fan along shared chords:
/// for every extended node, the chord's core entry is located, the core data
/// sampled there bilinearly, and the value premultiplied by the extension
/// factor.  Chords that miss the core give zero values.  Valid for data of
/// integrands supported in the core disk.
FanData lift_to_extended(const MetricField& m, const AttenuationPair& attn, const FanData& core,
                         FanPtr ext, const TraceOptions& opt = {});

/// Cached per-ray geometry of the forward transform for one fixed
/// (metric, attenuation, field grid, fan grid): every quadrature sample keeps
/// its interpolation stencil, velocity, trapezoid weight and transport weight
/// matrix.  Applying the table reproduces forward_pair exactly; it only
/// removes the repeated ODE work when the same transform is applied to many
/// fields (single-threaded reconstruction loops live on this).
struct ForwardTable {
    GridPtr grid;
    FanPtr fan;
    int k = 1;
    struct Sample {
        int n00, n01, n10, n11;      ///< grid node indices
        double w00, w01, w10, w11;   ///< bilinear weights
        double v1, v2;               ///< unit velocity at the sample
        double wt;                   ///< trapezoid weight
    };
    std::vector<Sample> samples;
    std::vector<Complex> weight;  ///< k*k per sample, column-major W
    std::vector<int> offset;      ///< per fan node, prefix into samples
};

ForwardTable build_forward_table(const MetricField& m, const AttenuationPair& attn, GridPtr grid,
                                 FanPtr fan, const TraceOptions& opt = {});
FanData apply_forward(const ForwardTable& t, const PairField& h);
FanData apply_forward_function(const ForwardTable& t, const Field& f);

/// Exact transpose of the tabulated forward map with respect to the discrete
/// fan and grid inner products: fan_inner(apply_forward(t, h), u) equals
/// pair_inner(m, h, apply_forward_transpose(t, m, u)) up to roundoff for any
/// field vanishing on the (weightless) center ring.  Scatters each sample's
/// weighted W^dagger u through the same bilinear stencil the forward map
/// reads from, then divides by the grid quadrature and lowers the one-form
/// slots with the metric.  This is the operator iterative solvers should
/// pair with apply_forward; apply_adjoint remains the quadrature of the
/// continuous adjoint formula.
PairField apply_forward_transpose(const ForwardTable& t, const MetricField& m, const FanData& u);
Field apply_forward_transpose_function(const ForwardTable& t, const MetricField& m,
                                       const FanData& u);

/// Cached fiber quadrature of the adjoint transform: for every output grid
/// node and fiber direction, the data-grid stencil at the entry of the
/// backward-traced geodesic plus the conjugated weight matrix.  Applying the
/// table evaluates the adjoint's fiber-integral formula; building it is the
/// expensive part (one backward transport solve per node and direction).
struct AdjointTable {
    GridPtr grid;
    FanPtr fan;
    int k = 1;
    int n_dir = 128;
    struct Item {
        int f00, f01, f10, f11;     ///< fan node indices, f00 = -1 when masked
        double w00, w01, w10, w11;  ///< bilinear weights in (beta, alpha)
        double v1, v2;              ///< fiber direction (vector components)
    };
    std::vector<Item> items;      ///< grid count * n_dir
    std::vector<Complex> wdag;    ///< k*k per item, column-major W^dagger
    std::vector<double> lower;    ///< per node: g11, g12, g22 (covector lowering)
};

AdjointTable build_adjoint_table(const MetricField& m, const AttenuationPair& attn, FanPtr fan,
                                 GridPtr out_grid, int n_dir, const TraceOptions& opt = {});
PairField apply_adjoint(const AdjointTable& t, const FanData& u);
Field apply_adjoint_function(const AdjointTable& t, const FanData& u);

/// Adjoint of the transform by its fiber-integral formula: at each node x,
/// the uniform quadrature over g-unit directions of W^dagger(x,v) times the
/// first-integral extension of the data, with the one-form part lowered by
/// the metric.  Equivalent to building and applying an adjoint table once.
PairField adjoint_backproject(const MetricField& m, const AttenuationPair& attn, const FanData& u,
                              GridPtr out_grid, int n_dir = 128, const TraceOptions& opt = {});

/// Normal operator: forward on the extended-disk fan followed by the adjoint
/// onto the extended grid.  The input field lives on the core grid (zero
/// extension implicit).
PairField normal_operator(const MetricField& m, const AttenuationPair& attn, const PairField& h,
                          FanPtr fan_ext, GridPtr out_grid_ext, int n_dir = 128,
                          const TraceOptions& opt = {});

}  // namespace paratomo
