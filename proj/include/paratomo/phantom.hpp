#pragma once

#include <memory>

#include "paratomo/grid_field.hpp"
#include "paratomo/metric.hpp"
#include "paratomo/pair.hpp"
#include "paratomo/rng.hpp"

namespace paratomo {

/// Shape parameters of the seeded random families.  Widths are Gaussian
/// exponents (exp(-w r^2)), so the spatial scale is 1/sqrt(w); defaults keep
/// features resolvable on a 64x64 grid while decaying within the disk.
struct PhantomOptions {
    int n_bumps = 3;
    int n_modes = 2;
    double center_radius = 0.45;  ///< bump centers inside this radius
    double width_min = 4.0;
    double width_max = 10.0;
    double mode_max = 2.0;        ///< per-axis wavenumber bound
    double amplitude = 0.3;
};

SmoothField random_scalar(Rng& rng, const PhantomOptions& opt = {});

/// Scalar rescaled so its measured C^order norm over |x| <= radius equals
/// the target (norms are exactly homogeneous in the coefficients).
SmoothField random_scalar_cn(Rng& rng, int order, double target, double radius,
                             const PhantomOptions& opt = {});

/// (1 - |x|^2 / R^2) * base: vanishes on the circle of radius R, analytic
/// derivatives through second order.
struct WindowedScalar {
    SmoothField base;
    double R = 1.0;

    double window(const Vec2& x) const { return 1.0 - x.squaredNorm() / (R * R); }
    double value(const Vec2& x) const { return window(x) * base.value(x); }
    Vec2 grad(const Vec2& x) const {
        return window(x) * base.grad(x) - (2.0 / (R * R)) * base.value(x) * x;
    }
    Mat2 hess(const Vec2& x) const {
        const double iR2 = 1.0 / (R * R);
        const Vec2 g = base.grad(x);
        Mat2 h = window(x) * base.hess(x);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                h(i, j) += -2.0 * iR2 * (x[i] * g[j] + x[j] * g[i]) -
                           2.0 * iR2 * (i == j ? base.value(x) : 0.0);
        return h;
    }
};

WindowedScalar random_windowed(Rng& rng, double R, const PhantomOptions& opt = {});

/// Random pair on a shared basis; coefficients are complex normal.
std::shared_ptr<BasisPair> random_pair(int k, Rng& rng, const PhantomOptions& opt = {});

/// Random pair rescaled to a prescribed C^order norm over |x| <= radius.
PairPtr random_pair_cn(int k, int order, double target, double radius, Rng& rng,
                       const PhantomOptions& opt = {});

/// Random analytic gauge: a product of exp(s_t(x) G_t) factors; when
/// boundary_identity is set every scalar carries the (1 - |x|^2) window so
/// the gauge is the identity on the unit circle.
AnalyticGauge random_gauge(int k, Rng& rng, double scale, bool boundary_identity,
                           const PhantomOptions& opt = {});

/// Nodal random fields (complex smooth combinations evaluated at the nodes);
/// boundary_zero multiplies by 1 - (r/r_max)^2, exact zero on the last ring.
Field random_vector_field(GridPtr grid, int comps, Rng& rng, bool boundary_zero,
                          const PhantomOptions& opt = {});
PairField random_pair_field(GridPtr grid, int comps, Rng& rng,
                            const PhantomOptions& opt = {});

/// Pair whose one-form part is radial, alpha = rho(x) (x1 dx1 + x2 dx2), and
/// whose potential carries the (1 - |x|^2) window: both the tangential
/// one-form trace and the potential vanish identically on the unit circle,
/// while the normal component stays free.  This is the shape of difference
/// admissible for the boundary-jet construction.
class JetCompatiblePair final : public AttenuationPair {
  public:
    JetCompatiblePair(std::shared_ptr<const BasisPair> rho, std::shared_ptr<const BasisPair> psi)
        : rho_(std::move(rho)), psi_(std::move(psi)) {}
    int rank() const override { return rho_->rank(); }
    void eval(const Vec2& x, CMat& a1, CMat& a2, CMat& phi) const override;
    std::string describe() const override;

  private:
    std::shared_ptr<const BasisPair> rho_, psi_;
};

PairPtr random_jet_compatible(int k, Rng& rng, const PhantomOptions& opt = {});

/// Sup norm over the disk |x| <= radius of all derivatives up to `order`
/// (0 <= order <= 4), by five-point finite differences on sampled points.
double c_norm(const SmoothField& f, int order, double radius);
double c_norm(const AttenuationPair& p, int order, double radius);

/// C^2 norm of a windowed scalar from its analytic value/gradient/Hessian.
double c2_norm(const WindowedScalar& f, double radius);

}  // namespace paratomo
