#pragma once

#include <cmath>
#include <vector>

#include "paratomo/errors.hpp"
#include "paratomo/metric.hpp"
#include "paratomo/types.hpp"

namespace paratomo {

/// Classical fixed-step fourth-order step of the geodesic equation.
inline void geodesic_rk4_step(const MetricField& m, Vec2& x, Vec2& v, double h) {
    const Vec2 k1x = v;
    const Vec2 k1v = m.geodesic_acc(x, v);
    const Vec2 x2 = x + 0.5 * h * k1x, v2 = v + 0.5 * h * k1v;
    const Vec2 k2x = v2;
    const Vec2 k2v = m.geodesic_acc(x2, v2);
    const Vec2 x3 = x + 0.5 * h * k2x, v3 = v + 0.5 * h * k2v;
    const Vec2 k3x = v3;
    const Vec2 k3v = m.geodesic_acc(x3, v3);
    const Vec2 x4 = x + h * k3x, v4 = v + h * k3v;
    const Vec2 k4x = v4;
    const Vec2 k4v = m.geodesic_acc(x4, v4);
    x += (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
    v += (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
}

/// Bisect the sub-step length at which the trajectory from (x, v) reaches the
/// circle of the given radius.  Assumes |x| <= radius and that a full step of
/// length h_max ends outside; the returned h gives | |x(h)| - radius | <= tol.
inline double bisect_circle_exit(const MetricField& m, const Vec2& x, const Vec2& v,
                                 double h_max, double radius, double tol) {
    double lo = 0.0, hi = h_max;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        Vec2 xm = x, vm = v;
        geodesic_rk4_step(m, xm, vm, mid);
        const double phi = xm.norm() - radius;
        if (std::abs(phi) <= tol) return mid;
        (phi < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

struct TraceOptions {
    double dt = 1.0 / 256.0;
    double boundary_tol = 1e-10;
    /// Trapped-ray guard: abort when the arc length exceeds this multiple of
    /// the domain diameter.
    double max_length_factor = 10.0;
};

/// Sampled unit-speed geodesic from a boundary (or interior) phase point to
/// its exit through the domain circle.  Samples are uniformly spaced in time
/// except for the final partial step that lands on the boundary.  For rays of
/// the extended disk, the times at which the path crosses the core circle are
/// recorded so that quadratures can break there.
struct RayPath {
    Domain domain = Domain::M;
    double radius = 1.0;
    double dt = 1.0 / 256.0;
    std::vector<double> t;
    std::vector<Vec2> x;
    std::vector<Vec2> v;
    std::vector<double> core_cross;  ///< sorted times with |x(t)| = core radius

    double exit_time() const { return t.back(); }
    std::size_t size() const { return t.size(); }
    PhasePoint start() const { return {x.front(), v.front()}; }
    PhasePoint exit() const { return {x.back(), v.back()}; }
};

/// Trace a unit-speed geodesic until it leaves the requested disk.
/// The initial velocity is normalized to unit metric length.
/// Throws PointOutsideDomain, TrappedRay, IntegrationDiverged.
RayPath trace_geodesic(const MetricField& m, const PhasePoint& start, Domain domain,
                       const TraceOptions& opt = {});

/// Entry phase point to exit phase point (with travel time) through the disk.
struct ScatterPoint {
    PhasePoint exit;
    double time;
};
ScatterPoint scattering_relation(const MetricField& m, const PhasePoint& entry, Domain domain,
                                 const TraceOptions& opt = {});

/// Diagnostics for the two defining properties of a simple disk: no conjugate
/// points along chords (positivity of the scalar Jacobi field) and strict
/// convexity of the boundary circle.
struct SimplicityReport {
    double min_jacobi = 0.0;     ///< min over probe rays and times of the Jacobi field
    double min_convexity = 0.0;  ///< min over boundary samples of the inward bending
    bool no_conjugate_points = false;
    bool convex_boundary = false;
    bool simple() const { return no_conjugate_points && convex_boundary; }
};
SimplicityReport simplicity_check(const MetricField& m, Domain domain, int n_beta_probe = 16,
                                  int n_alpha_probe = 9, const TraceOptions& opt = {});

}  // namespace paratomo
