#pragma once

#include "paratomo/geodesic.hpp"
#include "paratomo/types.hpp"

namespace paratomo {

/// Phase point plus a matrix payload carried along the geodesic.
struct JointState {
    Vec2 x, v;
    CMat M;
};

/// One classical RK4 step of the geodesic flow coupled with a linear matrix
/// equation; rhs(x, v, M, dM) fills the matrix derivative.
template <class Rhs>
inline void joint_rk4_step(const MetricField& m, const Rhs& rhs, JointState& s, double h) {
    const Vec2 x1 = s.x, v1 = s.v;
    const Vec2 a1 = m.geodesic_acc(x1, v1);
    CMat m1(s.M.rows(), s.M.cols());
    rhs(x1, v1, s.M, m1);

    const Vec2 x2 = x1 + 0.5 * h * v1, v2 = v1 + 0.5 * h * a1;
    const Vec2 a2 = m.geodesic_acc(x2, v2);
    CMat m2(s.M.rows(), s.M.cols());
    rhs(x2, v2, CMat(s.M + 0.5 * h * m1), m2);

    const Vec2 x3 = x1 + 0.5 * h * v2, v3 = v1 + 0.5 * h * a2;
    const Vec2 a3 = m.geodesic_acc(x3, v3);
    CMat m3(s.M.rows(), s.M.cols());
    rhs(x3, v3, CMat(s.M + 0.5 * h * m2), m3);

    const Vec2 x4 = x1 + h * v3, v4 = v1 + h * a3;
    const Vec2 a4 = m.geodesic_acc(x4, v4);
    CMat m4(s.M.rows(), s.M.cols());
    rhs(x4, v4, CMat(s.M + h * m3), m4);

    s.x = x1 + (h / 6.0) * (v1 + 2.0 * v2 + 2.0 * v3 + v4);
    s.v = v1 + (h / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
    s.M += (h / 6.0) * (m1 + 2.0 * m2 + 2.0 * m3 + m4);
}

/// Sub-step length at which the trajectory from (x, v) crosses the circle of
/// the given radius, in either direction; assumes the radial offset changes
/// sign over [0, h_max].
inline double bisect_circle_cross(const MetricField& m, const Vec2& x, const Vec2& v,
                                  double h_max, double radius, double tol) {
    const bool neg0 = x.norm() - radius < 0.0;
    double lo = 0.0, hi = h_max;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        Vec2 xm = x, vm = v;
        geodesic_rk4_step(m, xm, vm, mid);
        const double phi = xm.norm() - radius;
        if (std::abs(phi) <= tol) return mid;
        ((phi < 0.0) == neg0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace paratomo
