#pragma once

#include <array>
#include <string>

#include "paratomo/errors.hpp"
#include "paratomo/smooth_field.hpp"
#include "paratomo/types.hpp"

namespace paratomo {

enum class MetricKind { Euclidean, Conformal, General };

/// Riemannian metric on the extended disk, given in closed form so that first
/// derivatives (Christoffel symbols) are analytic.  Supported families:
/// flat, conformal factor c(x) * delta, and a general symmetric closed-form
/// matrix g_ij(x) (checked positive definite on use).
struct MetricField {
    MetricKind kind = MetricKind::Euclidean;
    double r_core = 1.0;  ///< radius of the core disk M
    double r_ext = 1.1;   ///< radius of the extended disk M1

    SmoothField c;                   // conformal factor (Conformal)
    SmoothField g11_f, g12_f, g22_f; // entries (General)

    double radius(Domain d) const { return d == Domain::M ? r_core : r_ext; }

    bool inside(const Vec2& x, Domain d, double tol = 0.0) const {
        return x.norm() <= radius(d) + tol;
    }

    Mat2 metric(const Vec2& x) const {
        Mat2 g;
        switch (kind) {
            case MetricKind::Euclidean: return Mat2::Identity();
            case MetricKind::Conformal: {
                const double cc = c.value(x);
                g << cc, 0.0, 0.0, cc;
                return g;
            }
            case MetricKind::General:
                g << g11_f.value(x), g12_f.value(x), g12_f.value(x), g22_f.value(x);
                return g;
        }
        return Mat2::Identity();
    }

    Mat2 metric_inv(const Vec2& x) const {
        switch (kind) {
            case MetricKind::Euclidean: return Mat2::Identity();
            case MetricKind::Conformal: {
                Mat2 g = Mat2::Zero();
                const double ic = 1.0 / c.value(x);
                g(0, 0) = ic;
                g(1, 1) = ic;
                return g;
            }
            case MetricKind::General: {
                const Mat2 g = metric(x);
                const double det = g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0);
                Mat2 inv;
                inv << g(1, 1), -g(0, 1), -g(1, 0), g(0, 0);
                return inv / det;
            }
        }
        return Mat2::Identity();
    }

    double sqrt_det(const Vec2& x) const {
        switch (kind) {
            case MetricKind::Euclidean: return 1.0;
            case MetricKind::Conformal: return c.value(x);
            case MetricKind::General: {
                const Mat2 g = metric(x);
                return std::sqrt(g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0));
            }
        }
        return 1.0;
    }

    /// dg[l](i,j) = d g_ij / d x^l.
    std::array<Mat2, 2> dmetric(const Vec2& x) const;

    /// chris[k](i,j) = Gamma^k_ij.
    std::array<Mat2, 2> christoffel(const Vec2& x) const;

    /// Geodesic acceleration a^k = -Gamma^k_ij v^i v^j (hot path).
    Vec2 geodesic_acc(const Vec2& x, const Vec2& v) const {
        if (kind == MetricKind::Euclidean) return Vec2(0.0, 0.0);
        if (kind == MetricKind::Conformal) {
            const double cc = c.value(x);
            const Vec2 gc = c.grad(x);
            const double a1 = 0.5 * gc[0] / cc, a2 = 0.5 * gc[1] / cc;
            const double v11 = v[0] * v[0], v22 = v[1] * v[1], v12 = v[0] * v[1];
            return Vec2(-(a1 * v11 + 2.0 * a2 * v12 - a1 * v22),
                        -(-a2 * v11 + 2.0 * a1 * v12 + a2 * v22));
        }
        const auto ch = christoffel(x);
        Vec2 a;
        for (int k = 0; k < 2; ++k)
            a[k] = -(ch[k](0, 0) * v[0] * v[0] + 2.0 * ch[k](0, 1) * v[0] * v[1] +
                     ch[k](1, 1) * v[1] * v[1]);
        return a;
    }

    double inner(const Vec2& x, const Vec2& u, const Vec2& v) const {
        const Mat2 g = metric(x);
        return u.dot(g * v);
    }

    double norm(const Vec2& x, const Vec2& v) const { return std::sqrt(inner(x, v, v)); }

    Vec2 normalized(const Vec2& x, const Vec2& v) const { return v / norm(x, v); }

    /// Gauss curvature (analytic for euclidean/conformal, finite differences of
    /// the Christoffel symbols for the general family; diagnostic use only).
    double gauss_curvature(const Vec2& x) const;

    /// Symmetric square root of g^{-1}; columns map euclidean angles to
    /// metric-orthonormal directions in the fiber.
    Mat2 inv_sqrt(const Vec2& x) const;

    /// Orthonormal frame on the boundary circle of the given domain.
    struct BoundaryFrame {
        Vec2 point;      ///< boundary point at angle beta
        Vec2 nu;         ///< inward unit normal
        Vec2 tangent;    ///< unit tangent in the direction of increasing beta
        double arc_speed;///< |d point / d beta|_g, the boundary length density
    };
    BoundaryFrame boundary_frame(double beta, Domain d) const;
};

MetricField euclidean_metric();
MetricField conformal_metric(SmoothField factor);
MetricField general_metric(SmoothField g11, SmoothField g12, SmoothField g22);

/// Canonical one-line description used in data file headers.
std::string describe(const MetricField& m);

/// Pointwise metric data with domain validation (throws PointOutsideDomain
/// beyond the extended disk).
struct MetricEval {
    Mat2 g;
    Mat2 g_inv;
    std::array<Mat2, 2> christoffel;
    double sqrt_det;
};
MetricEval metric_eval(const MetricField& m, const Vec2& x);

}  // namespace paratomo
