#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "paratomo/types.hpp"

namespace paratomo {

/// Gaussian lump a * exp(-width * |x - center|^2) (amplitude kept separately).
struct GaussBump {
    Vec2 center{0.0, 0.0};
    double width = 1.0;
};

/// Plane-wave mode cos(k . x + phase).
struct TrigMode {
    Vec2 k{0.0, 0.0};
    double phase = 0.0;
};

/// Shared list of closed-form basis functions.  Several fields (all entries of
/// a matrix triple, every component of a phantom) can reuse one basis so the
/// transcendental calls per evaluation are paid once, which dominates the cost
/// of the ray-transform inner loops on a single core.
struct BasisSet {
    std::vector<GaussBump> bumps;
    std::vector<TrigMode> modes;

    int size() const { return static_cast<int>(bumps.size() + modes.size()); }

    /// Basis values at x; `out` must hold size() doubles.
    void eval(const Vec2& x, double* out) const {
        int n = 0;
        for (const auto& b : bumps) {
            const double dx = x[0] - b.center[0], dy = x[1] - b.center[1];
            out[n++] = std::exp(-b.width * (dx * dx + dy * dy));
        }
        for (const auto& m : modes) out[n++] = std::cos(m.k[0] * x[0] + m.k[1] * x[1] + m.phase);
    }

    /// Basis values and gradients at x.
    void eval_grad(const Vec2& x, double* out, Vec2* grad) const {
        int n = 0;
        for (const auto& b : bumps) {
            const double dx = x[0] - b.center[0], dy = x[1] - b.center[1];
            const double e = std::exp(-b.width * (dx * dx + dy * dy));
            out[n] = e;
            grad[n] = Vec2(-2.0 * b.width * dx * e, -2.0 * b.width * dy * e);
            ++n;
        }
        for (const auto& m : modes) {
            const double ph = m.k[0] * x[0] + m.k[1] * x[1] + m.phase;
            out[n] = std::cos(ph);
            const double s = -std::sin(ph);
            grad[n] = Vec2(m.k[0] * s, m.k[1] * s);
            ++n;
        }
    }
};

/// Real scalar field: constant + linear combination over its own basis, with
/// analytic gradient and Hessian.
struct SmoothField {
    double constant = 0.0;
    std::vector<GaussBump> bumps;
    std::vector<double> bump_coef;
    std::vector<TrigMode> modes;
    std::vector<double> mode_coef;

    double value(const Vec2& x) const {
        double s = constant;
        for (std::size_t i = 0; i < bumps.size(); ++i) {
            const double dx = x[0] - bumps[i].center[0], dy = x[1] - bumps[i].center[1];
            s += bump_coef[i] * std::exp(-bumps[i].width * (dx * dx + dy * dy));
        }
        for (std::size_t i = 0; i < modes.size(); ++i)
            s += mode_coef[i] * std::cos(modes[i].k[0] * x[0] + modes[i].k[1] * x[1] + modes[i].phase);
        return s;
    }

    Vec2 grad(const Vec2& x) const {
        Vec2 g(0.0, 0.0);
        for (std::size_t i = 0; i < bumps.size(); ++i) {
            const double dx = x[0] - bumps[i].center[0], dy = x[1] - bumps[i].center[1];
            const double e = bump_coef[i] * std::exp(-bumps[i].width * (dx * dx + dy * dy));
            g[0] += -2.0 * bumps[i].width * dx * e;
            g[1] += -2.0 * bumps[i].width * dy * e;
        }
        for (std::size_t i = 0; i < modes.size(); ++i) {
            const double s =
                -mode_coef[i] *
                std::sin(modes[i].k[0] * x[0] + modes[i].k[1] * x[1] + modes[i].phase);
            g[0] += modes[i].k[0] * s;
            g[1] += modes[i].k[1] * s;
        }
        return g;
    }

    Mat2 hess(const Vec2& x) const {
        Mat2 h = Mat2::Zero();
        for (std::size_t i = 0; i < bumps.size(); ++i) {
            const double w = bumps[i].width;
            const double dx = x[0] - bumps[i].center[0], dy = x[1] - bumps[i].center[1];
            const double e = bump_coef[i] * std::exp(-w * (dx * dx + dy * dy));
            h(0, 0) += (4.0 * w * w * dx * dx - 2.0 * w) * e;
            h(1, 1) += (4.0 * w * w * dy * dy - 2.0 * w) * e;
            h(0, 1) += 4.0 * w * w * dx * dy * e;
        }
        for (std::size_t i = 0; i < modes.size(); ++i) {
            const Vec2 k = modes[i].k;
            const double c =
                -mode_coef[i] * std::cos(k[0] * x[0] + k[1] * x[1] + modes[i].phase);
            h(0, 0) += k[0] * k[0] * c;
            h(1, 1) += k[1] * k[1] * c;
            h(0, 1) += k[0] * k[1] * c;
        }
        h(1, 0) = h(0, 1);
        return h;
    }

    bool trivial() const { return bumps.empty() && modes.empty(); }

    SmoothField scaled(double a) const {
        SmoothField f = *this;
        f.constant *= a;
        for (auto& c : f.bump_coef) c *= a;
        for (auto& c : f.mode_coef) c *= a;
        return f;
    }
};

/// Constant field helper.
inline SmoothField constant_field(double c) {
    SmoothField f;
    f.constant = c;
    return f;
}

/// Pointwise sum, by concatenating the term lists.
inline SmoothField field_sum(const SmoothField& a, const SmoothField& b) {
    SmoothField s = a;
    s.constant += b.constant;
    s.bumps.insert(s.bumps.end(), b.bumps.begin(), b.bumps.end());
    s.bump_coef.insert(s.bump_coef.end(), b.bump_coef.begin(), b.bump_coef.end());
    s.modes.insert(s.modes.end(), b.modes.begin(), b.modes.end());
    s.mode_coef.insert(s.mode_coef.end(), b.mode_coef.begin(), b.mode_coef.end());
    return s;
}

/// Canonical printable form "<const>+<coef>*gauss(w;cx,cy)+<coef>*cos(kx,ky;ph)".
std::string describe_field(const SmoothField& f);

}  // namespace paratomo
