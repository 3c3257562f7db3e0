#include "paratomo/metric.hpp"

#include <cstdio>

namespace paratomo {

std::array<Mat2, 2> MetricField::dmetric(const Vec2& x) const {
    std::array<Mat2, 2> dg{Mat2::Zero(), Mat2::Zero()};
    if (kind == MetricKind::Conformal) {
        const Vec2 gc = c.grad(x);
        for (int l = 0; l < 2; ++l) {
            dg[l](0, 0) = gc[l];
            dg[l](1, 1) = gc[l];
        }
    } else if (kind == MetricKind::General) {
        const Vec2 d11 = g11_f.grad(x), d12 = g12_f.grad(x), d22 = g22_f.grad(x);
        for (int l = 0; l < 2; ++l) {
            dg[l](0, 0) = d11[l];
            dg[l](0, 1) = d12[l];
            dg[l](1, 0) = d12[l];
            dg[l](1, 1) = d22[l];
        }
    }
    return dg;
}

std::array<Mat2, 2> MetricField::christoffel(const Vec2& x) const {
    std::array<Mat2, 2> ch{Mat2::Zero(), Mat2::Zero()};
    if (kind == MetricKind::Euclidean) return ch;
    if (kind == MetricKind::Conformal) {
        const double cc = c.value(x);
        const Vec2 gc = c.grad(x);
        const double a1 = 0.5 * gc[0] / cc, a2 = 0.5 * gc[1] / cc;
        ch[0] << a1, a2, a2, -a1;
        ch[1] << -a2, a1, a1, a2;
        return ch;
    }
    const Mat2 ginv = metric_inv(x);
    const auto dg = dmetric(x);
    for (int k = 0; k < 2; ++k)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                double s = 0.0;
                for (int l = 0; l < 2; ++l)
                    s += ginv(k, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
                ch[k](i, j) = 0.5 * s;
            }
    return ch;
}

double MetricField::gauss_curvature(const Vec2& x) const {
    if (kind == MetricKind::Euclidean) return 0.0;
    if (kind == MetricKind::Conformal) {
        // K = -Laplace(log c) / (2 c), with Laplace(log c) expanded through
        // the analytic gradient and Hessian of c.
        const double cc = c.value(x);
        const Vec2 gc = c.grad(x);
        const Mat2 hc = c.hess(x);
        const double lap_log = (cc * (hc(0, 0) + hc(1, 1)) - gc.squaredNorm()) / (cc * cc);
        return -0.5 * lap_log / cc;
    }
    // General family: sectional curvature from R(e1,e2)e2 . e1 with the frame
    // from inv_sqrt and finite-difference Christoffel derivatives.
    const double h = 1e-5;
    std::array<std::array<Mat2, 2>, 2> dch;  // dch[i] = d christoffel / d x^i
    for (int i = 0; i < 2; ++i) {
        Vec2 xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        const auto cp = christoffel(xp), cm = christoffel(xm);
        for (int k = 0; k < 2; ++k) dch[i][k] = (cp[k] - cm[k]) / (2.0 * h);
    }
    const auto ch = christoffel(x);
    // R^l_{kij} = d_i Gamma^l_{jk} - d_j Gamma^l_{ik}
    //           + Gamma^l_{im} Gamma^m_{jk} - Gamma^l_{jm} Gamma^m_{ik}
    auto riem = [&](int l, int k, int i, int j) {
        double r = dch[i][l](j, k) - dch[j][l](i, k);
        for (int m = 0; m < 2; ++m)
            r += ch[l](i, m) * ch[m](j, k) - ch[l](j, m) * ch[m](i, k);
        return r;
    };
    const Mat2 e = inv_sqrt(x);
    const Vec2 e1 = e.col(0), e2 = e.col(1);
    Vec2 w(0.0, 0.0);  // R(e1, e2) e2
    for (int l = 0; l < 2; ++l) {
        double s = 0.0;
        for (int k = 0; k < 2; ++k)
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) s += riem(l, k, i, j) * e2[k] * e1[i] * e2[j];
        w[l] = s;
    }
    return inner(x, w, e1);
}

Mat2 MetricField::inv_sqrt(const Vec2& x) const {
    if (kind == MetricKind::Euclidean) return Mat2::Identity();
    if (kind == MetricKind::Conformal) {
        return Mat2::Identity() / std::sqrt(c.value(x));
    }
    // Closed-form SPD square root of the 2x2 inverse metric.
    const Mat2 a = metric_inv(x);
    const double det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    const double s = std::sqrt(det);
    const double t = std::sqrt(a(0, 0) + a(1, 1) + 2.0 * s);
    Mat2 r = a;
    r(0, 0) += s;
    r(1, 1) += s;
    return r / t;
}

MetricField::BoundaryFrame MetricField::boundary_frame(double beta, Domain d) const {
    const double r = radius(d);
    const double cb = std::cos(beta), sb = std::sin(beta);
    BoundaryFrame f;
    f.point = Vec2(r * cb, r * sb);
    const Vec2 t_raw(-r * sb, r * cb);  // d point / d beta
    f.arc_speed = norm(f.point, t_raw);
    f.tangent = t_raw / f.arc_speed;
    // Inward normal: metric-dual of -dr, normalized.  This is automatically
    // g-orthogonal to the boundary tangent.
    const Vec2 nu_raw = -(metric_inv(f.point) * Vec2(cb, sb));
    f.nu = nu_raw / norm(f.point, nu_raw);
    return f;
}

MetricField euclidean_metric() {
    MetricField m;
    m.kind = MetricKind::Euclidean;
    return m;
}

MetricField conformal_metric(SmoothField factor) {
    MetricField m;
    m.kind = MetricKind::Conformal;
    m.c = std::move(factor);
    return m;
}

MetricField general_metric(SmoothField g11, SmoothField g12, SmoothField g22) {
    MetricField m;
    m.kind = MetricKind::General;
    m.g11_f = std::move(g11);
    m.g12_f = std::move(g12);
    m.g22_f = std::move(g22);
    return m;
}

static void append_field(std::string& s, const SmoothField& f) { s += describe_field(f); }

std::string describe(const MetricField& m) {
    std::string s;
    switch (m.kind) {
        case MetricKind::Euclidean: return "euclidean";
        case MetricKind::Conformal:
            s = "conformal:";
            append_field(s, m.c);
            return s;
        case MetricKind::General:
            s = "general:";
            append_field(s, m.g11_f);
            s += "|";
            append_field(s, m.g12_f);
            s += "|";
            append_field(s, m.g22_f);
            return s;
    }
    return s;
}

MetricEval metric_eval(const MetricField& m, const Vec2& x) {
    if (!m.inside(x, Domain::M1, 1e-12))
        throw PointOutsideDomain("metric evaluation outside the extended disk");
    MetricEval e;
    e.g = m.metric(x);
    e.g_inv = m.metric_inv(x);
    e.christoffel = m.christoffel(x);
    e.sqrt_det = m.sqrt_det(x);
    if (!(e.sqrt_det > 0.0) || !std::isfinite(e.sqrt_det))
        throw IntegrationDiverged("metric is not positive definite at the requested point");
    return e;
}

}  // namespace paratomo
