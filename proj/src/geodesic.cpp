#include "paratomo/geodesic.hpp"

#include <algorithm>

namespace paratomo {

RayPath trace_geodesic(const MetricField& m, const PhasePoint& start, Domain domain,
                       const TraceOptions& opt) {
    const double R = m.radius(domain);
    if (start.x.norm() > R + 1e-9)
        throw PointOutsideDomain("ray start lies outside the domain circle");

    RayPath path;
    path.domain = domain;
    path.radius = R;
    path.dt = opt.dt;

    Vec2 x = start.x;
    Vec2 v = m.normalized(start.x, start.v);
    const double max_len = opt.max_length_factor * 2.0 * R;
    const std::size_t max_steps = static_cast<std::size_t>(max_len / opt.dt) + 2;

    path.t.push_back(0.0);
    path.x.push_back(x);
    path.v.push_back(v);

    const bool track_core = (domain == Domain::M1);
    double prev_core = x.norm() - m.r_core;

    for (std::size_t step = 0;; ++step) {
        if (step >= max_steps) throw TrappedRay("geodesic exceeded the arc-length budget");
        Vec2 xn = x, vn = v;
        geodesic_rk4_step(m, xn, vn, opt.dt);
        if (!std::isfinite(xn[0] + xn[1] + vn[0] + vn[1]))
            throw IntegrationDiverged("non-finite state while tracing a geodesic");
        const double tcur = path.t.back();
        if (xn.norm() > R) {
            const double h = bisect_circle_exit(m, x, v, opt.dt, R, opt.boundary_tol);
            Vec2 xe = x, ve = v;
            geodesic_rk4_step(m, xe, ve, h);
            if (track_core) {
                const double cur_core = xe.norm() - m.r_core;
                if ((prev_core < 0.0) != (cur_core < 0.0))
                    path.core_cross.push_back(
                        tcur + bisect_circle_exit(m, x, v, h, m.r_core, opt.boundary_tol));
            }
            path.t.push_back(tcur + h);
            path.x.push_back(xe);
            path.v.push_back(ve);
            break;
        }
        if (track_core) {
            const double cur_core = xn.norm() - m.r_core;
            if ((prev_core < 0.0) != (cur_core < 0.0))
                path.core_cross.push_back(
                    tcur + bisect_circle_exit(m, x, v, opt.dt, m.r_core, opt.boundary_tol));
            prev_core = cur_core;
        }
        x = xn;
        v = vn;
        path.t.push_back(tcur + opt.dt);
        path.x.push_back(x);
        path.v.push_back(v);
    }
    return path;
}

ScatterPoint scattering_relation(const MetricField& m, const PhasePoint& entry, Domain domain,
                                 const TraceOptions& opt) {
    const RayPath path = trace_geodesic(m, entry, domain, opt);
    return {path.exit(), path.exit_time()};
}

// ---------------------------------------------------------------------------
// Simplicity probes
// ---------------------------------------------------------------------------

namespace {

// Scalar Jacobi field along a unit-speed geodesic: b'' + K(x(t)) b = 0 with
// b(0) = 0, b'(0) = 1, integrated jointly with the geodesic.  Returns the
// minimum of b over t >= dt (b vanishes at t = 0 by construction); a
// non-positive minimum flags a conjugate point.
double min_jacobi_along(const MetricField& m, const PhasePoint& entry, Domain domain,
                        const TraceOptions& opt) {
    const double R = m.radius(domain);
    Vec2 x = entry.x;
    Vec2 v = m.normalized(entry.x, entry.v);
    double b = 0.0, bd = 1.0;
    double min_b = std::numeric_limits<double>::infinity();
    const std::size_t max_steps =
        static_cast<std::size_t>(opt.max_length_factor * 2.0 * R / opt.dt) + 2;

    auto stage = [&m](const Vec2& xs, const Vec2& vs, double bs, double bds, Vec2& dx, Vec2& dv,
                      double& db, double& dbd) {
        dx = vs;
        dv = m.geodesic_acc(xs, vs);
        db = bds;
        dbd = -m.gauss_curvature(xs) * bs;
    };
    auto joint_step = [&](double h) {
        Vec2 dx1, dv1, dx2, dv2, dx3, dv3, dx4, dv4;
        double db1, dbd1, db2, dbd2, db3, dbd3, db4, dbd4;
        stage(x, v, b, bd, dx1, dv1, db1, dbd1);
        stage(x + 0.5 * h * dx1, v + 0.5 * h * dv1, b + 0.5 * h * db1, bd + 0.5 * h * dbd1, dx2,
              dv2, db2, dbd2);
        stage(x + 0.5 * h * dx2, v + 0.5 * h * dv2, b + 0.5 * h * db2, bd + 0.5 * h * dbd2, dx3,
              dv3, db3, dbd3);
        stage(x + h * dx3, v + h * dv3, b + h * db3, bd + h * dbd3, dx4, dv4, db4, dbd4);
        x += (h / 6.0) * (dx1 + 2.0 * dx2 + 2.0 * dx3 + dx4);
        v += (h / 6.0) * (dv1 + 2.0 * dv2 + 2.0 * dv3 + dv4);
        b += (h / 6.0) * (db1 + 2.0 * db2 + 2.0 * db3 + db4);
        bd += (h / 6.0) * (dbd1 + 2.0 * dbd2 + 2.0 * dbd3 + dbd4);
    };

    for (std::size_t step = 0;; ++step) {
        if (step >= max_steps) throw TrappedRay("probe geodesic exceeded the arc-length budget");
        Vec2 xp = x, vp = v;
        geodesic_rk4_step(m, xp, vp, opt.dt);
        if (!std::isfinite(xp[0] + xp[1]))
            throw IntegrationDiverged("non-finite state in a Jacobi probe");
        if (xp.norm() > R) {
            const double h = bisect_circle_exit(m, x, v, opt.dt, R, opt.boundary_tol);
            joint_step(h);
            min_b = std::min(min_b, b);
            break;
        }
        joint_step(opt.dt);
        min_b = std::min(min_b, b);
    }
    return min_b;
}

}  // namespace

SimplicityReport simplicity_check(const MetricField& m, Domain domain, int n_beta_probe,
                                  int n_alpha_probe, const TraceOptions& opt) {
    SimplicityReport rep;
    const double half = 1.5207963267948966;  // pi/2 - 0.05, skip tangential probes

    rep.min_jacobi = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n_beta_probe; ++i) {
        const double beta = 2.0 * M_PI * i / n_beta_probe;
        const auto frame = m.boundary_frame(beta, domain);
        for (int j = 0; j < n_alpha_probe; ++j) {
            const double alpha = -half + 2.0 * half * (j + 0.5) / n_alpha_probe;
            const Vec2 v = std::cos(alpha) * frame.nu + std::sin(alpha) * frame.tangent;
            double mb;
            try {
                mb = min_jacobi_along(m, {frame.point, v}, domain, opt);
            } catch (const TrappedRay&) {
                mb = -std::numeric_limits<double>::infinity();
            }
            rep.min_jacobi = std::min(rep.min_jacobi, mb);
        }
    }
    rep.no_conjugate_points = rep.min_jacobi > 0.0;

    // Inward bending of the boundary circle: (covariant derivative of the unit
    // tangent along itself) paired with the inward normal.
    rep.min_convexity = std::numeric_limits<double>::infinity();
    const int n_conv = std::max(64, 4 * n_beta_probe);
    const double hb = 1e-5;
    for (int i = 0; i < n_conv; ++i) {
        const double beta = 2.0 * M_PI * i / n_conv;
        const auto f = m.boundary_frame(beta, domain);
        const auto fp = m.boundary_frame(beta + hb, domain);
        const auto fm = m.boundary_frame(beta - hb, domain);
        const Vec2 dT_dbeta = (fp.tangent - fm.tangent) / (2.0 * hb);
        const auto ch = m.christoffel(f.point);
        Vec2 cov;
        for (int k = 0; k < 2; ++k)
            cov[k] = dT_dbeta[k] / f.arc_speed +
                     ch[k](0, 0) * f.tangent[0] * f.tangent[0] +
                     2.0 * ch[k](0, 1) * f.tangent[0] * f.tangent[1] +
                     ch[k](1, 1) * f.tangent[1] * f.tangent[1];
        rep.min_convexity = std::min(rep.min_convexity, m.inner(f.point, cov, f.nu));
    }
    rep.convex_boundary = rep.min_convexity > 0.0;
    return rep;
}

}  // namespace paratomo
