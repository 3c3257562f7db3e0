#include "paratomo/gauge_ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "paratomo/errors.hpp"

namespace paratomo {

namespace {

int block_columns(const AttenuationPair& pair, int comps) {
    const int k = pair.rank();
    if (comps % k != 0)
        throw ValidationError("data", "field components are not a multiple of the rank");
    return comps / k;
}

// out(k x q) += M(k x k) * in(k x q), packed column-major.
inline void add_block_product(int k, int q, const CMat& M, const Complex* in, Complex* out) {
    for (int c = 0; c < q; ++c)
        for (int r = 0; r < k; ++r) {
            Complex s(0.0);
            for (int l = 0; l < k; ++l) s += M(r, l) * in[l + c * k];
            out[r + c * k] += s;
        }
}

}  // namespace

GaugeField gauge_from_nodes(Field p) {
    GaugeField g;
    g.k = int(std::lround(std::sqrt(double(p.k))));
    if (g.k * g.k != p.k) throw ValidationError("data", "gauge field is not a packed square matrix");
    FieldGrad d = cart_grad(p);
    g.p = std::move(p);
    g.dp1 = std::move(d.dx);
    g.dp2 = std::move(d.dy);
    return g;
}

GaugeField gauge_from_analytic(const AnalyticGauge& a, GridPtr grid) {
    GaugeField g;
    g.k = a.rank();
    const int kk = g.k * g.k;
    g.p = Field(grid, kk);
    g.dp1 = Field(grid, kk);
    g.dp2 = Field(grid, kk);
    CMat d1(g.k, g.k), d2(g.k, g.k);
    for (int i = 0; i < grid->n_r; ++i)
        for (int j = 0; j < grid->n_theta; ++j) {
            const Vec2 x = grid->point(i, j);
            const int n = grid->idx(i, j);
            pack_matrix(a.value(x), &g.p.data[std::size_t(n) * kk]);
            a.derivative(x, d1, d2);
            pack_matrix(d1, &g.dp1.data[std::size_t(n) * kk]);
            pack_matrix(d2, &g.dp2.data[std::size_t(n) * kk]);
        }
    return g;
}

double min_abs_det(const GaugeField& g) {
    double lo = std::numeric_limits<double>::infinity();
    for (int n = 0; n < g.p.grid->count(); ++n) {
        const CMat P = unpack_matrix(&g.p.data[std::size_t(n) * g.k * g.k], g.k);
        lo = std::min(lo, std::abs(P.determinant()));
    }
    return lo;
}

bool gauge_is_boundary_identity(const GaugeField& g, double tol) {
    const int i = g.p.grid->n_r - 1, kk = g.k * g.k;
    for (int j = 0; j < g.p.grid->n_theta; ++j) {
        const CMat P = unpack_matrix(&g.p.data[std::size_t(g.p.grid->idx(i, j)) * kk], g.k);
        if ((P - cidentity(g.k)).cwiseAbs().maxCoeff() > tol) return false;
    }
    return true;
}

PairField d_pair(const AttenuationPair& pair, const Field& p) {
    const int k = pair.rank();
    const int q = block_columns(pair, p.k);
    const FieldGrad gp = cart_grad(p);
    PairField out(p.grid, p.k);
    out.a1 = gp.dx;
    out.a2 = gp.dy;
    CMat a1(k, k), a2(k, k), phi(k, k);
    for (int i = 0; i < p.grid->n_r; ++i)
        for (int j = 0; j < p.grid->n_theta; ++j) {
            pair.eval(p.grid->point(i, j), a1, a2, phi);
            const std::size_t off = std::size_t(p.grid->idx(i, j)) * p.k;
            const Complex* pv = &p.data[off];
            add_block_product(k, q, a1, pv, &out.a1.data[off]);
            add_block_product(k, q, a2, pv, &out.a2.data[off]);
            add_block_product(k, q, phi, pv, &out.f.data[off]);
        }
    return out;
}

Field delta_pair(const MetricField& m, const AttenuationPair& pair, const PairField& h) {
    const int k = pair.rank();
    const int q = block_columns(pair, h.k);
    const GridPtr grid = h.grid;
    // raised components scaled by the volume density, for the flux-form
    // divergence (1/sqrt g) [d1(sqrt g u^1) + d2(sqrt g u^2)]
    Field su1(grid, h.k), su2(grid, h.k);
    std::vector<double> vol(grid->count());
    for (int i = 0; i < grid->n_r; ++i)
        for (int j = 0; j < grid->n_theta; ++j) {
            const int n = grid->idx(i, j);
            const Vec2 x = grid->point(i, j);
            const Mat2 gi = m.metric_inv(x);
            const double w = m.sqrt_det(x);
            vol[n] = w;
            const std::size_t off = std::size_t(n) * h.k;
            for (int c = 0; c < h.k; ++c) {
                const Complex A1 = h.a1.data[off + c], A2 = h.a2.data[off + c];
                su1.data[off + c] = w * (gi(0, 0) * A1 + gi(0, 1) * A2);
                su2.data[off + c] = w * (gi(1, 0) * A1 + gi(1, 1) * A2);
            }
        }
    const Field d1 = cart_grad(su1).dx;
    const Field d2 = cart_grad(su2).dy;
    Field out(grid, h.k);
    CMat a1(k, k), a2(k, k), phi(k, k);
    Complex u1[kMaxRank * kMaxRank], u2[kMaxRank * kMaxRank];
    for (int i = 0; i < grid->n_r; ++i)
        for (int j = 0; j < grid->n_theta; ++j) {
            const int n = grid->idx(i, j);
            const Vec2 x = grid->point(i, j);
            pair.eval(x, a1, a2, phi);
            const std::size_t off = std::size_t(n) * h.k;
            const double iw = 1.0 / vol[n];
            for (int c = 0; c < h.k; ++c) {
                out.data[off + c] = -iw * (d1.data[off + c] + d2.data[off + c]);
                u1[c] = iw * su1.data[off + c];
                u2[c] = iw * su2.data[off + c];
            }
            add_block_product(k, q, CMat(a1.adjoint()), u1, &out.data[off]);
            add_block_product(k, q, CMat(a2.adjoint()), u2, &out.data[off]);
            add_block_product(k, q, CMat(phi.adjoint()), &h.f.data[off], &out.data[off]);
        }
    return out;
}

Field laplacian_pair(const MetricField& m, const AttenuationPair& pair, const Field& p) {
    return delta_pair(m, pair, d_pair(pair, p));
}

PairField gauge_transform_nodes(const AttenuationPair& pair, const GaugeField& g, GridPtr grid) {
    const int k = pair.rank();
    if (g.k != k) throw ValidationError("data", "gauge rank differs from the pair rank");
    if (!g.p.grid->same(*grid)) throw ValidationError("grid", "gauge lives on a different grid");
    const int kk = k * k;
    PairField out(grid, kk);
    CMat a1(k, k), a2(k, k), phi(k, k);
    for (int i = 0; i < grid->n_r; ++i)
        for (int j = 0; j < grid->n_theta; ++j) {
            const int n = grid->idx(i, j);
            const Vec2 x = grid->point(i, j);
            const CMat P = unpack_matrix(&g.p.data[std::size_t(n) * kk], k);
            if (std::abs(P.determinant()) < 1e-10)
                throw SingularGauge("gauge matrix lost invertibility at a grid node");
            const CMat Pinv = P.inverse();
            const CMat D1 = unpack_matrix(&g.dp1.data[std::size_t(n) * kk], k);
            const CMat D2 = unpack_matrix(&g.dp2.data[std::size_t(n) * kk], k);
            pair.eval(x, a1, a2, phi);
            const std::size_t off = std::size_t(n) * kk;
            pack_matrix(CMat(Pinv * (D1 + a1 * P)), &out.a1.data[off]);
            pack_matrix(CMat(Pinv * (D2 + a2 * P)), &out.a2.data[off]);
            pack_matrix(CMat(Pinv * phi * P), &out.f.data[off]);
        }
    return out;
}

// -- boundary collar --------------------------------------------------------

double collar_cutoff(double r, double r_max) {
    const double u = (r - (r_max - kCollarWidth)) / (0.5 * kCollarWidth);
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

double collar_distance(const MetricField& m, double r, double theta, double r_max) {
    if (r >= r_max) return 0.0;
    const double cth = std::cos(theta), sth = std::sin(theta);
    const Vec2 dir(cth, sth);
    auto speed = [&](double rho) {
        const Vec2 x(rho * cth, rho * sth);
        return std::sqrt(m.inner(x, dir, dir));
    };
    // composite Simpson on [r, r_max]
    const int ns = 16;
    const double h = (r_max - r) / ns;
    double s = speed(r) + speed(r_max);
    for (int i = 1; i < ns; ++i) s += (i % 2 ? 4.0 : 2.0) * speed(r + i * h);
    return s * h / 3.0;
}

CollarNormalization boundary_normalize(const MetricField& m, const AttenuationPair& pair,
                                       const PairField& h) {
    const int k = pair.rank();
    const int q = block_columns(pair, h.k);
    const GridPtr grid = h.grid;
    const double r_max = grid->r_max;
    const double r_in = r_max - kCollarWidth;
    CollarNormalization out;
    out.phi = Field(grid, h.k);

    // Along each inward radius, d phi/dr = alpha_r - A_r phi (the normal-
    // coordinate transport rewritten in r), phi(r_max) = 0.
    CMat a1(k, k), a2(k, k), ph(k, k);
    const int nsub = 4;
    for (int j = 0; j < grid->n_theta; ++j) {
        const double th = grid->theta(j);
        const double cth = std::cos(th), sth = std::sin(th);
        auto radial_attn = [&](double r, CMat& ar) {
            pair.eval(Vec2(r * cth, r * sth), a1, a2, ph);
            ar = cth * a1 + sth * a2;
        };
        auto radial_alpha = [&](double r, CMat& al) {
            const PairField::Sample s = h.sample(Vec2(r * cth, r * sth));
            for (int c = 0; c < q; ++c)
                for (int rr = 0; rr < k; ++rr)
                    al(rr, c) = cth * s.a1[rr + c * k] + sth * s.a2[rr + c * k];
        };
        CMat phi = CMat::Zero(k, q), ar(k, k), al(k, q);
        auto rhs = [&](double r, const CMat& y) {
            radial_attn(r, ar);
            radial_alpha(r, al);
            return CMat(al - ar * y);
        };
        for (int i = grid->n_r - 1; i > 0; --i) {
            if (grid->r(i - 1) < r_in - 1e-12) break;
            const double hstep = -grid->dr() / nsub;
            double r = grid->r(i);
            for (int s = 0; s < nsub; ++s) {
                const CMat k1 = rhs(r, phi);
                const CMat k2 = rhs(r + 0.5 * hstep, CMat(phi + 0.5 * hstep * k1));
                const CMat k3 = rhs(r + 0.5 * hstep, CMat(phi + 0.5 * hstep * k2));
                const CMat k4 = rhs(r + hstep, CMat(phi + hstep * k3));
                phi += (hstep / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                r += hstep;
            }
            std::copy_n(phi.data(), h.k, &out.phi.data[std::size_t(grid->idx(i - 1, j)) * h.k]);
        }
    }

    Field cut = out.phi;
    for (int i = 0; i < grid->n_r; ++i) {
        const double chi = collar_cutoff(grid->r(i), r_max);
        for (int j = 0; j < grid->n_theta; ++j) {
            Complex* p = &cut.data[std::size_t(grid->idx(i, j)) * h.k];
            for (int c = 0; c < h.k; ++c) p[c] *= chi;
        }
    }
    out.h_tilde = h - d_pair(pair, cut);
    return out;
}

GaugeField boundary_jet_gauge(const MetricField& m, const AttenuationPair& a,
                              const AttenuationPair& b, GridPtr grid) {
    const int k = a.rank();
    if (b.rank() != k) throw ValidationError("data", "pairs have different ranks");
    const int kk = k * k;
    const double r_max = grid->r_max;

    // Normal component of (B - A) along the boundary circle, normalized
    // against the boundary-distance coordinate:  dp = ds (x) N  must
    // reproduce the radial part of (B - A) with ds = -sqrt(g_rr) dr.
    std::vector<CMat> normal(grid->n_theta);
    CMat a1(k, k), a2(k, k), pa(k, k), b1(k, k), b2(k, k), pb(k, k);
    double worst_tan = 0.0, worst_higgs = 0.0;
    for (int j = 0; j < grid->n_theta; ++j) {
        const double th = grid->theta(j);
        const double cth = std::cos(th), sth = std::sin(th);
        const Vec2 x(r_max * cth, r_max * sth);
        a.eval(x, a1, a2, pa);
        b.eval(x, b1, b2, pb);
        const CMat d1 = b1 - a1, d2 = b2 - a2;
        worst_tan = std::max(worst_tan, (CMat(-sth * d1 + cth * d2)).cwiseAbs().maxCoeff());
        worst_higgs = std::max(worst_higgs, (CMat(pb - pa)).cwiseAbs().maxCoeff());
        const Vec2 dir(cth, sth);
        const double grr = m.inner(x, dir, dir);
        normal[j] = CMat(-(cth * d1 + sth * d2) / std::sqrt(grr));
    }
    if (worst_tan > 1e-8)
        throw JetMismatch("tangential one-form traces disagree on the boundary");
    if (worst_higgs > 1e-8) throw JetMismatch("potentials disagree on the boundary");

    Field p(grid, kk);
    const CMat id = cidentity(k);
    for (int i = 0; i < grid->n_r; ++i) {
        const double r = grid->r(i);
        const double chi = collar_cutoff(r, r_max);
        for (int j = 0; j < grid->n_theta; ++j) {
            CMat P = id;
            if (chi > 0.0)
                P += chi * collar_distance(m, r, grid->theta(j), r_max) * normal[j];
            pack_matrix(P, &p.data[std::size_t(grid->idx(i, j)) * kk]);
        }
    }
    GaugeField g = gauge_from_nodes(std::move(p));
    if (min_abs_det(g) < 1e-10)
        throw SingularGauge("boundary jet correction is not invertible");
    return g;
}

}  // namespace paratomo
