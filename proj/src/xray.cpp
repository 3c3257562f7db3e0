#include "paratomo/xray.hpp"

#include <cmath>

#include "paratomo/errors.hpp"
#include "paratomo/ray_ode.hpp"

namespace paratomo {

namespace {

struct RayNode {
    Vec2 x, v;
    CMat W;
    double t;
};

// Step nodes of one ray with the transport weight dW/dt = W A carried along.
// Steps are uniform except where the ray crosses the integrand's support
// circle (so quadrature segments never straddle the jump of the zero
// extension) and at the final boundary landing.
void collect_ray(const MetricField& m, const AttenuationPair& attn, const PhasePoint& start,
                 Domain domain, double support_radius, const TraceOptions& opt,
                 std::vector<RayNode>& nodes) {
    nodes.clear();
    const double radius = m.radius(domain);
    const bool split = support_radius < radius - 1e-12;
    if (start.x.norm() > radius * (1.0 + 1e-9))
        throw PointOutsideDomain("ray start outside the domain");
    const int k = attn.rank();
    CMat a(k, k);
    auto rhs = [&](const Vec2& x, const Vec2& v, const CMat& M, CMat& dM) {
        attn.attenuation(x, v, a);
        dM = M * a;
    };
    JointState s{start.x, m.normalized(start.x, start.v), cidentity(k)};
    double t = 0.0;
    nodes.push_back({s.x, s.v, s.M, 0.0});
    const double dt = opt.dt;
    const long max_steps = long(opt.max_length_factor * 2.0 * radius / dt) + 2;
    for (long step = 0; step < max_steps; ++step) {
        const JointState pre = s;
        const double t_pre = t;
        const double r_pre = s.x.norm();
        joint_rk4_step(m, rhs, s, dt);
        t += dt;
        if (!s.x.allFinite() || !s.M.allFinite())
            throw SingularWeight("transport weight diverged along the ray");
        const bool exited = s.x.norm() >= radius;
        double h_lim = dt;
        if (exited) h_lim = bisect_circle_exit(m, pre.x, pre.v, dt, radius, opt.boundary_tol);
        if (split && std::abs(r_pre - support_radius) > 1e-9) {
            const double r_end = exited ? radius : s.x.norm();
            if ((r_pre < support_radius) != (r_end < support_radius)) {
                const double hc = bisect_circle_cross(m, pre.x, pre.v, h_lim, support_radius,
                                                      opt.boundary_tol);
                s = pre;
                if (hc > 0.0) joint_rk4_step(m, rhs, s, hc);
                t = t_pre + hc;
                nodes.push_back({s.x, s.v, s.M, t});
                continue;
            }
        }
        if (exited) {
            s = pre;
            if (h_lim > 0.0) joint_rk4_step(m, rhs, s, h_lim);
            t = t_pre + h_lim;
            nodes.push_back({s.x, s.v, s.M, t});
            return;
        }
        nodes.push_back({s.x, s.v, s.M, t});
    }
    throw TrappedRay("geodesic exceeded the maximum allowed length");
}

// Trapezoid weights over the sub-intervals whose midpoint lies inside the
// support circle; intervals outside contribute nothing (integrand is zero on
// their interior, endpoint values carry no measure).
void trapezoid_weights(const std::vector<RayNode>& nodes, double support_radius, bool split,
                       std::vector<double>& wt) {
    wt.assign(nodes.size(), 0.0);
    for (std::size_t n = 0; n + 1 < nodes.size(); ++n) {
        const double h = nodes[n + 1].t - nodes[n].t;
        if (h <= 0.0) continue;
        if (split && (0.5 * (nodes[n].x + nodes[n + 1].x)).norm() > support_radius) continue;
        wt[n] += 0.5 * h;
        wt[n + 1] += 0.5 * h;
    }
}

// acc(k x q) += wt * W(k x k) * V(k x q), all column-major flat arrays.
inline void accumulate_weighted(int k, int q, double wt, const Complex* W, const Complex* V,
                                Complex* acc) {
    for (int c = 0; c < q; ++c)
        for (int r = 0; r < k; ++r) {
            Complex s(0.0);
            for (int l = 0; l < k; ++l) s += W[r + l * k] * V[l + c * k];
            acc[r + c * k] += wt * s;
        }
}

}  // namespace

FanData forward_pair(const MetricField& m, const AttenuationPair& attn, const PairField& h,
                     FanPtr grid, const TraceOptions& opt) {
    const int k = attn.rank();
    if (h.k % k != 0)
        throw ValidationError("data", "field components are not a multiple of the rank");
    const int q = h.k / k;
    FanData out(grid, k, q);
    std::vector<RayNode> nodes;
    std::vector<double> wt;
    Complex va1[kMaxRank * kMaxRank], va2[kMaxRank * kMaxRank], vf[kMaxRank * kMaxRank];
    Complex V[kMaxRank * kMaxRank], acc[kMaxRank * kMaxRank];
    Field::Stencil st;
    for (int i = 0; i < grid->n_beta; ++i)
        for (int j = 0; j < grid->n_alpha; ++j) {
            collect_ray(m, attn, node_phase(m, *grid, i, j), grid->domain, h.grid->r_max, opt,
                        nodes);
            trapezoid_weights(nodes, h.grid->r_max, h.grid->r_max < grid->radius - 1e-12, wt);
            for (int c = 0; c < k * q; ++c) acc[c] = Complex(0.0);
            for (std::size_t n = 0; n < nodes.size(); ++n) {
                if (wt[n] == 0.0) continue;
                if (!h.a1.locate(nodes[n].x, st)) continue;
                h.a1.accumulate(st, va1);
                h.a2.accumulate(st, va2);
                h.f.accumulate(st, vf);
                const double v1 = nodes[n].v[0], v2 = nodes[n].v[1];
                for (int c = 0; c < h.k; ++c) V[c] = v1 * va1[c] + v2 * va2[c] + vf[c];
                accumulate_weighted(k, q, wt[n], nodes[n].W.data(), V, acc);
            }
            Complex* o = out.node(i, j);
            for (int c = 0; c < k * q; ++c) o[c] = acc[c];
        }
    return out;
}

FanData forward_pair_analytic(const MetricField& m, const AttenuationPair& attn,
                              const AttenuationPair& integrand, FanPtr grid,
                              const TraceOptions& opt) {
    const int K = attn.rank();
    const int k = integrand.rank();
    // Matrix route (equal ranks, data is k x k) or vectorized route (the
    // attenuation acts on packed k x k matrices as rank k^2).
    const bool vectorized = K == k * k && K != k;
    if (!vectorized && K != k) throw ValidationError("rank", "integrand rank incompatible");
    const int q = vectorized ? 1 : k;
    FanData out(grid, K, q);
    std::vector<RayNode> nodes;
    std::vector<double> wt;
    CMat a1(k, k), a2(k, k), phi(k, k);
    Complex V[kMaxRank * kMaxRank], acc[kMaxRank * kMaxRank];
    for (int i = 0; i < grid->n_beta; ++i)
        for (int j = 0; j < grid->n_alpha; ++j) {
            collect_ray(m, attn, node_phase(m, *grid, i, j), grid->domain, grid->radius, opt,
                        nodes);
            trapezoid_weights(nodes, grid->radius, false, wt);
            for (int c = 0; c < K * q; ++c) acc[c] = Complex(0.0);
            for (std::size_t n = 0; n < nodes.size(); ++n) {
                if (wt[n] == 0.0) continue;
                integrand.eval(nodes[n].x, a1, a2, phi);
                const CMat comb = nodes[n].v[0] * a1 + nodes[n].v[1] * a2 + phi;
                pack_matrix(comb, V);
                accumulate_weighted(K, q, wt[n], nodes[n].W.data(), V, acc);
            }
            Complex* o = out.node(i, j);
            for (int c = 0; c < K * q; ++c) o[c] = acc[c];
        }
    return out;
}

FanData forward_pair_sampled(const MetricField& m, const AttenuationPair& attn, int q,
                             const PairSampler& sampler, FanPtr grid, const TraceOptions& opt) {
    const int k = attn.rank();
    if (q <= 0 || k * q > kMaxRank * kMaxRank)
        throw ValidationError("data", "block width out of range");
    FanData out(grid, k, q);
    std::vector<RayNode> nodes;
    std::vector<double> wt;
    Complex va1[kMaxRank * kMaxRank], va2[kMaxRank * kMaxRank], vf[kMaxRank * kMaxRank];
    Complex V[kMaxRank * kMaxRank], acc[kMaxRank * kMaxRank];
    for (int i = 0; i < grid->n_beta; ++i)
        for (int j = 0; j < grid->n_alpha; ++j) {
            collect_ray(m, attn, node_phase(m, *grid, i, j), grid->domain, grid->radius, opt,
                        nodes);
            trapezoid_weights(nodes, grid->radius, false, wt);
            for (int c = 0; c < k * q; ++c) acc[c] = Complex(0.0);
            for (std::size_t n = 0; n < nodes.size(); ++n) {
                if (wt[n] == 0.0) continue;
                sampler(nodes[n].x, va1, va2, vf);
                const double v1 = nodes[n].v[0], v2 = nodes[n].v[1];
                for (int c = 0; c < k * q; ++c) V[c] = v1 * va1[c] + v2 * va2[c] + vf[c];
                accumulate_weighted(k, q, wt[n], nodes[n].W.data(), V, acc);
            }
            Complex* o = out.node(i, j);
            for (int c = 0; c < k * q; ++c) o[c] = acc[c];
        }
    return out;
}

FanData forward_function(const MetricField& m, const AttenuationPair& attn, const Field& f,
                         FanPtr grid, const TraceOptions& opt) {
    PairField h(f.grid, f.k);
    h.f = f;
    return forward_pair(m, attn, h, grid, opt);
}

FanData forward_function_weighted(const MetricField& m, const WeightFn& weight, int k,
                                  const Field& f, FanPtr grid, const TraceOptions& opt) {
    if (f.k % k != 0)
        throw ValidationError("data", "field components are not a multiple of the rank");
    const int q = f.k / k;
    const ZeroPair geom(k);
    FanData out(grid, k, q);
    std::vector<RayNode> nodes;
    std::vector<double> wt;
    Complex V[kMaxRank * kMaxRank], acc[kMaxRank * kMaxRank];
    Field::Stencil st;
    for (int i = 0; i < grid->n_beta; ++i)
        for (int j = 0; j < grid->n_alpha; ++j) {
            collect_ray(m, geom, node_phase(m, *grid, i, j), grid->domain, f.grid->r_max, opt,
                        nodes);
            trapezoid_weights(nodes, f.grid->r_max, f.grid->r_max < grid->radius - 1e-12, wt);
            for (int c = 0; c < k * q; ++c) acc[c] = Complex(0.0);
            for (std::size_t n = 0; n < nodes.size(); ++n) {
                if (wt[n] == 0.0) continue;
                if (!f.locate(nodes[n].x, st)) continue;
                f.accumulate(st, V);
                const CMat W = weight({nodes[n].x, nodes[n].v});
                if (std::abs(W.determinant()) < 1e-10)
                    throw SingularWeight("explicit weight is numerically singular");
                accumulate_weighted(k, q, wt[n], W.data(), V, acc);
            }
            Complex* o = out.node(i, j);
            for (int c = 0; c < k * q; ++c) o[c] = acc[c];
        }
    return out;
}

CMat extension_factor(const MetricField& m, const AttenuationPair& attn,
                      const PhasePoint& entry_m1, const TraceOptions& opt,
                      PhasePoint* core_entry) {
    const double radius = m.radius(Domain::M1);
    if (entry_m1.x.norm() > radius * (1.0 + 1e-9))
        throw PointOutsideDomain("ray start outside the extended disk");
    const int k = attn.rank();
    CMat a(k, k);
    auto rhs = [&](const Vec2& x, const Vec2& v, const CMat& M, CMat& dM) {
        attn.attenuation(x, v, a);
        dM = M * a;
    };
    JointState s{entry_m1.x, m.normalized(entry_m1.x, entry_m1.v), cidentity(k)};
    const double dt = opt.dt;
    const long max_steps = long(opt.max_length_factor * 2.0 * radius / dt) + 2;
    for (long step = 0; step < max_steps; ++step) {
        const JointState pre = s;
        const double r_pre = s.x.norm();
        joint_rk4_step(m, rhs, s, dt);
        if (!s.x.allFinite() || !s.M.allFinite())
            throw SingularWeight("transport weight diverged along the ray");
        if (r_pre > m.r_core && s.x.norm() < m.r_core) {
            const double hc =
                bisect_circle_cross(m, pre.x, pre.v, dt, m.r_core, opt.boundary_tol);
            s = pre;
            if (hc > 0.0) joint_rk4_step(m, rhs, s, hc);
            if (core_entry) *core_entry = {s.x, s.v};
            return s.M;
        }
        if (s.x.norm() >= radius)
            throw RayMissesM("extended ray does not reach the core disk");
    }
    throw TrappedRay("geodesic exceeded the maximum allowed length");
}

FanData lift_to_extended(const MetricField& m, const AttenuationPair& attn, const FanData& core,
                         FanPtr ext, const TraceOptions& opt) {
    if (core.grid->domain != Domain::M || ext->domain != Domain::M1)
        throw ValidationError("fan", "expected core-fan data and an extended target fan");
    const int k = attn.rank();
    if (core.rows != k)
        throw ValidationError("data", "data rows do not match the attenuation rank");
    const int q = core.cols;
    FanData out(ext, k, q);
    Complex buf[kMaxRank * kMaxRank];
    for (int i = 0; i < ext->n_beta; ++i)
        for (int j = 0; j < ext->n_alpha; ++j) {
            PhasePoint entry;
            CMat factor;
            try {
                factor = extension_factor(m, attn, node_phase(m, *ext, i, j), opt, &entry);
            } catch (const RayMissesM&) {
                continue;  // node stays zero
            }
            const auto [beta, alpha] = fan_of_phase(m, Domain::M, entry);
            fan_sample(core, beta, alpha, buf);
            Complex* o = out.node(i, j);
            for (int c = 0; c < k * q; ++c) o[c] = Complex(0.0);
            accumulate_weighted(k, q, 1.0, factor.data(), buf, o);
        }
    return out;
}

ForwardTable build_forward_table(const MetricField& m, const AttenuationPair& attn, GridPtr grid,
                                 FanPtr fan, const TraceOptions& opt) {
    ForwardTable t;
    t.grid = grid;
    t.fan = fan;
    t.k = attn.rank();
    t.offset.assign(fan->count() + 1, 0);
    std::vector<RayNode> nodes;
    std::vector<double> wt;
    Field probe(grid, 1);  // stencil geometry only
    Field::Stencil st;
    for (int i = 0; i < fan->n_beta; ++i)
        for (int j = 0; j < fan->n_alpha; ++j) {
            collect_ray(m, attn, node_phase(m, *fan, i, j), fan->domain, grid->r_max, opt, nodes);
            trapezoid_weights(nodes, grid->r_max, grid->r_max < fan->radius - 1e-12, wt);
            for (std::size_t n = 0; n < nodes.size(); ++n) {
                if (wt[n] == 0.0) continue;
                if (!probe.locate(nodes[n].x, st)) continue;
                ForwardTable::Sample s;
                s.n00 = grid->idx(st.i0, st.j0);
                s.n01 = grid->idx(st.i0, st.j1);
                s.n10 = grid->idx(st.i0 + 1, st.j0);
                s.n11 = grid->idx(st.i0 + 1, st.j1);
                s.w00 = (1.0 - st.wr) * (1.0 - st.wt);
                s.w01 = (1.0 - st.wr) * st.wt;
                s.w10 = st.wr * (1.0 - st.wt);
                s.w11 = st.wr * st.wt;
                s.v1 = nodes[n].v[0];
                s.v2 = nodes[n].v[1];
                s.wt = wt[n];
                t.samples.push_back(s);
                const Complex* w = nodes[n].W.data();
                t.weight.insert(t.weight.end(), w, w + t.k * t.k);
            }
            t.offset[fan->idx(i, j) + 1] = int(t.samples.size());
        }
    return t;
}

FanData apply_forward(const ForwardTable& t, const PairField& h) {
    if (!h.grid->same(*t.grid)) throw ValidationError("grid", "field grid differs from the table");
    if (h.k % t.k != 0)
        throw ValidationError("data", "field components are not a multiple of the rank");
    const int k = t.k, q = h.k / k;
    FanData out(t.fan, k, q);
    Complex va1[kMaxRank * kMaxRank], va2[kMaxRank * kMaxRank], vf[kMaxRank * kMaxRank];
    Complex V[kMaxRank * kMaxRank], acc[kMaxRank * kMaxRank];
    const Complex* a1 = h.a1.data.data();
    const Complex* a2 = h.a2.data.data();
    const Complex* f = h.f.data.data();
    const int kc = h.k;
    for (int node = 0; node < t.fan->count(); ++node) {
        for (int c = 0; c < k * q; ++c) acc[c] = Complex(0.0);
        for (int n = t.offset[node]; n < t.offset[node + 1]; ++n) {
            const ForwardTable::Sample& s = t.samples[n];
            const std::size_t p00 = std::size_t(s.n00) * kc, p01 = std::size_t(s.n01) * kc;
            const std::size_t p10 = std::size_t(s.n10) * kc, p11 = std::size_t(s.n11) * kc;
            for (int c = 0; c < kc; ++c) {
                va1[c] = s.w00 * a1[p00 + c] + s.w01 * a1[p01 + c] + s.w10 * a1[p10 + c] +
                         s.w11 * a1[p11 + c];
                va2[c] = s.w00 * a2[p00 + c] + s.w01 * a2[p01 + c] + s.w10 * a2[p10 + c] +
                         s.w11 * a2[p11 + c];
                vf[c] = s.w00 * f[p00 + c] + s.w01 * f[p01 + c] + s.w10 * f[p10 + c] +
                        s.w11 * f[p11 + c];
                V[c] = s.v1 * va1[c] + s.v2 * va2[c] + vf[c];
            }
            accumulate_weighted(k, q, s.wt, &t.weight[std::size_t(n) * k * k], V, acc);
        }
        Complex* o = &out.v[std::size_t(node) * k * q];
        for (int c = 0; c < k * q; ++c) o[c] = acc[c];
    }
    return out;
}

FanData apply_forward_function(const ForwardTable& t, const Field& f) {
    if (!f.grid->same(*t.grid)) throw ValidationError("grid", "field grid differs from the table");
    if (f.k % t.k != 0)
        throw ValidationError("data", "field components are not a multiple of the rank");
    const int k = t.k, q = f.k / k;
    FanData out(t.fan, k, q);
    Complex V[kMaxRank * kMaxRank], acc[kMaxRank * kMaxRank];
    const Complex* fd = f.data.data();
    const int kc = f.k;
    for (int node = 0; node < t.fan->count(); ++node) {
        for (int c = 0; c < k * q; ++c) acc[c] = Complex(0.0);
        for (int n = t.offset[node]; n < t.offset[node + 1]; ++n) {
            const ForwardTable::Sample& s = t.samples[n];
            const std::size_t p00 = std::size_t(s.n00) * kc, p01 = std::size_t(s.n01) * kc;
            const std::size_t p10 = std::size_t(s.n10) * kc, p11 = std::size_t(s.n11) * kc;
            for (int c = 0; c < kc; ++c)
                V[c] = s.w00 * fd[p00 + c] + s.w01 * fd[p01 + c] + s.w10 * fd[p10 + c] +
                       s.w11 * fd[p11 + c];
            accumulate_weighted(k, q, s.wt, &t.weight[std::size_t(n) * k * k], V, acc);
        }
        Complex* o = &out.v[std::size_t(node) * k * q];
        for (int c = 0; c < k * q; ++c) o[c] = acc[c];
    }
    return out;
}

PairField apply_forward_transpose(const ForwardTable& t, const MetricField& m, const FanData& u) {
    if (!u.grid->same_layout(*t.fan))
        throw ValidationError("data", "fan data does not live on the table fan");
    if (u.rows != t.k) throw ValidationError("data", "fan data rows differ from the table rank");
    const int k = t.k, q = u.cols, kc = k * q;
    const PolarGrid& g = *t.grid;
    std::vector<Complex> c1(std::size_t(g.count()) * kc), c2(c1.size()), cf(c1.size());
    Complex Z[kMaxRank * kMaxRank];
    for (int node = 0; node < t.fan->count(); ++node) {
        const double qn = t.fan->quad[node];
        if (qn == 0.0) continue;
        const Complex* un = &u.v[std::size_t(node) * kc];
        for (int n = t.offset[node]; n < t.offset[node + 1]; ++n) {
            const ForwardTable::Sample& s = t.samples[n];
            const Complex* W = &t.weight[std::size_t(n) * k * k];
            const double cw = qn * s.wt;
            for (int col = 0; col < q; ++col)
                for (int l = 0; l < k; ++l) {
                    Complex z(0.0);
                    for (int r = 0; r < k; ++r) z += std::conj(W[r + l * k]) * un[r + col * k];
                    Z[l + col * k] = cw * z;
                }
            const int nd[4] = {s.n00, s.n01, s.n10, s.n11};
            const double wb[4] = {s.w00, s.w01, s.w10, s.w11};
            for (int a = 0; a < 4; ++a) {
                if (wb[a] == 0.0) continue;
                Complex* d1 = &c1[std::size_t(nd[a]) * kc];
                Complex* d2 = &c2[std::size_t(nd[a]) * kc];
                Complex* df = &cf[std::size_t(nd[a]) * kc];
                const double wv1 = wb[a] * s.v1, wv2 = wb[a] * s.v2;
                for (int c = 0; c < kc; ++c) {
                    d1[c] += wv1 * Z[c];
                    d2[c] += wv2 * Z[c];
                    df[c] += wb[a] * Z[c];
                }
            }
        }
    }
    PairField out(t.grid, kc);
    for (int i = 0; i < g.n_r; ++i) {
        const double cw = g.coord_weight(i);
        if (cw == 0.0) continue;  // center ring carries no quadrature weight
        for (int j = 0; j < g.n_theta; ++j) {
            const Vec2 x = g.point(i, j);
            const double w = cw * m.sqrt_det(x);
            const Mat2 gm = m.metric(x);
            const std::size_t n = std::size_t(g.idx(i, j)) * kc;
            for (int c = 0; c < kc; ++c) {
                out.a1.data[n + c] = (gm(0, 0) * c1[n + c] + gm(0, 1) * c2[n + c]) / w;
                out.a2.data[n + c] = (gm(0, 1) * c1[n + c] + gm(1, 1) * c2[n + c]) / w;
                out.f.data[n + c] = cf[n + c] / w;
            }
        }
    }
    return out;
}

Field apply_forward_transpose_function(const ForwardTable& t, const MetricField& m,
                                       const FanData& u) {
    if (!u.grid->same_layout(*t.fan))
        throw ValidationError("data", "fan data does not live on the table fan");
    if (u.rows != t.k) throw ValidationError("data", "fan data rows differ from the table rank");
    const int k = t.k, q = u.cols, kc = k * q;
    const PolarGrid& g = *t.grid;
    std::vector<Complex> cf(std::size_t(g.count()) * kc);
    Complex Z[kMaxRank * kMaxRank];
    for (int node = 0; node < t.fan->count(); ++node) {
        const double qn = t.fan->quad[node];
        if (qn == 0.0) continue;
        const Complex* un = &u.v[std::size_t(node) * kc];
        for (int n = t.offset[node]; n < t.offset[node + 1]; ++n) {
            const ForwardTable::Sample& s = t.samples[n];
            const Complex* W = &t.weight[std::size_t(n) * k * k];
            const double cw = qn * s.wt;
            for (int col = 0; col < q; ++col)
                for (int l = 0; l < k; ++l) {
                    Complex z(0.0);
                    for (int r = 0; r < k; ++r) z += std::conj(W[r + l * k]) * un[r + col * k];
                    Z[l + col * k] = cw * z;
                }
            const int nd[4] = {s.n00, s.n01, s.n10, s.n11};
            const double wb[4] = {s.w00, s.w01, s.w10, s.w11};
            for (int a = 0; a < 4; ++a) {
                if (wb[a] == 0.0) continue;
                Complex* df = &cf[std::size_t(nd[a]) * kc];
                for (int c = 0; c < kc; ++c) df[c] += wb[a] * Z[c];
            }
        }
    }
    Field out(t.grid, kc);
    for (int i = 0; i < g.n_r; ++i) {
        const double cw = g.coord_weight(i);
        if (cw == 0.0) continue;
        for (int j = 0; j < g.n_theta; ++j) {
            const Vec2 x = g.point(i, j);
            const double w = cw * m.sqrt_det(x);
            const std::size_t n = std::size_t(g.idx(i, j)) * kc;
            for (int c = 0; c < kc; ++c) out.data[n + c] = cf[n + c] / w;
        }
    }
    return out;
}

AdjointTable build_adjoint_table(const MetricField& m, const AttenuationPair& attn, FanPtr fan,
                                 GridPtr out_grid, int n_dir, const TraceOptions& opt) {
    if (out_grid->r_max > m.radius(fan->domain) * (1.0 + 1e-9))
        throw ValidationError("grid", "adjoint grid extends beyond the data domain");
    if (n_dir < 4) throw ValidationError("grid", "fiber quadrature needs at least 4 directions");
    AdjointTable t;
    t.grid = out_grid;
    t.fan = fan;
    t.k = attn.rank();
    t.n_dir = n_dir;
    const int kk = t.k * t.k;
    t.items.resize(std::size_t(out_grid->count()) * n_dir);
    t.wdag.resize(t.items.size() * kk);
    t.lower.resize(std::size_t(out_grid->count()) * 3);
    for (int i = 0; i < out_grid->n_r; ++i)
        for (int j = 0; j < out_grid->n_theta; ++j) {
            const int node = out_grid->idx(i, j);
            if (i == 0 && j > 0) {
                // all center nodes describe the same point
                const int n0 = out_grid->idx(0, 0);
                std::copy_n(&t.items[std::size_t(n0) * n_dir], n_dir,
                            &t.items[std::size_t(node) * n_dir]);
                std::copy_n(&t.wdag[std::size_t(n0) * n_dir * kk], std::size_t(n_dir) * kk,
                            &t.wdag[std::size_t(node) * n_dir * kk]);
                std::copy_n(&t.lower[std::size_t(n0) * 3], 3, &t.lower[std::size_t(node) * 3]);
                continue;
            }
            const Vec2 x = out_grid->point(i, j);
            const Mat2 g = m.metric(x);
            t.lower[std::size_t(node) * 3 + 0] = g(0, 0);
            t.lower[std::size_t(node) * 3 + 1] = g(0, 1);
            t.lower[std::size_t(node) * 3 + 2] = g(1, 1);
            const Mat2 e = m.inv_sqrt(x);
            for (int d = 0; d < n_dir; ++d) {
                const double psi = 2.0 * M_PI * (d + 0.5) / n_dir;
                const Vec2 v = e * Vec2(std::cos(psi), std::sin(psi));
                const RaySource src = trace_to_source(m, attn, {x, v}, fan->domain, opt);
                const FanStencil fs = fan_stencil(*fan, src.beta, src.alpha);
                AdjointTable::Item& it = t.items[std::size_t(node) * n_dir + d];
                it.f00 = fs.masked ? -1 : fs.n00;
                it.f01 = fs.n01;
                it.f10 = fs.n10;
                it.f11 = fs.n11;
                it.w00 = fs.w00;
                it.w01 = fs.w01;
                it.w10 = fs.w10;
                it.w11 = fs.w11;
                it.v1 = v[0];
                it.v2 = v[1];
                const CMat wd = src.weight.adjoint();
                std::copy_n(wd.data(), kk, &t.wdag[(std::size_t(node) * n_dir + d) * kk]);
            }
        }
    return t;
}

namespace {

// Core of the adjoint application; acc_b1/acc_b2 may be null when the
// one-form output is not needed (function-only restriction).
void adjoint_gather(const AdjointTable& t, const FanData& u, int node, Complex* acc_f,
                    Complex* acc_b1, Complex* acc_b2) {
    const int k = t.k, q = u.cols, kk = k * k, kq = k * q;
    for (int c = 0; c < kq; ++c) {
        acc_f[c] = Complex(0.0);
        if (acc_b1) acc_b1[c] = Complex(0.0);
        if (acc_b2) acc_b2[c] = Complex(0.0);
    }
    Complex us[kMaxRank * kMaxRank], T[kMaxRank * kMaxRank];
    for (int d = 0; d < t.n_dir; ++d) {
        const AdjointTable::Item& it = t.items[std::size_t(node) * t.n_dir + d];
        if (it.f00 < 0) continue;
        const Complex* p00 = &u.v[std::size_t(it.f00) * kq];
        const Complex* p01 = &u.v[std::size_t(it.f01) * kq];
        const Complex* p10 = &u.v[std::size_t(it.f10) * kq];
        const Complex* p11 = &u.v[std::size_t(it.f11) * kq];
        for (int c = 0; c < kq; ++c)
            us[c] = it.w00 * p00[c] + it.w01 * p01[c] + it.w10 * p10[c] + it.w11 * p11[c];
        const Complex* wd = &t.wdag[(std::size_t(node) * t.n_dir + d) * kk];
        for (int c = 0; c < q; ++c)
            for (int r = 0; r < k; ++r) {
                Complex s(0.0);
                for (int l = 0; l < k; ++l) s += wd[r + l * k] * us[l + c * k];
                T[r + c * k] = s;
            }
        for (int c = 0; c < kq; ++c) {
            acc_f[c] += T[c];
            if (acc_b1) acc_b1[c] += it.v1 * T[c];
            if (acc_b2) acc_b2[c] += it.v2 * T[c];
        }
    }
}

}  // namespace

PairField apply_adjoint(const AdjointTable& t, const FanData& u) {
    if (!u.grid->same_layout(*t.fan) || u.rows != t.k)
        throw ValidationError("data", "data shape differs from the table");
    const int k = t.k, q = u.cols, kq = k * q;
    PairField out(t.grid, kq);
    const double wpsi = 2.0 * M_PI / t.n_dir;
    Complex acc_f[kMaxRank * kMaxRank], b1[kMaxRank * kMaxRank], b2[kMaxRank * kMaxRank];
    for (int node = 0; node < t.grid->count(); ++node) {
        adjoint_gather(t, u, node, acc_f, b1, b2);
        const double g11 = t.lower[std::size_t(node) * 3 + 0];
        const double g12 = t.lower[std::size_t(node) * 3 + 1];
        const double g22 = t.lower[std::size_t(node) * 3 + 2];
        Complex* oa1 = &out.a1.data[std::size_t(node) * kq];
        Complex* oa2 = &out.a2.data[std::size_t(node) * kq];
        Complex* of = &out.f.data[std::size_t(node) * kq];
        for (int c = 0; c < kq; ++c) {
            oa1[c] = wpsi * (g11 * b1[c] + g12 * b2[c]);
            oa2[c] = wpsi * (g12 * b1[c] + g22 * b2[c]);
            of[c] = wpsi * acc_f[c];
        }
    }
    return out;
}

Field apply_adjoint_function(const AdjointTable& t, const FanData& u) {
    if (!u.grid->same_layout(*t.fan) || u.rows != t.k)
        throw ValidationError("data", "data shape differs from the table");
    const int k = t.k, q = u.cols, kq = k * q;
    Field out(t.grid, kq);
    const double wpsi = 2.0 * M_PI / t.n_dir;
    Complex acc_f[kMaxRank * kMaxRank];
    for (int node = 0; node < t.grid->count(); ++node) {
        adjoint_gather(t, u, node, acc_f, nullptr, nullptr);
        Complex* of = &out.data[std::size_t(node) * kq];
        for (int c = 0; c < kq; ++c) of[c] = wpsi * acc_f[c];
    }
    return out;
}

PairField adjoint_backproject(const MetricField& m, const AttenuationPair& attn, const FanData& u,
                              GridPtr out_grid, int n_dir, const TraceOptions& opt) {
    return apply_adjoint(build_adjoint_table(m, attn, u.grid, out_grid, n_dir, opt), u);
}

PairField normal_operator(const MetricField& m, const AttenuationPair& attn, const PairField& h,
                          FanPtr fan_ext, GridPtr out_grid_ext, int n_dir,
                          const TraceOptions& opt) {
    const FanData sino = forward_pair(m, attn, h, fan_ext, opt);
    return adjoint_backproject(m, attn, sino, out_grid_ext, n_dir, opt);
}

}  // namespace paratomo
