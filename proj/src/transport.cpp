#include "paratomo/transport.hpp"

#include <cmath>

#include "paratomo/errors.hpp"
#include "paratomo/ray_ode.hpp"

namespace paratomo {

FanData operator+(const FanData& a, const FanData& b) {
    if (!a.same_shape(b)) throw ValidationError("data", "fan data shapes differ");
    FanData r = a;
    for (std::size_t n = 0; n < r.v.size(); ++n) r.v[n] += b.v[n];
    return r;
}

FanData operator-(const FanData& a, const FanData& b) {
    if (!a.same_shape(b)) throw ValidationError("data", "fan data shapes differ");
    FanData r = a;
    for (std::size_t n = 0; n < r.v.size(); ++n) r.v[n] -= b.v[n];
    return r;
}

FanData operator*(Complex s, const FanData& a) {
    FanData r = a;
    for (auto& x : r.v) x *= s;
    return r;
}

Complex fan_inner(const FanData& a, const FanData& b) {
    if (!a.same_shape(b)) throw ValidationError("data", "fan data shapes differ");
    const FanBeamGrid& g = *a.grid;
    const int s = a.stride();
    Complex acc(0.0);
    for (int n = 0; n < g.count(); ++n) {
        const double w = g.quad[n];
        if (w == 0.0) continue;
        const Complex* pa = &a.v[std::size_t(n) * s];
        const Complex* pb = &b.v[std::size_t(n) * s];
        Complex dot(0.0);
        for (int c = 0; c < s; ++c) dot += pa[c] * std::conj(pb[c]);
        acc += w * dot;
    }
    return acc;
}

double fan_norm(const FanData& a) { return std::sqrt(std::max(0.0, fan_inner(a, a).real())); }

double fan_max(const FanData& a) {
    double m = 0.0;
    for (const Complex& x : a.v) m = std::max(m, std::abs(x));
    return m;
}

double fan_h1_norm(const FanData& a) {
    const FanBeamGrid& g = *a.grid;
    const int s = a.stride();
    const double inv_2db = 1.0 / (2.0 * g.dbeta());
    const double inv_da = 1.0 / g.dalpha();
    double acc = 0.0;
    for (int i = 0; i < g.n_beta; ++i) {
        const int ip = (i + 1) % g.n_beta, im = (i + g.n_beta - 1) % g.n_beta;
        for (int j = 0; j < g.n_alpha; ++j) {
            const double w = g.quad[g.idx(i, j)];
            if (w == 0.0) continue;
            const Complex* u = a.node(i, j);
            const Complex* ubp = a.node(ip, j);
            const Complex* ubm = a.node(im, j);
            const Complex* uap = a.node(i, std::min(j + 1, g.n_alpha - 1));
            const Complex* uam = a.node(i, std::max(j - 1, 0));
            const double da_scale = (j == 0 || j == g.n_alpha - 1) ? inv_da : 0.5 * inv_da;
            double sum = 0.0;
            for (int c = 0; c < s; ++c) {
                sum += std::norm(u[c]);
                sum += std::norm((ubp[c] - ubm[c]) * inv_2db);
                sum += std::norm((uap[c] - uam[c]) * da_scale);
            }
            acc += w * sum;
        }
    }
    return std::sqrt(std::max(0.0, acc));
}

FanStencil fan_stencil(const FanBeamGrid& g, double beta, double alpha) {
    FanStencil s;
    if (std::abs(alpha) > M_PI / 2.0 - FanBeamGrid::kTangentBand) return s;
    double b = beta / g.dbeta();
    b -= std::floor(b / g.n_beta) * g.n_beta;
    int i0 = static_cast<int>(b);
    if (i0 >= g.n_beta) i0 = 0;
    const double wb = b - i0;
    const int i1 = (i0 + 1) % g.n_beta;
    double aidx = (alpha - g.alpha[0]) / g.dalpha();
    aidx = std::min(std::max(aidx, 0.0), double(g.n_alpha - 1));
    const int j0 = std::min(static_cast<int>(aidx), g.n_alpha - 2);
    const double wa = aidx - j0;
    s.n00 = g.idx(i0, j0);
    s.n01 = g.idx(i0, j0 + 1);
    s.n10 = g.idx(i1, j0);
    s.n11 = g.idx(i1, j0 + 1);
    s.w00 = (1.0 - wb) * (1.0 - wa);
    s.w01 = (1.0 - wb) * wa;
    s.w10 = wb * (1.0 - wa);
    s.w11 = wb * wa;
    s.masked = false;
    return s;
}

void fan_sample(const FanData& d, double beta, double alpha, Complex* out) {
    const int c = d.stride();
    for (int i = 0; i < c; ++i) out[i] = Complex(0.0);
    const FanStencil s = fan_stencil(*d.grid, beta, alpha);
    if (s.masked) return;
    const Complex* p00 = &d.v[std::size_t(s.n00) * c];
    const Complex* p01 = &d.v[std::size_t(s.n01) * c];
    const Complex* p10 = &d.v[std::size_t(s.n10) * c];
    const Complex* p11 = &d.v[std::size_t(s.n11) * c];
    for (int i = 0; i < c; ++i)
        out[i] = s.w00 * p00[i] + s.w01 * p01[i] + s.w10 * p10[i] + s.w11 * p11[i];
}

namespace {

template <class Rhs>
TransportResult integrate_ray(const MetricField& m, int k, const Rhs& rhs, const PhasePoint& start,
                              Domain domain, const TraceOptions& opt) {
    const double radius = m.radius(domain);
    if (start.x.norm() > radius * (1.0 + 1e-9))
        throw PointOutsideDomain("transport start outside the domain");
    if (start.v.norm() == 0.0) throw IntegrationDiverged("zero direction for transport");

    JointState s{start.x, m.normalized(start.x, start.v), cidentity(k)};
    const double dt = opt.dt;
    const long max_steps = long(opt.max_length_factor * 2.0 * radius / dt) + 2;
    double t = 0.0;
    for (long step = 0; step < max_steps; ++step) {
        const JointState pre = s;
        joint_rk4_step(m, rhs, s, dt);
        t += dt;
        if (!s.x.allFinite() || !s.v.allFinite() || !s.M.allFinite())
            throw SingularWeight("transport solution diverged");
        if (s.x.norm() >= radius) {
            const double h = bisect_circle_exit(m, pre.x, pre.v, dt, radius, opt.boundary_tol);
            s = pre;
            if (h > 0.0) joint_rk4_step(m, rhs, s, h);
            t += h - dt;
            TransportResult r;
            r.exit = {s.x, s.v};
            r.time = t;
            r.matrix = s.M;
            return r;
        }
    }
    throw TrappedRay("geodesic exceeded the maximum allowed length");
}

// Integrate one matrix payload along the ray, storing every step node.  The
// phase trajectory is a deterministic function of (start, dt), so repeated
// calls with different payloads sample the identical path.
template <class Rhs>
void integrate_samples(const MetricField& m, int k, const Rhs& rhs, const PhasePoint& start,
                       Domain domain, const TraceOptions& opt, RayPath* path,
                       std::vector<CMat>& mats) {
    const double radius = m.radius(domain);
    if (start.x.norm() > radius * (1.0 + 1e-9))
        throw PointOutsideDomain("transport start outside the domain");
    JointState s{start.x, m.normalized(start.x, start.v), cidentity(k)};
    const double dt = opt.dt;
    const long max_steps = long(opt.max_length_factor * 2.0 * radius / dt) + 2;
    double t = 0.0;
    auto record = [&](double tt) {
        if (path) {
            path->t.push_back(tt);
            path->x.push_back(s.x);
            path->v.push_back(s.v);
        }
        mats.push_back(s.M);
    };
    record(0.0);
    for (long step = 0; step < max_steps; ++step) {
        const JointState pre = s;
        const double r_pre = s.x.norm();
        joint_rk4_step(m, rhs, s, dt);
        t += dt;
        if (!s.x.allFinite() || !s.M.allFinite())
            throw SingularWeight("transport solution diverged");
        if (s.x.norm() >= radius) {
            const double h = bisect_circle_exit(m, pre.x, pre.v, dt, radius, opt.boundary_tol);
            s = pre;
            if (h > 0.0) joint_rk4_step(m, rhs, s, h);
            t += h - dt;
            // A final partial step that starts inside the core still crosses
            // the core circle on its way to the outer boundary.
            if (path && domain == Domain::M1 && r_pre < m.r_core) {
                const double hc =
                    bisect_circle_cross(m, pre.x, pre.v, h, m.r_core, opt.boundary_tol);
                path->core_cross.push_back(t - h + hc);
            }
            record(t);
            return;
        }
        if (path && domain == Domain::M1) {
            const bool was_out = r_pre > m.r_core, is_out = s.x.norm() > m.r_core;
            if (was_out != is_out) {
                const double hc =
                    bisect_circle_cross(m, pre.x, pre.v, dt, m.r_core, opt.boundary_tol);
                path->core_cross.push_back(t - dt + hc);
            }
        }
        record(t);
    }
    throw TrappedRay("geodesic exceeded the maximum allowed length");
}

}  // namespace

TransportSolution transport_solution(const MetricField& m, const AttenuationPair& pair,
                                     const PhasePoint& start, Domain domain,
                                     const TraceOptions& opt) {
    const int k = pair.rank();
    TransportSolution sol;
    sol.ray.domain = domain;
    sol.ray.radius = m.radius(domain);
    sol.ray.dt = opt.dt;
    CMat attn(k, k);
    auto rhs_u = [&](const Vec2& x, const Vec2& v, const CMat& M, CMat& dM) {
        pair.attenuation(x, v, attn);
        dM = -attn * M;
    };
    integrate_samples(m, k, rhs_u, start, domain, opt, &sol.ray, sol.U);
    auto rhs_w = [&](const Vec2& x, const Vec2& v, const CMat& M, CMat& dM) {
        pair.attenuation(x, v, attn);
        dM = M * attn;
    };
    integrate_samples(m, k, rhs_w, start, domain, opt, nullptr, sol.W);
    return sol;
}

TransportResult fundamental_matrix(const MetricField& m, const AttenuationPair& pair,
                                   const PhasePoint& start, Domain domain,
                                   const TraceOptions& opt) {
    const int k = pair.rank();
    CMat attn(k, k);
    auto rhs = [&](const Vec2& x, const Vec2& v, const CMat& M, CMat& dM) {
        pair.attenuation(x, v, attn);
        dM = -attn * M;
    };
    return integrate_ray(m, k, rhs, start, domain, opt);
}

FanData scattering_data(const MetricField& m, const AttenuationPair& pair, FanPtr grid,
                        const TraceOptions& opt) {
    const int k = pair.rank();
    FanData out(grid, k, k);
    for (int i = 0; i < grid->n_beta; ++i)
        for (int j = 0; j < grid->n_alpha; ++j) {
            const PhasePoint p = node_phase(m, *grid, i, j);
            const TransportResult r = fundamental_matrix(m, pair, p, grid->domain, opt);
            out.set(i, j, r.matrix);
        }
    return out;
}

RaySource trace_to_source(const MetricField& m, const AttenuationPair& pair, const PhasePoint& at,
                          Domain domain, const TraceOptions& opt) {
    const int k = pair.rank();
    CMat attn(k, k);
    auto rhs = [&](const Vec2& x, const Vec2& v, const CMat& M, CMat& dM) {
        pair.attenuation(x, -v, attn);
        dM = attn * M;
    };
    const PhasePoint back{at.x, -at.v};
    const TransportResult r = integrate_ray(m, k, rhs, back, domain, opt);
    RaySource src;
    const PhasePoint entry{r.exit.x, -r.exit.v};
    const auto fan = fan_of_phase(m, domain, entry);
    src.beta = fan.first;
    src.alpha = fan.second;
    src.time = r.time;
    src.weight = r.matrix;
    return src;
}

CMat weight_at(const MetricField& m, const AttenuationPair& pair, const PhasePoint& at,
               Domain domain, const TraceOptions& opt) {
    return trace_to_source(m, pair, at, domain, opt).weight;
}

void extend_data(const MetricField& m, const FanData& data, const PhasePoint& at, Complex* out,
                 const TraceOptions& opt) {
    const Domain domain = data.grid->domain;
    const RayPath path = trace_geodesic(m, {at.x, -at.v}, domain, opt);
    const PhasePoint exit = path.exit();
    const auto fan = fan_of_phase(m, domain, {exit.x, -exit.v});
    fan_sample(data, fan.first, fan.second, out);
}

}  // namespace paratomo
