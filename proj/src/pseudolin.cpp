#include <cstdio>
#include <cstdlib>
#include "paratomo/pseudolin.hpp"

#include <Eigen/LU>
#include <cmath>
#include <optional>
#include <utility>

#include "paratomo/rng.hpp"

namespace paratomo {

namespace {

// kron(L, R)(p * n + i, q * n + j) = L(p, q) R(i, j) with n = R's size, so
// that kron(id, B) - kron(A^T, id) applied to a column-major flattened U is
// B U - U A.
CMat kron(const CMat& l, const CMat& r) {
    const int nl = int(l.rows()), nr = int(r.rows());
    CMat out(nl * nr, nl * nr);
    for (int p = 0; p < nl; ++p)
        for (int q = 0; q < nl; ++q)
            for (int i = 0; i < nr; ++i)
                for (int j = 0; j < nr; ++j) out(p * nr + i, q * nr + j) = l(p, q) * r(i, j);
    return out;
}

}  // namespace

HatPair::HatPair(PairPtr a, PairPtr b) : a_(std::move(a)), b_(std::move(b)) {
    if (!a_ || !b_) throw ValidationError("pair", "null pair");
    if (a_->rank() != b_->rank())
        throw ValidationError("pair", "flattened system needs equal ranks");
    k_ = a_->rank();
    kk_ = k_ * k_;
    if (kk_ > kMaxRank)
        throw ValidationError("pair", "flattened rank exceeds the supported maximum");
}

void HatPair::eval(const Vec2& x, CMat& a1, CMat& a2, CMat& phi) const {
    CMat a1a(k_, k_), a2a(k_, k_), fa(k_, k_);
    CMat a1b(k_, k_), a2b(k_, k_), fb(k_, k_);
    a_->eval(x, a1a, a2a, fa);
    b_->eval(x, a1b, a2b, fb);
    const CMat id = cidentity(k_);
    a1 = kron(id, a1b) - kron(a1a.transpose(), id);
    a2 = kron(id, a2b) - kron(a2a.transpose(), id);
    phi = kron(id, fb) - kron(fa.transpose(), id);
}

std::string HatPair::describe() const {
    return "hat(" + a_->describe() + " | " + b_->describe() + ")";
}

HatSystem hat_system(PairPtr pair_a, PairPtr pair_b, const MetricField& m,
                     const TraceOptions& opt, std::uint64_t seed) {
    HatSystem sys;
    sys.pair_a = pair_a;
    sys.pair_b = pair_b;
    sys.hat = std::make_shared<const HatPair>(pair_a, pair_b);
    const int kk = sys.hat->rank();

    // Spot-check d/dt (U_A^T kron W_B) = (U_A^T kron W_B) * hat along a few
    // random chords; central differences on the uniform part of the path.
    Rng rng(seed);
    double worst = 0.0;
    CMat hat_a(kk, kk);
    for (int ray = 0; ray < 5; ++ray) {
        const double beta = rng.uniform(0.0, 2.0 * M_PI);
        const double alpha = rng.uniform(-1.2, 1.2);
        const PhasePoint start = phase_from_fan(m, Domain::M1, beta, alpha);
        const TransportSolution sa = transport_solution(m, *pair_a, start, Domain::M1, opt);
        const TransportSolution sb = transport_solution(m, *pair_b, start, Domain::M1, opt);
        const std::size_t n = sa.ray.size();
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double hm = sa.ray.t[i] - sa.ray.t[i - 1];
            const double hp = sa.ray.t[i + 1] - sa.ray.t[i];
            if (std::abs(hm - hp) > 1e-12) continue;  // skip the trimmed final step
            const CMat wm = kron(sa.U[i - 1].transpose(), sb.W[i - 1]);
            const CMat wc = kron(sa.U[i].transpose(), sb.W[i]);
            const CMat wp = kron(sa.U[i + 1].transpose(), sb.W[i + 1]);
            sys.hat->attenuation(sa.ray.x[i], sa.ray.v[i], hat_a);
            const CMat rhs = wc * hat_a;
            const double scale = std::max(rhs.norm(), 1.0);
            worst = std::max(worst, ((wp - wm) / (2.0 * hp) - rhs).norm() / scale);
        }
    }
    sys.transport_residual = worst;
    if (worst > 1e-3)
        throw IntegrationDiverged("flattened transport identity fails the spot check: defect " +
                                  std::to_string(worst));
    return sys;
}

FanData pseudolin_sinogram(const FanData& data_a, const FanData& data_b) {
    if (!data_a.grid->same_layout(*data_b.grid) || data_a.rows != data_b.rows ||
        data_a.cols != data_b.cols)
        throw ValidationError("data", "scattering data live on different fan layouts");
    if (data_a.rows != data_a.cols)
        throw ValidationError("data", "scattering data must hold square matrices");
    const int k = data_a.rows;
    const FanPtr& fan = data_a.grid;
    FanData out(fan, k * k, 1);
    for (int i = 0; i < fan->n_beta; ++i)
        for (int j = 0; j < fan->n_alpha; ++j) {
            const CMat ca = data_a.at(i, j);
            const CMat cb = data_b.at(i, j);
            const Eigen::PartialPivLU<CMat> lu(cb);
            if (std::abs(lu.determinant()) < 1e-12)
                throw SingularData("scattering matrix is numerically singular at a fan node");
            const CMat diff = lu.solve(ca) - cidentity(k);
            pack_matrix(diff, out.node(i, j));
        }
    return out;
}

namespace {

// Lift core-fan data when needed so that the normal operator always runs on
// an extended fan (rays of the extended disk see the whole core).
FanData to_extended_fan(const MetricField& m, const AttenuationPair& attn, const FanData& data,
                        const TraceOptions& opt) {
    if (data.grid->domain == Domain::M1) return data;
    const FanPtr ext = make_fan_ptr(m, Domain::M1, data.grid->n_beta, data.grid->n_alpha);
    return lift_to_extended(m, attn, data, ext, opt);
}

bool stagnating(const std::vector<double>& best_hist) {
    const std::size_t n = best_hist.size();
    if (n < 20) return false;
    return best_hist[n - 1] > 0.99 * best_hist[n - 11];
}

// Roughness penalty for the damped least-squares iterations.  Ray sampling
// averages neighbouring rings, so fields alternating at the grid scale cross
// the forward map almost unseen; with fewer fan nodes than unknowns they
// would otherwise pollute the minimum-norm solution.  Penalizing second
// differences along each grid axis steers the solver to the smoothest field
// consistent with the data while barely touching resolved content (the
// stencil scales like the squared grid spacing on smooth fields).  Rows skip
// the center ring and the rim so the adjoint below never divides by the
// weightless center.
struct RoughnessPenalty {
    GridPtr grid;
    std::vector<double> w;  ///< quadrature weight per node

    RoughnessPenalty(const MetricField& m, GridPtr g) : grid(std::move(g)), w(grid->count()) {
        for (int i = 0; i < grid->n_r; ++i)
            for (int j = 0; j < grid->n_theta; ++j)
                w[grid->idx(i, j)] = grid->coord_weight(i) * m.sqrt_det(grid->point(i, j));
    }

    void apply(const Field& x, Field& rad, Field& ang) const {
        const PolarGrid& g = *grid;
        for (int i = 2; i + 1 < g.n_r; ++i)
            for (int j = 0; j < g.n_theta; ++j)
                for (int c = 0; c < x.k; ++c)
                    rad.comp(i, j, c) =
                        x.comp(i - 1, j, c) - 2.0 * x.comp(i, j, c) + x.comp(i + 1, j, c);
        for (int i = 1; i + 1 < g.n_r; ++i)
            for (int j = 0; j < g.n_theta; ++j) {
                const int jm = (j + g.n_theta - 1) % g.n_theta;
                const int jp = (j + 1) % g.n_theta;
                for (int c = 0; c < x.k; ++c)
                    ang.comp(i, j, c) =
                        x.comp(i, jm, c) - 2.0 * x.comp(i, j, c) + x.comp(i, jp, c);
            }
    }

    /// Row-weighted transpose of apply, accumulated into acc.
    void scatter(const Field& rad, const Field& ang, Field& acc) const {
        const PolarGrid& g = *grid;
        for (int i = 2; i + 1 < g.n_r; ++i)
            for (int j = 0; j < g.n_theta; ++j)
                for (int c = 0; c < rad.k; ++c) {
                    const Complex z = w[g.idx(i, j)] * rad.comp(i, j, c);
                    acc.comp(i - 1, j, c) += z;
                    acc.comp(i, j, c) -= 2.0 * z;
                    acc.comp(i + 1, j, c) += z;
                }
        for (int i = 1; i + 1 < g.n_r; ++i)
            for (int j = 0; j < g.n_theta; ++j) {
                const int jm = (j + g.n_theta - 1) % g.n_theta;
                const int jp = (j + 1) % g.n_theta;
                for (int c = 0; c < ang.k; ++c) {
                    const Complex z = w[g.idx(i, j)] * ang.comp(i, j, c);
                    acc.comp(i, jm, c) += z;
                    acc.comp(i, j, c) -= 2.0 * z;
                    acc.comp(i, jp, c) += z;
                }
            }
    }

    /// Penalty-space squared norm: row quadrature weight times |entry|^2.
    double norm2(const Field& y) const {
        double s = 0.0;
        for (int i = 0; i < grid->n_r; ++i)
            for (int j = 0; j < grid->n_theta; ++j) {
                const double wn = w[grid->idx(i, j)];
                if (wn == 0.0) continue;
                for (int c = 0; c < y.k; ++c) s += wn * std::norm(y.comp(i, j, c));
            }
        return s;
    }

    double norm2(const PairField& y) const {
        return norm2(y.a1) + norm2(y.a2) + norm2(y.f);
    }

    /// Gradient of the penalty in the covector-pair inner product: scatter,
    /// then lower the a-slot indices with the metric and divide out the node
    /// weight, exactly as the forward transpose does.
    PairField grad(const MetricField& m, const PairField& rad, const PairField& ang) const {
        const int k = rad.a1.k;
        PairField acc(grid, k), out(grid, k);
        scatter(rad.a1, ang.a1, acc.a1);
        scatter(rad.a2, ang.a2, acc.a2);
        scatter(rad.f, ang.f, acc.f);
        for (int i = 1; i < grid->n_r; ++i)
            for (int j = 0; j < grid->n_theta; ++j) {
                const int id = grid->idx(i, j);
                const double wn = w[id];
                if (wn == 0.0) continue;
                const Mat2 gm = m.metric(grid->point(i, j));
                for (int c = 0; c < k; ++c) {
                    const Complex c1 = acc.a1.comp(i, j, c);
                    const Complex c2 = acc.a2.comp(i, j, c);
                    out.a1.comp(i, j, c) = (gm(0, 0) * c1 + gm(0, 1) * c2) / wn;
                    out.a2.comp(i, j, c) = (gm(0, 1) * c1 + gm(1, 1) * c2) / wn;
                    out.f.comp(i, j, c) = acc.f.comp(i, j, c) / wn;
                }
            }
        return out;
    }

    /// Scalar-slot version of grad for the function transform.
    Field grad(const Field& rad, const Field& ang) const {
        Field acc(grid, rad.k), out(grid, rad.k);
        scatter(rad, ang, acc);
        for (int i = 1; i < grid->n_r; ++i)
            for (int j = 0; j < grid->n_theta; ++j) {
                const double wn = w[grid->idx(i, j)];
                if (wn == 0.0) continue;
                for (int c = 0; c < rad.k; ++c)
                    out.comp(i, j, c) = acc.comp(i, j, c) / wn;
            }
        return out;
    }
};

}  // namespace

ReconstructionResult linear_reconstruct(const AttenuationPair& attn, const MetricField& m,
                                        const FanData& data, GridPtr grid,
                                        const ReconstructOptions& opt) {
    const int k = attn.rank();
    if (data.rows != k || data.cols != 1)
        throw ValidationError("data", "expected k x 1 fan data matching the attenuation rank");
    const FanData b = to_extended_fan(m, attn, data, opt.trace);
    const ForwardTable fwd = build_forward_table(m, attn, grid, b.grid, opt.trace);
    return linear_reconstruct_with(fwd, m, attn, b, opt);
}

ReconstructionResult linear_reconstruct_with(const ForwardTable& fwd, const MetricField& m,
                                             const AttenuationPair& attn, const FanData& data,
                                             const ReconstructOptions& opt) {
    const int k = attn.rank();
    if (data.rows != k || data.cols != 1)
        throw ValidationError("data", "expected k x 1 fan data matching the attenuation rank");
    if (!data.grid->same_layout(*fwd.fan))
        throw ValidationError("data", "fan data does not live on the table fan");
    GridPtr grid = fwd.grid;
    ReconstructionResult out;
    out.h = PairField(grid, k);

    const FanData& b = data;
    const double b_norm = fan_norm(b);
    if (b_norm == 0.0) return out;

    std::optional<DirichletOperator> proj;
    if (opt.solenoidal_projection) proj.emplace(m, attn, grid, k);
    const auto project = [&](const PairField& y) -> PairField {
        if (!proj) return y;
        return proj->split(y).h_s;
    };

    // Conjugate-gradient least squares on the damped normal equations,
    // minimizing |A x - b|^2 + lambda^2 |x|^2.  apply_forward_transpose is
    // the exact discrete transpose of apply_forward, so the recurrence is
    // the textbook one; projecting every gradient keeps the whole Krylov
    // space (and hence every iterate) solenoidal.  The rewind guard only
    // exists because the projection is itself a discretization whose mild
    // asymmetry can erode conjugacy after many steps; three fruitless
    // restarts in a row end the run.
    PairField x(grid, k), x_best(grid, k);
    FanData r = b;
    PairField s = project(apply_forward_transpose(fwd, m, r));
    double gamma = std::real(pair_inner(m, s, s));
    if (gamma <= 0.0) return out;
    const double rho = std::real(fan_inner(apply_forward(fwd, s), apply_forward(fwd, s))) / gamma;
    const double lambda2 = opt.damp_ratio * rho;
    const double mu = std::sqrt(opt.smooth_ratio * rho);
    const RoughnessPenalty pen(m, grid);
    PairField rr_rad(grid, k), rr_ang(grid, k);  // penalty residuals, -mu R x
    PairField p_dir = s;

    double best = 1.0;
    std::vector<double> best_hist;
    int guards = 0;
    for (int iter = 1; iter <= opt.max_iter; ++iter) {
        if (gamma <= 0.0) break;
        const FanData q = apply_forward(fwd, p_dir);
        PairField prad(grid, k), pang(grid, k);
        pen.apply(p_dir.a1, prad.a1, pang.a1);
        pen.apply(p_dir.a2, prad.a2, pang.a2);
        pen.apply(p_dir.f, prad.f, pang.f);
        const double qq = std::real(fan_inner(q, q)) +
                          mu * mu * (pen.norm2(prad) + pen.norm2(pang)) +
                          lambda2 * std::real(pair_inner(m, p_dir, p_dir));
        if (qq <= 0.0) break;
        const double alpha = gamma / qq;
        x = x + Complex(alpha) * p_dir;
        r = r - Complex(alpha) * q;
        rr_rad = rr_rad - Complex(alpha * mu) * prad;
        rr_ang = rr_ang - Complex(alpha * mu) * pang;
        const double data_rel = fan_norm(r) / b_norm;
        const double xn = pair_l2_norm(m, x);
        const double objective =
            std::sqrt(data_rel * data_rel + (pen.norm2(rr_rad) + pen.norm2(rr_ang) +
                                             lambda2 * xn * xn) /
                                                (b_norm * b_norm));
        out.residuals.push_back(data_rel);
        out.iterations = iter;
        if (std::getenv("PARATOMO_TRACE"))
            std::fprintf(stderr, "it %3d data %.3e xn %.4e obj %.4e\n", iter, data_rel, xn, objective);
        if (objective < best) {
            best = objective;
            x_best = x;
            guards = 0;
        }
        best_hist.push_back(best);
        if (data_rel <= opt.tol) {
            x_best = x;
            break;
        }
        if (objective > 1.1 * best) {
            if (++guards >= 3) {
                out.stagnated = true;
                break;
            }
            x = x_best;
            r = b - apply_forward(fwd, x);
            pen.apply(x.a1, rr_rad.a1, rr_ang.a1);
            pen.apply(x.a2, rr_rad.a2, rr_ang.a2);
            pen.apply(x.f, rr_rad.f, rr_ang.f);
            rr_rad = Complex(-mu) * rr_rad;
            rr_ang = Complex(-mu) * rr_ang;
            s = project(apply_forward_transpose(fwd, m, r) +
                        Complex(mu) * pen.grad(m, rr_rad, rr_ang) - Complex(lambda2) * x);
            p_dir = s;
            gamma = std::real(pair_inner(m, s, s));
            continue;
        }
        if (stagnating(best_hist)) {
            out.stagnated = true;
            break;
        }
        s = project(apply_forward_transpose(fwd, m, r) +
                    Complex(mu) * pen.grad(m, rr_rad, rr_ang) - Complex(lambda2) * x);
        const double gnew = std::real(pair_inner(m, s, s));
        p_dir = s + Complex(gnew / gamma) * p_dir;
        gamma = gnew;
    }
    out.h = x_best;
    return out;
}

FunctionReconstruction function_reconstruct(const AttenuationPair& attn, const MetricField& m,
                                            const FanData& data, GridPtr grid,
                                            const ReconstructOptions& opt) {
    const int k = attn.rank();
    if (data.rows != k || data.cols != 1)
        throw ValidationError("data", "expected k x 1 fan data matching the attenuation rank");
    FunctionReconstruction out;
    out.f = Field(grid, k);

    const FanData b = to_extended_fan(m, attn, data, opt.trace);
    const double b_norm = fan_norm(b);
    if (b_norm == 0.0) return out;

    const ForwardTable fwd = build_forward_table(m, attn, grid, b.grid, opt.trace);

    // Same damped least-squares iteration as the pair reconstruction,
    // minus the projection: the function transform has no gauge kernel.
    Field x(grid, k), x_best(grid, k);
    FanData r = b;
    Field s = apply_forward_transpose_function(fwd, m, r);
    double gamma = std::real(l2_inner(m, s, s));
    if (gamma <= 0.0) return out;
    const double rho =
        std::real(fan_inner(apply_forward_function(fwd, s), apply_forward_function(fwd, s))) /
        gamma;
    const double lambda2 = opt.damp_ratio * rho;
    const double mu = std::sqrt(opt.smooth_ratio * rho);
    const RoughnessPenalty pen(m, grid);
    Field rr_rad(grid, k), rr_ang(grid, k);  // penalty residuals, -mu R x
    Field p_dir = s;

    double best = 1.0;
    std::vector<double> best_hist;
    int guards = 0;
    for (int iter = 1; iter <= opt.max_iter; ++iter) {
        if (gamma <= 0.0) break;
        const FanData q = apply_forward_function(fwd, p_dir);
        Field prad(grid, k), pang(grid, k);
        pen.apply(p_dir, prad, pang);
        const double qq = std::real(fan_inner(q, q)) +
                          mu * mu * (pen.norm2(prad) + pen.norm2(pang)) +
                          lambda2 * std::real(l2_inner(m, p_dir, p_dir));
        if (qq <= 0.0) break;
        const double alpha = gamma / qq;
        x = x + Complex(alpha) * p_dir;
        r = r - Complex(alpha) * q;
        rr_rad = rr_rad - Complex(alpha * mu) * prad;
        rr_ang = rr_ang - Complex(alpha * mu) * pang;
        const double data_rel = fan_norm(r) / b_norm;
        const double xn = l2_norm(m, x);
        const double objective =
            std::sqrt(data_rel * data_rel + (pen.norm2(rr_rad) + pen.norm2(rr_ang) +
                                             lambda2 * xn * xn) /
                                                (b_norm * b_norm));
        out.residuals.push_back(data_rel);
        out.iterations = iter;
        if (objective < best) {
            best = objective;
            x_best = x;
            guards = 0;
        }
        best_hist.push_back(best);
        if (data_rel <= opt.tol) {
            x_best = x;
            break;
        }
        if (objective > 1.1 * best) {
            if (++guards >= 3) {
                out.stagnated = true;
                break;
            }
            x = x_best;
            r = b - apply_forward_function(fwd, x);
            pen.apply(x, rr_rad, rr_ang);
            rr_rad = Complex(-mu) * rr_rad;
            rr_ang = Complex(-mu) * rr_ang;
            s = apply_forward_transpose_function(fwd, m, r) +
                Complex(mu) * pen.grad(rr_rad, rr_ang) - Complex(lambda2) * x;
            p_dir = s;
            gamma = std::real(l2_inner(m, s, s));
            continue;
        }
        if (stagnating(best_hist)) {
            out.stagnated = true;
            break;
        }
        s = apply_forward_transpose_function(fwd, m, r) +
            Complex(mu) * pen.grad(rr_rad, rr_ang) - Complex(lambda2) * x;
        const double gnew = std::real(l2_inner(m, s, s));
        p_dir = s + Complex(gnew / gamma) * p_dir;
        gamma = gnew;
    }
    out.f = x_best;
    return out;
}

GaugeIntegration gauge_integrate(const HatSystem& sys, const MetricField& m, GridPtr grid,
                                 double consistency_tol, const TraceOptions& opt) {
    if (grid->r_max > m.radius(Domain::M) * (1.0 + 1e-9))
        throw ValidationError("grid", "gauge grid extends beyond the core disk");
    const int k = sys.hat->base_rank(), kk = sys.hat->rank();
    CVec id_flat(kk);
    pack_matrix(cidentity(k), id_flat.data());

    Field pn(grid, kk);
    double worst = 0.0;
    for (int i = 0; i < grid->n_r; ++i) {
        const int jmax = (i == 0) ? 1 : grid->n_theta;  // center once
        for (int j = 0; j < jmax; ++j) {
            const Vec2 x = grid->point(i, j);
            const Vec2 e = (i == 0) ? Vec2(1.0, 0.0)
                                    : Vec2(std::cos(grid->theta(j)), std::sin(grid->theta(j)));
            const Vec2 dirs[2] = {e, Vec2(-e[1], e[0])};
            CMat us[2];
            for (int d = 0; d < 2; ++d) {
                const RaySource src =
                    trace_to_source(m, *sys.hat, {x, dirs[d]}, Domain::M, opt);
                const CVec uf = src.weight.partialPivLu().solve(id_flat);
                us[d] = unpack_matrix(uf.data(), k);
            }
            worst = std::max(worst, (us[0] - us[1]).norm());
            if (worst > consistency_tol)
                throw GaugeInconsistent(
                    "transport solution depends on the incoming direction (gap " +
                    std::to_string(worst) + "); the scattering data do not match");
            const Eigen::PartialPivLU<CMat> lu(us[0]);
            if (std::abs(lu.determinant()) < 1e-10)
                throw SingularGauge("transport solution is singular at a grid node");
            const CMat p = lu.inverse();
            pack_matrix(p, &pn.data[std::size_t(grid->idx(i, j)) * kk]);
        }
    }
    for (int j = 1; j < grid->n_theta; ++j)  // replicate the center value
        for (int c = 0; c < kk; ++c) pn.comp(0, j, c) = pn.comp(0, 0, c);

    GaugeIntegration out;
    out.discrepancy = worst;
    out.p = gauge_from_nodes(pn);
    return out;
}

StabilityReport nonlinear_stability_probe(PairPtr pair_a, PairPtr pair_b, const MetricField& m,
                                          const std::vector<double>& scales, GridPtr grid,
                                          FanPtr fan, const TraceOptions& opt) {
    if (!pair_a || !pair_b) throw ValidationError("pair", "null pair");
    if (fan->domain != Domain::M)
        throw ValidationError("fan", "stability data norm lives on the core fan");
    StabilityReport rep;
    const FanData ca = scattering_data(m, *pair_a, fan, opt);
    for (const double t : scales) {
        const auto bt = std::make_shared<ScaledSumPair>(std::vector<std::pair<Complex, PairPtr>>{
            {Complex(1.0 - t), pair_a}, {Complex(t), pair_b}});
        StabilityRow row;
        row.t = t;
        const GaugeField p = boundary_jet_gauge(m, *pair_a, *bt, grid);
        const PairField moved = gauge_transform_nodes(*pair_a, p, grid);
        row.lhs = pair_l2_norm(m, discretize(*bt, grid) - moved);
        const FanData cb = scattering_data(m, *bt, fan, opt);
        row.rhs = fan_h1_norm(cb - ca);
        row.ratio = row.rhs > 0.0 ? row.lhs / row.rhs : 0.0;
        rep.rows.push_back(row);
    }
    double lo = 0.0, hi = 0.0;
    for (const StabilityRow& row : rep.rows) {
        if (row.rhs <= 1e-14) continue;
        if (lo == 0.0 || row.ratio < lo) lo = row.ratio;
        hi = std::max(hi, row.ratio);
    }
    rep.ratio_spread = lo > 0.0 ? hi / lo : 0.0;
    return rep;
}

}  // namespace paratomo
