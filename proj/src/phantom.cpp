#include "paratomo/phantom.hpp"

#include <algorithm>
#include <cmath>

namespace paratomo {

namespace {

GaussBump random_bump(Rng& rng, const PhantomOptions& opt) {
    GaussBump b;
    const double r = opt.center_radius * std::sqrt(rng.uniform());
    const double a = rng.uniform(0.0, 2.0 * M_PI);
    b.center = Vec2(r * std::cos(a), r * std::sin(a));
    b.width = rng.uniform(opt.width_min, opt.width_max);
    return b;
}

TrigMode random_mode(Rng& rng, const PhantomOptions& opt) {
    TrigMode m;
    m.k = Vec2(rng.uniform(-opt.mode_max, opt.mode_max), rng.uniform(-opt.mode_max, opt.mode_max));
    m.phase = rng.uniform(0.0, 2.0 * M_PI);
    return m;
}

double coef_scale(const PhantomOptions& opt) {
    return opt.amplitude / std::sqrt(double(std::max(1, opt.n_bumps + opt.n_modes)));
}

}  // namespace

SmoothField random_scalar(Rng& rng, const PhantomOptions& opt) {
    SmoothField f;
    const double s = coef_scale(opt);
    for (int b = 0; b < opt.n_bumps; ++b) {
        f.bumps.push_back(random_bump(rng, opt));
        f.bump_coef.push_back(s * rng.normal());
    }
    for (int m = 0; m < opt.n_modes; ++m) {
        f.modes.push_back(random_mode(rng, opt));
        f.mode_coef.push_back(s * rng.normal());
    }
    return f;
}

SmoothField random_scalar_cn(Rng& rng, int order, double target, double radius,
                             const PhantomOptions& opt) {
    const SmoothField f = random_scalar(rng, opt);
    const double n = c_norm(f, order, radius);
    if (n == 0.0) return f;
    return f.scaled(target / n);
}

WindowedScalar random_windowed(Rng& rng, double R, const PhantomOptions& opt) {
    return WindowedScalar{random_scalar(rng, opt), R};
}

std::shared_ptr<BasisPair> random_pair(int k, Rng& rng, const PhantomOptions& opt) {
    BasisSet basis;
    for (int b = 0; b < opt.n_bumps; ++b) basis.bumps.push_back(random_bump(rng, opt));
    for (int m = 0; m < opt.n_modes; ++m) basis.modes.push_back(random_mode(rng, opt));
    auto p = std::make_shared<BasisPair>(k, basis);
    const double s = coef_scale(opt);
    for (int slot = 0; slot < 3; ++slot)
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j)
                for (int b = 0; b < basis.size(); ++b)
                    p->coefficient(slot, i, j, b) = s * Complex(rng.normal(), rng.normal());
    return p;
}

PairPtr random_pair_cn(int k, int order, double target, double radius, Rng& rng,
                       const PhantomOptions& opt) {
    auto p = random_pair(k, rng, opt);
    const double n = c_norm(*p, order, radius);
    if (n > 0.0) {
        const Complex s(target / n);
        for (int slot = 0; slot < 3; ++slot)
            for (int i = 0; i < k; ++i)
                for (int j = 0; j < k; ++j) {
                    p->constant(slot, i, j) *= s;
                    for (int b = 0; b < p->basis_size(); ++b)
                        p->coefficient(slot, i, j, b) *= s;
                }
    }
    return p;
}

AnalyticGauge random_gauge(int k, Rng& rng, double scale, bool boundary_identity,
                           const PhantomOptions& opt) {
    AnalyticGauge g(k);
    const int n_factors = 2;
    for (int t = 0; t < n_factors; ++t) {
        CMat gen(k, k);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j)
                gen(i, j) = Complex(rng.normal(), rng.normal()) / std::sqrt(2.0 * k);
        GaugeScalar s;
        s.base = random_scalar(rng, opt).scaled(scale / opt.amplitude);
        s.disk_cutoff = boundary_identity;
        s.cutoff_radius = 1.0;
        g.add_factor(std::move(s), gen);
    }
    return g;
}

Field random_vector_field(GridPtr grid, int comps, Rng& rng, bool boundary_zero,
                          const PhantomOptions& opt) {
    Field out(grid, comps);
    std::vector<SmoothField> re, im;
    for (int c = 0; c < comps; ++c) {
        re.push_back(random_scalar(rng, opt));
        im.push_back(random_scalar(rng, opt));
    }
    for (int i = 0; i < grid->n_r; ++i) {
        const double w =
            boundary_zero ? 1.0 - (grid->r(i) * grid->r(i)) / (grid->r_max * grid->r_max) : 1.0;
        for (int j = 0; j < grid->n_theta; ++j) {
            const Vec2 x = grid->point(i, j);
            Complex* p = &out.data[std::size_t(grid->idx(i, j)) * comps];
            for (int c = 0; c < comps; ++c)
                p[c] = w * Complex(re[c].value(x), im[c].value(x));
        }
    }
    out.sync_center();
    return out;
}

PairField random_pair_field(GridPtr grid, int comps, Rng& rng, const PhantomOptions& opt) {
    PairField out(grid, comps);
    out.a1 = random_vector_field(grid, comps, rng, false, opt);
    out.a2 = random_vector_field(grid, comps, rng, false, opt);
    out.f = random_vector_field(grid, comps, rng, false, opt);
    return out;
}

void JetCompatiblePair::eval(const Vec2& x, CMat& a1, CMat& a2, CMat& phi) const {
    const int k = rank();
    CMat u1(k, k), u2(k, k), rho(k, k), psi(k, k);
    rho_->eval(x, u1, u2, rho);
    psi_->eval(x, u1, u2, psi);
    a1 = x[0] * rho;
    a2 = x[1] * rho;
    phi = (1.0 - x.squaredNorm()) * psi;
}

std::string JetCompatiblePair::describe() const {
    return "radial(" + rho_->describe() + ";" + psi_->describe() + ")";
}

PairPtr random_jet_compatible(int k, Rng& rng, const PhantomOptions& opt) {
    return std::make_shared<JetCompatiblePair>(random_pair(k, rng, opt),
                                               random_pair(k, rng, opt));
}

namespace {

// Five-point central difference rows for derivative orders 0..4 at spacing h.
void stencil_row(int order, double h, double* c) {
    switch (order) {
        case 0: c[0] = 0; c[1] = 0; c[2] = 1; c[3] = 0; c[4] = 0; return;
        case 1: c[0] = 1; c[1] = -8; c[2] = 0; c[3] = 8; c[4] = -1; break;
        case 2: c[0] = -1; c[1] = 16; c[2] = -30; c[3] = 16; c[4] = -1; break;
        case 3: c[0] = -1; c[1] = 2; c[2] = 0; c[3] = -2; c[4] = 1; break;
        case 4: c[0] = 1; c[1] = -4; c[2] = 6; c[3] = -4; c[4] = 1; break;
        default: throw ValidationError("order", "derivative order must be 0..4");
    }
    static const double denom[5] = {1.0, 12.0, 12.0, 2.0, 1.0};
    const double d = denom[order] * std::pow(h, order);
    for (int i = 0; i < 5; ++i) c[i] /= d;
}

template <class EvalFn>
double c_norm_impl(int order, double radius, int values_per_point, const EvalFn& eval) {
    if (order < 0 || order > 4) throw ValidationError("order", "derivative order must be 0..4");
    const double h = 0.02;
    double rows[5][5];
    for (int o = 0; o <= order; ++o) stencil_row(o, h, rows[o]);
    const int n_r = 13, n_t = 40;
    std::vector<Complex> grid(std::size_t(25) * values_per_point);
    std::vector<Complex> partial(std::size_t(5) * values_per_point);
    double worst = 0.0;
    for (int ir = 0; ir <= n_r; ++ir) {
        const double r = radius * ir / n_r;
        const int nt = ir == 0 ? 1 : n_t;
        for (int it = 0; it < nt; ++it) {
            const double th = 2.0 * M_PI * it / nt;
            const Vec2 x0(r * std::cos(th), r * std::sin(th));
            for (int a = 0; a < 5; ++a)
                for (int b = 0; b < 5; ++b)
                    eval(Vec2(x0[0] + (a - 2) * h, x0[1] + (b - 2) * h),
                         &grid[std::size_t(a * 5 + b) * values_per_point]);
            for (int ox = 0; ox <= order; ++ox) {
                // contract the x-stencil first, then each y-stencil
                for (int b = 0; b < 5; ++b)
                    for (int v = 0; v < values_per_point; ++v) {
                        Complex s(0.0);
                        for (int a = 0; a < 5; ++a)
                            s += rows[ox][a] * grid[std::size_t(a * 5 + b) * values_per_point + v];
                        partial[std::size_t(b) * values_per_point + v] = s;
                    }
                for (int oy = 0; oy + ox <= order; ++oy)
                    for (int v = 0; v < values_per_point; ++v) {
                        Complex s(0.0);
                        for (int b = 0; b < 5; ++b)
                            s += rows[oy][b] * partial[std::size_t(b) * values_per_point + v];
                        worst = std::max(worst, std::abs(s));
                    }
            }
        }
    }
    return worst;
}

}  // namespace

double c_norm(const SmoothField& f, int order, double radius) {
    return c_norm_impl(order, radius, 1,
                       [&](const Vec2& x, Complex* out) { out[0] = f.value(x); });
}

double c_norm(const AttenuationPair& p, int order, double radius) {
    const int k = p.rank();
    CMat a1(k, k), a2(k, k), phi(k, k);
    return c_norm_impl(order, radius, 3 * k * k, [&](const Vec2& x, Complex* out) {
        p.eval(x, a1, a2, phi);
        pack_matrix(a1, out);
        pack_matrix(a2, out + k * k);
        pack_matrix(phi, out + 2 * k * k);
    });
}

double c2_norm(const WindowedScalar& f, double radius) {
    double worst = 0.0;
    const int n_r = 16, n_t = 48;
    for (int ir = 0; ir <= n_r; ++ir) {
        const double r = radius * ir / n_r;
        const int nt = ir == 0 ? 1 : n_t;
        for (int it = 0; it < nt; ++it) {
            const double th = 2.0 * M_PI * it / nt;
            const Vec2 x(r * std::cos(th), r * std::sin(th));
            worst = std::max(worst, std::abs(f.value(x)));
            const Vec2 g = f.grad(x);
            worst = std::max({worst, std::abs(g[0]), std::abs(g[1])});
            const Mat2 h = f.hess(x);
            worst = std::max({worst, std::abs(h(0, 0)), std::abs(h(0, 1)), std::abs(h(1, 1))});
        }
    }
    return worst;
}

}  // namespace paratomo
