#include "paratomo/grid_field.hpp"

namespace paratomo {

void Field::sync_center() {
    const int nt = grid->n_theta;
    for (int c = 0; c < k; ++c) {
        Complex avg(0.0);
        for (int j = 0; j < nt; ++j) avg += comp(0, j, c);
        avg /= double(nt);
        for (int j = 0; j < nt; ++j) comp(0, j, c) = avg;
    }
}

static void check_same(const Field& a, const Field& b) {
    if (!a.grid->same(*b.grid) || a.k != b.k)
        throw ValidationError("grid", "field shapes differ");
}

Field operator+(const Field& a, const Field& b) {
    check_same(a, b);
    Field r = a;
    for (size_t n = 0; n < r.data.size(); ++n) r.data[n] += b.data[n];
    return r;
}

Field operator-(const Field& a, const Field& b) {
    check_same(a, b);
    Field r = a;
    for (size_t n = 0; n < r.data.size(); ++n) r.data[n] -= b.data[n];
    return r;
}

Field operator*(Complex s, const Field& a) {
    Field r = a;
    for (auto& v : r.data) v *= s;
    return r;
}

// Value at logical radial index i (possibly negative) and angular index j:
// negative radii map across the center, f(-r, th) = f(r, th + pi).
static inline const Complex* row(const Field& f, int i, int j) {
    const int nt = f.grid->n_theta;
    if (i < 0) {
        i = -i;
        j += nt / 2;
    }
    j = ((j % nt) + nt) % nt;
    return &f.data[f.grid->idx(i, j) * f.k];
}

Field d_logical_r(const Field& f) {
    const PolarGrid& g = *f.grid;
    Field out(f.grid, f.k);
    const double h12 = 1.0 / (12.0 * g.dr());
    for (int i = 0; i < g.n_r; ++i) {
        for (int j = 0; j < g.n_theta; ++j) {
            Complex* o = &out.data[g.idx(i, j) * f.k];
            if (i <= g.n_r - 3) {
                const Complex* m2 = row(f, i - 2, j);
                const Complex* m1 = row(f, i - 1, j);
                const Complex* p1 = row(f, i + 1, j);
                const Complex* p2 = row(f, i + 2, j);
                for (int c = 0; c < f.k; ++c)
                    o[c] = (m2[c] - 8.0 * m1[c] + 8.0 * p1[c] - p2[c]) * h12;
            } else if (i == g.n_r - 2) {
                const Complex* m3 = row(f, i - 3, j);
                const Complex* m2 = row(f, i - 2, j);
                const Complex* m1 = row(f, i - 1, j);
                const Complex* z0 = row(f, i, j);
                const Complex* p1 = row(f, i + 1, j);
                for (int c = 0; c < f.k; ++c)
                    o[c] = (-m3[c] + 6.0 * m2[c] - 18.0 * m1[c] + 10.0 * z0[c] + 3.0 * p1[c]) * h12;
            } else {
                const Complex* m4 = row(f, i - 4, j);
                const Complex* m3 = row(f, i - 3, j);
                const Complex* m2 = row(f, i - 2, j);
                const Complex* m1 = row(f, i - 1, j);
                const Complex* z0 = row(f, i, j);
                for (int c = 0; c < f.k; ++c)
                    o[c] = (3.0 * m4[c] - 16.0 * m3[c] + 36.0 * m2[c] - 48.0 * m1[c] + 25.0 * z0[c]) * h12;
            }
        }
    }
    return out;
}

Field d_logical_theta(const Field& f) {
    const PolarGrid& g = *f.grid;
    Field out(f.grid, f.k);
    const double h12 = 1.0 / (12.0 * g.dtheta());
    for (int i = 0; i < g.n_r; ++i) {
        for (int j = 0; j < g.n_theta; ++j) {
            const Complex* m2 = row(f, i, j - 2);
            const Complex* m1 = row(f, i, j - 1);
            const Complex* p1 = row(f, i, j + 1);
            const Complex* p2 = row(f, i, j + 2);
            Complex* o = &out.data[g.idx(i, j) * f.k];
            for (int c = 0; c < f.k; ++c)
                o[c] = (m2[c] - 8.0 * m1[c] + 8.0 * p1[c] - p2[c]) * h12;
        }
    }
    return out;
}

FieldGrad cart_grad(const Field& f) {
    const PolarGrid& g = *f.grid;
    const Field fr = d_logical_r(f);
    const Field ft = d_logical_theta(f);
    FieldGrad out{Field(f.grid, f.k), Field(f.grid, f.k)};
    for (int i = 1; i < g.n_r; ++i) {
        const double inv_r = 1.0 / g.r(i);
        for (int j = 0; j < g.n_theta; ++j) {
            const double th = g.theta(j);
            const double ct = std::cos(th), st = std::sin(th);
            const Complex* pr = &fr.data[g.idx(i, j) * f.k];
            const Complex* pt = &ft.data[g.idx(i, j) * f.k];
            Complex* ox = &out.dx.data[g.idx(i, j) * f.k];
            Complex* oy = &out.dy.data[g.idx(i, j) * f.k];
            for (int c = 0; c < f.k; ++c) {
                ox[c] = ct * pr[c] - st * inv_r * pt[c];
                oy[c] = st * pr[c] + ct * inv_r * pt[c];
            }
        }
    }
    // Center: project the first angular harmonic of the nearby rings onto
    // (cos, sin) and Richardson-extrapolate the resulting difference quotient.
    const int nt = g.n_theta;
    for (int c = 0; c < f.k; ++c) {
        Complex gc1(0.0), gs1(0.0), gc2(0.0), gs2(0.0);
        for (int j = 0; j < nt; ++j) {
            const double th = g.theta(j);
            gc1 += f.comp(1, j, c) * std::cos(th);
            gs1 += f.comp(1, j, c) * std::sin(th);
            gc2 += f.comp(2, j, c) * std::cos(th);
            gs2 += f.comp(2, j, c) * std::sin(th);
        }
        const double scale = 2.0 / nt;
        const double h = g.dr();
        const Complex dx1 = scale * gc1 / h, dx2 = scale * gc2 / (2.0 * h);
        const Complex dy1 = scale * gs1 / h, dy2 = scale * gs2 / (2.0 * h);
        const Complex dx = (4.0 * dx1 - dx2) / 3.0;
        const Complex dy = (4.0 * dy1 - dy2) / 3.0;
        for (int j = 0; j < nt; ++j) {
            out.dx.comp(0, j, c) = dx;
            out.dy.comp(0, j, c) = dy;
        }
    }
    return out;
}

FieldGrad cart_grad2(const Field& f) {
    const PolarGrid& g = *f.grid;
    FieldGrad out{Field(f.grid, f.k), Field(f.grid, f.k)};
    const double ir2 = 1.0 / (2.0 * g.dr());
    const double it2 = 1.0 / (2.0 * g.dtheta());
    for (int i = 1; i < g.n_r; ++i) {
        const double inv_r = 1.0 / g.r(i);
        for (int j = 0; j < g.n_theta; ++j) {
            Complex* ox = &out.dx.data[g.idx(i, j) * f.k];
            Complex* oy = &out.dy.data[g.idx(i, j) * f.k];
            const double th = g.theta(j);
            const double ct = std::cos(th), st = std::sin(th);
            const Complex* tm = row(f, i, j - 1);
            const Complex* tp = row(f, i, j + 1);
            if (i < g.n_r - 1) {
                const Complex* rm = row(f, i - 1, j);
                const Complex* rp = row(f, i + 1, j);
                for (int c = 0; c < f.k; ++c) {
                    const Complex fr = (rp[c] - rm[c]) * ir2;
                    const Complex ft = (tp[c] - tm[c]) * it2;
                    ox[c] = ct * fr - st * inv_r * ft;
                    oy[c] = st * fr + ct * inv_r * ft;
                }
            } else {
                const Complex* m2 = row(f, i - 2, j);
                const Complex* m1 = row(f, i - 1, j);
                const Complex* z0 = row(f, i, j);
                for (int c = 0; c < f.k; ++c) {
                    const Complex fr = (3.0 * z0[c] - 4.0 * m1[c] + m2[c]) * ir2;
                    const Complex ft = (tp[c] - tm[c]) * it2;
                    ox[c] = ct * fr - st * inv_r * ft;
                    oy[c] = st * fr + ct * inv_r * ft;
                }
            }
        }
    }
    // center: first angular harmonic of the first ring
    const int nt = g.n_theta;
    const double scale = 2.0 / (nt * g.dr());
    for (int c = 0; c < f.k; ++c) {
        Complex gc(0.0), gs(0.0);
        for (int j = 0; j < nt; ++j) {
            const double th = g.theta(j);
            gc += f.comp(1, j, c) * std::cos(th);
            gs += f.comp(1, j, c) * std::sin(th);
        }
        for (int j = 0; j < nt; ++j) {
            out.dx.comp(0, j, c) = scale * gc;
            out.dy.comp(0, j, c) = scale * gs;
        }
    }
    return out;
}

Field resample(const Field& f, GridPtr target) {
    Field out(target, f.k);
    Field::Stencil s;
    for (int i = 0; i < target->n_r; ++i)
        for (int j = 0; j < target->n_theta; ++j) {
            const Vec2 x = target->point(i, j);
            Complex* o = &out.data[target->idx(i, j) * f.k];
            if (f.locate(x, s)) f.accumulate(s, o);
        }
    return out;
}

PairField operator+(const PairField& a, const PairField& b) {
    PairField r;
    r.grid = a.grid;
    r.k = a.k;
    r.a1 = a.a1 + b.a1;
    r.a2 = a.a2 + b.a2;
    r.f = a.f + b.f;
    return r;
}

PairField operator-(const PairField& a, const PairField& b) {
    PairField r;
    r.grid = a.grid;
    r.k = a.k;
    r.a1 = a.a1 - b.a1;
    r.a2 = a.a2 - b.a2;
    r.f = a.f - b.f;
    return r;
}

PairField operator*(Complex s, const PairField& a) {
    PairField r;
    r.grid = a.grid;
    r.k = a.k;
    r.a1 = s * a.a1;
    r.a2 = s * a.a2;
    r.f = s * a.f;
    return r;
}

PairField resample(const PairField& h, GridPtr target) {
    PairField r;
    r.grid = target;
    r.k = h.k;
    r.a1 = resample(h.a1, target);
    r.a2 = resample(h.a2, target);
    r.f = resample(h.f, target);
    return r;
}

static inline Complex herm(const Complex* a, const Complex* b, int k) {
    Complex s(0.0);
    for (int c = 0; c < k; ++c) s += a[c] * std::conj(b[c]);
    return s;
}

Complex l2_inner(const MetricField& m, const Field& a, const Field& b) {
    check_same(a, b);
    const PolarGrid& g = *a.grid;
    Complex acc(0.0);
    for (int i = 0; i < g.n_r; ++i) {
        const double w = g.coord_weight(i);
        if (w == 0.0) continue;
        for (int j = 0; j < g.n_theta; ++j) {
            const Vec2 x = g.point(i, j);
            const int n = g.idx(i, j) * a.k;
            acc += w * m.sqrt_det(x) * herm(&a.data[n], &b.data[n], a.k);
        }
    }
    return acc;
}

double l2_norm(const MetricField& m, const Field& a) {
    return std::sqrt(std::max(0.0, l2_inner(m, a, a).real()));
}

Complex pair_inner(const MetricField& m, const PairField& a, const PairField& b) {
    if (!a.grid->same(*b.grid) || a.k != b.k)
        throw ValidationError("grid", "pair shapes differ");
    const PolarGrid& g = *a.grid;
    const int k = a.k;
    Complex acc(0.0);
    for (int i = 0; i < g.n_r; ++i) {
        const double w = g.coord_weight(i);
        if (w == 0.0) continue;
        for (int j = 0; j < g.n_theta; ++j) {
            const Vec2 x = g.point(i, j);
            const Mat2 gi = m.metric_inv(x);
            const int n = g.idx(i, j) * k;
            Complex s = gi(0, 0) * herm(&a.a1.data[n], &b.a1.data[n], k) +
                        gi(0, 1) * (herm(&a.a1.data[n], &b.a2.data[n], k) +
                                    herm(&a.a2.data[n], &b.a1.data[n], k)) +
                        gi(1, 1) * herm(&a.a2.data[n], &b.a2.data[n], k) +
                        herm(&a.f.data[n], &b.f.data[n], k);
            acc += w * m.sqrt_det(x) * s;
        }
    }
    return acc;
}

double pair_l2_norm(const MetricField& m, const PairField& a) {
    return std::sqrt(std::max(0.0, pair_inner(m, a, a).real()));
}

// Metric-weighted gradient energy of every component of a stacked field.
static double grad_energy(const MetricField& m, const Field& f) {
    const FieldGrad gr = cart_grad(f);
    const PolarGrid& g = *f.grid;
    double acc = 0.0;
    for (int i = 0; i < g.n_r; ++i) {
        const double w = g.coord_weight(i);
        if (w == 0.0) continue;
        for (int j = 0; j < g.n_theta; ++j) {
            const Vec2 x = g.point(i, j);
            const Mat2 gi = m.metric_inv(x);
            const int n = g.idx(i, j) * f.k;
            const Complex* dx = &gr.dx.data[n];
            const Complex* dy = &gr.dy.data[n];
            double s = 0.0;
            for (int c = 0; c < f.k; ++c) {
                s += gi(0, 0) * std::norm(dx[c]) + gi(1, 1) * std::norm(dy[c]) +
                     2.0 * gi(0, 1) * (dx[c] * std::conj(dy[c])).real();
            }
            acc += w * m.sqrt_det(x) * s;
        }
    }
    return acc;
}

double field_h1_norm(const MetricField& m, const Field& a) {
    const double l2 = l2_inner(m, a, a).real();
    return std::sqrt(std::max(0.0, l2 + grad_energy(m, a)));
}

double pair_h1_norm(const MetricField& m, const PairField& a) {
    const double l2 = pair_inner(m, a, a).real();
    const double semi = grad_energy(m, a.a1) + grad_energy(m, a.a2) + grad_energy(m, a.f);
    return std::sqrt(std::max(0.0, l2 + semi));
}

}  // namespace paratomo
