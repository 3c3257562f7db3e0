#pragma once

#include <memory>
#include <vector>

#include "paratomo/errors.hpp"
#include "paratomo/metric.hpp"
#include "paratomo/types.hpp"

namespace paratomo {

/// Uniform polar-logical grid on a disk: nodes (r_i, theta_j) with
/// r_i = i * r_max / (n_r - 1) (center and boundary included) and
/// theta_j = 2 pi j / n_theta (periodic).  n_theta must be even so that
/// radial stencils can reach across the center via f(-r, th) = f(r, th + pi).
struct PolarGrid {
    int n_r = 0;
    int n_theta = 0;
    double r_max = 1.0;

    PolarGrid(int nr, int nt, double rmax) : n_r(nr), n_theta(nt), r_max(rmax) {
        if (nr < 5 || nt < 4) throw ValidationError("grid", "polar grid needs n_r >= 5, n_theta >= 4");
        if (nt % 2 != 0) throw ValidationError("grid", "n_theta must be even");
    }

    double dr() const { return r_max / (n_r - 1); }
    double dtheta() const { return 2.0 * M_PI / n_theta; }
    double r(int i) const { return i * dr(); }
    double theta(int j) const { return j * dtheta(); }
    Vec2 point(int i, int j) const {
        const double rr = r(i), th = theta(j);
        return Vec2(rr * std::cos(th), rr * std::sin(th));
    }
    int idx(int i, int j) const { return i * n_theta + j; }
    int count() const { return n_r * n_theta; }
    int wrap(int j) const { return ((j % n_theta) + n_theta) % n_theta; }

    /// Coordinate-area weight r dr dtheta (trapezoid in r, exact in theta);
    /// metric volume factors are applied by the caller.
    double coord_weight(int i) const {
        const double end = (i == 0 || i == n_r - 1) ? 0.5 : 1.0;
        return end * r(i) * dr() * dtheta();
    }

    bool same(const PolarGrid& o) const {
        return n_r == o.n_r && n_theta == o.n_theta && r_max == o.r_max;
    }
};

using GridPtr = std::shared_ptr<const PolarGrid>;

inline GridPtr make_grid(int n_r, int n_theta, double r_max) {
    return std::make_shared<const PolarGrid>(n_r, n_theta, r_max);
}

/// Complex vector-valued (k components) nodal function on a polar grid.
/// Values at arbitrary points come from bilinear interpolation in the logical
/// coordinates, with zero extension outside the grid radius.
struct Field {
    GridPtr grid;
    int k = 1;
    std::vector<Complex> data;

    Field() = default;
    Field(GridPtr g, int k_) : grid(std::move(g)), k(k_), data(grid->count() * k_, Complex(0.0)) {}

    Complex& comp(int i, int j, int c) { return data[(grid->idx(i, j)) * k + c]; }
    const Complex& comp(int i, int j, int c) const { return data[(grid->idx(i, j)) * k + c]; }

    CVec at(int i, int j) const {
        CVec v(k);
        const Complex* p = &data[grid->idx(i, j) * k];
        for (int c = 0; c < k; ++c) v[c] = p[c];
        return v;
    }
    void set(int i, int j, const CVec& v) {
        Complex* p = &data[grid->idx(i, j) * k];
        for (int c = 0; c < k; ++c) p[c] = v[c];
    }

    /// Make the center value single-valued by averaging over the stored row.
    void sync_center();

    /// Bilinear interpolation weights for a point; returns false when the
    /// point lies outside the grid radius (sample is zero there).
    struct Stencil {
        int i0, j0, j1;
        double wr, wt;  // fractional weights toward (i0+1) and j1
    };
    bool locate(const Vec2& x, Stencil& s) const {
        const double rr = std::hypot(x[0], x[1]);
        if (rr > grid->r_max * (1.0 + 1e-12)) return false;
        double th = std::atan2(x[1], x[0]);
        if (th < 0.0) th += 2.0 * M_PI;
        const double u = std::min(rr / grid->dr(), double(grid->n_r - 1));
        s.i0 = std::min(static_cast<int>(u), grid->n_r - 2);
        s.wr = u - s.i0;
        const double w = th / grid->dtheta();
        s.j0 = std::min(static_cast<int>(w), grid->n_theta - 1);
        s.wt = w - s.j0;
        s.j1 = grid->wrap(s.j0 + 1);
        return true;
    }

    void accumulate(const Stencil& s, Complex* out) const {
        const double w00 = (1.0 - s.wr) * (1.0 - s.wt), w01 = (1.0 - s.wr) * s.wt;
        const double w10 = s.wr * (1.0 - s.wt), w11 = s.wr * s.wt;
        const Complex* p00 = &data[grid->idx(s.i0, s.j0) * k];
        const Complex* p01 = &data[grid->idx(s.i0, s.j1) * k];
        const Complex* p10 = &data[grid->idx(s.i0 + 1, s.j0) * k];
        const Complex* p11 = &data[grid->idx(s.i0 + 1, s.j1) * k];
        for (int c = 0; c < k; ++c)
            out[c] = w00 * p00[c] + w01 * p01[c] + w10 * p10[c] + w11 * p11[c];
    }

    CVec sample(const Vec2& x) const {
        CVec v = CVec::Zero(k);
        Stencil s;
        if (locate(x, s)) accumulate(s, v.data());
        return v;
    }
};

Field operator+(const Field& a, const Field& b);
Field operator-(const Field& a, const Field& b);
Field operator*(Complex s, const Field& a);

/// Fourth-order logical derivatives (one-sided at the outer edge, reaching
/// across the center radially).
Field d_logical_r(const Field& f);
Field d_logical_theta(const Field& f);

/// Cartesian gradient components of every entry of f.
struct FieldGrad {
    Field dx, dy;
};
FieldGrad cart_grad(const Field& f);

/// Second-order variant (three-point stencils, single-ring center projection);
/// used where a compact stencil matters more than accuracy, e.g. assembling
/// sparse elliptic systems.
FieldGrad cart_grad2(const Field& f);

/// Bilinear resampling onto another grid (zero outside the source radius).
Field resample(const Field& f, GridPtr target);

/// Triple (alpha_1, alpha_2, f): covector components in the Cartesian frame
/// plus the function part, all k-vector valued on a shared grid.
struct PairField {
    GridPtr grid;
    int k = 1;
    Field a1, a2, f;

    PairField() = default;
    PairField(GridPtr g, int k_) : grid(g), k(k_), a1(g, k_), a2(g, k_), f(g, k_) {}

    struct Sample {
        CVec a1, a2, f;
    };
    Sample sample(const Vec2& x) const {
        Sample s{CVec::Zero(k), CVec::Zero(k), CVec::Zero(k)};
        Field::Stencil st;
        if (a1.locate(x, st)) {
            a1.accumulate(st, s.a1.data());
            a2.accumulate(st, s.a2.data());
            f.accumulate(st, s.f.data());
        }
        return s;
    }
};

PairField operator+(const PairField& a, const PairField& b);
PairField operator-(const PairField& a, const PairField& b);
PairField operator*(Complex s, const PairField& a);
PairField resample(const PairField& h, GridPtr target);

/// L2 inner product of scalar-stack fields: sum over nodes of the metric
/// volume times the pointwise hermitian product (conjugation on b).
Complex l2_inner(const MetricField& m, const Field& a, const Field& b);
double l2_norm(const MetricField& m, const Field& a);

/// Pair inner product: covector parts paired through the inverse metric,
/// function parts pointwise; metric volume quadrature.
Complex pair_inner(const MetricField& m, const PairField& a, const PairField& b);
double pair_l2_norm(const MetricField& m, const PairField& a);

/// L2 plus first-derivative seminorm (all components, metric-weighted).
double pair_h1_norm(const MetricField& m, const PairField& a);
double field_h1_norm(const MetricField& m, const Field& a);

}  // namespace paratomo
