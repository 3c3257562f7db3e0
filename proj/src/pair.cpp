#include "paratomo/pair.hpp"

#include <cmath>

#include "paratomo/errors.hpp"

namespace paratomo {

CMat cexp(const CMat& m) {
    const int k = int(m.rows());
    double nrm = 0.0;
    for (int j = 0; j < k; ++j) {
        double col = 0.0;
        for (int i = 0; i < k; ++i) col += std::abs(m(i, j));
        nrm = std::max(nrm, col);
    }
    int squarings = 0;
    double scale = 1.0;
    while (nrm * scale > 0.25) {
        scale *= 0.5;
        ++squarings;
    }
    const CMat t = scale * m;
    CMat term = cidentity(k);
    CMat sum = term;
    for (int n = 1; n < 32; ++n) {
        term = (term * t) / double(n);
        sum += term;
        if (term.cwiseAbs().maxCoeff() < 1e-18) break;
    }
    for (int s = 0; s < squarings; ++s) sum = sum * sum;
    return sum;
}

BasisPair::BasisPair(int k, BasisSet basis)
    : k_(k),
      nb_(int(basis.size())),
      basis_(std::move(basis)),
      const_(3 * k * k, Complex(0.0)),
      coef_(std::size_t(3 * k * k) * nb_, Complex(0.0)),
      scratch_(nb_, 0.0) {
    if (k < 1 || k > kMaxRank) throw ValidationError("rank", "pair rank out of range");
}

void BasisPair::eval(const Vec2& x, CMat& a1, CMat& a2, CMat& phi) const {
    basis_.eval(x, scratch_.data());
    CMat* slots[3] = {&a1, &a2, &phi};
    for (int s = 0; s < 3; ++s) {
        CMat& m = *slots[s];
        m.resize(k_, k_);
        for (int i = 0; i < k_; ++i)
            for (int j = 0; j < k_; ++j) {
                const std::size_t e = std::size_t(s * k_ + i) * k_ + j;
                Complex v = const_[e];
                const Complex* c = &coef_[e * nb_];
                for (int b = 0; b < nb_; ++b) v += c[b] * scratch_[b];
                m(i, j) = v;
            }
    }
}

void BasisPair::attenuation(const Vec2& x, const Vec2& v, CMat& out) const {
    basis_.eval(x, scratch_.data());
    out.resize(k_, k_);
    const int kk = k_ * k_;
    for (int i = 0; i < k_; ++i)
        for (int j = 0; j < k_; ++j) {
            const std::size_t e = std::size_t(i) * k_ + j;
            Complex val = v[0] * const_[e] + v[1] * const_[kk + e] + const_[2 * kk + e];
            const Complex* c1 = &coef_[e * nb_];
            const Complex* c2 = &coef_[(kk + e) * nb_];
            const Complex* c3 = &coef_[(2 * kk + e) * nb_];
            for (int b = 0; b < nb_; ++b)
                val += (v[0] * c1[b] + v[1] * c2[b] + c3[b]) * scratch_[b];
            out(i, j) = val;
        }
}

std::string BasisPair::describe() const {
    return "basis(k=" + std::to_string(k_) + ",nb=" + std::to_string(nb_) + ")";
}

void AnalyticGauge::add_factor(GaugeScalar s, CMat generator) {
    if (int(generator.rows()) != k_ || int(generator.cols()) != k_)
        throw ValidationError("gauge", "generator rank mismatch");
    factors_.push_back({std::move(s), std::move(generator)});
}

CMat AnalyticGauge::value(const Vec2& x) const {
    CMat p = cidentity(k_);
    for (const auto& f : factors_) p = p * cexp(f.s.value(x) * f.gen);
    return p;
}

CMat AnalyticGauge::inverse(const Vec2& x) const {
    CMat p = cidentity(k_);
    for (auto it = factors_.rbegin(); it != factors_.rend(); ++it)
        p = p * cexp(-it->s.value(x) * it->gen);
    return p;
}

void AnalyticGauge::derivative(const Vec2& x, CMat& d1, CMat& d2) const {
    // Product rule over the factors; each factor's derivative is
    // (grad s) G exp(s G) since G commutes with its own exponential.
    const int m = int(factors_.size());
    d1.setZero(k_, k_);
    d2.setZero(k_, k_);
    std::vector<CMat> vals(m);
    std::vector<Vec2> grads(m);
    for (int t = 0; t < m; ++t) {
        vals[t] = cexp(factors_[t].s.value(x) * factors_[t].gen);
        grads[t] = factors_[t].s.grad(x);
    }
    for (int t = 0; t < m; ++t) {
        CMat piece = cidentity(k_);
        for (int u = 0; u < t; ++u) piece = piece * vals[u];
        piece = piece * (factors_[t].gen * vals[t]);
        for (int u = t + 1; u < m; ++u) piece = piece * vals[u];
        d1 += grads[t][0] * piece;
        d2 += grads[t][1] * piece;
    }
}

std::string AnalyticGauge::describe() const {
    std::string s = "exp[";
    for (std::size_t t = 0; t < factors_.size(); ++t) {
        if (t) s += "*";
        s += describe_field(factors_[t].s.base);
        if (factors_[t].s.disk_cutoff) s += "|cut";
    }
    return s + "]";
}

void GaugeTransformedPair::eval(const Vec2& x, CMat& a1, CMat& a2, CMat& phi) const {
    const int k = rank();
    CMat b1(k, k), b2(k, k), bphi(k, k);
    base_->eval(x, b1, b2, bphi);
    const CMat p = gauge_.value(x);
    const CMat pinv = gauge_.inverse(x);
    CMat d1(k, k), d2(k, k);
    gauge_.derivative(x, d1, d2);
    a1 = pinv * (d1 + b1 * p);
    a2 = pinv * (d2 + b2 * p);
    phi = pinv * bphi * p;
}

GridPair::GridPair(int k, PairField field) : k_(k), field_(std::move(field)) {
    if (field_.k != k * k) throw ValidationError("rank", "grid pair needs k^2 packed components");
}

void GridPair::eval(const Vec2& x, CMat& a1, CMat& a2, CMat& phi) const {
    const PairField::Sample s = field_.sample(x);
    a1 = unpack_matrix(s.a1.data(), k_);
    a2 = unpack_matrix(s.a2.data(), k_);
    phi = unpack_matrix(s.f.data(), k_);
}

std::string GridPair::describe() const {
    return "grid(k=" + std::to_string(k_) + "," + std::to_string(field_.grid->n_r) + "x" +
           std::to_string(field_.grid->n_theta) + ")";
}

ScaledSumPair::ScaledSumPair(std::vector<std::pair<Complex, PairPtr>> terms)
    : terms_(std::move(terms)) {
    if (terms_.empty()) throw ValidationError("rank", "empty pair combination");
    k_ = terms_.front().second->rank();
    for (const auto& t : terms_)
        if (t.second->rank() != k_) throw ValidationError("rank", "pair ranks differ");
}

void ScaledSumPair::eval(const Vec2& x, CMat& a1, CMat& a2, CMat& phi) const {
    a1.setZero(k_, k_);
    a2.setZero(k_, k_);
    phi.setZero(k_, k_);
    CMat t1(k_, k_), t2(k_, k_), tp(k_, k_);
    for (const auto& t : terms_) {
        t.second->eval(x, t1, t2, tp);
        a1 += t.first * t1;
        a2 += t.first * t2;
        phi += t.first * tp;
    }
}

void ScaledSumPair::attenuation(const Vec2& x, const Vec2& v, CMat& out) const {
    out.setZero(k_, k_);
    CMat tmp(k_, k_);
    for (const auto& t : terms_) {
        t.second->attenuation(x, v, tmp);
        out += t.first * tmp;
    }
}

std::string ScaledSumPair::describe() const {
    std::string s = "sum(";
    char buf[64];
    for (std::size_t t = 0; t < terms_.size(); ++t) {
        if (t) s += ",";
        std::snprintf(buf, sizeof buf, "%.17g%+.17gi*", terms_[t].first.real(),
                      terms_[t].first.imag());
        s += buf;
        s += terms_[t].second->describe();
    }
    return s + ")";
}

PairField discretize(const AttenuationPair& p, GridPtr grid) {
    const int k = p.rank();
    PairField out(grid, k * k);
    CMat a1(k, k), a2(k, k), phi(k, k);
    for (int i = 0; i < grid->n_r; ++i)
        for (int j = 0; j < grid->n_theta; ++j) {
            p.eval(grid->point(i, j), a1, a2, phi);
            const int n = grid->idx(i, j) * k * k;
            pack_matrix(a1, &out.a1.data[n]);
            pack_matrix(a2, &out.a2.data[n]);
            pack_matrix(phi, &out.f.data[n]);
        }
    return out;
}

PairField discretize_difference(const AttenuationPair& a, const AttenuationPair& b, GridPtr grid) {
    if (a.rank() != b.rank()) throw ValidationError("rank", "pair ranks differ");
    const int k = a.rank();
    PairField out(grid, k * k);
    CMat a1(k, k), a2(k, k), phi(k, k), b1(k, k), b2(k, k), bphi(k, k);
    for (int i = 0; i < grid->n_r; ++i)
        for (int j = 0; j < grid->n_theta; ++j) {
            const Vec2 x = grid->point(i, j);
            a.eval(x, a1, a2, phi);
            b.eval(x, b1, b2, bphi);
            const int n = grid->idx(i, j) * k * k;
            pack_matrix(b1 - a1, &out.a1.data[n]);
            pack_matrix(b2 - a2, &out.a2.data[n]);
            pack_matrix(bphi - phi, &out.f.data[n]);
        }
    return out;
}

}  // namespace paratomo
