#include "paratomo/realify.hpp"

#include <cmath>
#include <utility>

namespace paratomo {

namespace {

// Complex k x k to real-block 2k x 2k, written into a complex matrix so the
// realified system can run through the unchanged (complex) transport code.
void block_form(const CMat& w, CMat& out) {
    const int k = int(w.rows());
    out.resize(2 * k, 2 * k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            const double re = w(i, j).real(), im = w(i, j).imag();
            out(i, j) = Complex(re);
            out(i, j + k) = Complex(-im);
            out(i + k, j) = Complex(im);
            out(i + k, j + k) = Complex(re);
        }
}

}  // namespace

RMat realify_weight(const CMat& w) {
    const int k = int(w.rows());
    if (w.cols() != k) throw ValidationError("weight", "matrix must be square");
    if (2 * k > kMaxRank) throw ValidationError("weight", "realified size exceeds the maximum rank");
    RMat out(2 * k, 2 * k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            const double re = w(i, j).real(), im = w(i, j).imag();
            out(i, j) = re;
            out(i, j + k) = -im;
            out(i + k, j) = im;
            out(i + k, j + k) = re;
        }
    return out;
}

RealifiedPair::RealifiedPair(PairPtr base) : base_(std::move(base)) {
    if (!base_) throw ValidationError("pair", "null pair");
    if (2 * base_->rank() > kMaxRank)
        throw ValidationError("pair", "realified rank exceeds the supported maximum");
}

void RealifiedPair::eval(const Vec2& x, CMat& a1, CMat& a2, CMat& phi) const {
    const int k = base_->rank();
    CMat b1(k, k), b2(k, k), bf(k, k);
    base_->eval(x, b1, b2, bf);
    block_form(b1, a1);
    block_form(b2, a2);
    block_form(bf, phi);
}

std::string RealifiedPair::describe() const { return "realified(" + base_->describe() + ")"; }

Field realify_vec(const Field& f) {
    Field out(f.grid, 2 * f.k);
    const int n = f.grid->count();
    for (int id = 0; id < n; ++id)
        for (int c = 0; c < f.k; ++c) {
            const Complex v = f.data[std::size_t(id) * f.k + c];
            out.data[std::size_t(id) * out.k + c] = Complex(v.real());
            out.data[std::size_t(id) * out.k + f.k + c] = Complex(v.imag());
        }
    return out;
}

PairField realify_field(const PairField& h) {
    PairField out(h.grid, 2 * h.k);
    out.a1 = realify_vec(h.a1);
    out.a2 = realify_vec(h.a2);
    out.f = realify_vec(h.f);
    return out;
}

EquivalenceReport equivalence_check(PairPtr pair, const MetricField& m, const PairField& h,
                                    FanPtr fan, const TraceOptions& opt) {
    if (!pair) throw ValidationError("pair", "null pair");
    const int k = pair->rank();
    if (h.k != k) throw ValidationError("h", "field components must match the rank");
    const FanData fc = forward_pair(m, *pair, h, fan, opt);
    const RealifiedPair real_pair(pair);
    const FanData fr = forward_pair(m, real_pair, realify_field(h), fan, opt);

    EquivalenceReport rep;
    for (int i = 0; i < fan->n_beta; ++i)
        for (int j = 0; j < fan->n_alpha; ++j) {
            const Complex* pc = fc.node(i, j);
            const Complex* pr = fr.node(i, j);
            for (int c = 0; c < k; ++c) {
                rep.data_scale = std::max(rep.data_scale, std::abs(pc[c]));
                rep.max_mismatch = std::max(rep.max_mismatch,
                                            std::abs(pc[c].real() - pr[c].real()));
                rep.max_mismatch = std::max(rep.max_mismatch,
                                            std::abs(pc[c].imag() - pr[k + c].real()));
            }
        }
    return rep;
}

}  // namespace paratomo
