#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "paratomo/grid_field.hpp"
#include "paratomo/smooth_field.hpp"
#include "paratomo/types.hpp"

namespace paratomo {

/// Column-major packing between k x k matrices and k^2 vectors (matches the
/// storage order Eigen uses, so reshapes are pure copies).
inline void pack_matrix(const CMat& m, Complex* out) {
    const int k = int(m.rows());
    for (int j = 0; j < k; ++j)
        for (int i = 0; i < k; ++i) *out++ = m(i, j);
}

inline CMat unpack_matrix(const Complex* p, int k) {
    CMat m(k, k);
    for (int j = 0; j < k; ++j)
        for (int i = 0; i < k; ++i) m(i, j) = *p++;
    return m;
}

/// Matrix exponential by scaling-and-squaring with a truncated series.
/// Deterministic and dependency-free; fine for the small ranks used here.
CMat cexp(const CMat& m);

/// A connection/Higgs pair: matrix-valued one-form components (A_1, A_2) in
/// the Cartesian frame plus a matrix potential Phi.  The combination that
/// enters transport equations is A_1 v^1 + A_2 v^2 + Phi.
class AttenuationPair {
  public:
    virtual ~AttenuationPair() = default;
    virtual int rank() const = 0;
    virtual void eval(const Vec2& x, CMat& a1, CMat& a2, CMat& phi) const = 0;
    virtual void attenuation(const Vec2& x, const Vec2& v, CMat& out) const {
        const int k = rank();
        CMat a1(k, k), a2(k, k), phi(k, k);
        eval(x, a1, a2, phi);
        out = v[0] * a1 + v[1] * a2 + phi;
    }
    virtual std::string describe() const = 0;
};

using PairPtr = std::shared_ptr<const AttenuationPair>;

class ZeroPair final : public AttenuationPair {
  public:
    explicit ZeroPair(int k) : k_(k) {}
    int rank() const override { return k_; }
    void eval(const Vec2&, CMat& a1, CMat& a2, CMat& phi) const override {
        a1.setZero(k_, k_);
        a2.setZero(k_, k_);
        phi.setZero(k_, k_);
    }
    void attenuation(const Vec2&, const Vec2&, CMat& out) const override { out.setZero(k_, k_); }
    std::string describe() const override { return "zero(" + std::to_string(k_) + ")"; }

  private:
    int k_;
};

/// Pair whose matrix entries are spanned by one shared scalar basis, so a
/// point evaluation costs a single pass over the basis functions regardless
/// of rank.  Entry (i,j) of slot s (0 = A_1, 1 = A_2, 2 = Phi) is
///   const_[s][i][j] + sum_b coef_[s][i][j][b] * basis_b(x).
class BasisPair final : public AttenuationPair {
  public:
    BasisPair(int k, BasisSet basis);

    int rank() const override { return k_; }
    int basis_size() const { return nb_; }
    const BasisSet& basis() const { return basis_; }

    Complex& constant(int slot, int i, int j) { return const_[(slot * k_ + i) * k_ + j]; }
    Complex& coefficient(int slot, int i, int j, int b) {
        return coef_[((slot * k_ + i) * k_ + j) * nb_ + b];
    }

    void eval(const Vec2& x, CMat& a1, CMat& a2, CMat& phi) const override;
    void attenuation(const Vec2& x, const Vec2& v, CMat& out) const override;
    std::string describe() const override;

  private:
    int k_;
    int nb_;
    BasisSet basis_;
    std::vector<Complex> const_;
    std::vector<Complex> coef_;
    mutable std::vector<double> scratch_;
};

/// Scalar factor of a gauge: a smooth base optionally multiplied by the
/// window (1 - |x|^2 / R^2), which vanishes on the circle of radius R.
struct GaugeScalar {
    SmoothField base;
    bool disk_cutoff = false;
    double cutoff_radius = 1.0;

    double value(const Vec2& x) const {
        double v = base.value(x);
        if (disk_cutoff) v *= 1.0 - x.squaredNorm() / (cutoff_radius * cutoff_radius);
        return v;
    }
    Vec2 grad(const Vec2& x) const {
        Vec2 g = base.grad(x);
        if (disk_cutoff) {
            const double r2 = cutoff_radius * cutoff_radius;
            const double w = 1.0 - x.squaredNorm() / r2;
            g = w * g - (2.0 / r2) * base.value(x) * x;
        }
        return g;
    }
};

/// Invertible matrix field p(x) given as a product of factors exp(s_t(x) G_t)
/// with constant generators G_t.  Each factor has an exact inverse and an
/// exact derivative (the generator commutes with its own exponential), so
/// value, inverse and gradient are all analytic.
class AnalyticGauge {
  public:
    explicit AnalyticGauge(int k) : k_(k) {}
    int rank() const { return k_; }
    void add_factor(GaugeScalar s, CMat generator);
    bool empty() const { return factors_.empty(); }

    CMat value(const Vec2& x) const;
    CMat inverse(const Vec2& x) const;
    /// Cartesian components of dp at x.
    void derivative(const Vec2& x, CMat& d1, CMat& d2) const;
    std::string describe() const;

  private:
    struct Factor {
        GaugeScalar s;
        CMat gen;
    };
    int k_;
    std::vector<Factor> factors_;
};

/// The pair (p^-1 dp + p^-1 A p, p^-1 Phi p) obtained by conjugating a base
/// pair with an analytic gauge.
class GaugeTransformedPair final : public AttenuationPair {
  public:
    GaugeTransformedPair(PairPtr base, AnalyticGauge gauge)
        : base_(std::move(base)), gauge_(std::move(gauge)) {}
    int rank() const override { return base_->rank(); }
    void eval(const Vec2& x, CMat& a1, CMat& a2, CMat& phi) const override;
    std::string describe() const override {
        return "gauge(" + gauge_.describe() + ")@" + base_->describe();
    }
    const AnalyticGauge& gauge() const { return gauge_; }
    const PairPtr& base() const { return base_; }

  private:
    PairPtr base_;
    AnalyticGauge gauge_;
};

/// Pair read off a nodal triple by bilinear interpolation; the stored field
/// has k^2 components per slot (packed matrices).
class GridPair final : public AttenuationPair {
  public:
    GridPair(int k, PairField field);
    int rank() const override { return k_; }
    void eval(const Vec2& x, CMat& a1, CMat& a2, CMat& phi) const override;
    std::string describe() const override;
    const PairField& field() const { return field_; }

  private:
    int k_;
    PairField field_;
};

/// Linear combination sum_t c_t * P_t of pairs of equal rank.  Used to move
/// along straight paths between pairs.
class ScaledSumPair final : public AttenuationPair {
  public:
    explicit ScaledSumPair(std::vector<std::pair<Complex, PairPtr>> terms);
    int rank() const override { return k_; }
    void eval(const Vec2& x, CMat& a1, CMat& a2, CMat& phi) const override;
    void attenuation(const Vec2& x, const Vec2& v, CMat& out) const override;
    std::string describe() const override;

  private:
    int k_;
    std::vector<std::pair<Complex, PairPtr>> terms_;
};

/// Sample a pair onto a grid as a packed nodal triple (k^2 components).
PairField discretize(const AttenuationPair& p, GridPtr grid);

/// Nodal difference b - a of two pairs of equal rank.
PairField discretize_difference(const AttenuationPair& a, const AttenuationPair& b, GridPtr grid);

}  // namespace paratomo
