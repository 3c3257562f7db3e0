#pragma once

#include "paratomo/xray.hpp"

namespace paratomo {

/// Real block form of a complex matrix: [[Re W, -Im W], [Im W, Re W]],
/// size 2k x 2k.  Multiplicative (a homomorphism) and det-compatible:
/// det of the block form equals |det W|^2.
RMat realify_weight(const CMat& w);

/// Real rank-2k attenuation carrying the same transport as a complex rank-k
/// one: every coefficient matrix is replaced by its real block form.  Used
/// as a verification path; the main pipeline stays complex.
class RealifiedPair final : public AttenuationPair {
  public:
    explicit RealifiedPair(PairPtr base);
    int rank() const override { return 2 * base_->rank(); }
    void eval(const Vec2& x, CMat& a1, CMat& a2, CMat& phi) const override;
    std::string describe() const override;
    const PairPtr& base() const { return base_; }

  private:
    PairPtr base_;
};

/// Stack the real parts over the imaginary parts: k components become 2k
/// real-valued components.
Field realify_vec(const Field& f);
PairField realify_field(const PairField& h);

/// Dual-pipeline comparison: the transform of h under the complex system
/// against the transform of the stacked field under the realified system.
/// The two agree entry for entry up to roundoff (same rays, same
/// quadrature, exact block algebra).
struct EquivalenceReport {
    double max_mismatch = 0.0;  ///< worst node-wise gap of the (Re, Im) stacking
    double data_scale = 0.0;    ///< largest complex data entry, for context
};

EquivalenceReport equivalence_check(PairPtr pair, const MetricField& m, const PairField& h,
                                    FanPtr fan, const TraceOptions& opt = {});

}  // namespace paratomo
