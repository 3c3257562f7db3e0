#pragma once

#include <Eigen/Dense>
#include <complex>

namespace paratomo {

using Complex = std::complex<double>;

/// Largest fiber dimension handled without heap allocation.  Rank-k systems
/// use k x k blocks; the linearized two-pair systems use k^2 x k^2 blocks, so
/// k <= 2 everywhere implies blocks of size at most 4.
inline constexpr int kMaxRank = 4;

using CMat = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxRank, kMaxRank>;
using CVec = Eigen::Matrix<Complex, Eigen::Dynamic, 1, 0, kMaxRank, 1>;
using RMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxRank, kMaxRank>;

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Point of the unit sphere bundle: base point and (metric-unit) velocity.
struct PhasePoint {
    Vec2 x;
    Vec2 v;
};

/// Which disk a ray lives on: the core disk M or the extended disk M1.
enum class Domain { M, M1 };

inline CMat cidentity(int k) { return CMat::Identity(k, k); }
inline CMat czero(int k) { return CMat::Zero(k, k); }

}  // namespace paratomo
