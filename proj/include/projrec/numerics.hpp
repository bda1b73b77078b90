#pragma once

// Tolerance-aware small dense linear algebra shared by every construction in
// the library: the skew operator, proportionality of homogeneous vectors,
// SVD-based rank and kernel, and the hyperplane-avoidance search.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace projrec {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat34 = Eigen::Matrix<double, 3, 4>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

enum class Errc {
  ZeroVector,
  SearchExhausted,
  AtCenter,
  NotFinite,
  CoincidentCameras,
  IrregularPair,
  EpipolarViolated,
  RankViolation,
  WitnessInvalid,
  NotReconstructable,
  ConfigConflict,
  InvalidArgument,
  Malformed,
};

inline std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::ZeroVector: return "ZeroVector";
    case Errc::SearchExhausted: return "SearchExhausted";
    case Errc::AtCenter: return "AtCenter";
    case Errc::NotFinite: return "NotFinite";
    case Errc::CoincidentCameras: return "CoincidentCameras";
    case Errc::IrregularPair: return "IrregularPair";
    case Errc::EpipolarViolated: return "EpipolarViolated";
    case Errc::RankViolation: return "RankViolation";
    case Errc::WitnessInvalid: return "WitnessInvalid";
    case Errc::NotReconstructable: return "NotReconstructable";
    case Errc::ConfigConflict: return "ConfigConflict";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::Malformed: return "Malformed";
  }
  return "Unknown";
}

/// Exception carrying one of the library's error codes.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Numerical cutoffs. All comparisons against "exact zero" in the library go
/// through one of these three relative thresholds.
struct Tolerances {
  double rank_rel = 1e-8;      // singular value cutoff relative to sigma_1
  double prop_rel = 1e-8;      // distance between unit-normalized vectors
  double residual_abs = 1e-8;  // normalized epipolar residual

  void validate() const {
    for (double t : {rank_rel, prop_rel, residual_abs}) {
      if (!(t > 0.0 && t < 1.0)) {
        throw Error(Errc::InvalidArgument, "tolerances must lie in (0, 1)");
      }
    }
  }
};

/// Deterministic generator used wherever the library needs randomness.
/// Doubles are built from raw mt19937_64 bits so sequences are identical
/// across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  VecX normal_vector(Eigen::Index n) {
    VecX v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

  MatX normal_matrix(Eigen::Index rows, Eigen::Index cols) {
    MatX m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal();
    return m;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Fixed seed for every randomized search inside the library.
inline constexpr std::uint64_t kSearchSeed = 0x5eed'2d2d'0f0f'1234ULL;

/// [v]x, the matrix with skew(v) * w == v.cross(w).
inline Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

/// Scales a homogeneous quantity to unit Euclidean norm with its
/// largest-magnitude entry positive. Works on vectors and matrices alike.
template <typename Derived>
typename Derived::PlainObject normalize_homogeneous(const Eigen::MatrixBase<Derived>& v) {
  typename Derived::PlainObject out = v;
  const double n = out.norm();
  if (!(n > 0.0)) throw Error(Errc::ZeroVector, "cannot normalize a zero vector");
  out /= n;
  Eigen::Index r = 0;
  Eigen::Index c = 0;
  out.cwiseAbs().maxCoeff(&r, &c);
  if (out(r, c) < 0.0) out = -out;
  return out;
}

/// u ~ v: the unit-normalized vectors agree up to sign within prop_rel.
template <typename DerivedU, typename DerivedV>
bool proportional(const Eigen::MatrixBase<DerivedU>& u, const Eigen::MatrixBase<DerivedV>& v,
                  const Tolerances& tol = {}) {
  const double nu = u.norm();
  const double nv = v.norm();
  if (!(nu > 0.0) || !(nv > 0.0)) throw Error(Errc::ZeroVector, "proportional() of a zero vector");
  if (u.size() != v.size()) throw Error(Errc::InvalidArgument, "proportional() size mismatch");
  const auto un = (u / nu).eval();
  const auto vn = (v / nv).eval();
  const double d = std::min((un - vn).norm(), (un + vn).norm());
  return d <= tol.prop_rel;
}

/// Singular values in decreasing order.
template <typename Derived>
VecX singular_values(const Eigen::MatrixBase<Derived>& m) {
  const MatX dense = m;
  return Eigen::JacobiSVD<MatX>(dense).singularValues();
}

/// Number of singular values above rank_rel * sigma_1.
template <typename Derived>
int rank_tol(const Eigen::MatrixBase<Derived>& m, const Tolerances& tol = {}) {
  if (m.size() == 0) throw Error(Errc::InvalidArgument, "rank of an empty matrix");
  const VecX s = singular_values(m);
  if (s.size() == 0 || !(s[0] > 0.0)) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s[i] > tol.rank_rel * s[0]) ++r;
  }
  return r;
}

/// Orthonormal basis of the numerical kernel of m, one basis vector per
/// column. Empty (zero columns) when m has full column rank.
template <typename Derived>
MatX nullspace(const Eigen::MatrixBase<Derived>& m, const Tolerances& tol = {}) {
  const MatX dense = m;
  const Eigen::Index n = dense.cols();
  if (dense.rows() == 0 || dense.isZero(0.0)) return MatX::Identity(n, n);
  Eigen::JacobiSVD<MatX> svd(dense, Eigen::ComputeFullV);
  const VecX& s = svd.singularValues();
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s[i] > tol.rank_rel * s[0]) ++r;
  }
  return svd.matrixV().rightCols(n - r);
}

/// Smallest relative margin min_i |a.v_i| / (|a| |v_i|).
inline double avoidance_margin(const VecX& a, const std::vector<VecX>& vs) {
  const double na = a.norm();
  if (!(na > 0.0)) return 0.0;
  double worst = std::numeric_limits<double>::infinity();
  for (const VecX& v : vs) {
    worst = std::min(worst, std::abs(a.dot(v)) / (na * v.norm()));
  }
  return worst;
}

/// Returns a vector a with |a.v_i| > margin * |a| |v_i| for every v_i, i.e. a
/// hyperplane through the origin that misses all given points. Canonical basis
/// vectors and the all-ones vector are tried first, then up to 128 seeded
/// random unit directions. margin defaults to tol.rank_rel.
inline VecX find_avoiding_vector(const std::vector<VecX>& vs, const Tolerances& tol = {},
                                 double margin = -1.0) {
  if (vs.empty()) throw Error(Errc::InvalidArgument, "find_avoiding_vector() needs at least one vector");
  const Eigen::Index n = vs.front().size();
  for (const VecX& v : vs) {
    if (v.size() != n) throw Error(Errc::InvalidArgument, "find_avoiding_vector() dimension mismatch");
    if (!(v.norm() > 0.0)) throw Error(Errc::ZeroVector, "find_avoiding_vector() input contains zero vector");
  }
  if (margin < 0.0) margin = tol.rank_rel;

  for (Eigen::Index k = 0; k <= n; ++k) {
    const VecX a = k < n ? VecX(VecX::Unit(n, k)) : VecX(VecX::Ones(n));
    if (avoidance_margin(a, vs) > margin) return a;
  }
  Rng rng(kSearchSeed);
  for (int attempt = 0; attempt < 128; ++attempt) {
    VecX a = rng.normal_vector(n);
    a.normalize();
    if (avoidance_margin(a, vs) > margin) return a;
  }
  throw Error(Errc::SearchExhausted, "no avoiding hyperplane found within the retry budget");
}

}  // namespace projrec
