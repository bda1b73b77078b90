#pragma once

// Fundamental matrices, epipoles, (A,b)-regularity, case-based triangulation
// and the camera pair built back from a fundamental matrix.

#include "projrec/geometry.hpp"

#include <string_view>
#include <utility>

namespace projrec {

/// A 3x3 matrix certified to have rank exactly 2, stored normalized, together
/// with generators e1 of its right kernel and e2 of its left kernel.
class FundamentalMatrix {
 public:
  explicit FundamentalMatrix(const Mat3& F, const Tolerances& tol = {}) {
    if (!F.allFinite() || !(F.norm() > 0.0)) throw Error(Errc::RankViolation, "fundamental matrix must be nonzero");
    F_ = normalize_homogeneous(F);
    if (rank_tol(F_, tol) != 2) throw Error(Errc::RankViolation, "fundamental matrix must have rank 2");
    Eigen::JacobiSVD<Mat3> svd(F_, Eigen::ComputeFullU | Eigen::ComputeFullV);
    e1_ = normalize_homogeneous(Vec3(svd.matrixV().col(2)));
    e2_ = normalize_homogeneous(Vec3(svd.matrixU().col(2)));
  }

  const Mat3& matrix() const { return F_; }
  const Vec3& e1() const { return e1_; }
  const Vec3& e2() const { return e2_; }

 private:
  Mat3 F_;
  Vec3 e1_;
  Vec3 e2_;
};

/// |y^T F x^| / (|F| |x^| |y^|).
inline double residual(const Mat3& F, const ImagePoint& x, const ImagePoint& y) {
  const Vec3 xh = lifted(x);
  const Vec3 yh = lifted(y);
  const double scale = F.norm() * xh.norm() * yh.norm();
  if (!(scale > 0.0)) return 0.0;
  return std::abs(yh.dot(F * xh)) / scale;
}

inline double residual(const FundamentalMatrix& F, const ImagePoint& x, const ImagePoint& y) {
  return residual(F.matrix(), x, y);
}

namespace detail {

inline void require_canonical_first(const Camera& P1, const Tolerances& tol) {
  if (!P1.is_canonical(tol)) throw Error(Errc::InvalidArgument, "first camera must be (I | 0)");
}

inline bool is_zero_translation(const Camera& P2, const Tolerances& tol) {
  return P2.b().norm() <= tol.rank_rel * P2.matrix().norm();
}

}  // namespace detail

/// F for cameras (I|0) and (A|b) with A nonsingular: [b]x A when b != 0. For
/// coincident cameras (b = 0) any [t]x A with t != 0 works; t = (0,0,1) is
/// tried first, then the remaining candidates of the avoidance search.
inline FundamentalMatrix fundamental_from_cameras(const Camera& P1, const Camera& P2, const Tolerances& tol = {}) {
  detail::require_canonical_first(P1, tol);
  if (!P2.is_finite(tol)) throw Error(Errc::NotFinite, "second camera must be finite");
  const Mat3 A = P2.A();
  if (!detail::is_zero_translation(P2, tol)) return FundamentalMatrix(skew(P2.b()) * A, tol);

  std::vector<Vec3> ts{Vec3::UnitZ(), Vec3::UnitX(), Vec3::UnitY(), Vec3::Ones()};
  Rng rng(kSearchSeed);
  for (int i = 0; i < 16; ++i) ts.emplace_back(rng.normal_vector(3));
  for (const Vec3& t : ts) {
    const Mat3 F = skew(t) * A;
    if (rank_tol(F, tol) == 2) return FundamentalMatrix(F, tol);
  }
  throw Error(Errc::SearchExhausted, "no rank-2 [t]x A found");
}

/// (e1, e2) ~ (A^{-1} b, b) for the pair (I|0), (A|b).
inline std::pair<HomPoint2, HomPoint2> epipoles(const Camera& P2, const Tolerances& tol = {}) {
  if (!P2.is_finite(tol)) throw Error(Errc::NotFinite, "second camera must be finite");
  if (detail::is_zero_translation(P2, tol)) throw Error(Errc::CoincidentCameras, "b = 0 has no epipoles");
  const Vec3 e1 = P2.A().fullPivLu().solve(P2.b());
  return {HomPoint2(e1), HomPoint2(P2.b())};
}

enum class Regularity { Regular, IrregularLeft, IrregularRight };

inline std::string_view to_string(Regularity r) {
  switch (r) {
    case Regularity::Regular: return "Regular";
    case Regularity::IrregularLeft: return "IrregularLeft";
    case Regularity::IrregularRight: return "IrregularRight";
  }
  return "Unknown";
}

struct RegularityReport {
  Regularity status = Regularity::Regular;
  bool left_zero = false;   // [b]x A x^ = 0, x^ is the first epipole
  bool right_zero = false;  // y^T [b]x = 0, y^ is the second epipole
};

/// (A,b)-regularity of a pair: irregular when exactly one of x^, y^ is an
/// epipole of the cameras (I|0), (A|b).
inline RegularityReport regularity(const Mat3& A, const Vec3& b, const ImagePoint& x, const ImagePoint& y,
                                   const Tolerances& tol = {}) {
  if (!(b.norm() > tol.rank_rel * A.norm())) throw Error(Errc::CoincidentCameras, "regularity needs b != 0");
  const Vec3 xh = lifted(x);
  const Vec3 yh = lifted(y);
  RegularityReport report;
  report.left_zero = (skew(b) * A * xh).norm() <= tol.rank_rel * b.norm() * A.norm() * xh.norm();
  report.right_zero = yh.cross(b).norm() <= tol.rank_rel * b.norm() * yh.norm();
  if (report.left_zero && !report.right_zero) report.status = Regularity::IrregularLeft;
  if (!report.left_zero && report.right_zero) report.status = Regularity::IrregularRight;
  return report;
}

/// Scalars of a linear dependency gamma A x^ = beta y^ - alpha b.
struct TriangulationScalars {
  double gamma = 0.0;
  double beta = 0.0;
  double alpha = 0.0;
};

/// Which branch of the triangulation case analysis produced the point.
enum class TriangulationCase {
  GammaZeroAxZero,       // gamma = 0, A x^ = 0: w = (x^, alpha)
  GammaZero,             // gamma = 0, A x^ != 0: w = (x^, 0)
  BetaZeroAlphaZero,     // gamma != 0, beta = 0, alpha = 0: w = (x^, 1)
  BetaZero,              // gamma != 0, beta = 0, alpha != 0: w = (x^, 0)
  Generic,               // gamma, beta != 0: w = (x^, alpha / gamma)
};

struct Triangulation {
  HomPoint3 w;
  TriangulationScalars scalars;
  TriangulationCase which;
};

namespace detail {

inline void check_pair_cameras(const Mat3& A, const Vec3& b, const Tolerances& tol) {
  Mat34 P;
  P << A, b;
  if (rank_tol(P, tol) != 3) throw Error(Errc::RankViolation, "(A | b) must have rank 3");
  if (!(b.norm() > tol.rank_rel * P.norm())) throw Error(Errc::CoincidentCameras, "triangulation needs b != 0");
}

}  // namespace detail

/// Dependency (gamma, beta, alpha) among A x^, y^, b, from the kernel of the
/// column-scaled matrix [A x^, -y^, b]. If the kernel is two-dimensional the
/// element with the largest |beta| is taken, which selects the generic case
/// whenever one is available.
inline TriangulationScalars dependency_scalars(const Mat3& A, const Vec3& b, const ImagePoint& x,
                                               const ImagePoint& y, const Tolerances& tol = {}) {
  const Vec3 ax = A * lifted(x);
  const Vec3 yh = lifted(y);
  Mat3 M;
  M << ax, -yh, b;
  Vec3 col_scale;
  for (int j = 0; j < 3; ++j) {
    const double n = M.col(j).norm();
    col_scale[j] = n > 0.0 ? 1.0 / n : 1.0;
  }
  const Mat3 Ms = M * col_scale.asDiagonal();

  MatX ker = nullspace(Ms, tol);
  Vec3 u;
  if (ker.cols() == 0) {
    // Epipolar residual passed but the SVD cutoff did not; take the smallest direction.
    Eigen::JacobiSVD<Mat3> svd(Ms, Eigen::ComputeFullV);
    u = svd.matrixV().col(2);
  } else if (ker.cols() == 1) {
    u = ker.col(0);
  } else {
    // Projection of the beta axis onto the kernel: the unit kernel element
    // with the largest beta component.
    const VecX coeffs = ker.row(1).transpose();
    if (coeffs.norm() > tol.rank_rel) {
      u = ker * coeffs;
    } else {
      u = ker.col(0);
    }
  }
  const Vec3 s = col_scale.asDiagonal() * u;
  return {s[0], s[1], s[2]};
}

/// Applies the case analysis to given scalars. Preconditions of triangulate()
/// are assumed; the returned point is not verified here.
inline Triangulation triangulate_from_scalars(const Mat3& A, const Vec3& b, const ImagePoint& x, const ImagePoint& y,
                                              const TriangulationScalars& s, const Tolerances& tol = {}) {
  const Vec3 xh = lifted(x);
  const Vec3 ax = A * xh;
  // Each scalar weighted by its column norm; a zero column (A x^ = 0) keeps weight 1.
  auto weight = [](const Vec3& col) { return col.norm() > 0.0 ? col.norm() : 1.0; };
  const double g = std::abs(s.gamma) * weight(ax);
  const double be = std::abs(s.beta) * weight(lifted(y));
  const double al = std::abs(s.alpha) * weight(b);
  const double scale = std::max({g, be, al});
  if (!(scale > 0.0)) throw Error(Errc::InvalidArgument, "dependency scalars must not all vanish");
  const double cutoff = tol.rank_rel * scale;
  const bool gamma_zero = g <= cutoff;
  const bool beta_zero = be <= cutoff;
  const bool alpha_zero = al <= cutoff;
  const bool ax_zero = ax.norm() <= tol.rank_rel * A.norm() * xh.norm();

  auto lifted_w = [&](double delta) { return HomPoint3(Vec4(xh[0], xh[1], xh[2], delta)); };

  if (gamma_zero) {
    if (ax_zero) return {lifted_w(s.alpha), s, TriangulationCase::GammaZeroAxZero};
    return {lifted_w(0.0), s, TriangulationCase::GammaZero};
  }
  if (beta_zero) {
    if (alpha_zero) return {lifted_w(1.0), s, TriangulationCase::BetaZeroAlphaZero};
    return {lifted_w(0.0), s, TriangulationCase::BetaZero};
  }
  return {lifted_w(s.alpha / s.gamma), s, TriangulationCase::Generic};
}

/// Full triangulation of one pair under (I|0), (A|b) with b != 0. Accepts a
/// singular A as long as (A|b) has rank 3.
///
/// Throws EpipolarViolated when the pair misses the epipolar constraint of
/// [b]x A and IrregularPair when it is not (A,b)-regular: no world point can
/// then explain the pair even though the constraint may hold exactly.
inline Triangulation triangulate_pair(const Mat3& A, const Vec3& b, const ImagePoint& x, const ImagePoint& y,
                                      const Tolerances& tol = {}) {
  detail::check_pair_cameras(A, b, tol);
  if (residual(skew(b) * A, x, y) > tol.residual_abs) {
    throw Error(Errc::EpipolarViolated, "pair violates the epipolar constraint");
  }
  if (regularity(A, b, x, y, tol).status != Regularity::Regular) {
    throw Error(Errc::IrregularPair, "pair is not (A,b)-regular");
  }
  return triangulate_from_scalars(A, b, x, y, dependency_scalars(A, b, x, y, tol), tol);
}

inline HomPoint3 triangulate(const Mat3& A, const Vec3& b, const ImagePoint& x, const ImagePoint& y,
                             const Tolerances& tol = {}) {
  return triangulate_pair(A, b, x, y, tol).w;
}

/// ([e2]x F | e2), a camera of rank 3 whenever F has rank 2.
inline Camera camera_from_fundamental(const FundamentalMatrix& F, const Tolerances& tol = {}) {
  const Vec3 e2 = F.e2();
  return Camera::from_blocks(skew(e2) * F.matrix(), e2, tol);
}

/// Same, keeping the scale of the given matrix: F = [e3]x gives (diag(-1,-1,0) | e3).
inline Camera camera_from_fundamental(const Mat3& F, const Tolerances& tol = {}) {
  const Vec3 e2 = FundamentalMatrix(F, tol).e2();
  return Camera::from_blocks(skew(e2) * F, e2, tol);
}

/// Finite, non-coincident (I|0), (A | e2) with A = [e2]x F - e2 a^T, whose
/// fundamental matrix [e2]x A = -|e2|^2 F is proportional to F. The row
/// (a^T, 1) avoids the centers of (I|0) and ([e2]x F | e2).
inline std::pair<Camera, Camera> finite_pair_from_fundamental(const FundamentalMatrix& F,
                                                               const Tolerances& tol = {}) {
  const Camera P = camera_from_fundamental(F, tol);
  const std::vector<VecX> centers{VecX(Vec4(0.0, 0.0, 0.0, 1.0)), VecX(camera_center(P, tol).vec())};
  VecX row;
  try {
    row = find_avoiding_vector(centers, tol, 1e-3);
  } catch (const Error& e) {
    if (e.code() != Errc::SearchExhausted) throw;
    row = find_avoiding_vector(centers, tol);
  }
  const Vec3 a = row.head<3>() / row[3];
  const Vec3 e2 = F.e2();
  const Mat3 A = skew(e2) * F.matrix() - e2 * a.transpose();
  const Camera P2 = Camera::from_blocks(A, e2, tol);
  if (!P2.is_finite(tol)) throw Error(Errc::SearchExhausted, "finitizing row left the second camera infinite");
  return {Camera::canonical(), P2};
}

inline std::pair<Camera, Camera> finite_pair_from_fundamental(const Mat3& F, const Tolerances& tol = {}) {
  return finite_pair_from_fundamental(FundamentalMatrix(F, tol), tol);
}

}  // namespace projrec
