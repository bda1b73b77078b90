#pragma once

// Homogeneous points, projective cameras, projection and the homography that
// sends any camera to (I | 0).

#include "projrec/numerics.hpp"

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <utility>
#include <vector>

namespace projrec {

struct ImagePoint {
  double x1 = 0.0;
  double x2 = 0.0;

  friend bool operator==(const ImagePoint&, const ImagePoint&) = default;
};

/// A point of P^2, stored normalized (unit norm, largest entry positive).
class HomPoint2 {
 public:
  explicit HomPoint2(const Vec3& h) : h_(normalize_homogeneous(h)) {}

  const Vec3& vec() const { return h_; }

  bool is_finite(const Tolerances& tol = {}) const { return std::abs(h_[2]) > tol.rank_rel; }

  /// Dehomogenized image point; throws NotFinite for points at infinity.
  ImagePoint image_point(const Tolerances& tol = {}) const {
    if (!is_finite(tol)) throw Error(Errc::NotFinite, "image point at infinity");
    return {h_[0] / h_[2], h_[1] / h_[2]};
  }

 private:
  Vec3 h_;
};

/// A point of P^3, stored normalized. Finite iff the last coordinate survives
/// the rank_rel cutoff; otherwise it is a direction (v, 0).
class HomPoint3 {
 public:
  explicit HomPoint3(const Vec4& h) : h_(normalize_homogeneous(h)) {}

  const Vec4& vec() const { return h_; }

  bool is_finite(const Tolerances& tol = {}) const { return std::abs(h_[3]) > tol.rank_rel; }

 private:
  Vec4 h_;
};

/// x^ = (x, 1).
inline HomPoint2 lift(const ImagePoint& x) { return HomPoint2(Vec3(x.x1, x.x2, 1.0)); }

/// Unnormalized (x1, x2, 1), for arithmetic that wants the literal lift.
inline Vec3 lifted(const ImagePoint& x) { return {x.x1, x.x2, 1.0}; }

struct Correspondence {
  ImagePoint x;
  ImagePoint y;

  friend bool operator==(const Correspondence&, const Correspondence&) = default;
};

/// Non-empty ordered list of point pairs (x_i, y_i).
class CorrespondenceSet {
 public:
  explicit CorrespondenceSet(std::vector<Correspondence> pairs) : pairs_(std::move(pairs)) {
    if (pairs_.empty()) throw Error(Errc::InvalidArgument, "correspondence set must be non-empty");
    for (const auto& p : pairs_) {
      if (!std::isfinite(p.x.x1) || !std::isfinite(p.x.x2) || !std::isfinite(p.y.x1) ||
          !std::isfinite(p.y.x2)) {
        throw Error(Errc::InvalidArgument, "correspondence coordinates must be finite");
      }
    }
  }

  CorrespondenceSet(std::initializer_list<Correspondence> pairs)
      : CorrespondenceSet(std::vector<Correspondence>(pairs)) {}

  std::size_t size() const { return pairs_.size(); }
  const Correspondence& operator[](std::size_t i) const { return pairs_[i]; }
  const std::vector<Correspondence>& pairs() const { return pairs_; }
  auto begin() const { return pairs_.begin(); }
  auto end() const { return pairs_.end(); }

  friend bool operator==(const CorrespondenceSet&, const CorrespondenceSet&) = default;

 private:
  std::vector<Correspondence> pairs_;
};

/// A 3x4 projective camera of rank 3, partitioned as (A | b).
class Camera {
 public:
  explicit Camera(const Mat34& P, const Tolerances& tol = {}) : P_(P) {
    if (!P.allFinite()) throw Error(Errc::InvalidArgument, "camera entries must be finite");
    if (rank_tol(P, tol) != 3) throw Error(Errc::RankViolation, "camera matrix must have rank 3");
  }

  static Camera canonical() {
    Mat34 P = Mat34::Zero();
    P.leftCols<3>().setIdentity();
    return Camera(P);
  }

  static Camera from_blocks(const Mat3& A, const Vec3& b, const Tolerances& tol = {}) {
    Mat34 P;
    P << A, b;
    return Camera(P, tol);
  }

  const Mat34& matrix() const { return P_; }
  Mat3 A() const { return P_.leftCols<3>(); }
  Vec3 b() const { return P_.col(3); }

  bool is_finite(const Tolerances& tol = {}) const { return rank_tol(A(), tol) == 3; }

  /// P ~ (I | 0).
  bool is_canonical(const Tolerances& tol = {}) const {
    const Mat34 I0 = canonical().matrix();
    return proportional(P_.reshaped(), I0.reshaped(), tol);
  }

 private:
  Mat34 P_;
};

/// Nonsingular 4x4 transform of P^3, kept with its inverse.
class Homography4 {
 public:
  explicit Homography4(const Mat4& H, const Tolerances& tol = {}) : H_(H) {
    if (rank_tol(H, tol) != 4) throw Error(Errc::RankViolation, "homography must be nonsingular");
    inverse_ = H.fullPivLu().inverse();
  }

  const Mat4& matrix() const { return H_; }
  const Mat4& inverse() const { return inverse_; }

 private:
  Mat4 H_;
  Mat4 inverse_;
};

/// Generator of the kernel of P: (-A^{-1} b, 1) for finite cameras, (w, 0) with
/// w in ker A otherwise.
inline HomPoint3 camera_center(const Camera& cam, const Tolerances& tol = {}) {
  if (cam.is_finite(tol)) {
    const Vec3 c = -cam.A().fullPivLu().solve(cam.b());
    return HomPoint3(Vec4(c[0], c[1], c[2], 1.0));
  }
  const MatX ker = nullspace(cam.A(), tol);
  if (ker.cols() >= 1) {
    const Vec3 w = ker.col(0);
    return HomPoint3(Vec4(w[0], w[1], w[2], 0.0));
  }
  // A passed the rank test but P did not split cleanly; fall back to ker P.
  const MatX kerP = nullspace(cam.matrix(), tol);
  return HomPoint3(Vec4(kerP.col(0)));
}

/// Cameras are coincident when their centers agree up to scale.
inline bool coincident(const Camera& P1, const Camera& P2, const Tolerances& tol = {}) {
  return proportional(camera_center(P1, tol).vec(), camera_center(P2, tol).vec(), tol);
}

/// Image of w under P; throws AtCenter when w is (numerically) the center.
template <typename Derived>
HomPoint2 project(const Camera& cam, const Eigen::MatrixBase<Derived>& w, const Tolerances& tol = {}) {
  const Vec4 wv = w;
  if (!(wv.norm() > 0.0)) throw Error(Errc::ZeroVector, "cannot project a zero vector");
  const Vec3 image = cam.matrix() * wv;
  if (image.norm() <= tol.rank_rel * cam.matrix().norm() * wv.norm()) {
    throw Error(Errc::AtCenter, "point coincides with the camera center");
  }
  return HomPoint2(image);
}

inline HomPoint2 project(const Camera& cam, const HomPoint3& w, const Tolerances& tol = {}) {
  return project(cam, w.vec(), tol);
}

/// H = [P; r] with r chosen off the row space of P, so P H^{-1} = (I | 0).
inline Homography4 canonical_homography(const Camera& cam, const Tolerances& tol = {}) {
  const MatX ker = nullspace(cam.matrix(), tol);
  std::vector<VecX> kernel_basis;
  for (Eigen::Index j = 0; j < ker.cols(); ++j) kernel_basis.emplace_back(ker.col(j));
  // |c_k| >= 1/2 for some k of a unit 4-vector, so a basis vector always clears 0.25.
  const VecX r = find_avoiding_vector(kernel_basis, tol, 0.25);
  Mat4 H;
  H.topRows<3>() = cam.matrix();
  H.row(3) = r.transpose();
  return Homography4(H, tol);
}

/// True iff P1 w_i ~ x^_i and P2 w_i ~ y^_i for every i. A point at a camera
/// center counts as a failure.
inline bool verify_reconstruction(const Camera& P1, const Camera& P2, const std::vector<HomPoint3>& ws,
                                  const CorrespondenceSet& corrs, const Tolerances& tol = {}) {
  if (ws.size() != corrs.size()) return false;
  for (std::size_t i = 0; i < ws.size(); ++i) {
    try {
      if (!proportional(project(P1, ws[i], tol).vec(), lifted(corrs[i].x), tol)) return false;
      if (!proportional(project(P2, ws[i], tol).vec(), lifted(corrs[i].y), tol)) return false;
    } catch (const Error& e) {
      if (e.code() == Errc::AtCenter) return false;
      throw;
    }
  }
  return true;
}

}  // namespace projrec
