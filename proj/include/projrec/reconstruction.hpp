#pragma once

// Turning arbitrary projective reconstructions into finite ones with first
// camera (I | 0), and the coincident-camera case via planar homographies.

#include "projrec/geometry.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace projrec {

enum class Form { General, FiniteCanonical };
enum class Coincidence { Coincident, NonCoincident };

inline std::string_view to_string(Form f) {
  return f == Form::General ? "General" : "FiniteCanonical";
}
inline std::string_view to_string(Coincidence c) {
  return c == Coincidence::Coincident ? "Coincident" : "NonCoincident";
}

struct ReconstructionKind {
  Form form = Form::General;
  Coincidence coincidence = Coincidence::NonCoincident;

  friend bool operator==(const ReconstructionKind&, const ReconstructionKind&) = default;
};

/// Cameras plus world points explaining a correspondence set.
struct Reconstruction {
  Camera P1;
  Camera P2;
  std::vector<HomPoint3> ws;
  CorrespondenceSet corrs;
  ReconstructionKind kind;
};

/// Computes the kind tag from the data: FiniteCanonical iff P1 ~ (I|0), P2 is
/// finite and every point is finite.
inline ReconstructionKind classify(const Camera& P1, const Camera& P2, const std::vector<HomPoint3>& ws,
                                   const Tolerances& tol = {}) {
  ReconstructionKind kind;
  kind.coincidence = coincident(P1, P2, tol) ? Coincidence::Coincident : Coincidence::NonCoincident;
  bool finite = P1.is_canonical(tol) && P2.is_finite(tol);
  for (const auto& w : ws) finite = finite && w.is_finite(tol);
  kind.form = finite ? Form::FiniteCanonical : Form::General;
  return kind;
}

/// Builds a tagged reconstruction; throws WitnessInvalid unless it verifies.
inline Reconstruction make_reconstruction(Camera P1, Camera P2, std::vector<HomPoint3> ws, CorrespondenceSet corrs,
                                          const Tolerances& tol = {}) {
  if (!verify_reconstruction(P1, P2, ws, corrs, tol)) {
    throw Error(Errc::WitnessInvalid, "cameras and points do not reproduce the correspondences");
  }
  const ReconstructionKind kind = classify(P1, P2, ws, tol);
  return Reconstruction{std::move(P1), std::move(P2), std::move(ws), std::move(corrs), kind};
}

inline bool verify(const Reconstruction& rec, const Tolerances& tol = {}) {
  return verify_reconstruction(rec.P1, rec.P2, rec.ws, rec.corrs, tol);
}

/// Given a valid reconstruction with P1 ~ (I|0), returns one with the same
/// first camera, a finite second camera and finite points.
///
/// Coincident input (b = 0) keeps the cameras and resets each point's last
/// coordinate to 1. Otherwise a row (a^T, 1) avoiding both centers and every
/// point is found and the scene is sheared by H = [[I, 0], [a^T, 1]], which
/// keeps P1 and maps P2 to (A - b a^T | b).
inline Reconstruction finitize(const Reconstruction& rec, const Tolerances& tol = {}) {
  if (!rec.P1.is_canonical(tol)) throw Error(Errc::InvalidArgument, "finitize() needs P1 ~ (I | 0)");
  if (!verify(rec, tol)) throw Error(Errc::InvalidArgument, "finitize() input is not a reconstruction");

  const Mat3 A = rec.P2.A();
  const Vec3 b = rec.P2.b();

  if (b.norm() <= tol.rank_rel * rec.P2.matrix().norm()) {
    const Camera P2 = Camera::from_blocks(A, Vec3::Zero(), tol);
    std::vector<HomPoint3> ws;
    ws.reserve(rec.ws.size());
    for (const auto& w : rec.ws) {
      Vec4 h = w.vec();
      h[3] = 1.0;
      ws.emplace_back(h);
    }
    return make_reconstruction(rec.P1, P2, std::move(ws), rec.corrs, tol);
  }

  std::vector<VecX> avoid;
  avoid.reserve(rec.ws.size() + 2);
  avoid.emplace_back(Vec4(0.0, 0.0, 0.0, 1.0));
  avoid.emplace_back(camera_center(rec.P2, tol).vec());
  for (const auto& w : rec.ws) avoid.emplace_back(w.vec());

  VecX row;
  try {
    row = find_avoiding_vector(avoid, tol, 1e-3);
  } catch (const Error& e) {
    if (e.code() != Errc::SearchExhausted) throw;
    row = find_avoiding_vector(avoid, tol);
  }
  // The margin against c1 = (0,0,0,1) makes the last entry nonzero; scale it to 1.
  const Vec3 a = row.head<3>() / row[3];

  Mat4 H = Mat4::Identity();
  H.block<1, 3>(3, 0) = a.transpose();

  const Camera P2 = Camera::from_blocks(A - b * a.transpose(), b, tol);
  std::vector<HomPoint3> ws;
  ws.reserve(rec.ws.size());
  for (const auto& w : rec.ws) ws.emplace_back(H * w.vec());
  return make_reconstruction(rec.P1, P2, std::move(ws), rec.corrs, tol);
}

/// Any valid reconstruction to FiniteCanonical form, preserving coincidence:
/// move P1 to (I|0) with canonical_homography, then finitize.
inline Reconstruction canonicalize(const Reconstruction& rec, const Tolerances& tol = {}) {
  if (!verify(rec, tol)) throw Error(Errc::InvalidArgument, "canonicalize() input is not a reconstruction");
  const Homography4 H = canonical_homography(rec.P1, tol);
  const Mat34 moved = rec.P2.matrix() * H.inverse();
  std::vector<HomPoint3> ws;
  ws.reserve(rec.ws.size());
  for (const auto& w : rec.ws) ws.emplace_back(H.matrix() * w.vec());
  // P1 H^{-1} is exactly (I | 0) since the top rows of H are P1.
  const Reconstruction moved_rec =
      make_reconstruction(Camera::canonical(), Camera(moved, tol), std::move(ws), rec.corrs, tol);
  return finitize(moved_rec, tol);
}

/// A nonsingular 3x3 map of the first image onto the second.
class PlanarHomography {
 public:
  explicit PlanarHomography(const Mat3& H, const Tolerances& tol = {}) : H_(normalize_homogeneous(H)) {
    if (rank_tol(H_, tol) != 3) throw Error(Errc::RankViolation, "planar homography must be nonsingular");
  }

  const Mat3& matrix() const { return H_; }

 private:
  Mat3 H_;
};

/// True iff H x^_i ~ y^_i for every pair.
inline bool witnesses_equivalence(const Mat3& H, const CorrespondenceSet& corrs, const Tolerances& tol = {}) {
  for (const auto& c : corrs) {
    const Vec3 image = H * lifted(c.x);
    if (!(image.norm() > 0.0) || !proportional(image, lifted(c.y), tol)) return false;
  }
  return true;
}

namespace detail {

/// Similarity moving the points' centroid to the origin with mean distance
/// sqrt(2). Used to condition linear systems built from image coordinates.
inline Mat3 normalizing_similarity(const std::vector<ImagePoint>& pts) {
  Vec2 centroid = Vec2::Zero();
  for (const auto& p : pts) centroid += Vec2(p.x1, p.x2);
  centroid /= static_cast<double>(pts.size());
  double mean_dist = 0.0;
  for (const auto& p : pts) mean_dist += (Vec2(p.x1, p.x2) - centroid).norm();
  mean_dist /= static_cast<double>(pts.size());
  const double s = mean_dist > 1e-12 ? std::sqrt(2.0) / mean_dist : 1.0;
  Mat3 T;
  T << s, 0.0, -s * centroid.x(),
       0.0, s, -s * centroid.y(),
       0.0, 0.0, 1.0;
  return T;
}

inline std::vector<ImagePoint> first_points(const CorrespondenceSet& corrs) {
  std::vector<ImagePoint> out;
  for (const auto& c : corrs) out.push_back(c.x);
  return out;
}

inline std::vector<ImagePoint> second_points(const CorrespondenceSet& corrs) {
  std::vector<ImagePoint> out;
  for (const auto& c : corrs) out.push_back(c.y);
  return out;
}

inline Mat3 unvec3(const VecX& v) {
  Mat3 m;
  m << v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8];
  return m;
}

}  // namespace detail

/// Searches for a nonsingular H with H x^_i ~ y^_i for all i.
///
/// Builds the 2m x 9 system from y^_i x (H x^_i) = 0 in normalized
/// coordinates and looks for a nonsingular element of its kernel: basis
/// vectors first, then 64 seeded random combinations. Every witness is
/// checked against the original coordinates before it is returned. For fewer
/// than four pairs the witness is far from unique; the first hit is returned.
inline std::optional<PlanarHomography> projective_equivalence(const CorrespondenceSet& corrs,
                                                              const Tolerances& tol = {}) {
  const Mat3 Tx = detail::normalizing_similarity(detail::first_points(corrs));
  const Mat3 Ty = detail::normalizing_similarity(detail::second_points(corrs));
  const Mat3 Ty_inv = Ty.inverse();

  MatX system(2 * corrs.size(), 9);
  for (std::size_t i = 0; i < corrs.size(); ++i) {
    const Vec3 x = Tx * lifted(corrs[i].x);
    const Vec3 y = Ty * lifted(corrs[i].y);
    // Rows of y x (H x) with h_k the k-th row of H, flattened row-major.
    Eigen::Matrix<double, 1, 9> r0;
    Eigen::Matrix<double, 1, 9> r1;
    r0 << 0.0, 0.0, 0.0, -y[2] * x.transpose(), y[1] * x.transpose();
    r1 << y[2] * x.transpose(), 0.0, 0.0, 0.0, -y[0] * x.transpose();
    system.row(2 * i) = r0;
    system.row(2 * i + 1) = r1;
  }

  const MatX kernel = nullspace(system, tol);
  if (kernel.cols() == 0) return std::nullopt;

  auto accept = [&](const VecX& h) -> std::optional<PlanarHomography> {
    const Mat3 H = Ty_inv * detail::unvec3(h) * Tx;
    if (!(H.norm() > 0.0) || rank_tol(H, tol) != 3) return std::nullopt;
    if (!witnesses_equivalence(H, corrs, tol)) return std::nullopt;
    return PlanarHomography(H, tol);
  };

  for (Eigen::Index j = 0; j < kernel.cols(); ++j) {
    if (auto H = accept(kernel.col(j))) return H;
  }
  if (kernel.cols() > 1) {
    Rng rng(kSearchSeed);
    for (int attempt = 0; attempt < 64; ++attempt) {
      if (auto H = accept(kernel * rng.normal_vector(kernel.cols()))) return H;
    }
  }
  return std::nullopt;
}

/// (I|0), (H|0) and w_i = (x^_i, 1); a coincident finite reconstruction.
inline Reconstruction coincident_reconstruction(const CorrespondenceSet& corrs, const PlanarHomography& H,
                                                const Tolerances& tol = {}) {
  std::vector<HomPoint3> ws;
  ws.reserve(corrs.size());
  for (const auto& c : corrs) ws.emplace_back(Vec4(c.x.x1, c.x.x2, 1.0, 1.0));
  const Camera P2 = Camera::from_blocks(H.matrix(), Vec3::Zero(), tol);
  if (!verify_reconstruction(Camera::canonical(), P2, ws, corrs, tol)) {
    throw Error(Errc::WitnessInvalid, "homography does not map the first image onto the second");
  }
  return make_reconstruction(Camera::canonical(), P2, std::move(ws), corrs, tol);
}

}  // namespace projrec
