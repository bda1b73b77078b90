#pragma once

// Seeded synthetic two-view scenes with known ground truth.

#include "projrec/epipolar.hpp"
#include "projrec/reconstruction.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace projrec {

enum class CameraKind { FiniteNonCoincident, FiniteCoincident, InfiniteSecond };

inline std::string_view to_string(CameraKind k) {
  switch (k) {
    case CameraKind::FiniteNonCoincident: return "finite-noncoincident";
    case CameraKind::FiniteCoincident: return "finite-coincident";
    case CameraKind::InfiniteSecond: return "infinite-second";
  }
  return "unknown";
}

inline CameraKind parse_camera_kind(std::string_view s) {
  for (CameraKind k : {CameraKind::FiniteNonCoincident, CameraKind::FiniteCoincident, CameraKind::InfiniteSecond}) {
    if (to_string(k) == s) return k;
  }
  throw Error(Errc::InvalidArgument, "unknown camera kind '" + std::string(s) + "'");
}

struct SceneConfig {
  std::uint64_t seed = 1;
  std::size_t m = 10;
  CameraKind camera_kind = CameraKind::FiniteNonCoincident;
  std::size_t infinite_point_count = 0;
  bool plant_epipole_pair = false;
  bool plant_irregular_pair = false;

  void validate() const {
    if (m < 1) throw Error(Errc::InvalidArgument, "scene needs m >= 1");
    if (infinite_point_count > m) throw Error(Errc::InvalidArgument, "infinite_point_count exceeds m");
    if (camera_kind == CameraKind::FiniteCoincident && (plant_epipole_pair || plant_irregular_pair)) {
      throw Error(Errc::ConfigConflict, "coincident cameras have no epipoles (b = 0)");
    }
  }
};

/// A generated scene. points[i] is the ground-truth world point of pair i, or
/// empty for a planted irregular pair that no world point explains.
struct SynthScene {
  CorrespondenceSet corrs;
  Camera P1;
  Camera P2;
  std::vector<std::optional<HomPoint3>> points;
  std::optional<std::size_t> epipole_index;
  std::optional<std::size_t> irregular_index;

  /// Ground truth as a reconstruction; absent when an irregular pair was planted.
  std::optional<Reconstruction> truth(const Tolerances& tol = {}) const {
    std::vector<HomPoint3> ws;
    for (const auto& p : points) {
      if (!p) return std::nullopt;
      ws.push_back(*p);
    }
    return make_reconstruction(P1, P2, std::move(ws), corrs, tol);
  }
};

namespace detail {

/// Third coordinate carries at least this share of the norm, so the point
/// dehomogenizes without blowing up.
inline bool well_finite(const Vec3& h, double share = 0.2) { return std::abs(h[2]) > share * h.norm(); }

inline ImagePoint dehomogenize(const Vec3& h) { return {h[0] / h[2], h[1] / h[2]}; }

inline Mat3 random_conditioned(Rng& rng) {
  for (;;) {
    const Mat3 A = Mat3(rng.normal_matrix(3, 3)) + 2.0 * Mat3::Identity();
    const VecX s = singular_values(A);
    if (s[2] > 0.05 * s[0]) return A;
  }
}

}  // namespace detail

inline SynthScene synth(const SceneConfig& config, const Tolerances& tol = {}) {
  config.validate();
  Rng rng(config.seed);

  Mat3 A;
  Vec3 b;
  Vec3 e1 = Vec3::Zero();
  const bool need_epipoles = config.plant_epipole_pair || config.plant_irregular_pair;
  for (;;) {
    switch (config.camera_kind) {
      case CameraKind::FiniteNonCoincident:
        A = detail::random_conditioned(rng);
        b = rng.normal_vector(3);
        break;
      case CameraKind::FiniteCoincident:
        A = detail::random_conditioned(rng);
        b = Vec3::Zero();
        break;
      case CameraKind::InfiniteSecond: {
        Eigen::JacobiSVD<Mat3> svd(detail::random_conditioned(rng), Eigen::ComputeFullU | Eigen::ComputeFullV);
        Vec3 s = svd.singularValues();
        s[2] = 0.0;
        A = svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
        b = rng.normal_vector(3);
        break;
      }
    }
    if (config.camera_kind == CameraKind::FiniteCoincident) break;
    Mat34 P;
    P << A, b;
    if (b.norm() < 0.5 || rank_tol(P, tol) != 3) continue;
    // e1 = P1 c2: A^{-1} b for a finite second camera, ker A otherwise.
    if (config.camera_kind == CameraKind::InfiniteSecond) {
      e1 = nullspace(A, tol).col(0);
    } else {
      e1 = A.fullPivLu().solve(b);
    }
    if (!need_epipoles || (detail::well_finite(e1) && detail::well_finite(b))) break;
  }

  const Camera P1 = Camera::canonical();
  Mat34 P2m;
  P2m << A, b;
  const Camera P2(P2m, tol);

  std::vector<Correspondence> pairs;
  std::vector<std::optional<HomPoint3>> points;
  const Vec3 offset(0.0, 0.0, 3.0);
  for (std::size_t i = 0; i < config.m; ++i) {
    const bool at_infinity = i < config.infinite_point_count;
    for (;;) {
      const Vec3 v = Vec3(rng.normal_vector(3)) + offset;
      const Vec4 w = at_infinity ? Vec4(v[0], v[1], v[2], 0.0) : Vec4(v[0], v[1], v[2], 1.0);
      const Vec3 x = P1.matrix() * w;
      const Vec3 y = P2.matrix() * w;
      if (!detail::well_finite(x) || !detail::well_finite(y)) continue;
      pairs.push_back({detail::dehomogenize(x), detail::dehomogenize(y)});
      points.emplace_back(HomPoint3(w));
      break;
    }
  }

  SynthScene scene{CorrespondenceSet(pairs), P1, P2, {}, std::nullopt, std::nullopt};
  if (config.plant_epipole_pair) {
    // Any point on the baseline other than the centers images to the epipoles.
    const Vec4 c1(0.0, 0.0, 0.0, 1.0);
    const Vec4 baseline = c1 + camera_center(P2, tol).vec();
    scene.epipole_index = pairs.size();
    pairs.push_back({detail::dehomogenize(e1), detail::dehomogenize(b)});
    points.emplace_back(HomPoint3(baseline));
  }
  if (config.plant_irregular_pair) {
    // x is the first epipole, y an ordinary point: IrregularLeft.
    Vec3 y;
    do {
      y = Vec3(rng.normal(), rng.normal(), 1.0);
    } while (proportional(y, b, Tolerances{1e-3, 1e-3, 1e-3}));
    scene.irregular_index = pairs.size();
    pairs.push_back({detail::dehomogenize(e1), detail::dehomogenize(y)});
    points.emplace_back(std::nullopt);
  }
  scene.corrs = CorrespondenceSet(std::move(pairs));
  scene.points = std::move(points);
  return scene;
}

}  // namespace projrec
