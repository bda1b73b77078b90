#pragma once

// Deciding from correspondences alone whether a two-view projective
// reconstruction exists, with certificates for every positive answer.

#include "projrec/epipolar.hpp"
#include "projrec/reconstruction.hpp"

#include <atomic>
#include <complex>
#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

namespace projrec {

/// m x 9 matrix whose i-th row r satisfies r . vec(F) = y^_i^T F x^_i, with
/// vec(F) the row-major flattening of F.
inline MatX design_matrix(const CorrespondenceSet& corrs) {
  MatX M(corrs.size(), 9);
  for (std::size_t i = 0; i < corrs.size(); ++i) {
    const Vec3 x = lifted(corrs[i].x);
    const Vec3 y = lifted(corrs[i].y);
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) M(static_cast<Eigen::Index>(i), 3 * j + k) = y[j] * x[k];
  }
  return M;
}

inline VecX vec_rowmajor(const Mat3& F) {
  VecX v(9);
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < 3; ++k) v[3 * j + k] = F(j, k);
  return v;
}

struct CandidateSearch {
  std::vector<FundamentalMatrix> candidates;
  int nullspace_dim = 0;
  /// Every rank-2 solution is among the candidates (up to scale).
  bool exhaustive = true;
};

namespace detail {

/// Real roots of c0 + c1 t + c2 t^2 + c3 t^3, leading zeros trimmed.
inline std::vector<double> real_cubic_roots(const Eigen::Vector4d& c) {
  const double scale = c.cwiseAbs().maxCoeff();
  if (!(scale > 0.0)) return {};
  int degree = 3;
  while (degree > 0 && std::abs(c[degree]) <= 1e-12 * scale) --degree;
  if (degree == 0) return {};
  MatX companion = MatX::Zero(degree, degree);
  for (int i = 1; i < degree; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < degree; ++i) companion(i, degree - 1) = -c[i] / c[degree];
  const Eigen::VectorXcd eig = Eigen::EigenSolver<MatX>(companion, false).eigenvalues();
  std::vector<double> roots;
  for (Eigen::Index i = 0; i < eig.size(); ++i) {
    if (std::abs(eig[i].imag()) <= 1e-8 * (1.0 + std::abs(eig[i].real()))) roots.push_back(eig[i].real());
  }
  return roots;
}

/// Rank-2 members of the pencil F1 + t F2 (and F2 itself). Returns false when
/// det vanishes identically on the pencil, in which case only samples are
/// produced.
inline bool pencil_members(const Mat3& F1, const Mat3& F2, std::vector<Mat3>& out) {
  Eigen::Matrix4d V;
  Eigen::Vector4d f;
  const double ts[4] = {-1.0, 0.0, 1.0, 2.0};
  for (int i = 0; i < 4; ++i) {
    V.row(i) << 1.0, ts[i], ts[i] * ts[i], ts[i] * ts[i] * ts[i];
    f[i] = (F1 + ts[i] * F2).determinant();
  }
  const Eigen::Vector4d c = V.fullPivLu().solve(f);
  const double size = std::pow(F1.norm() + F2.norm(), 3);
  out.push_back(F1);
  out.push_back(F2);
  if (c.cwiseAbs().maxCoeff() <= 1e-10 * size) {
    out.push_back(F1 + F2);
    out.push_back(F1 - F2);
    out.push_back(F1 + 0.5 * F2);
    return false;
  }
  for (double t : real_cubic_roots(c)) {
    for (int it = 0; it < 3; ++it) {
      const double d = c[1] + 2.0 * c[2] * t + 3.0 * c[3] * t * t;
      if (std::abs(d) <= 1e-300) break;
      t -= (F1 + t * F2).determinant() / d;
    }
    out.push_back(F1 + t * F2);
  }
  return true;
}

}  // namespace detail

/// Rank-2 matrices F with y^_i^T F x^_i = 0 for all i, best-conditioned
/// (largest sigma_2 / sigma_1) first.
///
/// The kernel N of the design matrix is computed in normalized coordinates.
/// dim N = 1: the kernel element if it has rank 2. dim N = 2: roots of the
/// cubic det(F1 + t F2). dim N >= 3: cubics on all pairs of basis vectors and
/// on 256 seeded random planes, which is not exhaustive.
inline CandidateSearch search_fundamental(const CorrespondenceSet& corrs, const Tolerances& tol = {}) {
  const Mat3 Tx = detail::normalizing_similarity(detail::first_points(corrs));
  const Mat3 Ty = detail::normalizing_similarity(detail::second_points(corrs));

  MatX system(corrs.size(), 9);
  for (std::size_t i = 0; i < corrs.size(); ++i) {
    const Vec3 x = Tx * lifted(corrs[i].x);
    const Vec3 y = Ty * lifted(corrs[i].y);
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) system(static_cast<Eigen::Index>(i), 3 * j + k) = y[j] * x[k];
  }
  const MatX kernel = nullspace(system, tol);

  CandidateSearch search;
  search.nullspace_dim = static_cast<int>(kernel.cols());
  if (kernel.cols() == 0) return search;

  std::vector<Mat3> raw;
  if (kernel.cols() == 1) {
    raw.push_back(detail::unvec3(kernel.col(0)));
  } else if (kernel.cols() == 2) {
    search.exhaustive =
        detail::pencil_members(detail::unvec3(kernel.col(0)), detail::unvec3(kernel.col(1)), raw);
  } else {
    search.exhaustive = false;
    for (Eigen::Index i = 0; i < kernel.cols(); ++i)
      for (Eigen::Index j = i + 1; j < kernel.cols(); ++j)
        detail::pencil_members(detail::unvec3(kernel.col(i)), detail::unvec3(kernel.col(j)), raw);
    Rng rng(kSearchSeed);
    for (int plane = 0; plane < 256; ++plane) {
      const VecX u = kernel * rng.normal_vector(kernel.cols());
      const VecX v = kernel * rng.normal_vector(kernel.cols());
      detail::pencil_members(detail::unvec3(u), detail::unvec3(v), raw);
    }
  }

  std::vector<std::pair<double, FundamentalMatrix>> ranked;
  for (const Mat3& normalized : raw) {
    const Mat3 F = Ty.transpose() * normalized * Tx;
    if (!F.allFinite() || !(F.norm() > 0.0) || rank_tol(F, tol) != 2) continue;
    const FundamentalMatrix cand(F, tol);
    bool satisfies = true;
    for (const auto& c : corrs) satisfies = satisfies && residual(cand, c.x, c.y) <= tol.residual_abs;
    if (!satisfies) continue;
    bool duplicate = false;
    for (const auto& [_, kept] : ranked) {
      duplicate = duplicate || proportional(vec_rowmajor(kept.matrix()), vec_rowmajor(cand.matrix()), tol);
    }
    if (duplicate) continue;
    const VecX s = singular_values(cand.matrix());
    ranked.emplace_back(s[1] / s[0], cand);
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& l, const auto& r) { return l.first > r.first; });
  for (auto& [_, F] : ranked) search.candidates.push_back(std::move(F));
  return search;
}

inline std::vector<FundamentalMatrix> fundamental_candidates(const CorrespondenceSet& corrs,
                                                             const Tolerances& tol = {}) {
  return search_fundamental(corrs, tol).candidates;
}

enum class Status {
  ReconstructableNonCoincident,
  ReconstructableCoincident,
  EpipolarOnly,
  NoFundamental,
  Inconclusive,
};

inline std::string_view to_string(Status s) {
  switch (s) {
    case Status::ReconstructableNonCoincident: return "ReconstructableNonCoincident";
    case Status::ReconstructableCoincident: return "ReconstructableCoincident";
    case Status::EpipolarOnly: return "EpipolarOnly";
    case Status::NoFundamental: return "NoFundamental";
    case Status::Inconclusive: return "Inconclusive";
  }
  return "Unknown";
}

struct IrregularIndex {
  std::size_t index = 0;
  Regularity status = Regularity::Regular;
};

struct Verdict {
  Status status = Status::Inconclusive;
  std::optional<Reconstruction> reconstruction;
  std::optional<FundamentalMatrix> fundamental;
  std::optional<PlanarHomography> homography;
  std::vector<IrregularIndex> irregular;
  int nullspace_dim = 0;
};

namespace detail {

inline std::atomic<std::size_t>& verdict_check_counter() {
  static std::atomic<std::size_t> counter{0};
  return counter;
}

inline bool satisfies_all(const FundamentalMatrix& F, const CorrespondenceSet& corrs, const Tolerances& tol) {
  for (const auto& c : corrs)
    if (residual(F, c.x, c.y) > tol.residual_abs) return false;
  return true;
}

inline std::vector<IrregularIndex> irregular_pairs(const Camera& P2, const CorrespondenceSet& corrs,
                                                   const Tolerances& tol) {
  std::vector<IrregularIndex> out;
  for (std::size_t i = 0; i < corrs.size(); ++i) {
    const auto report = regularity(P2.A(), P2.b(), corrs[i].x, corrs[i].y, tol);
    if (report.status != Regularity::Regular) out.push_back({i, report.status});
  }
  return out;
}

}  // namespace detail

/// Number of times check_verdict() has run in this process.
inline std::size_t verdict_checks() { return detail::verdict_check_counter().load(); }

/// Re-verifies every certificate a verdict carries against the input.
inline bool check_verdict(const Verdict& v, const CorrespondenceSet& corrs, const Tolerances& tol = {}) {
  ++detail::verdict_check_counter();
  switch (v.status) {
    case Status::ReconstructableNonCoincident: {
      if (!v.reconstruction || !v.fundamental) return false;
      const Reconstruction& rec = *v.reconstruction;
      if (!(rec.corrs == corrs) || !verify(rec, tol)) return false;
      if (classify(rec.P1, rec.P2, rec.ws, tol) !=
          ReconstructionKind{Form::FiniteCanonical, Coincidence::NonCoincident}) {
        return false;
      }
      if (!detail::satisfies_all(*v.fundamental, corrs, tol)) return false;
      const FundamentalMatrix derived = fundamental_from_cameras(rec.P1, rec.P2, tol);
      return proportional(vec_rowmajor(derived.matrix()), vec_rowmajor(v.fundamental->matrix()), tol);
    }
    case Status::ReconstructableCoincident: {
      if (!v.reconstruction || !v.homography) return false;
      const Reconstruction& rec = *v.reconstruction;
      if (!(rec.corrs == corrs) || !verify(rec, tol)) return false;
      if (!witnesses_equivalence(v.homography->matrix(), corrs, tol)) return false;
      if (v.fundamental && !detail::satisfies_all(*v.fundamental, corrs, tol)) return false;
      return classify(rec.P1, rec.P2, rec.ws, tol) ==
             ReconstructionKind{Form::FiniteCanonical, Coincidence::Coincident};
    }
    case Status::EpipolarOnly: {
      if (!v.fundamental || v.irregular.empty() || v.reconstruction) return false;
      if (!detail::satisfies_all(*v.fundamental, corrs, tol)) return false;
      const auto [P1, P2] = finite_pair_from_fundamental(*v.fundamental, tol);
      const auto found = detail::irregular_pairs(P2, corrs, tol);
      if (found.size() != v.irregular.size()) return false;
      for (std::size_t i = 0; i < found.size(); ++i) {
        if (found[i].index != v.irregular[i].index || found[i].status != v.irregular[i].status) return false;
      }
      return true;
    }
    case Status::NoFundamental:
      return !v.reconstruction && !v.fundamental && !v.homography;
    case Status::Inconclusive:
      return !v.reconstruction;
  }
  return false;
}

/// Decides whether the correspondences admit a reconstruction.
///
/// Projective equivalence is tested first: an equivalent set always has a
/// coincident certificate, reported with the fundamental matrix [e3]x H. Otherwise
/// every rank-2 candidate F is turned into the finite pair (I|0), (A|e2); if
/// all pairs are (A,e2)-regular they are triangulated, the result finitized
/// and returned as a non-coincident certificate. Without a certificate the
/// verdict is EpipolarOnly (an F exists but forces irregular pairs),
/// NoFundamental, or Inconclusive when the candidate search was not
/// exhaustive.
inline Verdict decide(const CorrespondenceSet& corrs, const Tolerances& tol = {}) {
  Verdict verdict;
  bool numerical_failure = false;

  if (const std::optional<PlanarHomography> H = projective_equivalence(corrs, tol)) {
    try {
      Reconstruction rec = coincident_reconstruction(corrs, *H, tol);
      verdict.status = Status::ReconstructableCoincident;
      verdict.fundamental = fundamental_from_cameras(rec.P1, rec.P2, tol);
      verdict.reconstruction = std::move(rec);
      verdict.homography = H;
      verdict.nullspace_dim = static_cast<int>(nullspace(design_matrix(corrs), tol).cols());
    } catch (const Error&) {
      numerical_failure = true;
    }
  }

  if (verdict.status != Status::ReconstructableCoincident) {
    const CandidateSearch search = search_fundamental(corrs, tol);
    verdict.nullspace_dim = search.nullspace_dim;
    std::optional<FundamentalMatrix> irregular_F;
    std::vector<IrregularIndex> irregular;

    for (const FundamentalMatrix& F : search.candidates) {
      std::optional<std::pair<Camera, Camera>> cams;
      try {
        cams = finite_pair_from_fundamental(F, tol);
      } catch (const Error&) {
        numerical_failure = true;
        continue;
      }
      const Camera& P1 = cams->first;
      const Camera& P2 = cams->second;
      auto bad = detail::irregular_pairs(P2, corrs, tol);
      if (!bad.empty()) {
        if (!irregular_F) {
          irregular_F = F;
          irregular = std::move(bad);
        }
        continue;
      }
      try {
        std::vector<HomPoint3> ws;
        ws.reserve(corrs.size());
        for (const auto& c : corrs) ws.push_back(triangulate(P2.A(), P2.b(), c.x, c.y, tol));
        Reconstruction rec = finitize(make_reconstruction(P1, P2, std::move(ws), corrs, tol), tol);
        verdict.status = Status::ReconstructableNonCoincident;
        verdict.reconstruction = std::move(rec);
        verdict.fundamental = F;
        break;
      } catch (const Error&) {
        numerical_failure = true;
      }
    }

    if (verdict.status != Status::ReconstructableNonCoincident) {
      const bool definite = search.exhaustive && !numerical_failure;
      if (definite && irregular_F) {
        verdict.status = Status::EpipolarOnly;
      } else if (definite && search.candidates.empty()) {
        verdict.status = Status::NoFundamental;
      } else {
        verdict.status = Status::Inconclusive;
      }
      if (irregular_F && verdict.status != Status::NoFundamental) {
        verdict.fundamental = irregular_F;
        verdict.irregular = std::move(irregular);
      }
    }
  }

  if (!check_verdict(verdict, corrs, tol)) {
    throw Error(Errc::WitnessInvalid, "verdict failed certificate re-verification");
  }
  return verdict;
}

/// The certified FiniteCanonical reconstruction, or NotReconstructable.
inline Reconstruction reconstruct(const CorrespondenceSet& corrs, const Tolerances& tol = {}) {
  Verdict v = decide(corrs, tol);
  if (v.status != Status::ReconstructableNonCoincident && v.status != Status::ReconstructableCoincident) {
    throw Error(Errc::NotReconstructable, std::string("verdict is ") + std::string(to_string(v.status)));
  }
  return std::move(*v.reconstruction);
}

}  // namespace projrec
