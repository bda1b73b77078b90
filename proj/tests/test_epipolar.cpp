#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>

namespace projrec {
namespace {

using testing::cosine_distance;
using testing::random_nonsingular;
using testing::random_rank2;
using testing::random_vec3;

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::InvalidArgument;
}

TEST(FundamentalFromCameras, TranslationAlongZ) {
  const auto F = fundamental_from_cameras(Camera::canonical(), Camera::from_blocks(Mat3::Identity(), Vec3(0, 0, 1)));
  EXPECT_TRUE(proportional(F.matrix(), skew(Vec3(0, 0, 1))));
  EXPECT_EQ(rank_tol(F.matrix()), 2);
}

TEST(FundamentalFromCameras, CoincidentBranch) {
  const auto F = fundamental_from_cameras(Camera::canonical(), Camera::from_blocks(Mat3::Identity(), Vec3::Zero()));
  EXPECT_TRUE(proportional(F.matrix(), skew(Vec3(0, 0, 1))));
  for (const ImagePoint& x : {ImagePoint{0, 0}, ImagePoint{1, 2}, ImagePoint{-3, 0.5}}) {
    EXPECT_EQ(lifted(x).dot(F.matrix() * lifted(x)), 0.0);
  }
}

TEST(FundamentalFromCameras, HandEvaluatedPair) {
  const auto F = fundamental_from_cameras(Camera::canonical(), Camera::from_blocks(Mat3::Identity(), Vec3(1, 0, 0)));
  Mat3 expected;
  expected << 0, 0, 0,
              0, 0, -1,
              0, 1, 0;
  EXPECT_TRUE(proportional(F.matrix(), expected));
  EXPECT_EQ(Vec3(2, 0, 1).dot(expected * Vec3(1, 0, 1)), 0.0);
  EXPECT_EQ(residual(F, {1, 0}, {2, 0}), 0.0);
}

TEST(FundamentalFromCameras, Errors) {
  const Camera infinite = Camera::from_blocks(Vec3(1, 1, 0).asDiagonal(), Vec3(0, 0, 1));
  EXPECT_EQ(code_of([&] { fundamental_from_cameras(Camera::canonical(), infinite); }), Errc::NotFinite);
}

TEST(FundamentalFromCameras, ResidualOnRandomScenes) {
  Rng rng(41);
  for (int i = 0; i < 200; ++i) {
    const Mat34 P2 = testing::blocks(random_nonsingular(rng), i % 4 == 0 ? Vec3::Zero() : random_vec3(rng));
    const auto s = testing::project_scene(rng, testing::canonical_camera(), P2, 1 + i % 100, 0.3);
    const auto F = fundamental_from_cameras(s.P1, s.P2);
    EXPECT_EQ(rank_tol(F.matrix()), 2);
    for (const auto& c : s.corrs) EXPECT_LE(residual(F, c.x, c.y), 1e-10);
  }
}

TEST(Epipoles, Examples) {
  const auto [e1, e2] = epipoles(Camera::from_blocks(Mat3::Identity(), Vec3(0, 0, 1)));
  EXPECT_EQ(e1.vec(), Vec3(0, 0, 1));
  EXPECT_EQ(e2.vec(), Vec3(0, 0, 1));
  const auto [f1, f2] = epipoles(Camera::from_blocks(Vec3(1, 1, 2).asDiagonal(), Vec3(0, 0, 1)));
  EXPECT_TRUE(proportional(f1.vec(), Vec3(0, 0, 0.5)));
  EXPECT_EQ(f2.vec(), Vec3(0, 0, 1));
  EXPECT_EQ(code_of([] { epipoles(Camera::from_blocks(Mat3::Identity(), Vec3::Zero())); }), Errc::CoincidentCameras);
}

TEST(Epipoles, KernelIdentities) {
  Rng rng(42);
  for (int i = 0; i < 1000; ++i) {
    const Mat3 A = random_nonsingular(rng);
    const Vec3 b = random_vec3(rng);
    const Mat3 F = skew(b) * A;
    const Vec3 e1 = A.inverse() * b;
    EXPECT_LE((F * e1).norm(), 1e-10 * F.norm() * e1.norm());
    EXPECT_LE((F.transpose() * b).norm(), 1e-12 * F.norm() * b.norm());
    const auto [h1, h2] = epipoles(Camera::from_blocks(A, b));
    const FundamentalMatrix Fm(F);
    EXPECT_TRUE(proportional(Fm.e1(), h1.vec()));
    EXPECT_TRUE(proportional(Fm.e2(), h2.vec()));
  }
}

TEST(Residual, Examples) {
  EXPECT_EQ(residual(skew(Vec3(0, 0, 1)), {0, 0}, {0, 0}), 0.0);
  EXPECT_EQ(residual(skew(Vec3(1, 0, 0)), {1, 0}, {2, 0}), 0.0);
  // y^T F x^ = (0,1,1) . (0,1,0) = 1; |F| = sqrt 2, |x^| = sqrt 2, |y^| = sqrt 2.
  EXPECT_NEAR(residual(skew(Vec3(0, 0, 1)), {1, 0}, {0, 1}), 1.0 / (2.0 * std::sqrt(2.0)), 1e-15);
}

TEST(FundamentalMatrix, RejectsWrongRank) {
  const Mat3 rank1 = Vec3(1, 2, 3) * Vec3(4, 5, 6).transpose();
  EXPECT_EQ(code_of([&] { FundamentalMatrix F(rank1); }), Errc::RankViolation);
  EXPECT_EQ(code_of([] { FundamentalMatrix F(Mat3::Identity()); }), Errc::RankViolation);
}

TEST(Regularity, Examples) {
  const Mat3 I = Mat3::Identity();
  const Vec3 b(0, 0, 1);
  const auto left = regularity(I, b, {0, 0}, {1, 1});
  EXPECT_EQ(left.status, Regularity::IrregularLeft);
  EXPECT_TRUE(left.left_zero);
  EXPECT_FALSE(left.right_zero);
  EXPECT_EQ(regularity(I, b, {0, 0}, {0, 0}).status, Regularity::Regular);
  EXPECT_EQ(regularity(I, b, {1, 0}, {2, 0}).status, Regularity::Regular);
  EXPECT_EQ(regularity(I, b, {1, 1}, {0, 0}).status, Regularity::IrregularRight);
  EXPECT_EQ(code_of([&] { regularity(I, Vec3::Zero(), {0, 0}, {0, 0}); }), Errc::CoincidentCameras);
}

TEST(Triangulate, GenericCase) {
  const Mat3 I = Mat3::Identity();
  const Vec3 b(1, 0, 0);
  const auto t = triangulate_pair(I, b, {1, 0}, {2, 0});
  EXPECT_EQ(t.which, TriangulationCase::Generic);
  EXPECT_TRUE(proportional(t.w.vec(), Vec4(1, 0, 1, 1)));
}

TEST(Triangulate, EpipolePairLandsOnBaseline) {
  const Mat3 I = Mat3::Identity();
  const Vec3 b(0, 0, 1);
  const HomPoint3 w = triangulate(I, b, {0, 0}, {0, 0});
  const Camera P2 = Camera::from_blocks(I, b);
  EXPECT_TRUE(verify_reconstruction(Camera::canonical(), P2, {w}, CorrespondenceSet({{{0, 0}, {0, 0}}})));
  // On the baseline: a combination of the two centers (0,0,0,1) and (0,0,-1,1).
  EXPECT_LE(std::abs(w.vec()[0]) + std::abs(w.vec()[1]), 1e-15);
}

TEST(Triangulate, Errors) {
  const Mat3 I = Mat3::Identity();
  EXPECT_EQ(code_of([&] { triangulate(I, Vec3(0, 0, 1), {0, 0}, {1, 1}); }), Errc::IrregularPair);
  EXPECT_EQ(code_of([&] { triangulate(I, Vec3(1, 0, 0), {1, 0}, {5, 5}); }), Errc::EpipolarViolated);
  EXPECT_EQ(code_of([&] { triangulate(I, Vec3::Zero(), {1, 0}, {1, 0}); }), Errc::CoincidentCameras);
  EXPECT_EQ(code_of([&] { triangulate(Mat3::Zero(), Vec3(0, 0, 1), {1, 0}, {1, 0}); }), Errc::RankViolation);
}

// Irregular pairs satisfy the epipolar constraint exactly yet admit no point.
TEST(Triangulate, IrregularPairsHaveZeroResidual) {
  const Mat3 I = Mat3::Identity();
  const Vec3 b(0, 0, 1);
  EXPECT_EQ(residual(skew(b) * I, {0, 0}, {1, 1}), 0.0);
  EXPECT_EQ(residual(skew(b) * I, {1, 1}, {0, 0}), 0.0);
  EXPECT_EQ(code_of([&] { triangulate(I, b, {1, 1}, {0, 0}); }), Errc::IrregularPair);

  Rng rng(43);
  for (int i = 0; i < 200; ++i) {
    const Mat3 A = random_nonsingular(rng);
    Vec3 bb = random_vec3(rng);
    bb[2] = std::copysign(1.0 + std::abs(bb[2]), bb[2]);
    const Vec3 e1 = A.inverse() * bb;
    if (std::abs(e1[2]) < 0.2 * e1.norm()) continue;
    const ImagePoint x{e1[0] / e1[2], e1[1] / e1[2]};
    const ImagePoint y{rng.normal(), rng.normal()};
    EXPECT_LE(residual(skew(bb) * A, x, y), 1e-12);
    EXPECT_EQ(regularity(A, bb, x, y).status, Regularity::IrregularLeft);
    EXPECT_EQ(code_of([&] { triangulate(A, bb, x, y); }), Errc::IrregularPair);
  }
}

struct CaseFixture {
  const char* name;
  Mat3 A;
  Vec3 b;
  ImagePoint x;
  ImagePoint y;
  TriangulationScalars scalars;
  TriangulationCase expected;
};

// One fixture per branch; each satisfies gamma A x^ = beta y^ - alpha b.
std::vector<CaseFixture> case_fixtures() {
  const Mat3 I = Mat3::Identity();
  const Mat3 D = Vec3(1, 1, 0).asDiagonal();
  const Vec3 e3(0, 0, 1);
  return {
      {"gamma=0, Ax=0", D, e3, {0, 0}, {0, 0}, {0, 1, 1}, TriangulationCase::GammaZeroAxZero},
      {"gamma=0", I, e3, {0, 0}, {0, 0}, {0, 1, 1}, TriangulationCase::GammaZero},
      {"beta=0, alpha=0", D, e3, {0, 0}, {0, 0}, {1, 0, 0}, TriangulationCase::BetaZeroAlphaZero},
      {"beta=0", I, e3, {0, 0}, {0, 0}, {1, 0, -1}, TriangulationCase::BetaZero},
      {"generic", I, Vec3(1, 0, 0), {1, 0}, {2, 0}, {1, 1, 1}, TriangulationCase::Generic},
  };
}

TEST(Triangulate, EveryCaseReprojects) {
  for (const auto& f : case_fixtures()) {
    SCOPED_TRACE(f.name);
    const Vec3 dep = f.scalars.gamma * f.A * lifted(f.x) - f.scalars.beta * lifted(f.y) + f.scalars.alpha * f.b;
    ASSERT_EQ(dep.norm(), 0.0);
    const auto t = triangulate_from_scalars(f.A, f.b, f.x, f.y, f.scalars);
    EXPECT_EQ(t.which, f.expected);
    const Camera P2 = Camera::from_blocks(f.A, f.b);
    EXPECT_LE(testing::reprojection_error(Camera::canonical(), P2, t.w, f.x, f.y), 1e-9);
  }
}

TEST(Triangulate, SingularAWithAxZeroThroughFullPath) {
  const Mat3 D = Vec3(1, 1, 0).asDiagonal();
  const Vec3 e3(0, 0, 1);
  const auto t = triangulate_pair(D, e3, {0, 0}, {0, 0});
  EXPECT_EQ(t.which, TriangulationCase::GammaZeroAxZero);
  EXPECT_LE(testing::reprojection_error(Camera::canonical(), Camera::from_blocks(D, e3), t.w, {0, 0}, {0, 0}), 1e-9);
}

TEST(Triangulate, RandomScenesVerify) {
  Rng rng(44);
  for (int i = 0; i < 500; ++i) {
    const Mat34 P2 = testing::blocks(random_nonsingular(rng), random_vec3(rng));
    const auto s = testing::project_scene(rng, testing::canonical_camera(), P2, 1, i % 2 == 0 ? 1.0 : 0.0);
    const auto& c = s.corrs[0];
    const HomPoint3 w = triangulate(s.P2.A(), s.P2.b(), c.x, c.y);
    EXPECT_TRUE(verify_reconstruction(s.P1, s.P2, {w}, s.corrs));
  }
}

TEST(CameraFromFundamental, SkewExample) {
  const Camera P = camera_from_fundamental(skew(Vec3(0, 0, 1)));
  Mat34 expected;
  expected << -1, 0, 0, 0,
              0, -1, 0, 0,
              0, 0, 0, 1;
  EXPECT_TRUE(proportional(P.matrix(), expected));
  EXPECT_EQ(rank_tol(P.matrix()), 3);
}

TEST(CameraFromFundamental, RankThreeForRandomRankTwo) {
  Rng rng(45);
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(rank_tol(camera_from_fundamental(random_rank2(rng)).matrix()), 3);
}

TEST(CameraFromFundamental, RankOneIsRejected) {
  const Mat3 rank1 = Vec3(1, 2, 3) * Vec3(4, 5, 6).transpose();
  EXPECT_EQ(code_of([&] { camera_from_fundamental(rank1); }), Errc::RankViolation);
  EXPECT_EQ(code_of([&] { finite_pair_from_fundamental(rank1); }), Errc::RankViolation);
}

TEST(FinitePairFromFundamental, SkewExample) {
  const Mat3 F = skew(Vec3(0, 0, 1));
  const auto [P1, P2] = finite_pair_from_fundamental(F);
  EXPECT_TRUE(P1.is_canonical());
  EXPECT_TRUE(P2.is_finite());
  EXPECT_FALSE(coincident(P1, P2));
  EXPECT_TRUE(proportional(fundamental_from_cameras(P1, P2).matrix(), F));
}

TEST(FinitePairFromFundamental, RoundTrip) {
  Rng rng(46);
  for (int i = 0; i < 1000; ++i) {
    const Mat3 F = random_rank2(rng);
    const auto [P1, P2] = finite_pair_from_fundamental(F);
    ASSERT_TRUE(P2.is_finite());
    EXPECT_FALSE(coincident(P1, P2));
    const Mat3 G = fundamental_from_cameras(P1, P2).matrix();
    EXPECT_LE(cosine_distance(vec_rowmajor(F), vec_rowmajor(G)), 1e-9);
  }
}

}  // namespace
}  // namespace projrec
