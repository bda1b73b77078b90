#include "test_support.hpp"

#include <gtest/gtest.h>

namespace projrec {
namespace {

using testing::blocks;
using testing::random_rank3_camera;

TEST(Lift, AppendsOne) {
  EXPECT_EQ(lifted({0, 0}), Vec3(0, 0, 1));
  EXPECT_EQ(lifted({1, 2}), Vec3(1, 2, 1));
  EXPECT_EQ(lifted({-3, 0.5}), Vec3(-3, 0.5, 1));
  EXPECT_TRUE(proportional(lift({1, 2}).vec(), Vec3(1, 2, 1)));
  EXPECT_NEAR(lift({1, 2}).vec().norm(), 1.0, 1e-15);
}

TEST(HomPoint, FinitenessAndImagePoint) {
  EXPECT_TRUE(HomPoint3(Vec4(1, 2, 3, 1)).is_finite());
  EXPECT_FALSE(HomPoint3(Vec4(1, 2, 3, 0)).is_finite());
  const ImagePoint p = HomPoint2(Vec3(-6, 1, -2)).image_point();
  EXPECT_NEAR(p.x1, 3.0, 1e-15);
  EXPECT_NEAR(p.x2, -0.5, 1e-15);
  EXPECT_THROW(HomPoint2(Vec3(1, 0, 0)).image_point(), Error);
  EXPECT_THROW(HomPoint3(Vec4::Zero()), Error);
}

TEST(CorrespondenceSet, RejectsEmptyAndNonFinite) {
  EXPECT_THROW(CorrespondenceSet({}), Error);
  EXPECT_THROW(CorrespondenceSet({{{std::nan(""), 0}, {0, 0}}}), Error);
  EXPECT_EQ(CorrespondenceSet({{{0, 0}, {1, 1}}}).size(), 1u);
}

TEST(Camera, RankViolation) {
  Mat34 P = Mat34::Zero();
  P(0, 0) = 1;
  P(1, 1) = 1;
  try {
    Camera c(P);
    FAIL() << "expected RankViolation";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::RankViolation);
  }
}

TEST(CameraCenter, Examples) {
  EXPECT_EQ(camera_center(Camera::canonical()).vec(), Vec4(0, 0, 0, 1));

  const Camera shifted = Camera::from_blocks(Mat3::Identity(), Vec3(0, 0, 1));
  EXPECT_TRUE(proportional(camera_center(shifted).vec(), Vec4(0, 0, -1, 1)));

  // A = diag(1,1,0) completed to rank 3 by b = e3; the center is the A-kernel at infinity.
  const Camera infinite = Camera::from_blocks(Vec3(1, 1, 0).asDiagonal(), Vec3(0, 0, 1));
  const HomPoint3 c = camera_center(infinite);
  EXPECT_FALSE(c.is_finite());
  EXPECT_TRUE(proportional(c.vec(), Vec4(0, 0, 1, 0)));
  EXPECT_LE((infinite.matrix() * c.vec()).norm(), 1e-15);
}

TEST(CameraCenter, AnnihilatedByCamera) {
  Rng rng(21);
  const Tolerances tol;
  for (int i = 0; i < 1000; ++i) {
    const Camera P(random_rank3_camera(rng, i % 2 == 0));
    const HomPoint3 c = camera_center(P);
    EXPECT_LE((P.matrix() * c.vec()).norm(), 10 * tol.rank_rel * P.matrix().norm());
    EXPECT_EQ(c.is_finite(), P.is_finite());
  }
}

TEST(Coincident, Examples) {
  const Camera P1 = Camera::canonical();
  EXPECT_TRUE(coincident(P1, Camera::from_blocks(2 * Mat3::Identity(), Vec3::Zero())));
  EXPECT_FALSE(coincident(P1, Camera::from_blocks(Mat3::Identity(), Vec3(0, 0, 1))));
  EXPECT_TRUE(coincident(P1, P1));
}

TEST(Project, Examples) {
  const Camera P1 = Camera::canonical();
  EXPECT_TRUE(proportional(project(P1, HomPoint3(Vec4(1, 2, 1, 1))).vec(), Vec3(1, 2, 1)));
  try {
    project(P1, HomPoint3(Vec4(0, 0, 0, 1)));
    FAIL() << "expected AtCenter";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::AtCenter);
  }
  const Camera P2 = Camera::from_blocks(Mat3::Identity(), Vec3(1, 0, 0));
  EXPECT_TRUE(proportional(project(P2, HomPoint3(Vec4(1, 0, 1, 1))).vec(), Vec3(2, 0, 1)));
}

TEST(Project, ScaleCovariant) {
  Rng rng(22);
  for (int i = 0; i < 500; ++i) {
    const Camera P(random_rank3_camera(rng, true));
    const Vec4 w = testing::random_vec4(rng);
    const double lambda = rng.uniform(0.1, 10.0) * (i % 2 == 0 ? -1.0 : 1.0);
    EXPECT_TRUE(proportional(project(P, w).vec(), project(P, Vec4(lambda * w)).vec()));
  }
}

void expect_canonicalizes(const Camera& P, const Homography4& H) {
  const Tolerances tol;
  const Mat34 moved = P.matrix() * H.inverse();
  const Mat34 target = Camera::canonical().matrix();
  // Least-squares scale s fitting moved = s (I | 0).
  const double s = (moved.array() * target.array()).sum() / target.squaredNorm();
  EXPECT_GT(std::abs(s), 0.0);
  const Mat34 residual = moved / s - target;
  EXPECT_LE(residual.cwiseAbs().maxCoeff(), 10 * tol.rank_rel);
  EXPECT_EQ(rank_tol(H.matrix()), 4);
}

TEST(CanonicalHomography, Examples) {
  const Camera P1 = Camera::canonical();
  expect_canonicalizes(P1, canonical_homography(P1));
  const Camera P2 = Camera::from_blocks(2 * Mat3::Identity(), Vec3::Zero());
  expect_canonicalizes(P2, canonical_homography(P2));
}

TEST(CanonicalHomography, RandomFiniteAndInfiniteCameras) {
  Rng rng(23);
  for (int i = 0; i < 1000; ++i) {
    const Camera P(random_rank3_camera(rng, i % 2 == 0));
    expect_canonicalizes(P, canonical_homography(P));
  }
}

TEST(VerifyReconstruction, Examples) {
  const Camera P1 = Camera::canonical();
  const Camera P2 = Camera::from_blocks(Mat3::Identity(), Vec3(1, 0, 0));
  const std::vector<HomPoint3> ws{HomPoint3(Vec4(1, 0, 1, 1))};
  EXPECT_TRUE(verify_reconstruction(P1, P2, ws, CorrespondenceSet({{{1, 0}, {2, 0}}})));
  EXPECT_FALSE(verify_reconstruction(P1, P2, ws, CorrespondenceSet({{{1, 0}, {5, 5}}})));
  // A point at the first center has no image: counts as failure.
  EXPECT_FALSE(verify_reconstruction(P1, P2, {HomPoint3(Vec4(0, 0, 0, 1))}, CorrespondenceSet({{{0, 0}, {1, 0}}})));
}

TEST(VerifyReconstruction, ForwardProjectionRoundTrip) {
  Rng rng(24);
  for (int i = 0; i < 500; ++i) {
    const Mat34 P1 = random_rank3_camera(rng, true);
    const Mat34 P2 = random_rank3_camera(rng, true);
    const auto scene = testing::project_scene(rng, P1, P2, 5, 0.0);
    EXPECT_TRUE(verify_reconstruction(scene.P1, scene.P2, scene.ws, scene.corrs));
  }
}

TEST(Camera, FiniteAndCanonicalPredicates) {
  EXPECT_TRUE(Camera::canonical().is_canonical());
  EXPECT_TRUE(Camera(blocks(3 * Mat3::Identity(), Vec3::Zero())).is_canonical());
  EXPECT_FALSE(Camera(blocks(Mat3::Identity(), Vec3(0, 0, 1))).is_canonical());
  EXPECT_FALSE(Camera(blocks(Vec3(1, 1, 0).asDiagonal(), Vec3(0, 0, 1))).is_finite());
}

}  // namespace
}  // namespace projrec
