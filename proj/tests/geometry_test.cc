#include "vshift/geometry.h"

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/SVD>
#include <gtest/gtest.h>

#include "test_util.h"
#include "vshift/errors.h"
#include "vshift/manifest.h"
#include "vshift/renderer.h"

namespace vshift {
namespace {

const CameraIntrinsics kK100{100.0, 100.0, 50.0, 50.0, 101, 101};

void ExpectPoseNear(const CameraPose& a, const CameraPose& b, double tol) {
  EXPECT_LE((a.translation() - b.translation()).norm(), tol);
  EXPECT_LE((a.RotationMatrix() - b.RotationMatrix()).norm(), tol);
}

TEST(Backproject, PrincipalPointRay) {
  const Vec3 p = BackprojectPixel({50, 50}, 10.0, kK100);
  EXPECT_EQ(p, Vec3(0, 0, 10));
}

TEST(Backproject, CornerPixel) {
  const Vec3 p = BackprojectPixel({0, 0}, 10.0, kK100);
  EXPECT_EQ(p, Vec3(-5, -5, 10));
}

TEST(Backproject, RejectsBadInput) {
  EXPECT_THROW(BackprojectPixel({0, 0}, 0.0, kK100), InvalidInput);
  EXPECT_THROW(BackprojectPixel({0, 0}, -1.0, kK100), InvalidInput);
  EXPECT_THROW(BackprojectPixel({0, 0}, NAN, kK100), InvalidInput);
  EXPECT_THROW(BackprojectPixel({101, 0}, 1.0, kK100), InvalidInput);
}

TEST(Backproject, ProjectRoundTrip) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> px(0, 100);
  std::uniform_real_distribution<double> depth(0.2, 80.0);
  for (int i = 0; i < 1000; ++i) {
    const Pixel p{px(rng), px(rng)};
    const double d = depth(rng);
    const auto proj = ProjectPoint(BackprojectPixel(p, d, kK100), kK100);
    ASSERT_TRUE(proj.has_value());
    EXPECT_EQ(RoundHalfUp(proj->pixel.x()), p.u);
    EXPECT_EQ(RoundHalfUp(proj->pixel.y()), p.v);
    EXPECT_NEAR(proj->pixel.x(), p.u, 1e-9);
    EXPECT_NEAR(proj->pixel.y(), p.v, 1e-9);
    EXPECT_DOUBLE_EQ(proj->depth, d);
  }
}

TEST(Project, Examples) {
  auto a = ProjectPoint(Vec3(0, 0, 10), kK100);
  ASSERT_TRUE(a);
  EXPECT_EQ(a->pixel, Vec2(50, 50));
  EXPECT_EQ(a->depth, 10.0);
  auto b = ProjectPoint(Vec3(-5, -5, 10), kK100);
  ASSERT_TRUE(b);
  EXPECT_EQ(b->pixel, Vec2(0, 0));
  EXPECT_FALSE(ProjectPoint(Vec3(0, 0, -1), kK100));
  EXPECT_FALSE(ProjectPoint(Vec3(0, 0, kDefaultZMin), kK100));
}

TEST(RoundHalfUp, Halves) {
  EXPECT_EQ(RoundHalfUp(0.5), 1);
  EXPECT_EQ(RoundHalfUp(-0.5), 0);
  EXPECT_EQ(RoundHalfUp(2.4999), 2);
  EXPECT_EQ(RoundHalfUp(-1.5), -1);
}

TEST(Pose, ApplyExamples) {
  EXPECT_EQ(PoseApply(CameraPose::Identity(), Vec3(1, 2, 3)), Vec3(1, 2, 3));
  EXPECT_EQ(PoseApply(CameraPose::FromTranslation(Vec3(1, 0, 0)), Vec3::Zero()),
            Vec3(1, 0, 0));
}

TEST(Pose, ComposeWithInverseIsIdentity) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n;
  for (int i = 0; i < 100; ++i) {
    const Eigen::Quaterniond q =
        Eigen::Quaterniond(n(rng), n(rng), n(rng), n(rng)).normalized();
    const CameraPose a(Vec3(n(rng), n(rng), n(rng)) * 10.0, q);
    ExpectPoseNear(PoseCompose(a, PoseInverse(a)), CameraPose::Identity(), 1e-9);
    ExpectPoseNear(PoseCompose(PoseInverse(a), a), CameraPose::Identity(), 1e-9);
  }
}

TEST(Pose, ComposeOrder) {
  const CameraPose a = CameraPose::FromYaw(std::numbers::pi / 2);
  const CameraPose b = CameraPose::FromTranslation(Vec3(1, 0, 0));
  // a(b(0)) = a((1,0,0)) = (0,1,0).
  EXPECT_LE((PoseApply(PoseCompose(a, b), Vec3::Zero()) - Vec3(0, 1, 0)).norm(),
            1e-15);
}

TEST(Pose, RejectsUnnormalizedQuaternion) {
  EXPECT_THROW(CameraPose(Vec3::Zero(), Eigen::Quaterniond(1.1, 0, 0, 0)),
               InvalidInput);
  EXPECT_THROW(CameraPose(Vec3(NAN, 0, 0), Eigen::Quaterniond::Identity()),
               InvalidInput);
  EXPECT_NO_THROW(
      CameraPose(Vec3::Zero(), Eigen::Quaterniond(1.0 + 5e-7, 0, 0, 0)));
}

TEST(MountPose, OpticalAxisConventions) {
  const CameraPose front = CameraMountPose(0.0);
  // Camera +z is ego +x, camera +x is ego -y, camera +y is ego -z.
  EXPECT_LE((front.RotationMatrix() * Vec3::UnitZ() - Vec3::UnitX()).norm(), 1e-15);
  EXPECT_LE((front.RotationMatrix() * Vec3::UnitX() + Vec3::UnitY()).norm(), 1e-15);
  EXPECT_LE((front.RotationMatrix() * Vec3::UnitY() + Vec3::UnitZ()).norm(), 1e-15);
  const double yaw = 30.0 * std::numbers::pi / 180.0;
  EXPECT_NEAR(OpticalAxisYaw(CameraMountPose(yaw)), yaw, 1e-12);
  EXPECT_NEAR(OpticalAxisYaw(CameraMountPose(-yaw, Vec3(1, 2, 3))), -yaw, 1e-12);
}

TEST(DepthToPointcloud, CountsValidPixels) {
  const CameraIntrinsics k{2.0, 2.0, 1.0, 1.0, 2, 2};
  ImageBuffer im(2, 2);
  DepthMap d(2, 2);
  for (int v = 0; v < 2; ++v) {
    for (int u = 0; u < 2; ++u) d.set(u, v, 1.0 + u + v);
  }
  EXPECT_EQ(DepthToPointcloud(im, d, k, CameraPose::Identity()).size(), 4u);
  EXPECT_EQ(DepthToPointcloud(im, d, k, CameraPose::Identity(), 2).size(), 1u);
  EXPECT_TRUE(
      DepthToPointcloud(im, DepthMap(2, 2), k, CameraPose::Identity()).empty());
  EXPECT_THROW(DepthToPointcloud(im, DepthMap(3, 2), k, CameraPose::Identity()),
               InvalidInput);
  EXPECT_THROW(DepthToPointcloud(im, d, k, CameraPose::Identity(), 0),
               InvalidInput);
}

TEST(DepthToPointcloud, RecordsSourcePixelAndColor) {
  const CameraIntrinsics k{2.0, 2.0, 1.0, 1.0, 2, 2};
  ImageBuffer im(2, 2);
  im.set(1, 0, {9, 8, 7});
  DepthMap d(2, 2);
  d.set(1, 0, 4.0);
  const ColoredPointCloud c =
      DepthToPointcloud(im, d, k, CameraPose::Identity(), 1, 5);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c.source_pixel(0), (Pixel{1, 0}));
  EXPECT_EQ(c.source_camera(0), 5);
  EXPECT_EQ(c.color(0), (Rgb{9, 8, 7}));
  EXPECT_EQ(c.position(0), Vec3(0.0, -2.0, 4.0));
}

TEST(DepthToPointcloud, OraclePlaneIsCoplanar) {
  testing::TempDir tmp;
  const oracle::SceneSpec spec = testing::PlaneSpec(64.0, 12.0, 64, 48);
  const SceneManifest m = oracle::GenerateScene(spec, tmp.path());
  for (std::size_t c = 0; c < m.rig.size(); ++c) {
    const CameraFrameData f = LoadCameraFrame(m, 0, c);
    const ColoredPointCloud cloud = DepthToPointcloud(
        f.image, f.depth, m.rig.camera(c).intrinsics, m.rig.camera(c).cam2ego);
    ASSERT_GT(cloud.size(), 100u);
    Eigen::MatrixXd pts(cloud.size(), 3);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      pts.row(i) = cloud.position(i).transpose();
    }
    const Eigen::RowVector3d mean = pts.colwise().mean();
    pts.rowwise() -= mean;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(pts, Eigen::ComputeThinV);
    const Eigen::Vector3d normal = svd.matrixV().col(2);
    const double residual = (pts * normal).cwiseAbs().maxCoeff();
    EXPECT_LT(residual, 1e-6);
    EXPECT_NEAR(std::abs(normal.x()), 1.0, 1e-9);
  }
}

TEST(ShiftTransform, Examples) {
  ExpectPoseNear(MakeVirtualPose(CameraPose::Identity(), ShiftSpec{}),
                 CameraPose::Identity(), 0.0);
  const CameraPose lat = MakeVirtualPose(CameraPose::Identity(), {1.0});
  EXPECT_EQ(lat.translation(), Vec3(0, 1, 0));
  const CameraPose back = PoseCompose(ShiftTransform({1.0}), ShiftTransform({-1.0}));
  ExpectPoseNear(back, CameraPose::Identity(), 1e-9);
}

TEST(ShiftTransform, AppliesInEgoFrame) {
  // Ego facing world +y: a left shift moves it towards world -x.
  const CameraPose ego = CameraPose::FromYaw(std::numbers::pi / 2, Vec3(5, 0, 0));
  const CameraPose v = MakeVirtualPose(ego, {1.0});
  EXPECT_LE((v.translation() - Vec3(4, 0, 0)).norm(), 1e-12);
}

TEST(ShiftTransform, RejectsOutOfBound) {
  EXPECT_THROW(MakeVirtualPose(CameraPose::Identity(), {8.5}), InvalidInput);
  EXPECT_THROW(MakeVirtualPose(CameraPose::Identity(), {0.0, -9.0}), InvalidInput);
  EXPECT_THROW(MakeVirtualPose(CameraPose::Identity(), {NAN}), InvalidInput);
  EXPECT_NO_THROW(MakeVirtualPose(CameraPose::Identity(), {8.0}));
  EXPECT_NO_THROW(MakeVirtualPose(CameraPose::Identity(), {12.0}, 16.0));
}

}  // namespace
}  // namespace vshift
