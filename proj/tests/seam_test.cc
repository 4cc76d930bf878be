#include "vshift/seam.h"

#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "test_util.h"
#include "vshift/errors.h"
#include "vshift/oracle.h"

namespace vshift {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

CameraRig MakeRig(const std::vector<std::pair<std::string, double>>& cams) {
  std::vector<RigCamera> out;
  for (const auto& [id, yaw_deg] : cams) {
    out.push_back({id, CameraIntrinsics{32, 32, 16, 16, 32, 32},
                   CameraMountPose(yaw_deg * kDeg)});
  }
  return CameraRig(out);
}

CameraRig SurroundRig() {
  return MakeRig({{"front", 0},
                  {"front_right", -55},
                  {"front_left", 55},
                  {"back_right", -110},
                  {"back_left", 110},
                  {"back", 180}});
}

TEST(SelectNeighbor, SurroundRigFollowsShiftSide) {
  const CameraRig rig = SurroundRig();
  EXPECT_EQ(SelectNeighbor(rig, "front", {1.0}), "front_left");
  EXPECT_EQ(SelectNeighbor(rig, "front", {-1.0}), "front_right");
  EXPECT_EQ(SelectNeighbor(rig, "front_left", {1.0}), "back_left");
  EXPECT_EQ(SelectNeighbor(rig, "front_left", {-1.0}), "front");
  // Yaw differences wrap around: back (180) is +70 from back_left (110).
  EXPECT_EQ(SelectNeighbor(rig, "back_left", {1.0}), "back");
  EXPECT_EQ(SelectNeighbor(rig, "back", {1.0}), "back_right");
}

TEST(SelectNeighbor, SingleCameraRig) {
  EXPECT_EQ(SelectNeighbor(MakeRig({{"front", 0}}), "front", {1.0}),
            std::nullopt);
}

TEST(SelectNeighbor, ZeroLateralUsesNearestTiesToPositiveYaw) {
  const CameraRig rig = SurroundRig();
  EXPECT_EQ(SelectNeighbor(rig, "front", {0.0, 2.0}), "front_left");
  EXPECT_EQ(SelectNeighbor(rig, "front_right", {0.0, 2.0}), "front");
  const CameraRig skew = MakeRig({{"a", 0}, {"b", -20}, {"c", 40}});
  EXPECT_EQ(SelectNeighbor(skew, "a", {0.0, 1.0}), "b");
}

TEST(SelectNeighbor, FallsBackWhenShiftSideIsEmpty) {
  const CameraRig rig = MakeRig({{"front", 0}, {"right", -30}});
  EXPECT_EQ(SelectNeighbor(rig, "front", {1.0}), "right");
  EXPECT_THROW(SelectNeighbor(rig, "nope", {1.0}), InvalidInput);
}

TEST(CameraRig, Validation) {
  EXPECT_THROW(CameraRig(std::vector<RigCamera>{}), InvalidInput);
  EXPECT_THROW(MakeRig({{"a", 0}, {"a", 10}}), InvalidInput);
  EXPECT_NEAR(SurroundRig().Yaw(2), 55 * kDeg, 1e-12);
}

struct WarpSetup {
  oracle::SceneSpec spec;
  std::size_t frame = 2;
  std::size_t target = 1;  // front
  std::size_t nb = 0;      // left, +30 degrees
};

WarpSetup TwoCameraScene() {
  WarpSetup w;
  w.spec = oracle::RandomSceneSpec(21);
  w.spec.cameras = {{"left", 30 * kDeg, Vec3(0.1, 0.2, 0.0)},
                    {"front", 0.0, Vec3(0.3, 0.0, 0.0)}};
  w.spec.trajectory = oracle::LinearTrajectory(4, Vec3(0.4, 0.1, 0.0));
  w.spec.trajectory[2] = CameraPose::FromYaw(10 * kDeg, Vec3(1.0, 0.5, 0.0));
  return w;
}

TEST(WarpNeighbor, MatchesBruteForceOfNeighborCloud) {
  const WarpSetup w = TwoCameraScene();
  const oracle::RenderedView nb = oracle::RenderView(w.spec, w.frame, w.nb);
  const CameraIntrinsics k = w.spec.Intrinsics();
  const CameraPose ego = w.spec.trajectory[w.frame];
  const auto& tc = w.spec.cameras[w.target];
  const auto& nc = w.spec.cameras[w.nb];
  const CameraPose nb_cam2ego = CameraMountPose(nc.yaw, nc.position);
  for (double lateral : {1.0, 2.0, -1.5}) {
    const CameraPose virt_world = PoseCompose(
        MakeVirtualPose(ego, {lateral}), CameraMountPose(tc.yaw, tc.position));
    const ImageBuffer warp =
        WarpNeighbor(nb.image, nb.depth, k, nb_cam2ego, ego, virt_world, k);
    const ColoredPointCloud cloud =
        DepthToPointcloud(nb.image, nb.depth, k, nb_cam2ego);
    const oracle::BruteForceResult bf = oracle::BruteForceRender(
        cloud, VirtualCameraInEgo(ego, virt_world), k);
    EXPECT_EQ(warp, bf.image) << lateral;
  }
}

TEST(WarpNeighbor, SelfWarpAtZeroShiftIsIdentity) {
  const WarpSetup w = TwoCameraScene();
  const oracle::RenderedView view = oracle::RenderView(w.spec, w.frame, w.target);
  const CameraIntrinsics k = w.spec.Intrinsics();
  const CameraPose ego = w.spec.trajectory[w.frame];
  const auto& tc = w.spec.cameras[w.target];
  const CameraPose cam2ego = CameraMountPose(tc.yaw, tc.position);
  const CameraPose virt_world =
      PoseCompose(MakeVirtualPose(ego, {}), cam2ego);
  const ImageBuffer warp =
      WarpNeighbor(view.image, view.depth, k, cam2ego, ego, virt_world, k);
  for (int v = 0; v < k.height; ++v) {
    for (int u = 0; u < k.width; ++u) {
      if (view.depth.valid(u, v)) {
        ASSERT_EQ(warp.at(u, v), view.image.at(u, v));
      }
    }
  }
}

TEST(WarpNeighbor, InvalidDepthGivesBlack) {
  const CameraIntrinsics k{32, 32, 16, 16, 32, 32};
  std::mt19937_64 rng(1);
  const ImageBuffer img = testing::RandomImage(32, 32, rng);
  const ImageBuffer warp =
      WarpNeighbor(img, DepthMap(32, 32), k, CameraMountPose(0.5),
                   CameraPose::Identity(), CameraMountPose(0.0), k);
  EXPECT_EQ(warp, ImageBuffer(32, 32));
}

TEST(CompositeSeam, Examples) {
  std::mt19937_64 rng(2);
  const ImageBuffer masked = testing::RandomImage(9, 7, rng);
  const ImageBuffer warp = testing::RandomImage(9, 7, rng);
  EXPECT_EQ(CompositeSeam(masked, warp,
                          OcclusionMask::Filled(9, 7, MaskFlag::kVisible)),
            masked);
  EXPECT_EQ(CompositeSeam(masked, warp,
                          OcclusionMask::Filled(9, 7, MaskFlag::kOutOfView)),
            warp);
  EXPECT_THROW(CompositeSeam(masked, ImageBuffer(3, 3),
                             OcclusionMask(9, 7)),
               InvalidInput);
}

TEST(CompositeSeam, PixelwiseSelection) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const ImageBuffer masked = testing::RandomImage(16, 12, rng);
    const ImageBuffer warp = testing::RandomImage(16, 12, rng);
    OcclusionMask m(16, 12);
    for (int v = 0; v < 12; ++v) {
      for (int u = 0; u < 16; ++u) m.set(u, v, static_cast<MaskFlag>(rng() % 4));
    }
    const ImageBuffer out = CompositeSeam(masked, warp, m);
    for (int v = 0; v < 12; ++v) {
      for (int u = 0; u < 16; ++u) {
        ASSERT_EQ(out.at(u, v), m.masked(u, v) ? warp.at(u, v) : masked.at(u, v));
      }
    }
  }
}

}  // namespace
}  // namespace vshift
