#include "vshift/oracle.h"

#include <cmath>

#include <gtest/gtest.h>

#include "test_util.h"
#include "vshift/errors.h"

namespace vshift {
namespace {

using testing::PlaneSpec;
using testing::TempDir;

TEST(Oracle, FrontoParallelPlaneDepthIsConstant) {
  TempDir tmp;
  const oracle::SceneSpec spec = PlaneSpec(64.0, 10.0, 64, 48);
  const oracle::RenderedView view = oracle::RenderView(spec, 0, 0);
  for (int v = 0; v < 48; ++v) {
    for (int u = 0; u < 64; ++u) ASSERT_NEAR(view.depth.at(u, v), 10.0, 1e-12);
  }
  const SceneManifest m = oracle::GenerateScene(spec, tmp.path());
  const pnm::GrayImage stored = pnm::ReadPgm(m.DepthPath(0, 0));
  EXPECT_EQ(stored.maxval, 65535);
  for (auto value : stored.values) ASSERT_EQ(value, 10000);
}

TEST(Oracle, CheckerMatchesAnalyticPattern) {
  oracle::SceneSpec spec = PlaneSpec(80.0, 10.0, 64, 64);
  // 8 px at fx = 80, Z = 10 m is 1 m.
  spec.primitives[0].texture = oracle::Texture{};
  spec.primitives[0].texture.period = 1.0;
  const auto& colors = spec.primitives[0].texture.colors;
  const oracle::RenderedView view = oracle::RenderView(spec, 0, 0);
  for (int v = 0; v < 64; ++v) {
    for (int u = 0; u < 64; ++u) {
      // Face coordinates run along camera +x and +y on an x-facing wall.
      const int iu = static_cast<int>(std::floor((u - 32) / 8.0));
      const int iv = static_cast<int>(std::floor((v - 32) / 8.0));
      ASSERT_EQ(view.image.at(u, v), colors[(iu + iv) & 1]) << u << "," << v;
    }
  }
}

TEST(Oracle, GenerateIsDeterministic) {
  TempDir a, b;
  oracle::SceneSpec spec = oracle::RandomSceneSpec(3);
  spec.trajectory = oracle::LinearTrajectory(3, Vec3(0.2, 0, 0));
  oracle::GenerateScene(spec, a.path());
  oracle::GenerateScene(spec, b.path());
  const auto ta = testing::ReadTree(a.path());
  EXPECT_EQ(ta.size(), 1u + 2u * 3u * spec.cameras.size());
  EXPECT_EQ(ta, testing::ReadTree(b.path()));
}

TEST(Oracle, SkyHasInvalidDepth) {
  oracle::SceneSpec spec = PlaneSpec(64.0, 10.0, 64, 48);
  spec.primitives[0].size = Vec3(4.0, 4.0, 0.0);
  const oracle::RenderedView view = oracle::RenderView(spec, 0, 0);
  EXPECT_FALSE(view.depth.valid(0, 0));
  EXPECT_EQ(view.image.at(0, 0), spec.background);
  EXPECT_TRUE(view.depth.valid(32, 24));
}

TEST(Oracle, CameraInsideBoxIsDegenerate) {
  oracle::SceneSpec spec = PlaneSpec(64.0, 10.0, 16, 16);
  oracle::Primitive box;
  box.kind = oracle::Primitive::Kind::kBox;
  box.center = Vec3::Zero();
  box.size = Vec3(2, 2, 2);
  spec.primitives.push_back(box);
  EXPECT_THROW(oracle::RenderView(spec, 0, 0), DegenerateView);
}

TEST(Oracle, SpecJsonRoundTrip) {
  oracle::SceneSpec spec = oracle::RandomSceneSpec(8);
  spec.trajectory = {CameraPose::FromYaw(0.25, Vec3(1, 2, 0)),
                     CameraPose::FromYaw(0.5, Vec3(2, 2, 0))};
  nlohmann::json j = oracle::SceneSpecToJson(spec);
  const oracle::SceneSpec back = oracle::SceneSpecFromJson(j);
  nlohmann::json k = oracle::SceneSpecToJson(back);
  // Yaw goes through degrees and a rotation matrix; allow rounding.
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_NEAR(k["trajectory"]["poses"][i]["yaw_deg"].get<double>(),
                j["trajectory"]["poses"][i]["yaw_deg"].get<double>(), 1e-12);
    EXPECT_LE((back.trajectory[i].translation() - spec.trajectory[i].translation())
                  .norm(),
              1e-15);
  }
  j.erase("trajectory");
  k.erase("trajectory");
  EXPECT_EQ(k, j);
  EXPECT_EQ(back.width, spec.width);
  EXPECT_EQ(back.primitives.size(), spec.primitives.size());
  EXPECT_THROW(oracle::SceneSpecFromJson(nlohmann::json{{"name", "x"}}),
               InvalidInput);
}

TEST(BruteForce, EmptyCloud) {
  const CameraIntrinsics k{8, 8, 4, 4, 8, 8};
  const oracle::BruteForceResult r =
      oracle::BruteForceRender(ColoredPointCloud{}, CameraPose::Identity(), k);
  EXPECT_EQ(r.image, ImageBuffer(8, 8));
  for (int v = 0; v < 8; ++v) {
    for (int u = 0; u < 8; ++u) EXPECT_TRUE(r.zbuffer.empty_at(u, v));
  }
  EXPECT_EQ(r.mask, OcclusionMask(8, 8));
}

TEST(AnalyticPlaneBand, Examples) {
  EXPECT_EQ(oracle::AnalyticPlaneBand(100, 10, 1, 100), 10);
  EXPECT_EQ(oracle::AnalyticPlaneBand(100, 10, -1, 100), 10);
  EXPECT_EQ(oracle::AnalyticPlaneBand(100, 10, 0, 100), 0);
  EXPECT_EQ(oracle::AnalyticPlaneBand(100, 1, 4, 64), 64);
  EXPECT_EQ(oracle::AnalyticPlaneBand(100, 8, 1, 100), 13);   // 12.5 rounds up
  EXPECT_EQ(oracle::AnalyticPlaneBand(100, 8, -1, 100), 12);  // mirrored
}

}  // namespace
}  // namespace vshift
