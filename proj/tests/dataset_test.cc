#include "vshift/dataset.h"

#include <numbers>

#include <gtest/gtest.h>

#include "test_util.h"
#include "vshift/errors.h"
#include "vshift/oracle.h"
#include "vshift/seam.h"

namespace vshift {
namespace {

using testing::TempDir;

oracle::SceneSpec SmallRigScene(std::size_t frames) {
  oracle::SceneSpec s = oracle::RandomSceneSpec(5);
  s.name = "scene";
  s.width = 32;
  s.height = 24;
  s.fx = s.fy = 32.0;
  s.cameras = oracle::DefaultRig();
  s.trajectory = oracle::LinearTrajectory(frames, Vec3(0.05, 0.0, 0.0));
  return s;
}

TEST(Condition, ZeroShiftDiffersOnlyAtInvalidDepth) {
  TempDir tmp;
  const SceneManifest m = oracle::GenerateScene(SmallRigScene(2), tmp.path());
  for (std::size_t f = 0; f < 2; ++f) {
    for (std::size_t c = 0; c < m.rig.size(); ++c) {
      const CameraFrameData data = LoadCameraFrame(m, f, c);
      const ConditionSample s =
          BuildConditionFrame(m, f, m.rig.camera(c).id, ShiftSpec{});
      for (int v = 0; v < 24; ++v) {
        for (int u = 0; u < 32; ++u) {
          if (data.depth.valid(u, v)) {
            ASSERT_EQ(s.condition.at(u, v), s.raw.at(u, v));
            ASSERT_FALSE(s.mask.masked(u, v));
          } else {
            ASSERT_EQ(s.mask.at(u, v), MaskFlag::kInvalidDepth);
          }
        }
      }
    }
  }
}

TEST(Condition, TwoCameraPlaneMatchesOracleComposition) {
  TempDir tmp;
  oracle::SceneSpec spec = testing::PlaneSpec(40.0, 10.0, 40, 30, 1);
  // The lost band of the raw frame sits on the right edge for a left shift;
  // a right-facing neighbor (chosen by fallback, nothing is on the left)
  // covers part of it once warped.
  spec.cameras = {{"front", 0.0, Vec3::Zero()},
                  {"right", -35.0 * std::numbers::pi / 180.0, Vec3(0, -0.2, 0)}};
  const SceneManifest m = oracle::GenerateScene(spec, tmp.path());
  const ShiftSpec shift{1.0};
  const ConditionSample s = BuildConditionFrame(m, 0, "front", shift);
  ASSERT_EQ(s.neighbor, "right");

  const CameraIntrinsics k = spec.Intrinsics();
  const CameraFrameData front = LoadCameraFrame(m, 0, 0);
  const CameraFrameData side = LoadCameraFrame(m, 0, 1);
  const CameraPose ego = m.frames[0].ego2world;
  const CameraPose virt_world =
      PoseCompose(MakeVirtualPose(ego, shift), m.rig.camera(0).cam2ego);
  const CameraPose virt_in_ego = VirtualCameraInEgo(ego, virt_world);
  const oracle::BruteForceResult target = oracle::BruteForceRender(
      DepthToPointcloud(front.image, front.depth, k, m.rig.camera(0).cam2ego, 1, 0),
      virt_in_ego, k);
  const oracle::BruteForceResult nb = oracle::BruteForceRender(
      DepthToPointcloud(side.image, side.depth, k, m.rig.camera(1).cam2ego, 1, 1),
      virt_in_ego, k, {}, kDefaultDepthTolerance, 1);

  EXPECT_EQ(s.mask, target.mask);
  std::size_t filled = 0, black = 0;
  for (int v = 0; v < 30; ++v) {
    for (int u = 0; u < 40; ++u) {
      if (!target.mask.masked(u, v)) {
        ASSERT_EQ(s.condition.at(u, v), front.image.at(u, v));
      } else if (nb.zbuffer.empty_at(u, v)) {
        ASSERT_EQ(s.condition.at(u, v), (Rgb{0, 0, 0}));
        ++black;
      } else {
        ASSERT_EQ(s.condition.at(u, v), nb.image.at(u, v));
        ++filled;
      }
    }
  }
  EXPECT_GT(filled, 0u);
  EXPECT_EQ(target.mask.Count(MaskFlag::kOutOfView), filled + black);
}

TEST(Condition, LargerShiftMasksMore) {
  TempDir tmp;
  oracle::SceneSpec spec = testing::PlaneSpec(80.0, 10.0, 48, 32, 1);
  const SceneManifest m = oracle::GenerateScene(spec, tmp.path());
  const double f1 = BuildConditionFrame(m, 0, "front", {1.0}).mask.MaskedFraction();
  const double f4 = BuildConditionFrame(m, 0, "front", {4.0}).mask.MaskedFraction();
  EXPECT_GT(f1, 0.0);
  EXPECT_GT(f4, f1);
}

TEST(ShiftSampler, PureFunctionOfSeedAndIndex) {
  const ShiftSampler a(7, 2.0), b(7, 2.0), c(8, 2.0);
  bool any_diff = false;
  for (std::uint64_t i = 0; i < 200; ++i) {
    const ShiftSpec s = a.Sample(i);
    EXPECT_EQ(s, b.Sample(i));
    EXPECT_GE(s.lateral, -2.0);
    EXPECT_LE(s.lateral, 2.0);
    EXPECT_EQ(s.longitudinal, 0.0);
    any_diff |= !(s == c.Sample(i));
  }
  EXPECT_TRUE(any_diff);
  EXPECT_NE(ShiftSampler(1, 0.0, 3.0).Sample(4).longitudinal, 0.0);
}

TEST(PipelineConfig, JsonOverrides) {
  const PipelineConfig c = PipelineConfig::FromJson(
      nlohmann::json{{"depth_tol", 0.05}, {"seed", 3}});
  EXPECT_EQ(c.depth_tol, 0.05);
  EXPECT_EQ(c.seed, 3u);
  EXPECT_EQ(c.stride, 1);
  EXPECT_THROW(PipelineConfig::FromJson(nlohmann::json{{"depht_tol", 1}}),
               InvalidInput);
  EXPECT_EQ(PipelineConfig::FromJson(c.ToJson()).ToJson(), c.ToJson());
  EXPECT_FALSE(c.ToJson(false).contains("workers"));
  PipelineConfig bad;
  bad.workers = 0;
  EXPECT_THROW(bad.Validate(), InvalidInput);
}

TEST(StreamBuild, EmitsOneSamplePerFrameAndCamera) {
  TempDir tmp;
  const SceneManifest m = oracle::GenerateScene(SmallRigScene(49), tmp.path());
  std::vector<std::string> order;
  const BuildStats stats = StreamBuild(
      m, ShiftSampler(1, 1.0),
      [&](const ConditionSample& s) {
        order.push_back(SampleDirName(s.frame, s.camera));
      });
  EXPECT_EQ(stats.samples_emitted, 49u * 3u);
  EXPECT_EQ(stats.frames_processed, 49u);
  std::size_t hist_total = 0;
  for (auto n : stats.mask_histogram) hist_total += n;
  EXPECT_EQ(hist_total, 147u);
  ASSERT_EQ(order.size(), 147u);
  EXPECT_EQ(order[0], "0000_left");
  EXPECT_EQ(order[4], "0001_front");
  EXPECT_TRUE(std::is_sorted(order.begin(), order.end(), [](auto& a, auto& b) {
    return a.substr(0, 4) < b.substr(0, 4);
  }));
}

TEST(StreamBuild, SinkFailureAbortsWithPartialStats) {
  TempDir tmp;
  const SceneManifest m = oracle::GenerateScene(SmallRigScene(4), tmp.path());
  int calls = 0;
  try {
    StreamBuild(m, ShiftSampler(1, 1.0), [&](const ConditionSample&) {
      if (++calls == 5) throw std::runtime_error("disk full");
    });
    FAIL();
  } catch (const BuildAborted& e) {
    EXPECT_EQ(e.kind(), "build_aborted");
    EXPECT_EQ(e.partial_stats().samples_emitted, 4u);
    EXPECT_EQ(e.partial_stats().frames_processed, 1u);
  }
}

TEST(StreamBuild, PeakMemoryIndependentOfLength) {
  TempDir tmp;
  const SceneManifest short_scene =
      oracle::GenerateScene(SmallRigScene(8), tmp / "s8");
  const SceneManifest long_scene =
      oracle::GenerateScene(SmallRigScene(64), tmp / "s64");
  const auto sink = [](const ConditionSample&) {};
  const auto p8 = StreamBuild(short_scene, ShiftSampler(2, 1.0), sink)
                      .peak_tracked_bytes;
  const auto p64 = StreamBuild(long_scene, ShiftSampler(2, 1.0), sink)
                       .peak_tracked_bytes;
  ASSERT_GT(p8, 0);
  EXPECT_LT(std::abs(static_cast<double>(p64 - p8)) / p8, 0.10)
      << p8 << " vs " << p64;
}

TEST(SampleIo, RoundTrip) {
  TempDir tmp;
  const SceneManifest m = oracle::GenerateScene(SmallRigScene(1), tmp / "scene");
  const ConditionSample s = BuildConditionFrame(m, 0, "front", {0.7});
  ASSERT_TRUE(s.neighbor.has_value());
  WriteSample(s, tmp / "a");
  EXPECT_EQ(ReadSample(tmp / "a"), s);
}

TEST(SampleIo, NoNeighborSurvives) {
  TempDir tmp;
  const SceneManifest m =
      oracle::GenerateScene(testing::PlaneSpec(32.0, 6.0, 32, 24), tmp / "scene");
  const ConditionSample s = BuildConditionFrame(m, 0, "front", {-0.5});
  ASSERT_FALSE(s.neighbor.has_value());
  WriteSample(s, tmp / "a");
  const ConditionSample back = ReadSample(tmp / "a");
  EXPECT_FALSE(back.neighbor.has_value());
  EXPECT_EQ(back, s);
}

TEST(SampleIo, TruncatedMaskIsCorruption) {
  TempDir tmp;
  const SceneManifest m = oracle::GenerateScene(SmallRigScene(1), tmp / "scene");
  WriteSample(BuildConditionFrame(m, 0, "left", {0.3}), tmp / "a");
  const std::string bytes = pnm::ReadFileBytes(tmp / "a" / "mask.pgm");
  pnm::WriteFileBytes(tmp / "a" / "mask.pgm", bytes.substr(0, bytes.size() - 10));
  EXPECT_THROW(ReadSample(tmp / "a"), FormatError);
}

TEST(Dataset, BuildTwiceIsByteIdenticalAndVerifies) {
  TempDir tmp;
  oracle::GenerateScene(SmallRigScene(6), tmp / "scene");
  PipelineConfig config;
  config.seed = 9;
  BuildDataset(tmp / "scene" / "manifest.json", tmp / "a", config);
  config.workers = 4;
  BuildDataset(tmp / "scene" / "manifest.json", tmp / "b", config);
  const auto a = testing::ReadTree(tmp / "a");
  EXPECT_EQ(a.size(), 6u * 3u * 4u + 1u);
  EXPECT_EQ(a, testing::ReadTree(tmp / "b"));

  const VerifyReport ok = VerifyDataset(tmp / "a", 2);
  EXPECT_TRUE(ok.ok());
  EXPECT_EQ(ok.checked, 18u);

  // Flip one byte of one stored condition.
  const auto cond = tmp / "a" / "scene" / "0003_front" / "cond.ppm";
  std::string bytes = pnm::ReadFileBytes(cond);
  bytes.back() ^= 1;
  pnm::WriteFileBytes(cond, bytes);
  const VerifyReport bad = VerifyDataset(tmp / "a");
  ASSERT_EQ(bad.mismatches.size(), 1u);
  EXPECT_NE(bad.mismatches[0].find("0003_front"), std::string::npos);
}

}  // namespace
}  // namespace vshift
