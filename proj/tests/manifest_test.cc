#include "vshift/manifest.h"

#include <gtest/gtest.h>
#include <json.hpp>

#include "test_util.h"
#include "vshift/errors.h"
#include "vshift/oracle.h"

namespace vshift {
namespace {

using nlohmann::json;

class ManifestTest : public ::testing::Test {
 protected:
  void SetUp() override {
    oracle::SceneSpec spec = testing::PlaneSpec(32.0, 8.0, 32, 24, 8);
    spec.cameras = oracle::DefaultRig();
    scene_ = oracle::GenerateScene(spec, tmp_.path());
    doc_ = json::parse(pnm::ReadFileBytes(tmp_ / "manifest.json"));
  }

  // Parses a modified copy of the generated manifest; returns the error kind
  // and message, or "" if it parsed.
  std::pair<std::string, std::string> ParseError(const json& doc) {
    try {
      ParseManifest(doc.dump(), tmp_.path());
    } catch (const ManifestError& e) {
      return {e.kind(), e.what()};
    }
    return {"", ""};
  }

  testing::TempDir tmp_;
  SceneManifest scene_;
  json doc_;
};

TEST_F(ManifestTest, OracleSceneHasEightFramesThreeCameras) {
  EXPECT_EQ(scene_.frames.size(), 8u);
  EXPECT_EQ(scene_.rig.size(), 3u);
  const SceneManifest loaded = LoadManifest(tmp_ / "manifest.json");
  EXPECT_EQ(loaded.frames.size(), 8u);
  EXPECT_EQ(loaded.rig.camera(2).id, "right");
}

TEST_F(ManifestTest, SerializeRoundTrip) {
  const SceneManifest again = ParseManifest(SerializeManifest(scene_), tmp_.path());
  EXPECT_EQ(SerializeManifest(again), SerializeManifest(scene_));
  EXPECT_EQ(again.depth_scale, scene_.depth_scale);
  EXPECT_EQ(again.rig.camera(0).intrinsics, scene_.rig.camera(0).intrinsics);
}

TEST_F(ManifestTest, DuplicateTimestampNamesFrame) {
  doc_["frames"][5]["timestamp"] = doc_["frames"][4]["timestamp"];
  const auto [kind, msg] = ParseError(doc_);
  EXPECT_EQ(kind, "manifest_timestamps");
  EXPECT_NE(msg.find("frame 5"), std::string::npos) << msg;
}

TEST_F(ManifestTest, EmptyFrames) {
  doc_["frames"] = json::array();
  EXPECT_EQ(ParseError(doc_).first, "manifest_empty");
}

TEST_F(ManifestTest, MissingFileNamesFrameAndCamera) {
  std::filesystem::remove(tmp_.path() / scene_.frames[3].depth_paths[1]);
  const auto [kind, msg] = ParseError(doc_);
  EXPECT_EQ(kind, "manifest_missing_file");
  EXPECT_NE(msg.find("frame 3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("front"), std::string::npos) << msg;
  EXPECT_THROW(LoadManifest(tmp_ / "absent.json"), ManifestError);
}

TEST_F(ManifestTest, BadQuaternion) {
  doc_["frames"][2]["ego2world"]["rotation"] = {2.0, 0.0, 0.0, 0.0};
  const auto [kind, msg] = ParseError(doc_);
  EXPECT_EQ(kind, "manifest_quaternion");
  EXPECT_NE(msg.find("frame 2"), std::string::npos) << msg;
}

TEST_F(ManifestTest, SchemaErrors) {
  json missing_images = doc_;
  missing_images["frames"][0]["images"].erase("left");
  EXPECT_EQ(ParseError(missing_images).first, "manifest_schema");
  json bad_version = doc_;
  bad_version["schema_version"] = 7;
  EXPECT_EQ(ParseError(bad_version).first, "manifest_schema");
  json dup_cam = doc_;
  dup_cam["cameras"][1]["id"] = "left";
  EXPECT_EQ(ParseError(dup_cam).first, "manifest_schema");
}

TEST_F(ManifestTest, MalformedJson) {
  try {
    ParseManifest("{\"frames\": [", tmp_.path());
    FAIL();
  } catch (const ManifestError& e) {
    EXPECT_EQ(e.kind(), "manifest_json");
  }
}

TEST_F(ManifestTest, LoadCameraFrameChecksDimensions) {
  const CameraFrameData f = LoadCameraFrame(scene_, 0, 1);
  EXPECT_EQ(f.image.width(), 32);
  EXPECT_DOUBLE_EQ(f.depth.at(16, 12), 8.0);
  pnm::WritePpm(tmp_.path() / scene_.frames[0].image_paths[1], ImageBuffer(5, 5));
  EXPECT_THROW(LoadCameraFrame(scene_, 0, 1), InvalidInput);
}

}  // namespace
}  // namespace vshift
