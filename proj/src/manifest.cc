#include "vshift/manifest.h"

#include <cmath>
#include <sstream>

#include "vshift/errors.h"
#include "vshift/json_io.h"
#include "vshift/pnm.h"

namespace vshift {

using nlohmann::json;

namespace {

std::string FrameLabel(std::size_t frame) {
  return "frame " + std::to_string(frame);
}

const json& Require(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    throw ManifestError("manifest_schema",
                        where + ": missing field '" + key + "'");
  }
  return j.at(key);
}

CameraPose ParsePose(const json& j, const std::string& where) {
  try {
    return PoseFromJson(j);
  } catch (const InvalidInput& e) {
    const std::string what = e.what();
    const bool quaternion = what.find("quaternion") != std::string::npos;
    throw ManifestError(quaternion ? "manifest_quaternion" : "manifest_schema",
                        where + ": " + what);
  }
}

CameraRig ParseRig(const json& cams) {
  if (!cams.is_array() || cams.empty()) {
    throw ManifestError("manifest_schema", "'cameras' must be a non-empty list");
  }
  std::vector<RigCamera> rig;
  for (std::size_t i = 0; i < cams.size(); ++i) {
    const json& c = cams[i];
    const std::string where = "camera " + std::to_string(i);
    const json& id = Require(c, "id", where);
    if (!id.is_string()) {
      throw ManifestError("manifest_schema", where + ": id must be a string");
    }
    const std::string cam_where = "camera '" + id.get<std::string>() + "'";
    RigCamera cam;
    cam.id = id.get<std::string>();
    try {
      cam.intrinsics = IntrinsicsFromJson(Require(c, "intrinsics", cam_where));
    } catch (const InvalidInput& e) {
      throw ManifestError("manifest_schema", cam_where + ": " + e.what());
    }
    cam.cam2ego = ParsePose(Require(c, "cam2ego", cam_where), cam_where);
    rig.push_back(std::move(cam));
  }
  try {
    return CameraRig(std::move(rig));
  } catch (const InvalidInput& e) {
    throw ManifestError("manifest_schema", e.what());
  }
}

std::vector<std::filesystem::path> ParsePathMap(const json& j,
                                                const CameraRig& rig,
                                                const std::string& where,
                                                const char* what) {
  if (!j.is_object()) {
    throw ManifestError("manifest_schema",
                        where + ": '" + what + "' must be an object");
  }
  std::vector<std::filesystem::path> paths;
  for (const auto& cam : rig.cameras()) {
    if (!j.contains(cam.id) || !j.at(cam.id).is_string()) {
      throw ManifestError("manifest_schema", where + ", camera '" + cam.id +
                                                 "': missing " + what +
                                                 " path");
    }
    paths.emplace_back(j.at(cam.id).get<std::string>());
  }
  return paths;
}

}  // namespace

SceneManifest ParseManifest(std::string_view json_text,
                            const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ManifestError("manifest_json",
                        std::string("malformed manifest JSON: ") + e.what());
  }
  if (!doc.is_object()) {
    throw ManifestError("manifest_json", "manifest root must be an object");
  }
  const json& version = Require(doc, "schema_version", "manifest");
  if (!version.is_number_integer() ||
      version.get<int>() != kManifestSchemaVersion) {
    throw ManifestError("manifest_schema", "unsupported schema_version");
  }

  SceneManifest m;
  m.base_dir = base_dir;
  if (doc.contains("name")) {
    if (!doc["name"].is_string()) {
      throw ManifestError("manifest_schema", "'name' must be a string");
    }
    m.name = doc["name"].get<std::string>();
  }
  const json& scale = Require(doc, "depth_scale", "manifest");
  if (!scale.is_number() || !(scale.get<double>() > 0.0) ||
      !std::isfinite(scale.get<double>())) {
    throw ManifestError("manifest_schema", "depth_scale must be positive");
  }
  m.depth_scale = scale.get<double>();
  m.rig = ParseRig(Require(doc, "cameras", "manifest"));

  const json& frames = Require(doc, "frames", "manifest");
  if (!frames.is_array()) {
    throw ManifestError("manifest_schema", "'frames' must be a list");
  }
  if (frames.empty()) {
    throw ManifestError("manifest_empty", "manifest has no frames");
  }
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const json& fr = frames[f];
    const std::string where = FrameLabel(f);
    ManifestFrame frame;
    const json& ts = Require(fr, "timestamp", where);
    if (!ts.is_number() || !std::isfinite(ts.get<double>())) {
      throw ManifestError("manifest_schema", where + ": bad timestamp");
    }
    frame.timestamp = ts.get<double>();
    if (f > 0 && !(frame.timestamp > m.frames.back().timestamp)) {
      throw ManifestError("manifest_timestamps",
                          where + ": timestamp " +
                              std::to_string(frame.timestamp) +
                              " is not strictly greater than the previous frame");
    }
    frame.ego2world = ParsePose(Require(fr, "ego2world", where), where);
    frame.image_paths =
        ParsePathMap(Require(fr, "images", where), m.rig, where, "images");
    frame.depth_paths =
        ParsePathMap(Require(fr, "depths", where), m.rig, where, "depths");
    for (std::size_t c = 0; c < m.rig.size(); ++c) {
      for (const auto* rel : {&frame.image_paths[c], &frame.depth_paths[c]}) {
        if (!std::filesystem::is_regular_file(base_dir / *rel)) {
          throw ManifestError("manifest_missing_file",
                              where + ", camera '" + m.rig.camera(c).id +
                                  "': missing file " + rel->string());
        }
      }
    }
    m.frames.push_back(std::move(frame));
  }
  return m;
}

SceneManifest LoadManifest(const std::filesystem::path& path) {
  std::string text;
  try {
    text = pnm::ReadFileBytes(path);
  } catch (const IoError& e) {
    throw ManifestError("manifest_missing_file", e.what());
  }
  return ParseManifest(text, path.parent_path());
}

std::string SerializeManifest(const SceneManifest& m) {
  json cams = json::array();
  for (const auto& cam : m.rig.cameras()) {
    cams.push_back({{"id", cam.id},
                    {"intrinsics", IntrinsicsToJson(cam.intrinsics)},
                    {"cam2ego", PoseToJson(cam.cam2ego)}});
  }
  json frames = json::array();
  for (const auto& fr : m.frames) {
    json images = json::object();
    json depths = json::object();
    for (std::size_t c = 0; c < m.rig.size(); ++c) {
      images[m.rig.camera(c).id] = fr.image_paths.at(c).generic_string();
      depths[m.rig.camera(c).id] = fr.depth_paths.at(c).generic_string();
    }
    frames.push_back({{"timestamp", fr.timestamp},
                      {"ego2world", PoseToJson(fr.ego2world)},
                      {"images", images},
                      {"depths", depths}});
  }
  json doc = {{"schema_version", kManifestSchemaVersion},
              {"name", m.name},
              {"depth_scale", m.depth_scale},
              {"cameras", cams},
              {"frames", frames}};
  return doc.dump(2) + "\n";
}

void SaveManifest(const SceneManifest& manifest,
                  const std::filesystem::path& path) {
  pnm::WriteFileBytes(path, SerializeManifest(manifest));
}

CameraFrameData LoadCameraFrame(const SceneManifest& m, std::size_t frame,
                                std::size_t camera) {
  const CameraIntrinsics& k = m.rig.camera(camera).intrinsics;
  CameraFrameData data;
  data.image = pnm::ReadPpm(m.ImagePath(frame, camera));
  const pnm::GrayImage stored = pnm::ReadPgm(m.DepthPath(frame, camera));
  if (stored.maxval != 65535) {
    throw FormatError(m.DepthPath(frame, camera).string() +
                      ": depth PGM must use maxval 65535");
  }
  if (data.image.width() != k.width || data.image.height() != k.height ||
      stored.width != k.width || stored.height != k.height) {
    throw InvalidInput("frame " + std::to_string(frame) + ", camera '" +
                       m.rig.camera(camera).id +
                       "': image/depth size does not match intrinsics");
  }
  data.depth =
      DepthFromStored(stored.width, stored.height, stored.values, m.depth_scale);
  return data;
}

}  // namespace vshift
