#ifndef VSHIFT_MANIFEST_H_
#define VSHIFT_MANIFEST_H_

#include <filesystem>
#include <string>
#include <vector>

#include "vshift/geometry.h"
#include "vshift/image.h"
#include "vshift/seam.h"

namespace vshift {

inline constexpr int kManifestSchemaVersion = 1;

struct ManifestFrame {
  double timestamp = 0.0;  // seconds
  CameraPose ego2world;
  // Indexed like the rig; paths are relative to the manifest directory.
  std::vector<std::filesystem::path> image_paths;
  std::vector<std::filesystem::path> depth_paths;
};

struct SceneManifest {
  std::string name = "scene";
  double depth_scale = 0.001;  // meters per stored depth unit
  CameraRig rig;
  std::vector<ManifestFrame> frames;
  std::filesystem::path base_dir;  // directory the relative paths resolve in

  std::filesystem::path ImagePath(std::size_t frame, std::size_t camera) const {
    return base_dir / frames.at(frame).image_paths.at(camera);
  }
  std::filesystem::path DepthPath(std::size_t frame, std::size_t camera) const {
    return base_dir / frames.at(frame).depth_paths.at(camera);
  }
};

// Parses and eagerly validates a manifest. Errors are ManifestError with the
// offending frame and camera named in the message.
SceneManifest LoadManifest(const std::filesystem::path& path);
SceneManifest ParseManifest(std::string_view json_text,
                            const std::filesystem::path& base_dir);

std::string SerializeManifest(const SceneManifest& manifest);
void SaveManifest(const SceneManifest& manifest,
                  const std::filesystem::path& path);

// Raw image and metric depth of one camera in one frame.
struct CameraFrameData {
  ImageBuffer image;
  DepthMap depth;
};

// Reads the PPM/PGM pair and checks it against the rig intrinsics.
CameraFrameData LoadCameraFrame(const SceneManifest& manifest,
                                std::size_t frame, std::size_t camera);

}  // namespace vshift

#endif  // VSHIFT_MANIFEST_H_
