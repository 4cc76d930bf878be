#ifndef VSHIFT_ORACLE_H_
#define VSHIFT_ORACLE_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "vshift/geometry.h"
#include "vshift/manifest.h"
#include "vshift/renderer.h"

namespace vshift {
namespace oracle {

// Procedural surface color, evaluated on 2D face coordinates in meters.
struct Texture {
  enum class Kind { kChecker, kNoise };
  Kind kind = Kind::kChecker;
  double period = 1.0;  // checker square / noise lattice cell, meters
  std::uint64_t seed = 0;
  std::array<Rgb, 2> colors{Rgb{230, 230, 230}, Rgb{40, 40, 40}};

  Rgb Evaluate(double a, double b) const;
};

// Axis-aligned rectangle (kPlane, `normal_axis` 0/1/2 = world x/y/z, `size`
// uses the two in-plane axes in increasing axis order) or axis-aligned box
// (kBox, `size` = full extents along x, y, z).
struct Primitive {
  enum class Kind { kPlane, kBox };
  Kind kind = Kind::kPlane;
  int normal_axis = 0;
  Vec3 center = Vec3::Zero();
  Vec3 size = Vec3::Ones();
  Texture texture;
};

struct SpecCamera {
  std::string id;
  double yaw = 0.0;  // radians
  Vec3 position = Vec3::Zero();
};

struct SceneSpec {
  std::string name = "scene";
  std::uint64_t seed = 0;
  int width = 64;
  int height = 64;
  double fx = 64.0;
  double fy = 64.0;
  double depth_scale = 0.001;
  Rgb background{135, 206, 235};
  std::vector<SpecCamera> cameras;
  std::vector<CameraPose> trajectory;  // ego2world per frame
  double frame_interval = 0.5;         // seconds
  std::vector<Primitive> primitives;

  // Principal point at the image center.
  CameraIntrinsics Intrinsics() const;
  // Throws InvalidInput for degenerate primitives or an empty trajectory.
  void Validate() const;
};

// Three cameras at yaw -30, 0, +30 degrees with fx = width.
std::vector<SpecCamera> DefaultRig();

// `frames` poses advancing by `step` (ego2world translation) per frame.
std::vector<CameraPose> LinearTrajectory(std::size_t frames, const Vec3& step);

SceneSpec SceneSpecFromJson(const nlohmann::json& j);
nlohmann::json SceneSpecToJson(const SceneSpec& spec);

// Exact ray-cast view of one camera in one frame.
struct RenderedView {
  ImageBuffer image;
  DepthMap depth;  // exact (unquantized) camera-z depth; 0 where nothing hit
};

// Throws DegenerateView if the camera center lies inside a box.
RenderedView RenderView(const SceneSpec& spec, std::size_t frame,
                        std::size_t camera);

// Ray casts every frame and camera, writes PPM/PGM files plus manifest.json
// into `out_dir`, and returns the loaded manifest.
SceneManifest GenerateScene(const SceneSpec& spec,
                            const std::filesystem::path& out_dir);

// Signed distance from `p` to the nearest primitive surface (world frame).
double DistanceToSurface(const SceneSpec& spec, const Vec3& p);

struct BruteForceResult {
  ImageBuffer image;
  ZBuffer zbuffer;
  OcclusionMask mask;
};

// Reference renderer: for every output pixel, scans every point and keeps
// the (depth, PointKey) minimum among those whose footprint covers the
// pixel. The mask is evaluated for `target_camera`'s points.
BruteForceResult BruteForceRender(const ColoredPointCloud& cloud,
                                  const CameraPose& cam_pose,
                                  const CameraIntrinsics& intrinsics,
                                  const RenderOptions& options = {},
                                  double depth_tol = kDefaultDepthTolerance,
                                  std::int32_t target_camera = 0);

// Expected out-of-view band width, in pixels, for a fronto-parallel plane at
// depth `plane_depth` seen through a lateral shift: the rounded disparity
// fx·|s|/Z clamped to the image width. Rounding follows the renderer's
// round-half-up on the displaced coordinate, so a band produced by a negative
// shift rounds exact halves down.
int AnalyticPlaneBand(double fx, double plane_depth, double lateral, int width);

// Random scene with a few boxes in front of a textured back wall, for
// renderer equivalence tests. Image size is at most 64x64.
SceneSpec RandomSceneSpec(std::uint64_t seed);

}  // namespace oracle
}  // namespace vshift

#endif  // VSHIFT_ORACLE_H_
