#include "vshift/seam.h"

#include <cmath>
#include <numbers>
#include <set>

#include "vshift/errors.h"

namespace vshift {
namespace {

// Wraps an angle difference into (-pi, pi].
double WrapAngle(double a) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  a = std::fmod(a, kTwoPi);
  if (a <= -std::numbers::pi) a += kTwoPi;
  if (a > std::numbers::pi) a -= kTwoPi;
  return a;
}

}  // namespace

CameraRig::CameraRig(std::vector<RigCamera> cameras)
    : cameras_(std::move(cameras)) {
  if (cameras_.empty()) throw InvalidInput("camera rig must not be empty");
  std::set<std::string> ids;
  for (const auto& cam : cameras_) {
    if (!ids.insert(cam.id).second) {
      throw InvalidInput("duplicate camera id '" + cam.id + "'");
    }
    cam.intrinsics.Validate();
  }
}

std::size_t CameraRig::IndexOf(const std::string& id) const {
  for (std::size_t i = 0; i < cameras_.size(); ++i) {
    if (cameras_[i].id == id) return i;
  }
  throw InvalidInput("unknown camera id '" + id + "'");
}

double CameraRig::Yaw(std::size_t index) const {
  return OpticalAxisYaw(cameras_.at(index).cam2ego);
}

// Yaws recovered from rotation matrices carry rounding noise; differences
// closer than this count as ties.
constexpr double kYawTieTolerance = 1e-9;

std::optional<std::string> SelectNeighbor(const CameraRig& rig,
                                          const std::string& target_camera,
                                          const ShiftSpec& shift) {
  const std::size_t target = rig.IndexOf(target_camera);
  if (rig.size() < 2) return std::nullopt;
  const double target_yaw = rig.Yaw(target);

  const auto pick = [&](int side) -> std::optional<std::size_t> {
    std::optional<std::size_t> best;
    double best_abs = 0.0;
    bool best_positive = false;
    for (std::size_t i = 0; i < rig.size(); ++i) {
      if (i == target) continue;
      const double diff = WrapAngle(rig.Yaw(i) - target_yaw);
      if (side > 0 && !(diff > 0.0)) continue;
      if (side < 0 && !(diff < 0.0)) continue;
      const double abs_diff = std::abs(diff);
      const bool positive = diff > 0.0;
      const bool better =
          !best || abs_diff < best_abs - kYawTieTolerance ||
          (abs_diff <= best_abs + kYawTieTolerance && positive &&
           !best_positive);
      if (better) {
        best = i;
        best_abs = abs_diff;
        best_positive = positive;
      }
    }
    return best;
  };

  const int side = shift.lateral > 0.0 ? 1 : (shift.lateral < 0.0 ? -1 : 0);
  std::optional<std::size_t> chosen = pick(side);
  if (!chosen && side != 0) chosen = pick(0);
  if (!chosen) return std::nullopt;
  return rig.camera(*chosen).id;
}

CameraPose VirtualCameraInEgo(const CameraPose& ego_pose,
                              const CameraPose& virt_cam_world) {
  return PoseCompose(PoseInverse(ego_pose), virt_cam_world);
}

ImageBuffer WarpNeighbor(const ImageBuffer& nb_image, const DepthMap& nb_depth,
                         const CameraIntrinsics& nb_intrinsics,
                         const CameraPose& nb_cam2ego,
                         const CameraPose& ego_pose,
                         const CameraPose& virt_cam_world,
                         const CameraIntrinsics& target_intrinsics,
                         const RenderOptions& options, int stride,
                         std::int32_t nb_camera_index) {
  const ColoredPointCloud cloud = DepthToPointcloud(
      nb_image, nb_depth, nb_intrinsics, nb_cam2ego, stride, nb_camera_index);
  return RenderShiftImage(cloud, VirtualCameraInEgo(ego_pose, virt_cam_world),
                          target_intrinsics, options)
      .image;
}

ImageBuffer CompositeSeam(const ImageBuffer& masked, const ImageBuffer& warp,
                          const OcclusionMask& mask) {
  if (masked.width() != warp.width() || masked.height() != warp.height() ||
      masked.width() != mask.width() || masked.height() != mask.height()) {
    throw InvalidInput("composite inputs must share dimensions");
  }
  ImageBuffer out = masked;
  for (int y = 0; y < masked.height(); ++y) {
    for (int x = 0; x < masked.width(); ++x) {
      if (mask.masked(x, y)) out.set(x, y, warp.at(x, y));
    }
  }
  return out;
}

}  // namespace vshift
