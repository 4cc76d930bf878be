#ifndef VSHIFT_SEAM_H_
#define VSHIFT_SEAM_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vshift/geometry.h"
#include "vshift/renderer.h"

namespace vshift {

struct RigCamera {
  std::string id;
  CameraIntrinsics intrinsics;
  CameraPose cam2ego;
};

// Ordered multi-camera rig. Camera order defines the camera index used in
// point keys.
class CameraRig {
 public:
  CameraRig() = default;
  // Throws InvalidInput on an empty rig, duplicate ids, or bad intrinsics.
  explicit CameraRig(std::vector<RigCamera> cameras);

  std::size_t size() const { return cameras_.size(); }
  const RigCamera& camera(std::size_t index) const { return cameras_[index]; }
  const std::vector<RigCamera>& cameras() const { return cameras_; }

  // Throws InvalidInput for an unknown id.
  std::size_t IndexOf(const std::string& id) const;
  // Optical-axis yaw in the ego frame, derived from cam2ego.
  double Yaw(std::size_t index) const;

 private:
  std::vector<RigCamera> cameras_;
};

// Picks the camera whose optical-axis yaw is nearest the target's on the side
// of the lateral shift (positive lateral = left = positive yaw). With zero
// lateral shift, or when no camera lies on the shift side, the nearest camera
// on either side is chosen, ties going to positive yaw. Remaining ties go to
// the earlier rig entry. Returns nullopt for a single-camera rig.
std::optional<std::string> SelectNeighbor(const CameraRig& rig,
                                          const std::string& target_camera,
                                          const ShiftSpec& shift);

// Pose of a virtual camera (world frame) relative to the ego frame of the
// current frame: inverse(ego_pose) ∘ virt_cam_world.
CameraPose VirtualCameraInEgo(const CameraPose& ego_pose,
                              const CameraPose& virt_cam_world);

// Renders the neighbor camera's colored point cloud into the virtual pose of
// the target camera. `virt_cam_world` is world_from_virtual_camera. Holes
// stay black.
ImageBuffer WarpNeighbor(const ImageBuffer& nb_image, const DepthMap& nb_depth,
                         const CameraIntrinsics& nb_intrinsics,
                         const CameraPose& nb_cam2ego,
                         const CameraPose& ego_pose,
                         const CameraPose& virt_cam_world,
                         const CameraIntrinsics& target_intrinsics,
                         const RenderOptions& options = {}, int stride = 1,
                         std::int32_t nb_camera_index = 0);

// masked + warp ⊙ M: lost pixels take the warped value (black holes
// included), everything else is copied from `masked`. No blending.
ImageBuffer CompositeSeam(const ImageBuffer& masked, const ImageBuffer& warp,
                          const OcclusionMask& mask);

}  // namespace vshift

#endif  // VSHIFT_SEAM_H_
