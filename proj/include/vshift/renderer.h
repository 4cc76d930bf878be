#ifndef VSHIFT_RENDERER_H_
#define VSHIFT_RENDERER_H_

#include <cstdint>
#include <limits>
#include <string>

#include "vshift/geometry.h"
#include "vshift/image.h"

namespace vshift {

// Virtual displacement of the ego vehicle, expressed in the ego frame.
struct ShiftSpec {
  double lateral = 0.0;       // ego +y, meters (positive = left)
  double longitudinal = 0.0;  // ego +x, meters
  double vertical = 0.0;      // ego +z, meters
  double yaw = 0.0;           // about ego +z, radians

  static constexpr double kDefaultBound = 8.0;

  // Throws InvalidInput on non-finite values or |lateral|, |longitudinal|
  // above `bound`.
  void Validate(double bound = kDefaultBound) const;
  bool IsZero() const {
    return lateral == 0.0 && longitudinal == 0.0 && vertical == 0.0 &&
           yaw == 0.0;
  }
  bool operator==(const ShiftSpec&) const = default;
};

// The shift as a rigid transform (virtual ego -> current ego).
CameraPose ShiftTransform(const ShiftSpec& shift);

// ego_pose ∘ shift. Throws InvalidInput if the shift is out of bounds.
CameraPose MakeVirtualPose(const CameraPose& ego_pose, const ShiftSpec& shift,
                           double bound = ShiftSpec::kDefaultBound);

// Total order key used to resolve equal-depth splats: row-major source pixel
// order, then camera index.
inline std::uint64_t PointKey(const Pixel& source, std::int32_t camera) {
  return (static_cast<std::uint64_t>(source.v) << 40) |
         (static_cast<std::uint64_t>(source.u) << 20) |
         static_cast<std::uint64_t>(camera);
}

class ZBuffer {
 public:
  static constexpr std::uint64_t kEmpty =
      std::numeric_limits<std::uint64_t>::max();

  ZBuffer() = default;
  ZBuffer(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }

  bool empty_at(int x, int y) const { return winner_[Index(x, y)] == kEmpty; }
  // +inf on empty pixels.
  double depth(int x, int y) const { return depth_[Index(x, y)]; }
  // PointKey of the winning point, kEmpty if none.
  std::uint64_t winner(int x, int y) const { return winner_[Index(x, y)]; }

  // Keeps (depth, key) if it orders before the current occupant.
  bool Offer(int x, int y, double depth, std::uint64_t key) {
    const std::size_t i = Index(x, y);
    if (depth < depth_[i] || (depth == depth_[i] && key < winner_[i])) {
      depth_[i] = depth;
      winner_[i] = key;
      return true;
    }
    return false;
  }

  // Bit-level equality of depths and winners.
  bool operator==(const ZBuffer& other) const;

 private:
  std::size_t Index(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  TrackedVector<double> depth_;
  TrackedVector<std::uint64_t> winner_;
};

enum class MaskFlag : std::uint8_t {
  kVisible = 0,
  kOutOfView = 1,
  kDepthOccluded = 2,
  kInvalidDepth = 3,
};

class OcclusionMask {
 public:
  OcclusionMask() = default;
  // Every pixel starts as kInvalidDepth.
  OcclusionMask(int width, int height);
  static OcclusionMask Filled(int width, int height, MaskFlag flag);

  int width() const { return width_; }
  int height() const { return height_; }

  MaskFlag at(int x, int y) const { return flags_[Index(x, y)]; }
  void set(int x, int y, MaskFlag f) { flags_[Index(x, y)] = f; }
  // Binary M: true where the pixel is lost.
  bool masked(int x, int y) const { return at(x, y) != MaskFlag::kVisible; }

  std::size_t CountMasked() const;
  std::size_t Count(MaskFlag flag) const;
  double MaskedFraction() const;

  bool operator==(const OcclusionMask& other) const = default;

 private:
  std::size_t Index(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  TrackedVector<MaskFlag> flags_;
};

// 8-bit gray levels used to persist mask flags.
std::uint8_t MaskFlagToGray(MaskFlag flag);
// Throws FormatError on a level outside {0, 64, 128, 255}.
MaskFlag MaskFlagFromGray(std::uint16_t level);

std::string EncodeMaskPgm(const OcclusionMask& mask);
OcclusionMask DecodeMaskPgm(std::string_view bytes);

struct RenderOptions {
  int splat_radius = 0;
  double z_min = kDefaultZMin;
  int threads = 1;
};

struct RenderResult {
  ImageBuffer image;
  ZBuffer zbuffer;
};

// Splats `cloud` (ego frame) into the camera whose pose in the cloud's frame
// is `virt_cam_pose` (camera -> ego). Nearest depth wins; equal depths are
// resolved by PointKey; empty pixels stay black. Output is independent of
// point order and thread count.
RenderResult RenderShiftImage(const ColoredPointCloud& cloud,
                              const CameraPose& virt_cam_pose,
                              const CameraIntrinsics& intrinsics,
                              const RenderOptions& options = {});

inline constexpr double kDefaultDepthTolerance = 0.03;

// Per-source-pixel visibility of `target_camera`'s points in the virtual
// view. `zbuffer` must come from RenderShiftImage on the same inputs.
OcclusionMask ComputeOcclusionMask(const ColoredPointCloud& cloud,
                                   const CameraPose& virt_cam_pose,
                                   const CameraIntrinsics& intrinsics,
                                   const ZBuffer& zbuffer,
                                   double depth_tol = kDefaultDepthTolerance,
                                   const RenderOptions& options = {},
                                   std::int32_t target_camera = 0);

// raw ⊙ (1 - M): masked pixels become black.
ImageBuffer ApplyMask(const ImageBuffer& raw, const OcclusionMask& mask);

}  // namespace vshift

#endif  // VSHIFT_RENDERER_H_
