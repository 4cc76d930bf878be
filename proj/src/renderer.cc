#include "vshift/renderer.h"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "parallel.h"
#include "vshift/errors.h"
#include "vshift/pnm.h"

namespace vshift {

void ShiftSpec::Validate(double bound) const {
  if (!std::isfinite(lateral) || !std::isfinite(longitudinal) ||
      !std::isfinite(vertical) || !std::isfinite(yaw)) {
    throw InvalidInput("shift components must be finite");
  }
  if (std::abs(lateral) > bound || std::abs(longitudinal) > bound) {
    throw InvalidInput("shift exceeds safety bound of " +
                       std::to_string(bound) + " m");
  }
}

CameraPose ShiftTransform(const ShiftSpec& shift) {
  return CameraPose::FromYaw(shift.yaw,
                             Vec3(shift.longitudinal, shift.lateral,
                                  shift.vertical));
}

CameraPose MakeVirtualPose(const CameraPose& ego_pose, const ShiftSpec& shift,
                           double bound) {
  shift.Validate(bound);
  return PoseCompose(ego_pose, ShiftTransform(shift));
}

ZBuffer::ZBuffer(int width, int height) : width_(width), height_(height) {
  if (width < 0 || height < 0) throw InvalidInput("z-buffer dimensions");
  const std::size_t n = static_cast<std::size_t>(width) * height;
  depth_.assign(n, std::numeric_limits<double>::infinity());
  winner_.assign(n, kEmpty);
}

bool ZBuffer::operator==(const ZBuffer& other) const {
  return width_ == other.width_ && height_ == other.height_ &&
         winner_ == other.winner_ &&
         std::memcmp(depth_.data(), other.depth_.data(),
                     depth_.size() * sizeof(double)) == 0;
}

OcclusionMask::OcclusionMask(int width, int height)
    : width_(width), height_(height) {
  if (width < 0 || height < 0) throw InvalidInput("mask dimensions");
  flags_.assign(static_cast<std::size_t>(width) * height,
                MaskFlag::kInvalidDepth);
}

OcclusionMask OcclusionMask::Filled(int width, int height, MaskFlag flag) {
  OcclusionMask m(width, height);
  std::fill(m.flags_.begin(), m.flags_.end(), flag);
  return m;
}

std::size_t OcclusionMask::CountMasked() const {
  return flags_.size() - Count(MaskFlag::kVisible);
}

std::size_t OcclusionMask::Count(MaskFlag flag) const {
  return static_cast<std::size_t>(
      std::count(flags_.begin(), flags_.end(), flag));
}

double OcclusionMask::MaskedFraction() const {
  return flags_.empty() ? 0.0
                        : static_cast<double>(CountMasked()) / flags_.size();
}

std::uint8_t MaskFlagToGray(MaskFlag flag) {
  switch (flag) {
    case MaskFlag::kVisible:
      return 0;
    case MaskFlag::kInvalidDepth:
      return 64;
    case MaskFlag::kDepthOccluded:
      return 128;
    case MaskFlag::kOutOfView:
      return 255;
  }
  return 0;
}

MaskFlag MaskFlagFromGray(std::uint16_t level) {
  switch (level) {
    case 0:
      return MaskFlag::kVisible;
    case 64:
      return MaskFlag::kInvalidDepth;
    case 128:
      return MaskFlag::kDepthOccluded;
    case 255:
      return MaskFlag::kOutOfView;
    default:
      throw FormatError("invalid mask level " + std::to_string(level));
  }
}

std::string EncodeMaskPgm(const OcclusionMask& mask) {
  std::vector<std::uint16_t> levels;
  levels.reserve(static_cast<std::size_t>(mask.width()) * mask.height());
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      levels.push_back(MaskFlagToGray(mask.at(x, y)));
    }
  }
  return pnm::EncodePgm(mask.width(), mask.height(), 255, levels);
}

OcclusionMask DecodeMaskPgm(std::string_view bytes) {
  const pnm::GrayImage g = pnm::DecodePgm(bytes);
  if (g.maxval != 255) throw FormatError("mask PGM must have maxval 255");
  OcclusionMask mask(g.width, g.height);
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      mask.set(x, y,
               MaskFlagFromGray(g.values[static_cast<std::size_t>(y) * g.width +
                                         x]));
    }
  }
  return mask;
}

namespace {

struct Splat {
  std::int64_t u;
  std::int64_t v;
  double depth;
  bool in_front;  // false when behind the near plane
};

Splat ProjectForSplat(const ColoredPointCloud& cloud, std::size_t i,
                      const CameraPose& ego_to_cam,
                      const CameraIntrinsics& k, double z_min) {
  const auto proj = ProjectPoint(PoseApply(ego_to_cam, cloud.position(i)), k,
                                 z_min);
  if (!proj) return {0, 0, 0.0, false};
  return {RoundHalfUp(proj->pixel.x()), RoundHalfUp(proj->pixel.y()),
          proj->depth, true};
}

}  // namespace

RenderResult RenderShiftImage(const ColoredPointCloud& cloud,
                              const CameraPose& virt_cam_pose,
                              const CameraIntrinsics& k,
                              const RenderOptions& options) {
  k.Validate();
  if (options.splat_radius < 0) throw InvalidInput("splat radius must be >= 0");
  const CameraPose ego_to_cam = PoseInverse(virt_cam_pose);
  const std::int64_t r = options.splat_radius;

  TrackedVector<Splat> splats(cloud.size());
  internal::ParallelFor(cloud.size(), options.threads,
                        [&](std::size_t begin, std::size_t end) {
                          for (std::size_t i = begin; i < end; ++i) {
                            splats[i] = ProjectForSplat(cloud, i, ego_to_cam, k,
                                                        options.z_min);
                          }
                        });

  RenderResult out{ImageBuffer(k.width, k.height), ZBuffer(k.width, k.height)};
  TrackedVector<std::size_t> winner_index(
      static_cast<std::size_t>(k.width) * k.height, 0);

  // Each worker owns a band of output rows, so writes never race and the
  // per-pixel minimum under the (depth, key) total order is schedule-free.
  internal::ParallelFor(
      static_cast<std::size_t>(k.height), options.threads,
      [&](std::size_t row_begin, std::size_t row_end) {
        const std::int64_t y0 = static_cast<std::int64_t>(row_begin);
        const std::int64_t y1 = static_cast<std::int64_t>(row_end);
        for (std::size_t i = 0; i < splats.size(); ++i) {
          const Splat& s = splats[i];
          if (!s.in_front) continue;
          const std::int64_t vlo = std::max(s.v - r, y0);
          const std::int64_t vhi = std::min(s.v + r, y1 - 1);
          const std::int64_t ulo = std::max<std::int64_t>(s.u - r, 0);
          const std::int64_t uhi = std::min<std::int64_t>(s.u + r, k.width - 1);
          if (vlo > vhi || ulo > uhi) continue;
          const std::uint64_t key =
              PointKey(cloud.source_pixel(i), cloud.source_camera(i));
          for (std::int64_t y = vlo; y <= vhi; ++y) {
            for (std::int64_t x = ulo; x <= uhi; ++x) {
              if (out.zbuffer.Offer(static_cast<int>(x), static_cast<int>(y),
                                    s.depth, key)) {
                winner_index[static_cast<std::size_t>(y) * k.width + x] = i;
              }
            }
          }
        }
      });

  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      if (out.zbuffer.empty_at(x, y)) continue;
      out.image.set(
          x, y,
          cloud.color(winner_index[static_cast<std::size_t>(y) * k.width + x]));
    }
  }
  return out;
}

OcclusionMask ComputeOcclusionMask(const ColoredPointCloud& cloud,
                                   const CameraPose& virt_cam_pose,
                                   const CameraIntrinsics& k,
                                   const ZBuffer& zbuffer, double depth_tol,
                                   const RenderOptions& options,
                                   std::int32_t target_camera) {
  k.Validate();
  if (zbuffer.width() != k.width || zbuffer.height() != k.height) {
    throw InvalidInput("z-buffer dimensions do not match intrinsics");
  }
  if (!(depth_tol >= 0.0) || !std::isfinite(depth_tol)) {
    throw InvalidInput("depth tolerance must be finite and non-negative");
  }
  const CameraPose ego_to_cam = PoseInverse(virt_cam_pose);
  OcclusionMask mask(k.width, k.height);

  internal::ParallelFor(
      cloud.size(), options.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
          if (cloud.source_camera(i) != target_camera) continue;
          const Pixel src = cloud.source_pixel(i);
          if (!k.Contains(src.u, src.v)) {
            throw InvalidInput("point source pixel outside target image");
          }
          const Splat s = ProjectForSplat(cloud, i, ego_to_cam, k, options.z_min);
          if (!s.in_front || s.u < 0 || s.v < 0 || s.u >= k.width ||
              s.v >= k.height) {
            mask.set(src.u, src.v, MaskFlag::kOutOfView);
            continue;
          }
          const int x = static_cast<int>(s.u);
          const int y = static_cast<int>(s.v);
          bool occluded = false;
          if (!zbuffer.empty_at(x, y)) {
            const double front = zbuffer.depth(x, y);
            occluded = (s.depth - front) / front > depth_tol;
          }
          mask.set(src.u, src.v,
                   occluded ? MaskFlag::kDepthOccluded : MaskFlag::kVisible);
        }
      });
  return mask;
}

ImageBuffer ApplyMask(const ImageBuffer& raw, const OcclusionMask& mask) {
  if (raw.width() != mask.width() || raw.height() != mask.height()) {
    throw InvalidInput("mask dimensions do not match image");
  }
  ImageBuffer out = raw;
  for (int y = 0; y < raw.height(); ++y) {
    for (int x = 0; x < raw.width(); ++x) {
      if (mask.masked(x, y)) out.set(x, y, {0, 0, 0});
    }
  }
  return out;
}

}  // namespace vshift
