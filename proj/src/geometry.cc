#include "vshift/geometry.h"

#include <cmath>
#include <string>

#include "vshift/errors.h"

namespace vshift {

void CameraIntrinsics::Validate() const {
  if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy)) {
    throw InvalidInput("focal lengths must be finite and positive");
  }
  if (width <= 0 || height <= 0) {
    throw InvalidInput("image size must be positive");
  }
  if (!(cx > 0.0 && cx < width) || !(cy > 0.0 && cy < height)) {
    throw InvalidInput("principal point must lie strictly inside the image");
  }
}

CameraPose::CameraPose()
    : translation_(Vec3::Zero()), rotation_(Eigen::Quaterniond::Identity()) {}

CameraPose::CameraPose(const Vec3& translation,
                       const Eigen::Quaterniond& rotation)
    : translation_(translation), rotation_(rotation) {
  if (!translation.allFinite() || !rotation.coeffs().allFinite()) {
    throw InvalidInput("pose components must be finite");
  }
  const double norm = rotation.norm();
  if (std::abs(norm - 1.0) > kQuaternionTolerance) {
    throw InvalidInput("rotation quaternion is not unit (norm " +
                       std::to_string(norm) + ")");
  }
  rotation_.normalize();
}

CameraPose CameraPose::FromTranslation(const Vec3& t) {
  return CameraPose(t, Eigen::Quaterniond::Identity());
}

CameraPose CameraPose::FromYaw(double yaw, const Vec3& t) {
  return CameraPose(t, Eigen::Quaterniond(
                           Eigen::AngleAxisd(yaw, Vec3::UnitZ())));
}

Vec3 PoseApply(const CameraPose& pose, const Vec3& point) {
  return pose.rotation() * point + pose.translation();
}

CameraPose PoseCompose(const CameraPose& a, const CameraPose& b) {
  Eigen::Quaterniond q = a.rotation() * b.rotation();
  q.normalize();
  return CameraPose(a.rotation() * b.translation() + a.translation(), q);
}

CameraPose PoseInverse(const CameraPose& a) {
  const Eigen::Quaterniond q = a.rotation().conjugate();
  return CameraPose(-(q * a.translation()), q);
}

CameraPose CameraMountPose(double yaw, const Vec3& position) {
  // Columns: ego-frame directions of camera +x (right), +y (down), +z (fwd)
  // for a camera looking along ego +x.
  Eigen::Matrix3d forward;
  forward << 0, 0, 1,  //
      -1, 0, 0,        //
      0, -1, 0;
  const Eigen::Matrix3d r =
      Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix() * forward;
  return CameraPose(position, Eigen::Quaterniond(r));
}

double OpticalAxisYaw(const CameraPose& cam2ego) {
  const Vec3 axis = cam2ego.rotation() * Vec3::UnitZ();
  return std::atan2(axis.y(), axis.x());
}

Vec3 BackprojectPixel(const Pixel& pixel, double depth,
                      const CameraIntrinsics& k) {
  if (!std::isfinite(depth) || depth <= 0.0) {
    throw InvalidInput("back-projection depth must be finite and positive");
  }
  if (!k.Contains(pixel.u, pixel.v)) {
    throw InvalidInput("back-projected pixel outside image bounds");
  }
  return {depth * (pixel.u - k.cx) / k.fx, depth * (pixel.v - k.cy) / k.fy,
          depth};
}

std::optional<Projection> ProjectPoint(const Vec3& p, const CameraIntrinsics& k,
                                       double z_min) {
  if (!(p.z() > z_min)) return std::nullopt;
  return Projection{{k.fx * p.x() / p.z() + k.cx, k.fy * p.y() / p.z() + k.cy},
                    p.z()};
}

void ColoredPointCloud::Reserve(std::size_t n) {
  x_.reserve(n);
  y_.reserve(n);
  z_.reserve(n);
  color_.reserve(n);
  source_u_.reserve(n);
  source_v_.reserve(n);
  camera_.reserve(n);
}

void ColoredPointCloud::Add(const Point& p) {
  x_.push_back(p.position.x());
  y_.push_back(p.position.y());
  z_.push_back(p.position.z());
  color_.push_back(p.color);
  source_u_.push_back(p.source_pixel.u);
  source_v_.push_back(p.source_pixel.v);
  camera_.push_back(p.source_camera);
}

ColoredPointCloud::Point ColoredPointCloud::Get(std::size_t i) const {
  return {position(i), color_[i], source_pixel(i), camera_[i]};
}

void ColoredPointCloud::Append(const ColoredPointCloud& other) {
  Reserve(size() + other.size());
  for (std::size_t i = 0; i < other.size(); ++i) Add(other.Get(i));
}

ColoredPointCloud DepthToPointcloud(const ImageBuffer& image,
                                    const DepthMap& depth,
                                    const CameraIntrinsics& intrinsics,
                                    const CameraPose& cam2ego, int stride,
                                    std::int32_t camera_index) {
  intrinsics.Validate();
  if (stride < 1) throw InvalidInput("stride must be >= 1");
  if (image.width() != intrinsics.width ||
      image.height() != intrinsics.height ||
      depth.width() != intrinsics.width ||
      depth.height() != intrinsics.height) {
    throw InvalidInput("image/depth dimensions do not match intrinsics");
  }
  ColoredPointCloud cloud;
  std::size_t count = 0;
  for (int v = 0; v < depth.height(); v += stride) {
    for (int u = 0; u < depth.width(); u += stride) {
      if (depth.valid(u, v)) ++count;
    }
  }
  cloud.Reserve(count);
  for (int v = 0; v < depth.height(); v += stride) {
    for (int u = 0; u < depth.width(); u += stride) {
      if (!depth.valid(u, v)) continue;
      const Vec3 cam = BackprojectPixel({u, v}, depth.at(u, v), intrinsics);
      cloud.Add({PoseApply(cam2ego, cam), image.at(u, v), {u, v},
                 camera_index});
    }
  }
  return cloud;
}

}  // namespace vshift
