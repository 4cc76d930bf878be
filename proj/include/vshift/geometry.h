#ifndef VSHIFT_GEOMETRY_H_
#define VSHIFT_GEOMETRY_H_

#include <cmath>
#include <cstdint>
#include <optional>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "vshift/image.h"

namespace vshift {

// Conventions:
//   camera frame: +x right, +y down, +z forward (OpenCV).
//   ego frame:    +x forward, +y left, +z up.
// Integer pixel coordinates address pixel centers.

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;

inline constexpr double kDefaultZMin = 0.1;

struct Pixel {
  int u = 0;
  int v = 0;
  bool operator==(const Pixel&) const = default;
};

struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  // Throws InvalidInput unless fx, fy > 0 and the principal point lies
  // strictly inside the image.
  void Validate() const;
  bool Contains(int u, int v) const {
    return u >= 0 && v >= 0 && u < width && v < height;
  }
  bool operator==(const CameraIntrinsics&) const = default;
};

// Rigid transform mapping points from a local frame into a parent frame
// ("parent_from_local"): p_parent = R * p_local + t.
class CameraPose {
 public:
  static constexpr double kQuaternionTolerance = 1e-6;

  // Identity.
  CameraPose();
  // Throws InvalidInput if |‖q‖ - 1| exceeds kQuaternionTolerance or any
  // component is non-finite. The stored rotation is renormalized.
  CameraPose(const Vec3& translation, const Eigen::Quaterniond& rotation);

  static CameraPose Identity() { return CameraPose(); }
  static CameraPose FromTranslation(const Vec3& t);
  // Rotation by `yaw` radians about the parent +z axis, then translation.
  static CameraPose FromYaw(double yaw, const Vec3& t = Vec3::Zero());

  const Vec3& translation() const { return translation_; }
  const Eigen::Quaterniond& rotation() const { return rotation_; }
  Eigen::Matrix3d RotationMatrix() const { return rotation_.toRotationMatrix(); }

 private:
  Vec3 translation_;
  Eigen::Quaterniond rotation_;
};

Vec3 PoseApply(const CameraPose& pose, const Vec3& point);
// (a ∘ b)(p) = a(b(p)). The result quaternion is renormalized.
CameraPose PoseCompose(const CameraPose& a, const CameraPose& b);
CameraPose PoseInverse(const CameraPose& a);

// cam2ego of a camera mounted at `position` (ego frame) whose optical axis
// points along ego yaw `yaw` (0 = forward, positive = towards ego +y).
CameraPose CameraMountPose(double yaw, const Vec3& position = Vec3::Zero());

// Yaw of the camera optical axis (+z) expressed in the parent frame.
double OpticalAxisYaw(const CameraPose& cam2ego);

// Round-half-up to the nearest integer.
inline std::int64_t RoundHalfUp(double x) {
  return static_cast<std::int64_t>(std::floor(x + 0.5));
}

// Camera-frame point on the ray through `pixel` at depth `depth`.
// Throws InvalidInput for non-positive or non-finite depth or a pixel outside
// the image.
Vec3 BackprojectPixel(const Pixel& pixel, double depth,
                      const CameraIntrinsics& intrinsics);

struct Projection {
  Vec2 pixel;    // real-valued
  double depth;  // camera +z, meters
};

// Pinhole projection. Returns nullopt (behind camera) when z <= z_min.
std::optional<Projection> ProjectPoint(const Vec3& point,
                                       const CameraIntrinsics& intrinsics,
                                       double z_min = kDefaultZMin);

// Structure-of-arrays colored point cloud in the ego frame.
class ColoredPointCloud {
 public:
  struct Point {
    Vec3 position;
    Rgb color;
    Pixel source_pixel;
    std::int32_t source_camera;
  };

  std::size_t size() const { return x_.size(); }
  bool empty() const { return x_.empty(); }

  void Reserve(std::size_t n);
  void Add(const Point& p);
  Point Get(std::size_t i) const;

  Vec3 position(std::size_t i) const { return {x_[i], y_[i], z_[i]}; }
  Rgb color(std::size_t i) const { return color_[i]; }
  Pixel source_pixel(std::size_t i) const {
    return {source_u_[i], source_v_[i]};
  }
  std::int32_t source_camera(std::size_t i) const { return camera_[i]; }

  // Appends every point of `other`.
  void Append(const ColoredPointCloud& other);

 private:
  TrackedVector<double> x_, y_, z_;
  TrackedVector<Rgb> color_;
  TrackedVector<std::int32_t> source_u_, source_v_, camera_;
};

// Lifts every valid depth pixel on the stride grid (u % stride == 0 and
// v % stride == 0) into the ego frame. Throws InvalidInput on dimension
// mismatch or stride < 1.
ColoredPointCloud DepthToPointcloud(const ImageBuffer& image,
                                    const DepthMap& depth,
                                    const CameraIntrinsics& intrinsics,
                                    const CameraPose& cam2ego, int stride = 1,
                                    std::int32_t camera_index = 0);

}  // namespace vshift

#endif  // VSHIFT_GEOMETRY_H_
