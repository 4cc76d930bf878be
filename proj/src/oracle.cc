#include "vshift/oracle.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "vshift/dataset.h"
#include "vshift/errors.h"
#include "vshift/json_io.h"
#include "vshift/pnm.h"
#include "vshift/random.h"

namespace vshift {
namespace oracle {

using nlohmann::json;

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
// Absorbs representation error of texture coordinates that land exactly on a
// checker edge.
constexpr double kEdgeEpsilon = 1e-9;

double Smooth(double t) { return t * t * (3.0 - 2.0 * t); }

double LatticeValue(std::uint64_t seed, std::int64_t i, std::int64_t j) {
  const CounterRng rng(seed, /*stream=*/0x4e4f495345ull);  // "NOISE"
  const std::uint64_t counter =
      (static_cast<std::uint64_t>(i + (1ll << 31)) << 32) ^
      static_cast<std::uint64_t>(j + (1ll << 31));
  return rng.Uniform(counter);
}

// In-plane texture coordinates for a surface whose normal is `axis`. For the
// x-normal case they are chosen so that a camera looking down +x sees `a`
// growing to the right and `b` growing downwards.
std::pair<double, double> FaceCoordinates(int axis, const Vec3& p) {
  switch (axis) {
    case 0:
      return {-p.y(), -p.z()};
    case 1:
      return {p.x(), -p.z()};
    default:
      return {p.x(), p.y()};
  }
}

struct Hit {
  double s = std::numeric_limits<double>::infinity();
  int axis = 0;
  const Primitive* primitive = nullptr;
};

void IntersectPlane(const Primitive& prim, const Vec3& o, const Vec3& d,
                    Hit& best) {
  const int k = prim.normal_axis;
  if (d[k] == 0.0) return;
  const double s = (prim.center[k] - o[k]) / d[k];
  if (!(s > 0.0) || s >= best.s) return;
  const Vec3 p = o + s * d;
  int in_plane = 0;
  for (int a = 0; a < 3; ++a) {
    if (a == k) continue;
    if (std::abs(p[a] - prim.center[a]) > 0.5 * prim.size[in_plane]) return;
    ++in_plane;
  }
  best = {s, k, &prim};
}

void IntersectBox(const Primitive& prim, const Vec3& o, const Vec3& d,
                  Hit& best) {
  double t_enter = -std::numeric_limits<double>::infinity();
  double t_exit = std::numeric_limits<double>::infinity();
  int enter_axis = 0;
  for (int a = 0; a < 3; ++a) {
    const double lo = prim.center[a] - 0.5 * prim.size[a];
    const double hi = prim.center[a] + 0.5 * prim.size[a];
    if (d[a] == 0.0) {
      if (o[a] < lo || o[a] > hi) return;
      continue;
    }
    double t0 = (lo - o[a]) / d[a];
    double t1 = (hi - o[a]) / d[a];
    if (t0 > t1) std::swap(t0, t1);
    if (t0 > t_enter) {
      t_enter = t0;
      enter_axis = a;
    }
    t_exit = std::min(t_exit, t1);
  }
  if (t_enter > t_exit || !(t_enter > 0.0) || t_enter >= best.s) return;
  best = {t_enter, enter_axis, &prim};
}

bool InsideBox(const Primitive& prim, const Vec3& p) {
  for (int a = 0; a < 3; ++a) {
    if (std::abs(p[a] - prim.center[a]) >= 0.5 * prim.size[a]) return false;
  }
  return true;
}

Rgb ParseColor(const json& j) {
  if (!j.is_array() || j.size() != 3) {
    throw InvalidInput("color must be [r, g, b]");
  }
  Rgb c{};
  for (int i = 0; i < 3; ++i) {
    const int v = j[i].get<int>();
    if (v < 0 || v > 255) throw InvalidInput("color channel out of range");
    c[i] = static_cast<std::uint8_t>(v);
  }
  return c;
}

Vec3 ParseVec3(const json& j) {
  if (!j.is_array() || j.size() != 3) throw InvalidInput("expected [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json Vec3ToJson(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

Texture ParseTexture(const json& j) {
  Texture t;
  const std::string type = j.value("type", "checker");
  if (type == "checker") {
    t.kind = Texture::Kind::kChecker;
  } else if (type == "noise") {
    t.kind = Texture::Kind::kNoise;
  } else {
    throw InvalidInput("unknown texture type '" + type + "'");
  }
  t.period = j.value("period", 1.0);
  if (!(t.period > 0.0)) throw InvalidInput("texture period must be > 0");
  t.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("colors")) {
    const json& c = j.at("colors");
    if (!c.is_array() || c.size() != 2) {
      throw InvalidInput("texture colors must be a pair");
    }
    t.colors = {ParseColor(c[0]), ParseColor(c[1])};
  }
  return t;
}

json TextureToJson(const Texture& t) {
  return {{"type", t.kind == Texture::Kind::kChecker ? "checker" : "noise"},
          {"period", t.period},
          {"seed", t.seed},
          {"colors",
           {{t.colors[0][0], t.colors[0][1], t.colors[0][2]},
            {t.colors[1][0], t.colors[1][1], t.colors[1][2]}}}};
}

int AxisFromName(const std::string& name) {
  if (name == "x") return 0;
  if (name == "y") return 1;
  if (name == "z") return 2;
  throw InvalidInput("plane axis must be x, y, or z");
}

}  // namespace

Rgb Texture::Evaluate(double a, double b) const {
  if (kind == Kind::kChecker) {
    const auto ia = static_cast<std::int64_t>(std::floor(a / period + kEdgeEpsilon));
    const auto ib = static_cast<std::int64_t>(std::floor(b / period + kEdgeEpsilon));
    return ((ia + ib) & 1) == 0 ? colors[0] : colors[1];
  }
  const double fa = a / period;
  const double fb = b / period;
  const auto i = static_cast<std::int64_t>(std::floor(fa));
  const auto j = static_cast<std::int64_t>(std::floor(fb));
  const double ta = Smooth(fa - i);
  const double tb = Smooth(fb - j);
  const double v00 = LatticeValue(seed, i, j);
  const double v10 = LatticeValue(seed, i + 1, j);
  const double v01 = LatticeValue(seed, i, j + 1);
  const double v11 = LatticeValue(seed, i + 1, j + 1);
  const double v = (v00 * (1 - ta) + v10 * ta) * (1 - tb) +
                   (v01 * (1 - ta) + v11 * ta) * tb;
  Rgb out{};
  for (int c = 0; c < 3; ++c) {
    const double mixed = colors[0][c] * (1.0 - v) + colors[1][c] * v;
    out[c] = static_cast<std::uint8_t>(
        std::clamp<std::int64_t>(RoundHalfUp(mixed), 0, 255));
  }
  return out;
}

CameraIntrinsics SceneSpec::Intrinsics() const {
  CameraIntrinsics k{fx, fy, 0.5 * width, 0.5 * height, width, height};
  return k;
}

void SceneSpec::Validate() const {
  Intrinsics().Validate();
  if (trajectory.empty()) throw InvalidInput("scene trajectory is empty");
  if (cameras.empty()) throw InvalidInput("scene has no cameras");
  if (!(depth_scale > 0.0)) throw InvalidInput("depth_scale must be > 0");
  for (const auto& p : primitives) {
    if (p.kind == Primitive::Kind::kPlane) {
      if (p.normal_axis < 0 || p.normal_axis > 2) {
        throw InvalidInput("plane normal axis out of range");
      }
      if (!(p.size[0] > 0.0) || !(p.size[1] > 0.0)) {
        throw InvalidInput("plane extents must be positive");
      }
    } else if (!(p.size.minCoeff() > 0.0)) {
      throw InvalidInput("box extents must be positive");
    }
  }
}

std::vector<SpecCamera> DefaultRig() {
  return {{"left", 30.0 * kDegToRad, Vec3::Zero()},
          {"front", 0.0, Vec3::Zero()},
          {"right", -30.0 * kDegToRad, Vec3::Zero()}};
}

std::vector<CameraPose> LinearTrajectory(std::size_t frames,
                                         const Vec3& step) {
  std::vector<CameraPose> poses;
  poses.reserve(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    poses.push_back(CameraPose::FromTranslation(static_cast<double>(i) * step));
  }
  return poses;
}

SceneSpec SceneSpecFromJson(const json& j) {
  SceneSpec s;
  try {
    s.name = j.value("name", s.name);
    s.seed = j.value("seed", s.seed);
    s.depth_scale = j.value("depth_scale", s.depth_scale);
    s.frame_interval = j.value("frame_interval", s.frame_interval);
    if (j.contains("background")) s.background = ParseColor(j.at("background"));
    if (j.contains("image")) {
      const json& im = j.at("image");
      s.width = im.value("width", s.width);
      s.height = im.value("height", s.height);
      s.fx = im.value("fx", static_cast<double>(s.width));
      s.fy = im.value("fy", s.fx);
    } else {
      s.fx = s.width;
      s.fy = s.width;
    }
    if (j.contains("cameras")) {
      for (const json& c : j.at("cameras")) {
        SpecCamera cam;
        cam.id = c.at("id").get<std::string>();
        cam.yaw = c.value("yaw_deg", 0.0) * kDegToRad;
        if (c.contains("position")) cam.position = ParseVec3(c.at("position"));
        s.cameras.push_back(cam);
      }
    } else {
      s.cameras = DefaultRig();
    }
    const json& traj = j.at("trajectory");
    if (traj.contains("poses")) {
      for (const json& p : traj.at("poses")) {
        s.trajectory.push_back(CameraPose::FromYaw(
            p.value("yaw_deg", 0.0) * kDegToRad,
            p.contains("translation") ? ParseVec3(p.at("translation"))
                                      : Vec3::Zero()));
      }
    } else {
      const Vec3 step = traj.contains("step") ? ParseVec3(traj.at("step"))
                                              : Vec3(0.5, 0.0, 0.0);
      s.trajectory =
          LinearTrajectory(traj.at("frames").get<std::size_t>(), step);
    }
    for (const json& p : j.value("primitives", json::array())) {
      Primitive prim;
      const std::string type = p.at("type").get<std::string>();
      prim.center = ParseVec3(p.at("center"));
      if (type == "plane") {
        prim.kind = Primitive::Kind::kPlane;
        prim.normal_axis = AxisFromName(p.value("axis", "x"));
        const json& size = p.at("size");
        if (!size.is_array() || size.size() != 2) {
          throw InvalidInput("plane size must be [extent, extent]");
        }
        prim.size = Vec3(size[0].get<double>(), size[1].get<double>(), 0.0);
      } else if (type == "box") {
        prim.kind = Primitive::Kind::kBox;
        prim.size = ParseVec3(p.at("size"));
      } else {
        throw InvalidInput("unknown primitive type '" + type + "'");
      }
      if (p.contains("texture")) prim.texture = ParseTexture(p.at("texture"));
      s.primitives.push_back(prim);
    }
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("malformed scene spec: ") + e.what());
  }
  s.Validate();
  return s;
}

json SceneSpecToJson(const SceneSpec& s) {
  json cams = json::array();
  for (const auto& c : s.cameras) {
    cams.push_back({{"id", c.id},
                    {"yaw_deg", c.yaw / kDegToRad},
                    {"position", Vec3ToJson(c.position)}});
  }
  json poses = json::array();
  for (const auto& p : s.trajectory) {
    const Vec3 forward = p.rotation() * Vec3::UnitX();
    poses.push_back({{"translation", Vec3ToJson(p.translation())},
                     {"yaw_deg", std::atan2(forward.y(), forward.x()) /
                                     kDegToRad}});
  }
  json prims = json::array();
  for (const auto& p : s.primitives) {
    json jp = {{"center", Vec3ToJson(p.center)},
               {"texture", TextureToJson(p.texture)}};
    if (p.kind == Primitive::Kind::kPlane) {
      jp["type"] = "plane";
      jp["axis"] = std::string(1, "xyz"[p.normal_axis]);
      jp["size"] = {p.size[0], p.size[1]};
    } else {
      jp["type"] = "box";
      jp["size"] = Vec3ToJson(p.size);
    }
    prims.push_back(jp);
  }
  return {{"name", s.name},
          {"seed", s.seed},
          {"depth_scale", s.depth_scale},
          {"frame_interval", s.frame_interval},
          {"background", {s.background[0], s.background[1], s.background[2]}},
          {"image",
           {{"width", s.width}, {"height", s.height}, {"fx", s.fx}, {"fy", s.fy}}},
          {"cameras", cams},
          {"trajectory", {{"poses", poses}}},
          {"primitives", prims}};
}

RenderedView RenderView(const SceneSpec& spec, std::size_t frame,
                        std::size_t camera) {
  const CameraIntrinsics k = spec.Intrinsics();
  const SpecCamera& cam = spec.cameras.at(camera);
  const CameraPose cam_world = PoseCompose(
      spec.trajectory.at(frame), CameraMountPose(cam.yaw, cam.position));
  const Vec3& origin = cam_world.translation();
  for (const auto& p : spec.primitives) {
    if (p.kind == Primitive::Kind::kBox && InsideBox(p, origin)) {
      throw DegenerateView("camera '" + cam.id + "' in frame " +
                           std::to_string(frame) + " is inside a box");
    }
  }
  const Eigen::Matrix3d r = cam_world.RotationMatrix();
  RenderedView view{ImageBuffer(k.width, k.height), DepthMap(k.width, k.height)};
  for (int v = 0; v < k.height; ++v) {
    for (int u = 0; u < k.width; ++u) {
      const Vec3 dir = r * Vec3((u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0);
      Hit hit;
      for (const auto& p : spec.primitives) {
        if (p.kind == Primitive::Kind::kPlane) {
          IntersectPlane(p, origin, dir, hit);
        } else {
          IntersectBox(p, origin, dir, hit);
        }
      }
      if (!hit.primitive) {
        view.image.set(u, v, spec.background);
        continue;
      }
      const Vec3 point = origin + hit.s * dir;
      const auto [a, b] = FaceCoordinates(hit.axis, point);
      view.image.set(u, v, hit.primitive->texture.Evaluate(a, b));
      view.depth.set(u, v, hit.s);
    }
  }
  return view;
}

SceneManifest GenerateScene(const SceneSpec& spec,
                            const std::filesystem::path& out_dir) {
  spec.Validate();
  std::filesystem::create_directories(out_dir / "images");
  std::filesystem::create_directories(out_dir / "depth");

  const CameraIntrinsics k = spec.Intrinsics();
  std::vector<RigCamera> rig;
  for (const auto& c : spec.cameras) {
    rig.push_back({c.id, k, CameraMountPose(c.yaw, c.position)});
  }
  SceneManifest m;
  m.name = spec.name;
  m.depth_scale = spec.depth_scale;
  m.rig = CameraRig(std::move(rig));
  m.base_dir = out_dir;

  for (std::size_t f = 0; f < spec.trajectory.size(); ++f) {
    ManifestFrame frame;
    frame.timestamp = static_cast<double>(f) * spec.frame_interval;
    frame.ego2world = spec.trajectory[f];
    for (std::size_t c = 0; c < spec.cameras.size(); ++c) {
      const std::string stem =
          SampleDirName(f, spec.cameras[c].id);
      const RenderedView view = RenderView(spec, f, c);
      const std::filesystem::path image_rel =
          std::filesystem::path("images") / (stem + ".ppm");
      const std::filesystem::path depth_rel =
          std::filesystem::path("depth") / (stem + ".pgm");
      pnm::WritePpm(out_dir / image_rel, view.image);
      pnm::WritePgm(out_dir / depth_rel, k.width, k.height, 65535,
                    DepthToStored(view.depth, spec.depth_scale));
      frame.image_paths.push_back(image_rel);
      frame.depth_paths.push_back(depth_rel);
    }
    m.frames.push_back(std::move(frame));
  }
  SaveManifest(m, out_dir / "manifest.json");
  return LoadManifest(out_dir / "manifest.json");
}

double DistanceToSurface(const SceneSpec& spec, const Vec3& p) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& prim : spec.primitives) {
    if (prim.kind == Primitive::Kind::kPlane) {
      // Distance to the rectangle.
      Vec3 q = p - prim.center;
      int in_plane = 0;
      double d2 = 0.0;
      for (int a = 0; a < 3; ++a) {
        double excess;
        if (a == prim.normal_axis) {
          excess = std::abs(q[a]);
        } else {
          excess = std::max(0.0, std::abs(q[a]) - 0.5 * prim.size[in_plane++]);
        }
        d2 += excess * excess;
      }
      best = std::min(best, std::sqrt(d2));
    } else {
      // Unsigned distance to the box surface.
      const Vec3 q = (p - prim.center).cwiseAbs() - 0.5 * prim.size;
      const double outside = q.cwiseMax(0.0).norm();
      const double inside = std::min(q.maxCoeff(), 0.0);
      best = std::min(best, std::abs(outside + inside));
    }
  }
  return best;
}

BruteForceResult BruteForceRender(const ColoredPointCloud& cloud,
                                  const CameraPose& cam_pose,
                                  const CameraIntrinsics& k,
                                  const RenderOptions& options,
                                  double depth_tol,
                                  std::int32_t target_camera) {
  k.Validate();
  const CameraPose ego_to_cam = PoseInverse(cam_pose);
  const std::int64_t r = options.splat_radius;

  struct Projected {
    bool valid;
    std::int64_t u, v;
    double depth;
  };
  std::vector<Projected> proj(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3 c = PoseApply(ego_to_cam, cloud.position(i));
    const auto p = ProjectPoint(c, k, options.z_min);
    proj[i] = p ? Projected{true, RoundHalfUp(p->pixel.x()),
                            RoundHalfUp(p->pixel.y()), p->depth}
                : Projected{false, 0, 0, 0.0};
  }

  BruteForceResult out{ImageBuffer(k.width, k.height),
                       ZBuffer(k.width, k.height),
                       OcclusionMask(k.width, k.height)};
  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      bool found = false;
      double best_depth = 0.0;
      std::uint64_t best_key = 0;
      std::size_t best_index = 0;
      for (std::size_t i = 0; i < cloud.size(); ++i) {
        const Projected& p = proj[i];
        if (!p.valid) continue;
        if (std::abs(p.u - x) > r || std::abs(p.v - y) > r) continue;
        const std::uint64_t key =
            PointKey(cloud.source_pixel(i), cloud.source_camera(i));
        if (!found || p.depth < best_depth ||
            (p.depth == best_depth && key < best_key)) {
          found = true;
          best_depth = p.depth;
          best_key = key;
          best_index = i;
        }
      }
      if (!found) continue;
      out.zbuffer.Offer(x, y, best_depth, best_key);
      out.image.set(x, y, cloud.color(best_index));
    }
  }

  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (cloud.source_camera(i) != target_camera) continue;
    const Pixel src = cloud.source_pixel(i);
    const Projected& p = proj[i];
    const bool inside = p.valid && p.u >= 0 && p.v >= 0 && p.u < k.width &&
                        p.v < k.height;
    if (!inside) {
      out.mask.set(src.u, src.v, MaskFlag::kOutOfView);
      continue;
    }
    const int x = static_cast<int>(p.u);
    const int y = static_cast<int>(p.v);
    const bool occluded =
        !out.zbuffer.empty_at(x, y) &&
        (p.depth - out.zbuffer.depth(x, y)) / out.zbuffer.depth(x, y) >
            depth_tol;
    out.mask.set(src.u, src.v,
                 occluded ? MaskFlag::kDepthOccluded : MaskFlag::kVisible);
  }
  return out;
}

int AnalyticPlaneBand(double fx, double plane_depth, double lateral,
                      int width) {
  const double disparity = fx * std::abs(lateral) / plane_depth;
  const double band = lateral >= 0.0 ? std::floor(disparity + 0.5)
                                     : std::ceil(disparity - 0.5);
  return static_cast<int>(std::clamp(band, 0.0, static_cast<double>(width)));
}

SceneSpec RandomSceneSpec(std::uint64_t seed) {
  const CounterRng rng(seed, /*stream=*/0x5343454e45ull);  // "SCENE"
  std::uint64_t counter = 0;
  const auto uniform = [&](double lo, double hi) {
    return lo + (hi - lo) * rng.Uniform(counter++);
  };
  const auto color = [&] {
    return Rgb{static_cast<std::uint8_t>(uniform(0, 256)),
               static_cast<std::uint8_t>(uniform(0, 256)),
               static_cast<std::uint8_t>(uniform(0, 256))};
  };
  const auto texture = [&] {
    Texture t;
    t.kind = uniform(0, 1) < 0.5 ? Texture::Kind::kChecker
                                 : Texture::Kind::kNoise;
    t.period = uniform(0.3, 2.0);
    t.seed = rng.Bits(counter++);
    t.colors = {color(), color()};
    return t;
  };

  SceneSpec s;
  s.name = "random_" + std::to_string(seed);
  s.seed = seed;
  const int sizes[] = {16, 24, 32, 48, 64};
  s.width = sizes[static_cast<int>(uniform(0, 5))];
  s.height = sizes[static_cast<int>(uniform(0, 5))];
  s.fx = s.width * uniform(0.7, 1.5);
  s.fy = s.fx;
  if (uniform(0, 1) < 0.5) {
    s.cameras = DefaultRig();
  } else {
    s.cameras = {{"front", 0.0, Vec3(uniform(0, 1.5), 0, uniform(0, 1.5))}};
  }
  s.trajectory = LinearTrajectory(1, Vec3::Zero());

  Primitive wall;
  wall.kind = Primitive::Kind::kPlane;
  wall.normal_axis = 0;
  wall.center = Vec3(uniform(15, 40), 0, 0);
  wall.size = Vec3(400, 400, 0);
  wall.texture = texture();
  s.primitives.push_back(wall);

  const int boxes = 1 + static_cast<int>(uniform(0, 4));
  for (int b = 0; b < boxes; ++b) {
    Primitive box;
    box.kind = Primitive::Kind::kBox;
    const double x = uniform(4, 12);
    box.center = Vec3(x, uniform(-0.5, 0.5) * x, uniform(-0.3, 0.3) * x);
    box.size = Vec3(uniform(0.5, 3), uniform(0.5, 3), uniform(0.5, 3));
    box.texture = texture();
    s.primitives.push_back(box);
  }
  return s;
}

}  // namespace oracle
}  // namespace vshift
