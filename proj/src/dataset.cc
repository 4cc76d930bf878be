#include "vshift/dataset.h"

#include <chrono>
#include <cmath>
#include <mutex>
#include <thread>

#include "parallel.h"
#include "vshift/json_io.h"
#include "vshift/pnm.h"
#include "vshift/random.h"
#include "vshift/seam.h"

namespace vshift {

using nlohmann::json;

void PipelineConfig::Validate() const {
  if (!(depth_tol >= 0.0) || !std::isfinite(depth_tol)) {
    throw InvalidInput("depth_tol must be finite and >= 0");
  }
  if (!(z_min > 0.0) || !std::isfinite(z_min)) {
    throw InvalidInput("z_min must be finite and > 0");
  }
  if (splat_radius < 0) throw InvalidInput("splat_radius must be >= 0");
  if (stride < 1) throw InvalidInput("stride must be >= 1");
  if (!(shift_bound >= 0.0) || !std::isfinite(shift_bound)) {
    throw InvalidInput("shift_bound must be finite and >= 0");
  }
  if (!(lateral_range >= 0.0) || lateral_range > shift_bound) {
    throw InvalidInput("lateral_range must lie in [0, shift_bound]");
  }
  if (!(longitudinal_range >= 0.0) || longitudinal_range > shift_bound) {
    throw InvalidInput("longitudinal_range must lie in [0, shift_bound]");
  }
  if (workers < 1) throw InvalidInput("workers must be >= 1");
}

json PipelineConfig::ToJson(bool include_workers) const {
  json j = {{"depth_tol", depth_tol},
            {"z_min", z_min},
            {"splat_radius", splat_radius},
            {"stride", stride},
            {"lateral_range", lateral_range},
            {"longitudinal_range", longitudinal_range},
            {"shift_bound", shift_bound},
            {"seed", seed}};
  if (include_workers) j["workers"] = workers;
  return j;
}

PipelineConfig PipelineConfig::FromJson(const json& j) {
  return FromJson(j, PipelineConfig{});
}

PipelineConfig PipelineConfig::FromJson(const json& j,
                                        const PipelineConfig& base) {
  if (!j.is_object()) throw InvalidInput("config must be a JSON object");
  PipelineConfig c = base;
  const auto number = [&](const std::string& key, double& out) {
    if (!j.at(key).is_number()) throw InvalidInput(key + " must be a number");
    out = j.at(key).get<double>();
  };
  const auto integer = [&](const std::string& key, int& out) {
    if (!j.at(key).is_number_integer()) {
      throw InvalidInput(key + " must be an integer");
    }
    out = j.at(key).get<int>();
  };
  for (const auto& [key, value] : j.items()) {
    if (key == "depth_tol") {
      number(key, c.depth_tol);
    } else if (key == "z_min") {
      number(key, c.z_min);
    } else if (key == "splat_radius") {
      integer(key, c.splat_radius);
    } else if (key == "stride") {
      integer(key, c.stride);
    } else if (key == "lateral_range") {
      number(key, c.lateral_range);
    } else if (key == "longitudinal_range") {
      number(key, c.longitudinal_range);
    } else if (key == "shift_bound") {
      number(key, c.shift_bound);
    } else if (key == "seed") {
      if (!value.is_number_unsigned() && !value.is_number_integer()) {
        throw InvalidInput("seed must be a non-negative integer");
      }
      if (value.is_number_integer() && value.get<std::int64_t>() < 0) {
        throw InvalidInput("seed must be a non-negative integer");
      }
      c.seed = value.get<std::uint64_t>();
    } else if (key == "workers") {
      integer(key, c.workers);
    } else {
      throw InvalidInput("unknown config key '" + key + "'");
    }
  }
  c.Validate();
  return c;
}

SampleParams SampleParams::FromConfig(const PipelineConfig& config) {
  SampleParams p;
  p.depth_tol = config.depth_tol;
  p.z_min = config.z_min;
  p.splat_radius = config.splat_radius;
  p.stride = config.stride;
  return p;
}

ShiftSampler::ShiftSampler(std::uint64_t seed, double lateral_range,
                           double longitudinal_range)
    : seed_(seed),
      lateral_range_(lateral_range),
      longitudinal_range_(longitudinal_range) {
  if (!(lateral_range >= 0.0) || !(longitudinal_range >= 0.0) ||
      !std::isfinite(lateral_range) || !std::isfinite(longitudinal_range)) {
    throw InvalidInput("shift ranges must be finite and >= 0");
  }
}

ShiftSampler ShiftSampler::FromConfig(const PipelineConfig& config) {
  return ShiftSampler(config.seed, config.lateral_range,
                      config.longitudinal_range);
}

ShiftSpec ShiftSampler::Sample(std::uint64_t index) const {
  const CounterRng rng(seed_, /*stream=*/0x5348494654ull);  // "SHIFT"
  ShiftSpec s;
  if (lateral_range_ > 0.0) {
    s.lateral = -lateral_range_ + 2.0 * lateral_range_ * rng.Uniform(2 * index);
  }
  if (longitudinal_range_ > 0.0) {
    s.longitudinal = -longitudinal_range_ +
                     2.0 * longitudinal_range_ * rng.Uniform(2 * index + 1);
  }
  return s;
}

FrameData LoadFrame(const SceneManifest& scene, std::size_t frame) {
  if (frame >= scene.frames.size()) {
    throw InvalidInput("frame index " + std::to_string(frame) +
                       " out of range");
  }
  FrameData data;
  data.frame = frame;
  data.cameras.reserve(scene.rig.size());
  for (std::size_t c = 0; c < scene.rig.size(); ++c) {
    data.cameras.push_back(LoadCameraFrame(scene, frame, c));
  }
  return data;
}

ConditionProducts BuildConditionProducts(const SceneManifest& scene,
                                         const FrameData& data,
                                         std::size_t camera,
                                         const ShiftSpec& shift,
                                         const SampleParams& params,
                                         double shift_bound, int threads) {
  if (camera >= scene.rig.size() || camera >= data.cameras.size()) {
    throw InvalidInput("camera index out of range");
  }
  const RigCamera& cam = scene.rig.camera(camera);
  const CameraFrameData& target = data.cameras[camera];
  const CameraPose& ego_pose = scene.frames.at(data.frame).ego2world;
  const RenderOptions options{params.splat_radius, params.z_min, threads};
  const auto camera_index = static_cast<std::int32_t>(camera);

  const CameraPose virt_ego = MakeVirtualPose(ego_pose, shift, shift_bound);
  const CameraPose virt_cam_world = PoseCompose(virt_ego, cam.cam2ego);
  const CameraPose virt_in_ego = VirtualCameraInEgo(ego_pose, virt_cam_world);

  ConditionProducts out;
  {
    const ColoredPointCloud cloud =
        DepthToPointcloud(target.image, target.depth, cam.intrinsics,
                          cam.cam2ego, params.stride, camera_index);
    RenderResult render =
        RenderShiftImage(cloud, virt_in_ego, cam.intrinsics, options);
    out.sample.mask =
        ComputeOcclusionMask(cloud, virt_in_ego, cam.intrinsics,
                             render.zbuffer, params.depth_tol, options,
                             camera_index);
    out.shift_image = std::move(render.image);
  }
  out.masked = ApplyMask(target.image, out.sample.mask);

  out.sample.neighbor = SelectNeighbor(scene.rig, cam.id, shift);
  if (out.sample.neighbor) {
    const std::size_t nb = scene.rig.IndexOf(*out.sample.neighbor);
    const RigCamera& nb_cam = scene.rig.camera(nb);
    out.warp = WarpNeighbor(data.cameras[nb].image, data.cameras[nb].depth,
                            nb_cam.intrinsics, nb_cam.cam2ego, ego_pose,
                            virt_cam_world, cam.intrinsics, options,
                            params.stride, static_cast<std::int32_t>(nb));
  } else {
    out.warp = ImageBuffer(cam.intrinsics.width, cam.intrinsics.height);
  }
  out.sample.condition = CompositeSeam(out.masked, out.warp, out.sample.mask);
  out.sample.raw = target.image;
  out.sample.shift = shift;
  out.sample.frame = data.frame;
  out.sample.camera = cam.id;
  out.sample.params = params;
  return out;
}

ConditionSample BuildConditionFrame(const SceneManifest& scene,
                                    std::size_t frame,
                                    const std::string& camera,
                                    const ShiftSpec& shift,
                                    const PipelineConfig& config) {
  config.Validate();
  const std::size_t index = scene.rig.IndexOf(camera);
  const FrameData data = LoadFrame(scene, frame);
  return BuildConditionProducts(scene, data, index, shift,
                                SampleParams::FromConfig(config),
                                config.shift_bound, config.workers)
      .sample;
}

BuildAborted::BuildAborted(const std::string& message, BuildStats partial)
    : Error("build_aborted", message), partial_(partial) {}

namespace {

std::vector<ConditionSample> BuildFrameSamples(const SceneManifest& scene,
                                               const ShiftSampler& sampler,
                                               const PipelineConfig& config,
                                               std::size_t frame) {
  const FrameData data = LoadFrame(scene, frame);
  const SampleParams params = SampleParams::FromConfig(config);
  std::vector<ConditionSample> samples;
  samples.reserve(scene.rig.size());
  for (std::size_t c = 0; c < scene.rig.size(); ++c) {
    const ShiftSpec shift = sampler.Sample(frame * scene.rig.size() + c);
    samples.push_back(BuildConditionProducts(scene, data, c, shift, params,
                                             config.shift_bound)
                          .sample);
  }
  return samples;
}

void RecordSample(BuildStats& stats, const ConditionSample& sample) {
  const double fraction = sample.mask.MaskedFraction();
  int bin = static_cast<int>(std::floor(fraction * BuildStats::kHistogramBins));
  bin = std::clamp(bin, 0, BuildStats::kHistogramBins - 1);
  ++stats.mask_histogram[bin];
  ++stats.samples_emitted;
}

}  // namespace

BuildStats StreamBuild(const SceneManifest& scene, const ShiftSampler& sampler,
                       const SampleSink& sink, const PipelineConfig& config) {
  config.Validate();
  const auto start = std::chrono::steady_clock::now();
  memory_tracker::ResetPeak();
  const std::int64_t baseline = memory_tracker::CurrentBytes();

  BuildStats stats;
  const auto finish = [&] {
    stats.wall_seconds = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - start)
                             .count();
    stats.peak_tracked_bytes = memory_tracker::PeakBytes() - baseline;
  };

  const std::size_t total = scene.frames.size();
  const std::size_t window = static_cast<std::size_t>(config.workers);
  for (std::size_t first = 0; first < total; first += window) {
    const std::size_t count = std::min(window, total - first);
    // Reorder buffer: one slot per in-flight frame.
    std::vector<std::vector<ConditionSample>> slots(count);
    internal::ParallelFor(count, config.workers,
                          [&](std::size_t begin, std::size_t end) {
                            for (std::size_t i = begin; i < end; ++i) {
                              slots[i] = BuildFrameSamples(scene, sampler,
                                                           config, first + i);
                            }
                          });
    for (auto& frame_samples : slots) {
      for (const ConditionSample& sample : frame_samples) {
        try {
          sink(sample);
        } catch (const std::exception& e) {
          finish();
          throw BuildAborted(std::string("sample sink failed: ") + e.what(),
                             stats);
        }
        RecordSample(stats, sample);
      }
      ++stats.frames_processed;
      frame_samples.clear();
      frame_samples.shrink_to_fit();
    }
  }
  finish();
  return stats;
}

std::string SampleDirName(std::size_t frame, const std::string& camera) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04zu_", frame);
  return buf + camera;
}

void WriteDatasetIndex(const DatasetIndex& index,
                       const std::filesystem::path& root) {
  const json doc = {{"schema_version", 1},
                    {"manifest", index.manifest.generic_string()},
                    {"scene", index.scene},
                    {"samples", index.samples},
                    {"config", index.config.ToJson(/*include_workers=*/false)}};
  pnm::WriteFileBytes(root / "dataset.json", doc.dump(2) + "\n");
}

DatasetIndex ReadDatasetIndex(const std::filesystem::path& root) {
  json doc;
  try {
    doc = json::parse(pnm::ReadFileBytes(root / "dataset.json"));
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed dataset.json: ") + e.what());
  }
  DatasetIndex index;
  try {
    index.manifest = doc.at("manifest").get<std::string>();
    index.scene = doc.at("scene").get<std::string>();
    index.samples = doc.at("samples").get<std::size_t>();
    index.config = PipelineConfig::FromJson(doc.at("config"));
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed dataset.json: ") + e.what());
  }
  return index;
}

std::vector<std::filesystem::path> ListSampleDirs(
    const std::filesystem::path& root) {
  std::vector<std::filesystem::path> dirs;
  if (!std::filesystem::is_directory(root)) {
    throw IoError("not a directory: " + root.string());
  }
  for (const auto& entry :
       std::filesystem::recursive_directory_iterator(root)) {
    if (entry.is_regular_file() && entry.path().filename() == "meta.json") {
      dirs.push_back(entry.path().parent_path());
    }
  }
  std::sort(dirs.begin(), dirs.end());
  return dirs;
}

BuildStats BuildDataset(const std::filesystem::path& manifest_path,
                        const std::filesystem::path& root,
                        const PipelineConfig& config) {
  config.Validate();
  const SceneManifest scene = LoadManifest(manifest_path);
  const std::filesystem::path scene_dir = root / scene.name;
  std::filesystem::create_directories(scene_dir);
  const BuildStats stats = StreamBuild(
      scene, ShiftSampler::FromConfig(config),
      [&](const ConditionSample& s) {
        WriteSample(s, scene_dir / SampleDirName(s.frame, s.camera));
      },
      config);
  DatasetIndex index;
  index.manifest = std::filesystem::absolute(manifest_path).lexically_normal();
  index.scene = scene.name;
  index.config = config;
  index.samples = stats.samples_emitted;
  WriteDatasetIndex(index, root);
  return stats;
}

VerifyReport VerifyDataset(const std::filesystem::path& root, int threads) {
  const DatasetIndex index = ReadDatasetIndex(root);
  const SceneManifest scene = LoadManifest(index.manifest);
  const std::vector<std::filesystem::path> dirs = ListSampleDirs(root);

  VerifyReport report;
  report.checked = dirs.size();
  std::mutex mu;
  internal::ParallelFor(
      dirs.size(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
          bool ok = false;
          try {
            const ConditionSample stored = ReadSample(dirs[i]);
            const FrameData data = LoadFrame(scene, stored.frame);
            const ConditionSample rebuilt =
                BuildConditionProducts(scene, data,
                                       scene.rig.IndexOf(stored.camera),
                                       stored.shift, stored.params,
                                       index.config.shift_bound)
                    .sample;
            ok = rebuilt == stored;
          } catch (const Error&) {
            ok = false;
          }
          if (!ok) {
            std::lock_guard<std::mutex> lock(mu);
            report.mismatches.push_back(dirs[i].filename().string());
          }
        }
      });
  std::sort(report.mismatches.begin(), report.mismatches.end());
  if (index.samples != dirs.size()) {
    report.mismatches.push_back("sample count " + std::to_string(dirs.size()) +
                                " != indexed " +
                                std::to_string(index.samples));
  }
  return report;
}

}  // namespace vshift
