#ifndef VSHIFT_DATASET_H_
#define VSHIFT_DATASET_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vshift/errors.h"
#include "vshift/manifest.h"
#include "vshift/renderer.h"

namespace vshift {

inline constexpr int kPipelineVersion = 1;

// Tunables of the condition pipeline. Loaded from JSON (unknown keys are
// rejected), then overridden by CLI flags.
struct PipelineConfig {
  double depth_tol = kDefaultDepthTolerance;
  double z_min = kDefaultZMin;
  int splat_radius = 0;
  int stride = 1;
  double lateral_range = 1.0;       // shifts drawn from [-r, r]
  double longitudinal_range = 0.0;  // 0 disables longitudinal shifts
  double shift_bound = ShiftSpec::kDefaultBound;
  std::uint64_t seed = 0;
  int workers = 1;

  // Throws InvalidInput on out-of-range values.
  void Validate() const;

  // `include_workers` = false gives the data-defining subset, which is what
  // is persisted next to generated datasets.
  nlohmann::json ToJson(bool include_workers = true) const;
  // Starts from `base` and overrides every key present in `j`.
  static PipelineConfig FromJson(const nlohmann::json& j,
                                 const PipelineConfig& base);
  static PipelineConfig FromJson(const nlohmann::json& j);
};

// Parameters that determine a sample's bytes, recorded in meta.json.
struct SampleParams {
  double depth_tol = kDefaultDepthTolerance;
  double z_min = kDefaultZMin;
  int splat_radius = 0;
  int stride = 1;
  int pipeline_version = kPipelineVersion;

  static SampleParams FromConfig(const PipelineConfig& config);
  bool operator==(const SampleParams&) const = default;
};

// A training pair: the network sees `condition` and is supervised by `raw`.
struct ConditionSample {
  ImageBuffer raw;
  ImageBuffer condition;
  OcclusionMask mask;
  ShiftSpec shift;
  std::size_t frame = 0;
  std::string camera;
  std::optional<std::string> neighbor;
  SampleParams params;

  bool operator==(const ConditionSample&) const = default;
};

// Draws shifts uniformly from the configured ranges. Sample `index` is a
// pure function of (seed, index).
class ShiftSampler {
 public:
  ShiftSampler(std::uint64_t seed, double lateral_range,
               double longitudinal_range = 0.0);
  static ShiftSampler FromConfig(const PipelineConfig& config);

  ShiftSpec Sample(std::uint64_t index) const;

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  double lateral_range_;
  double longitudinal_range_;
};

// Every intermediate of one condition build.
struct ConditionProducts {
  ConditionSample sample;
  ImageBuffer shift_image;  // target camera splatted at the virtual pose
  ImageBuffer masked;       // raw with lost pixels blacked out
  ImageBuffer warp;         // neighbor warped to the virtual pose (black if none)
};

// All cameras of one frame, loaded once and shared by the per-camera builds.
struct FrameData {
  std::size_t frame = 0;
  std::vector<CameraFrameData> cameras;
};

FrameData LoadFrame(const SceneManifest& scene, std::size_t frame);

// Back-projection, virtual splat, mask, masking, neighbor warp and seam
// composite, in that order.
ConditionProducts BuildConditionProducts(const SceneManifest& scene,
                                         const FrameData& data,
                                         std::size_t camera,
                                         const ShiftSpec& shift,
                                         const SampleParams& params,
                                         double shift_bound =
                                             ShiftSpec::kDefaultBound,
                                         int threads = 1);

ConditionSample BuildConditionFrame(const SceneManifest& scene,
                                    std::size_t frame,
                                    const std::string& camera,
                                    const ShiftSpec& shift,
                                    const PipelineConfig& config = {});

struct BuildStats {
  static constexpr int kHistogramBins = 10;

  std::size_t frames_processed = 0;
  std::size_t samples_emitted = 0;
  // Counts of masked fraction in [i/10, (i+1)/10); 1.0 lands in the last bin.
  std::array<std::size_t, kHistogramBins> mask_histogram{};
  double wall_seconds = 0.0;
  std::int64_t peak_tracked_bytes = 0;
};

// Raised when the sink throws; carries the statistics gathered so far.
class BuildAborted : public Error {
 public:
  BuildAborted(const std::string& message, BuildStats partial);
  const BuildStats& partial_stats() const { return partial_; }

 private:
  BuildStats partial_;
};

using SampleSink = std::function<void(const ConditionSample&)>;

// Streams one sample per (frame, camera), in frame then rig order. Up to
// config.workers frames are in flight at once; nothing else is retained, so
// the working set does not grow with the number of frames.
BuildStats StreamBuild(const SceneManifest& scene, const ShiftSampler& sampler,
                       const SampleSink& sink,
                       const PipelineConfig& config = {});

// Sample persistence: raw.ppm, cond.ppm, mask.pgm, meta.json.
void WriteSample(const ConditionSample& sample,
                 const std::filesystem::path& dir);
ConditionSample ReadSample(const std::filesystem::path& dir);

// "<frame>_<camera>" directory name, frame zero-padded to four digits.
std::string SampleDirName(std::size_t frame, const std::string& camera);

// Dataset tree: <root>/dataset.json plus <root>/<scene>/<frame>_<camera>/.
struct DatasetIndex {
  std::filesystem::path manifest;
  std::string scene;
  PipelineConfig config;
  std::size_t samples = 0;
};

void WriteDatasetIndex(const DatasetIndex& index,
                       const std::filesystem::path& root);
DatasetIndex ReadDatasetIndex(const std::filesystem::path& root);

// All sample directories under a dataset root, sorted.
std::vector<std::filesystem::path> ListSampleDirs(
    const std::filesystem::path& root);

// Builds a whole dataset under `root` and writes its index.
BuildStats BuildDataset(const std::filesystem::path& manifest_path,
                        const std::filesystem::path& root,
                        const PipelineConfig& config);

struct VerifyReport {
  std::size_t checked = 0;
  std::vector<std::string> mismatches;  // sample dir names
  bool ok() const { return mismatches.empty(); }
};

// Rebuilds every stored sample from the manifest and compares bytes.
VerifyReport VerifyDataset(const std::filesystem::path& root, int threads = 1);

}  // namespace vshift

#endif  // VSHIFT_DATASET_H_
