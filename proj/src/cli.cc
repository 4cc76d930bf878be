#include "vshift/cli.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vshift/dataset.h"
#include "vshift/errors.h"
#include "vshift/flow.h"
#include "vshift/json_io.h"
#include "vshift/manifest.h"
#include "vshift/oracle.h"
#include "vshift/pnm.h"

namespace vshift {
namespace cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kExitCodeHelp =
    "Exit codes:\n"
    "  0  success\n"
    "  1  internal error\n"
    "  2  usage error (unknown flag, missing or malformed argument)\n"
    "  3  I/O error (missing or unwritable file)\n"
    "  4  format error (malformed PPM/PGM/JSON/checkpoint)\n"
    "  5  manifest validation error\n"
    "  6  invalid input (shift bound, config range, ...)\n"
    "  7  degenerate view (camera inside geometry)\n"
    "  8  dataset build aborted\n"
    "  9  verify found samples that do not reproduce\n"
    "Errors are printed to stderr as one JSON line.";

int ExitCodeFor(const Error& e) {
  const std::string& kind = e.kind();
  if (kind == "io") return kIo;
  if (kind == "format") return kFormat;
  if (kind.rfind("manifest", 0) == 0) return kManifest;
  if (kind == "invalid_input") return kInvalidInput;
  if (kind == "degenerate_view") return kDegenerateView;
  if (kind == "build_aborted") return kBuildAborted;
  return kInternal;
}

int ReportError(std::ostream& err, const std::string& kind,
                const std::string& message, int code) {
  err << json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump()
      << '\n';
  return code;
}

json ReadJsonFile(const fs::path& path) {
  const std::string text = pnm::ReadFileBytes(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void WriteJsonFile(const json& j, const fs::path& path) {
  pnm::WriteFileBytes(path, j.dump(2) + "\n");
}

// Pipeline overrides shared by every condition-producing subcommand.
struct PipelineFlags {
  std::string config_path;
  std::optional<double> depth_tol;
  std::optional<double> z_min;
  std::optional<int> splat_radius;
  std::optional<int> stride;
  std::optional<double> lateral_range;
  std::optional<double> longitudinal_range;
  std::optional<double> shift_bound;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;

  void Register(CLI::App* app, bool sampling) {
    app->add_option("--config", config_path, "pipeline config JSON")
        ->check(CLI::ExistingFile);
    app->add_option("--depth-tol", depth_tol, "relative occlusion tolerance");
    app->add_option("--z-min", z_min, "near plane, meters");
    app->add_option("--splat-radius", splat_radius, "splat radius, pixels");
    app->add_option("--stride", stride, "back-projection pixel stride");
    app->add_option("--shift-bound", shift_bound, "max |shift|, meters");
    app->add_option("--workers", workers, "worker threads");
    if (sampling) {
      app->add_option("--seed", seed, "shift sampler seed");
      app->add_option("--lateral-range", lateral_range,
                      "lateral shifts drawn from [-r, r] meters");
      app->add_option("--longitudinal-range", longitudinal_range,
                      "longitudinal shifts drawn from [-r, r] meters");
    }
  }

  // Defaults, then the config file, then explicit flags.
  PipelineConfig Resolve() const {
    PipelineConfig c;
    if (!config_path.empty()) {
      try {
        c = PipelineConfig::FromJson(ReadJsonFile(config_path), c);
      } catch (const json::exception& e) {
        throw FormatError(config_path + ": " + e.what());
      }
    }
    if (depth_tol) c.depth_tol = *depth_tol;
    if (z_min) c.z_min = *z_min;
    if (splat_radius) c.splat_radius = *splat_radius;
    if (stride) c.stride = *stride;
    if (lateral_range) c.lateral_range = *lateral_range;
    if (longitudinal_range) c.longitudinal_range = *longitudinal_range;
    if (shift_bound) c.shift_bound = *shift_bound;
    if (seed) c.seed = *seed;
    if (workers) c.workers = *workers;
    c.Validate();
    return c;
  }
};

struct ViewArgs {
  std::string manifest;
  std::string out_dir;
  std::size_t frame = 0;
  std::string camera;
  ShiftSpec shift;
  PipelineFlags pipeline;

  void Register(CLI::App* app) {
    app->add_option("manifest", manifest, "scene manifest.json")->required();
    app->add_option("out", out_dir, "output directory")->required();
    app->add_option("--frame", frame, "frame index");
    app->add_option("--camera", camera, "camera id")->required();
    app->add_option("--lateral", shift.lateral, "lateral shift, meters (+left)");
    app->add_option("--longitudinal", shift.longitudinal,
                    "longitudinal shift, meters (+forward)");
    app->add_option("--vertical", shift.vertical, "vertical shift, meters");
    app->add_option("--yaw", shift.yaw, "yaw shift, radians");
    pipeline.Register(app, /*sampling=*/false);
  }
};

enum class ViewOutput { kShift, kMask, kSeam };

void RunView(const ViewArgs& a, ViewOutput what, std::ostream& out) {
  const PipelineConfig config = a.pipeline.Resolve();
  const SceneManifest scene = LoadManifest(a.manifest);
  if (a.frame >= scene.frames.size()) {
    throw InvalidInput("frame " + std::to_string(a.frame) + " out of range");
  }
  const std::size_t camera = scene.rig.IndexOf(a.camera);
  const FrameData data = LoadFrame(scene, a.frame);
  const ConditionProducts p = BuildConditionProducts(
      scene, data, camera, a.shift, SampleParams::FromConfig(config),
      config.shift_bound, config.workers);

  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  pnm::WritePpm(dir / "raw.ppm", p.sample.raw);
  pnm::WritePpm(dir / "shift.ppm", p.shift_image);
  if (what != ViewOutput::kShift) {
    pnm::WriteFileBytes(dir / "mask.pgm", EncodeMaskPgm(p.sample.mask));
    pnm::WritePpm(dir / "masked.ppm", p.masked);
  }
  if (what == ViewOutput::kSeam) {
    pnm::WritePpm(dir / "warp.ppm", p.warp);
    pnm::WritePpm(dir / "cond.ppm", p.sample.condition);
  }
  json eff = config.ToJson(/*include_workers=*/false);
  eff["manifest"] = a.manifest;
  eff["frame"] = a.frame;
  eff["camera"] = a.camera;
  eff["shift"] = ShiftToJson(a.shift);
  WriteJsonFile(eff, dir / "effective_config.json");

  json summary{{"masked_fraction", p.sample.mask.MaskedFraction()},
               {"neighbor", p.sample.neighbor ? json(*p.sample.neighbor)
                                              : json(nullptr)}};
  out << summary.dump() << '\n';
}

struct TrainArgs {
  std::string dataset;
  std::string checkpoint;
  std::string loss_csv;
  flow::TrainConfig train;
  std::size_t max_samples = 0;
  int repeat_index = -1;

  void Register(CLI::App* app) {
    app->add_option("dataset", dataset, "dataset root")->required();
    app->add_option("checkpoint", checkpoint, "output checkpoint path")
        ->required();
    app->add_option("--steps", train.steps, "gradient steps");
    app->add_option("--lr", train.learning_rate, "learning rate");
    app->add_option("--batch-size", train.batch_size, "pairs per step");
    app->add_option("--time-points", train.time_points, "t grid size");
    app->add_option("--seed", train.seed, "init and noise seed");
    app->add_option("--downscale", train.downscale, "latent factor (1, 2, 4)");
    app->add_option("--hidden", train.model.hidden, "hidden units");
    app->add_option("--patch-radius", train.model.patch_radius,
                    "denoiser input patch radius");
    app->add_option("--max-samples", max_samples,
                    "use at most this many samples (0 = all)");
    app->add_option("--repeat-sample", repeat_index,
                    "train on this single sample only");
    app->add_option("--loss-csv", loss_csv, "write the loss trace here");
  }
};

void RunTrain(const TrainArgs& a, std::ostream& out) {
  std::vector<fs::path> dirs = ListSampleDirs(a.dataset);
  if (a.repeat_index >= 0) {
    if (static_cast<std::size_t>(a.repeat_index) >= dirs.size()) {
      throw InvalidInput("--repeat-sample index out of range");
    }
    dirs = {dirs[a.repeat_index]};
  } else if (a.max_samples > 0 && dirs.size() > a.max_samples) {
    dirs.resize(a.max_samples);
  }
  if (dirs.empty()) throw InvalidInput("dataset has no samples");

  std::vector<ConditionSample> samples;
  for (const auto& d : dirs) samples.push_back(ReadSample(d));
  const auto pairs = flow::EncodePairs(samples, a.train.downscale);
  const flow::TrainResult r = flow::Train(pairs, a.train);

  const fs::path ckpt(a.checkpoint);
  if (ckpt.has_parent_path()) fs::create_directories(ckpt.parent_path());
  flow::SaveCheckpoint(r.model, a.train.downscale, ckpt);
  if (!a.loss_csv.empty()) flow::WriteLossTrace(r.loss_trace, a.loss_csv);

  json eff{{"dataset", a.dataset},
           {"samples", dirs.size()},
           {"steps", a.train.steps},
           {"learning_rate", a.train.learning_rate},
           {"batch_size", a.train.batch_size},
           {"time_points", a.train.time_points},
           {"seed", a.train.seed},
           {"downscale", a.train.downscale},
           {"hidden", a.train.model.hidden},
           {"patch_radius", a.train.model.patch_radius},
           {"time_embed", a.train.model.time_embed}};
  WriteJsonFile(eff, ckpt.parent_path() / "effective_config.json");

  const double first = r.loss_trace.empty() ? 0.0 : r.loss_trace.front();
  const double last = r.loss_trace.empty() ? 0.0 : r.loss_trace.back();
  out << json{{"initial_loss", first}, {"final_loss", last}}.dump() << '\n';
}

Rgb MaskGray(MaskFlag flag) {
  const std::uint8_t g = MaskFlagToGray(flag);
  return {g, g, g};
}

void Blit(ImageBuffer& dst, const ImageBuffer& src, int x0, int y0) {
  for (int y = 0; y < src.height(); ++y) {
    for (int x = 0; x < src.width(); ++x) dst.set(x0 + x, y0 + y, src.at(x, y));
  }
}

void RunReport(const std::string& dataset, const std::string& out_arg,
               std::size_t sheet_rows, std::ostream& out) {
  const std::vector<fs::path> dirs = ListSampleDirs(dataset);
  if (dirs.empty()) throw InvalidInput("dataset has no samples");
  const fs::path dir =
      out_arg.empty() ? fs::path(dataset) / "report" : fs::path(out_arg);
  fs::create_directories(dir);

  std::array<std::size_t, BuildStats::kHistogramBins> hist{};
  std::vector<ConditionSample> shown;
  int cell_w = 0;
  int cell_h = 0;
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    ConditionSample s = ReadSample(dirs[i]);
    const int bin = std::clamp(
        static_cast<int>(std::floor(s.mask.MaskedFraction() *
                                    BuildStats::kHistogramBins)),
        0, BuildStats::kHistogramBins - 1);
    ++hist[bin];
    if (shown.size() < sheet_rows) {
      cell_w = std::max(cell_w, s.raw.width());
      cell_h = std::max(cell_h, s.raw.height());
      shown.push_back(std::move(s));
    }
  }

  std::ostringstream csv;
  csv << "bin_lo,bin_hi,count\n";
  for (int b = 0; b < BuildStats::kHistogramBins; ++b) {
    csv << b / 10.0 << ',' << (b + 1) / 10.0 << ',' << hist[b] << '\n';
  }
  pnm::WriteFileBytes(dir / "mask_histogram.csv", csv.str());

  // One row per sample: raw | cond | mask, 2 px gutters.
  constexpr int kGap = 2;
  ImageBuffer sheet(3 * cell_w + 2 * kGap,
                    static_cast<int>(shown.size()) * (cell_h + kGap) - kGap);
  for (std::size_t r = 0; r < shown.size(); ++r) {
    const ConditionSample& s = shown[r];
    const int y0 = static_cast<int>(r) * (cell_h + kGap);
    Blit(sheet, s.raw, 0, y0);
    Blit(sheet, s.condition, cell_w + kGap, y0);
    for (int y = 0; y < s.mask.height(); ++y) {
      for (int x = 0; x < s.mask.width(); ++x) {
        sheet.set(2 * (cell_w + kGap) + x, y0 + y, MaskGray(s.mask.at(x, y)));
      }
    }
  }
  pnm::WritePpm(dir / "contact_sheet.ppm", sheet);
  WriteJsonFile(json{{"dataset", dataset}, {"rows", shown.size()}},
                dir / "effective_config.json");
  out << json{{"samples", dirs.size()}, {"histogram", hist}}.dump() << '\n';
}

}  // namespace

int Run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Virtual-shift condition pipeline and toy flow inpainter",
               "vshift"};
  app.footer(kExitCodeHelp);
  app.require_subcommand(1, 1);

  std::string scene_spec, scene_out;
  auto* gen = app.add_subcommand("gen-scene", "render a synthetic scene");
  gen->add_option("spec", scene_spec, "scene spec JSON")->required();
  gen->add_option("out", scene_out, "output directory")->required();

  ViewArgs shift_args, mask_args, seam_args;
  auto* shift = app.add_subcommand("shift", "write the splatted shift image");
  shift_args.Register(shift);
  auto* mask = app.add_subcommand("mask", "write the mask and masked image");
  mask_args.Register(mask);
  auto* seam = app.add_subcommand("seam", "write the warp and condition");
  seam_args.Register(seam);

  std::string build_manifest, build_out;
  PipelineFlags build_flags;
  auto* build = app.add_subcommand("build-dataset", "stream a dataset to disk");
  build->add_option("manifest", build_manifest, "scene manifest.json")
      ->required();
  build->add_option("out", build_out, "dataset root")->required();
  build_flags.Register(build, /*sampling=*/true);

  TrainArgs train_args;
  auto* train = app.add_subcommand("train-toy", "train the toy inpainter");
  train_args.Register(train);

  std::string ckpt_path, cond_path, sample_out;
  int sample_steps = 50;
  std::uint64_t sample_seed = 0;
  auto* sample = app.add_subcommand("sample", "inpaint a condition image");
  sample->add_option("checkpoint", ckpt_path, "checkpoint file")->required();
  sample->add_option("cond", cond_path, "condition PPM")->required();
  sample->add_option("out", sample_out, "output PPM")->required();
  sample->add_option("--steps", sample_steps, "Euler steps");
  sample->add_option("--seed", sample_seed, "noise seed");

  std::string report_dataset, report_out;
  std::size_t report_rows = 8;
  auto* report = app.add_subcommand("report", "histogram and contact sheet");
  report->add_option("dataset", report_dataset, "dataset root")->required();
  report->add_option("--out", report_out, "output dir (default <dataset>/report)");
  report->add_option("--rows", report_rows, "contact sheet rows");

  std::string verify_dataset;
  int verify_workers = 1;
  auto* verify = app.add_subcommand("verify", "recompute and compare samples");
  verify->add_option("dataset", verify_dataset, "dataset root")->required();
  verify->add_option("--workers", verify_workers, "worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    return ReportError(err, "usage", e.what(), kUsage);
  }

  try {
    if (gen->parsed()) {
      const oracle::SceneSpec spec =
          oracle::SceneSpecFromJson(ReadJsonFile(scene_spec));
      const SceneManifest m = oracle::GenerateScene(spec, scene_out);
      WriteJsonFile(oracle::SceneSpecToJson(spec),
                    fs::path(scene_out) / "effective_config.json");
      out << json{{"frames", m.frames.size()}, {"cameras", m.rig.size()}}.dump()
          << '\n';
    } else if (shift->parsed()) {
      RunView(shift_args, ViewOutput::kShift, out);
    } else if (mask->parsed()) {
      RunView(mask_args, ViewOutput::kMask, out);
    } else if (seam->parsed()) {
      RunView(seam_args, ViewOutput::kSeam, out);
    } else if (build->parsed()) {
      const PipelineConfig config = build_flags.Resolve();
      const BuildStats stats = BuildDataset(build_manifest, build_out, config);
      WriteJsonFile(config.ToJson(/*include_workers=*/false),
                    fs::path(build_out) / "effective_config.json");
      // Timing and memory vary between runs, so they go to stdout only.
      out << json{{"frames", stats.frames_processed},
                  {"samples", stats.samples_emitted},
                  {"mask_histogram", stats.mask_histogram},
                  {"wall_seconds", stats.wall_seconds},
                  {"peak_tracked_bytes", stats.peak_tracked_bytes}}
                 .dump()
          << '\n';
    } else if (train->parsed()) {
      RunTrain(train_args, out);
    } else if (sample->parsed()) {
      const flow::Checkpoint ck = flow::LoadCheckpoint(ckpt_path);
      const ImageBuffer cond = pnm::ReadPpm(cond_path);
      const ImageBuffer img =
          flow::Sample(ck.model, cond, sample_steps, sample_seed, ck.downscale);
      const fs::path outp(sample_out);
      if (outp.has_parent_path()) fs::create_directories(outp.parent_path());
      pnm::WritePpm(outp, img);
      WriteJsonFile(json{{"checkpoint", ckpt_path},
                         {"cond", cond_path},
                         {"steps", sample_steps},
                         {"seed", sample_seed}},
                    outp.parent_path() / "effective_config.json");
    } else if (report->parsed()) {
      RunReport(report_dataset, report_out, report_rows, out);
    } else if (verify->parsed()) {
      const VerifyReport r = VerifyDataset(verify_dataset, verify_workers);
      out << json{{"checked", r.checked}, {"mismatches", r.mismatches}}.dump()
          << '\n';
      if (!r.ok()) {
        return ReportError(err, "verify_mismatch",
                           std::to_string(r.mismatches.size()) +
                               " sample(s) did not reproduce",
                           kVerifyMismatch);
      }
    }
  } catch (const Error& e) {
    return ReportError(err, e.kind(), e.what(), ExitCodeFor(e));
  } catch (const fs::filesystem_error& e) {
    return ReportError(err, "io", e.what(), kIo);
  } catch (const std::exception& e) {
    return ReportError(err, "internal", e.what(), kInternal);
  }
  return kOk;
}

}  // namespace cli
}  // namespace vshift
