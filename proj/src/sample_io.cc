#include <filesystem>

#include "vshift/dataset.h"
#include "vshift/json_io.h"
#include "vshift/pnm.h"

namespace vshift {

using nlohmann::json;

void WriteSample(const ConditionSample& sample,
                 const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  pnm::WritePpm(dir / "raw.ppm", sample.raw);
  pnm::WritePpm(dir / "cond.ppm", sample.condition);
  pnm::WriteFileBytes(dir / "mask.pgm", EncodeMaskPgm(sample.mask));
  const json meta = {
      {"pipeline_version", sample.params.pipeline_version},
      {"frame", sample.frame},
      {"camera", sample.camera},
      {"neighbor", sample.neighbor ? json(*sample.neighbor) : json(nullptr)},
      {"shift", ShiftToJson(sample.shift)},
      {"depth_tol", sample.params.depth_tol},
      {"z_min", sample.params.z_min},
      {"splat_radius", sample.params.splat_radius},
      {"stride", sample.params.stride},
  };
  pnm::WriteFileBytes(dir / "meta.json", meta.dump(2) + "\n");
}

ConditionSample ReadSample(const std::filesystem::path& dir) {
  ConditionSample s;
  json meta;
  try {
    meta = json::parse(pnm::ReadFileBytes(dir / "meta.json"));
    s.params.pipeline_version = meta.at("pipeline_version").get<int>();
    s.frame = meta.at("frame").get<std::size_t>();
    s.camera = meta.at("camera").get<std::string>();
    const json& nb = meta.at("neighbor");
    if (!nb.is_null()) s.neighbor = nb.get<std::string>();
    s.params.depth_tol = meta.at("depth_tol").get<double>();
    s.params.z_min = meta.at("z_min").get<double>();
    s.params.splat_radius = meta.at("splat_radius").get<int>();
    s.params.stride = meta.at("stride").get<int>();
    s.shift = ShiftFromJson(meta.at("shift"));
  } catch (const json::exception& e) {
    throw FormatError(dir.string() + "/meta.json: " + e.what());
  } catch (const InvalidInput& e) {
    throw FormatError(dir.string() + "/meta.json: " + e.what());
  }
  if (s.params.pipeline_version != kPipelineVersion) {
    throw FormatError(dir.string() + ": unsupported pipeline_version");
  }
  s.raw = pnm::ReadPpm(dir / "raw.ppm");
  s.condition = pnm::ReadPpm(dir / "cond.ppm");
  try {
    s.mask = DecodeMaskPgm(pnm::ReadFileBytes(dir / "mask.pgm"));
  } catch (const FormatError& e) {
    throw FormatError((dir / "mask.pgm").string() + ": " + e.what());
  }
  if (s.raw.width() != s.condition.width() ||
      s.raw.height() != s.condition.height() ||
      s.raw.width() != s.mask.width() || s.raw.height() != s.mask.height()) {
    throw FormatError(dir.string() + ": raw/cond/mask dimensions differ");
  }
  return s;
}

}  // namespace vshift
