#include "vshift/json_io.h"

#include "vshift/errors.h"

namespace vshift {

using nlohmann::json;

namespace {

double NumberAt(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key) || !j.at(key).is_number()) {
    throw InvalidInput(std::string("expected numeric field '") + key + "'");
  }
  return j.at(key).get<double>();
}

int IntAt(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key) || !j.at(key).is_number_integer()) {
    throw InvalidInput(std::string("expected integer field '") + key + "'");
  }
  return j.at(key).get<int>();
}

}  // namespace

json PoseToJson(const CameraPose& pose) {
  const auto& t = pose.translation();
  const auto& q = pose.rotation();
  return {{"translation", {t.x(), t.y(), t.z()}},
          {"rotation", {q.w(), q.x(), q.y(), q.z()}}};
}

CameraPose PoseFromJson(const json& j) {
  if (!j.is_object() || !j.contains("translation") || !j.contains("rotation")) {
    throw InvalidInput("pose needs 'translation' and 'rotation'");
  }
  const json& t = j.at("translation");
  const json& r = j.at("rotation");
  if (!t.is_array() || t.size() != 3 || !r.is_array() || r.size() != 4) {
    throw InvalidInput("pose translation must have 3 and rotation 4 entries");
  }
  for (const auto& v : t) {
    if (!v.is_number()) throw InvalidInput("pose translation must be numeric");
  }
  for (const auto& v : r) {
    if (!v.is_number()) throw InvalidInput("pose rotation must be numeric");
  }
  return CameraPose(
      Vec3(t[0].get<double>(), t[1].get<double>(), t[2].get<double>()),
      Eigen::Quaterniond(r[0].get<double>(), r[1].get<double>(),
                         r[2].get<double>(), r[3].get<double>()));
}

json IntrinsicsToJson(const CameraIntrinsics& k) {
  return {{"fx", k.fx},   {"fy", k.fy},         {"cx", k.cx},
          {"cy", k.cy},   {"width", k.width},   {"height", k.height}};
}

CameraIntrinsics IntrinsicsFromJson(const json& j) {
  CameraIntrinsics k;
  k.fx = NumberAt(j, "fx");
  k.fy = NumberAt(j, "fy");
  k.cx = NumberAt(j, "cx");
  k.cy = NumberAt(j, "cy");
  k.width = IntAt(j, "width");
  k.height = IntAt(j, "height");
  k.Validate();
  return k;
}

json ShiftToJson(const ShiftSpec& s) {
  return {{"lateral", s.lateral},
          {"longitudinal", s.longitudinal},
          {"vertical", s.vertical},
          {"yaw", s.yaw}};
}

ShiftSpec ShiftFromJson(const json& j) {
  ShiftSpec s;
  s.lateral = NumberAt(j, "lateral");
  s.longitudinal = NumberAt(j, "longitudinal");
  s.vertical = NumberAt(j, "vertical");
  s.yaw = NumberAt(j, "yaw");
  return s;
}

}  // namespace vshift
