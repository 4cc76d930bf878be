#ifndef VSHIFT_JSON_IO_H_
#define VSHIFT_JSON_IO_H_

#include <json.hpp>

#include "vshift/geometry.h"
#include "vshift/renderer.h"

namespace vshift {

// JSON encodings shared by the manifest, scene spec, and sample metadata.
nlohmann::json PoseToJson(const CameraPose& pose);
// Throws InvalidInput on a malformed pose or non-unit quaternion.
CameraPose PoseFromJson(const nlohmann::json& j);

nlohmann::json IntrinsicsToJson(const CameraIntrinsics& k);
CameraIntrinsics IntrinsicsFromJson(const nlohmann::json& j);

nlohmann::json ShiftToJson(const ShiftSpec& shift);
ShiftSpec ShiftFromJson(const nlohmann::json& j);

}  // namespace vshift

#endif  // VSHIFT_JSON_IO_H_
