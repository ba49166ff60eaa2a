#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>

#include "panolab/core/error.hpp"
#include "panolab/geometry/camera.hpp"
#include "panolab/io/atomic_write.hpp"
#include "panolab/io/json_report.hpp"

namespace panolab::io {

/// Everything the warp needs besides the image.
struct WarpParams {
  CameraIntrinsics intrinsics;
  PoseParameters pose;
  SceneModel scene;
};

inline constexpr std::array<std::string_view, 12> kWarpParamKeys = {
    "fx", "fy", "cx", "cy", "skew", "tx", "ty", "tz", "yaw_deg", "pitch_deg", "roll_deg", "scene_radius"};

/// fx, fy, cx, cy are required; the rest default to 0 (scene_radius to 1).
/// Unknown keys are rejected.
inline WarpParams warp_params_from_json(const Json& j, const std::string& name = "params") {
  if (!j.is_object()) throw InvalidInput(name + ": expected a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (auto k : kWarpParamKeys) known = known || it.key() == k;
    if (!known) throw InvalidInput(name + ": unknown key '" + it.key() + "'");
    if (!it.value().is_number()) throw InvalidInput(name + ": '" + it.key() + "' must be a number");
  }
  auto get = [&](const char* key, double fallback, bool required) {
    if (!j.contains(key)) {
      if (required) throw InvalidInput(name + ": missing required key '" + std::string(key) + "'");
      return fallback;
    }
    return j.at(key).get<double>();
  };
  WarpParams p;
  p.intrinsics = {get("fx", 0, true), get("fy", 0, true), get("cx", 0, true), get("cy", 0, true), get("skew", 0, false)};
  p.pose = {get("tx", 0, false),      get("ty", 0, false),      get("tz", 0, false),
            get("pitch_deg", 0, false), get("yaw_deg", 0, false), get("roll_deg", 0, false)};
  p.scene.radius = get("scene_radius", 1.0, false);
  p.intrinsics.validate();
  p.scene.validate();
  return p;
}

inline Json warp_params_to_json(const WarpParams& p) {
  Json j;
  j["fx"] = p.intrinsics.fx;
  j["fy"] = p.intrinsics.fy;
  j["cx"] = p.intrinsics.cx;
  j["cy"] = p.intrinsics.cy;
  j["skew"] = p.intrinsics.skew;
  j["tx"] = p.pose.tx;
  j["ty"] = p.pose.ty;
  j["tz"] = p.pose.tz;
  j["yaw_deg"] = p.pose.yaw_deg;
  j["pitch_deg"] = p.pose.pitch_deg;
  j["roll_deg"] = p.pose.roll_deg;
  j["scene_radius"] = p.scene.radius;
  return j;
}

inline WarpParams load_warp_params(const fs::path& path) {
  return warp_params_from_json(parse_json(read_text(path), path.string()), path.string());
}

}  // namespace panolab::io
