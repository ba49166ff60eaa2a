#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include <Eigen/Core>
#include <Eigen/LU>

#include "panolab/core/error.hpp"
#include "panolab/core/traits.hpp"

// Axis convention used throughout: +x right, +y up, +z forward. Yaw turns
// about +y, pitch about +x, roll about +z, composed as R = Ry * Rx * Rz.
// Poses are camera-to-world: world = R * camera + t.

namespace panolab {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kDegToRad = std::numbers::pi / 180.0;
inline constexpr double kRadToDeg = 180.0 / std::numbers::pi;

/// (sin, cos) of an angle in degrees, exact at multiples of 90.
inline std::pair<double, double> sin_cos_deg(double degrees) {
  double r = std::fmod(degrees, 360.0);
  if (r < 0) r += 360.0;
  if (r == 0.0) return {0.0, 1.0};
  if (r == 90.0) return {1.0, 0.0};
  if (r == 180.0) return {0.0, -1.0};
  if (r == 270.0) return {-1.0, 0.0};
  const double rad = r * kDegToRad;
  return {std::sin(rad), std::cos(rad)};
}

/// Pinhole intrinsics. K = [[fx, skew, cx], [0, fy, cy], [0, 0, 1]].
struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  double skew = 0.0;

  void validate() const {
    for (double v : {fx, fy, cx, cy, skew}) {
      if (!std::isfinite(v)) throw InvalidInput("camera intrinsics must be finite");
    }
    if (fx <= 0.0 || fy <= 0.0) throw InvalidInput("focal lengths must be positive");
  }

  Mat3 matrix() const {
    Mat3 k;
    k << fx, skew, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
    return k;
  }

  /// Square camera with the given horizontal field of view whose principal
  /// point sits at the image center.
  static CameraIntrinsics from_fov(double fov_degrees, int width, int height) {
    const double f = 0.5 * width / std::tan(0.5 * fov_degrees * kDegToRad);
    return {f, f, 0.5 * width, 0.5 * height, 0.0};
  }
};

struct EulerAngles {
  double yaw_deg = 0.0;
  double pitch_deg = 0.0;
  double roll_deg = 0.0;
};

inline Mat3 rotation_yaw(double deg) {
  const auto [s, c] = sin_cos_deg(deg);
  Mat3 r;
  r << c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c;
  return r;
}

inline Mat3 rotation_pitch(double deg) {
  const auto [s, c] = sin_cos_deg(deg);
  Mat3 r;
  r << 1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c;
  return r;
}

inline Mat3 rotation_roll(double deg) {
  const auto [s, c] = sin_cos_deg(deg);
  Mat3 r;
  r << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
  return r;
}

inline Mat3 rotation_from_euler(const EulerAngles& e) {
  return rotation_yaw(e.yaw_deg) * rotation_pitch(e.pitch_deg) * rotation_roll(e.roll_deg);
}

/// Inverse of rotation_from_euler. Yaw and roll land in (-180, 180], pitch in
/// [-90, 90]; at gimbal lock (|pitch| = 90) roll is reported as 0.
inline EulerAngles euler_from_rotation(const Mat3& r) {
  const double sp = std::clamp(-r(1, 2), -1.0, 1.0);
  EulerAngles e;
  e.pitch_deg = std::asin(sp) * kRadToDeg;
  const double cp = std::hypot(r(1, 0), r(1, 1));
  if (cp > 1e-12) {
    e.yaw_deg = std::atan2(r(0, 2), r(2, 2)) * kRadToDeg;
    e.roll_deg = std::atan2(r(1, 0), r(1, 1)) * kRadToDeg;
  } else {
    e.yaw_deg = std::atan2(-r(2, 0), r(0, 0)) * kRadToDeg;
    e.roll_deg = 0.0;
  }
  if (e.yaw_deg <= -180.0) e.yaw_deg += 360.0;
  if (e.roll_deg <= -180.0) e.roll_deg += 360.0;
  return e;
}

inline bool is_rotation(const Mat3& r, double tol = 1e-9) {
  if (!r.allFinite()) return false;
  return (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol && std::abs(r.determinant() - 1.0) <= tol;
}

/// World translation for a camera displaced by the named shifts: horizontal
/// along +x, forward along +z, vertical along +y.
inline Vec3 translation_from_shifts(double horizontal, double forward, double vertical) {
  return {horizontal, vertical, forward};
}

/// Camera-to-world rigid transform.
class CameraPose {
 public:
  CameraPose() = default;

  CameraPose(const Mat3& rotation, const Vec3& translation) : rotation_(rotation), translation_(translation) {
    if (!is_rotation(rotation_)) throw InvalidInput("pose rotation is not in SO(3)");
    if (!translation_.allFinite()) throw InvalidInput("pose translation must be finite");
  }

  static CameraPose from_euler(const EulerAngles& angles, const Vec3& translation = Vec3::Zero()) {
    for (double v : {angles.yaw_deg, angles.pitch_deg, angles.roll_deg}) {
      if (!std::isfinite(v)) throw InvalidInput("euler angles must be finite");
    }
    return CameraPose(rotation_from_euler(angles), translation);
  }

  static CameraPose identity() { return {}; }

  const Mat3& rotation() const noexcept { return rotation_; }
  const Vec3& translation() const noexcept { return translation_; }
  EulerAngles euler() const { return euler_from_rotation(rotation_); }

  /// Maps a world point into this camera's frame.
  Vec3 to_camera(const Vec3& world) const { return rotation_.transpose() * (world - translation_); }

  CameraPose compose(const CameraPose& inner) const {
    return CameraPose(rotation_ * inner.rotation_, rotation_ * inner.translation_ + translation_);
  }

 private:
  Mat3 rotation_ = Mat3::Identity();
  Vec3 translation_ = Vec3::Zero();
};

/// Six pose scalars in the order they are logged: shifts in meters, angles in degrees.
struct PoseParameters {
  double tx = 0.0;  // horizontal shift
  double ty = 0.0;  // forward shift
  double tz = 0.0;  // vertical shift
  double pitch_deg = 0.0;
  double yaw_deg = 0.0;
  double roll_deg = 0.0;

  CameraPose pose() const {
    return CameraPose::from_euler({yaw_deg, pitch_deg, roll_deg}, translation_from_shifts(tx, ty, tz));
  }
};

/// Full projection model: 5 intrinsic + 6 pose scalars.
struct CameraModel {
  CameraIntrinsics intrinsics;
  PoseParameters pose;

  static constexpr std::size_t dof = aggregate_arity_v<CameraIntrinsics> + aggregate_arity_v<PoseParameters>;
};

/// Reduced projection family: intrinsics, horizontal and forward shift, yaw.
struct Projection8DoF {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  double skew = 0.0;
  double tx = 0.0;
  double ty = 0.0;
  double yaw_deg = 0.0;

  static constexpr std::array<const char*, 8> names = {"fx", "fy", "cx", "cy", "skew", "tx", "ty", "yaw_deg"};

  CameraIntrinsics intrinsics() const { return {fx, fy, cx, cy, skew}; }
  PoseParameters pose_parameters() const { return {tx, ty, 0.0, 0.0, yaw_deg, 0.0}; }
  CameraPose pose() const { return pose_parameters().pose(); }
  CameraModel model() const { return {intrinsics(), pose_parameters()}; }

  std::array<double, 8> to_array() const { return {fx, fy, cx, cy, skew, tx, ty, yaw_deg}; }
  static Projection8DoF from_array(const std::array<double, 8>& v) {
    return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]};
  }
};

static_assert(aggregate_arity_v<CameraIntrinsics> == 5);
static_assert(aggregate_arity_v<PoseParameters> == 6);
static_assert(CameraModel::dof == 11);
static_assert(aggregate_arity_v<Projection8DoF> == 8);

struct SceneModel {
  double radius = 1.0;

  void validate() const {
    if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidInput("scene radius must be positive and finite");
  }
};

/// Unit viewing ray through a pixel: normalize(K^-1 [x, y, 1]).
inline Vec3 pixel_to_ray(const CameraIntrinsics& k, const Vec2& pixel) {
  if (!pixel.allFinite()) throw InvalidInput("pixel coordinates must be finite");
  const double yc = (pixel.y() - k.cy) / k.fy;
  const double xc = (pixel.x() - k.cx - k.skew * yc) / k.fx;
  return Vec3(xc, yc, 1.0).normalized();
}

/// Pinhole projection of a camera-frame point with z > 0.
inline Vec2 project_to_pixel(const CameraIntrinsics& k, const Vec3& p) {
  const double xn = p.x() / p.z();
  const double yn = p.y() / p.z();
  return {k.fx * xn + k.skew * yn + k.cx, k.fy * yn + k.cy};
}

inline Vec3 apply_pose(const CameraPose& pose, const Vec3& camera_point) {
  return pose.rotation() * camera_point + pose.translation();
}

}  // namespace panolab
