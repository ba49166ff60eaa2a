#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "panolab/geometry/camera.hpp"

namespace panolab {

namespace detail {
inline void require_equirect_aspect(int width, int height) {
  if (height <= 0 || width != 2 * height) {
    throw InvalidInput("equirectangular size must satisfy width = 2 x height, got " + std::to_string(width) + "x" +
                       std::to_string(height));
  }
}
}  // namespace detail

/// Latitudes are clamped this far (in degrees) short of the poles before
/// the inverse mapping.
inline constexpr double kPoleMarginDeg = 1e-6;

/// Continuous equirect coordinates of a direction. Column coordinate u = k is
/// the left edge of column k; u in [0, width), v in [0, height].
inline Vec2 direction_to_equirect(const Vec3& direction, int width, int height) {
  detail::require_equirect_aspect(width, height);
  const double n = direction.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw InvalidInput("direction must be a finite nonzero vector");
  const Vec3 d = direction / n;
  double theta = std::atan2(d.x(), d.z());
  if (theta >= std::numbers::pi) theta -= 2.0 * std::numbers::pi;
  const double phi = std::asin(std::clamp(d.y(), -1.0, 1.0));
  double u = (theta / (2.0 * std::numbers::pi) + 0.5) * width;
  if (u >= width) u -= width;
  if (u < 0.0) u += width;
  const double v = (0.5 - phi / std::numbers::pi) * height;
  return {u, v};
}

/// Unit direction for continuous equirect coordinates; u wraps modulo width.
inline Vec3 equirect_to_direction(double u, double v, int width, int height) {
  detail::require_equirect_aspect(width, height);
  const double theta = (u / width - 0.5) * 2.0 * std::numbers::pi;
  const double limit = (90.0 - kPoleMarginDeg) * kDegToRad;
  const double phi = std::clamp((0.5 - v / height) * std::numbers::pi, -limit, limit);
  const double cphi = std::cos(phi);
  return {cphi * std::sin(theta), std::sin(phi), cphi * std::cos(theta)};
}

/// First intersection of origin + s * direction (s > 0) with the scene
/// sphere centered at the world origin. The origin must lie inside.
inline Vec3 ray_to_scene_point(const Vec3& origin, const Vec3& direction, const SceneModel& scene) {
  scene.validate();
  const double r2 = scene.radius * scene.radius;
  const double o2 = origin.squaredNorm();
  if (!(o2 < r2)) throw DomainError("camera must be strictly inside the scene sphere");
  const double dn = direction.norm();
  if (!(dn > 0.0) || !std::isfinite(dn)) throw InvalidInput("ray direction must be a finite nonzero vector");
  const Vec3 d = direction / dn;
  // |o + s d|^2 = r^2  ->  s^2 + 2 b s + (o2 - r2) = 0
  const double b = origin.dot(d);
  const double c = o2 - r2;
  const double disc = b * b - c;
  if (!(disc >= 0.0)) throw DomainError("ray misses the scene sphere");
  const double root = std::sqrt(disc);
  // c < 0, so the roots have opposite signs; take the positive one stably.
  const double s = b >= 0.0 ? -c / (b + root) : root - b;
  if (!(s > 0.0)) throw DomainError("ray has no forward intersection with the scene sphere");
  return origin + s * d;
}

}  // namespace panolab
