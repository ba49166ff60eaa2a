#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <utility>

#include "panolab/core/image.hpp"
#include "panolab/core/parallel.hpp"
#include "panolab/geometry/camera.hpp"
#include "panolab/geometry/sampling.hpp"
#include "panolab/geometry/sphere.hpp"

namespace panolab {

template <typename T>
struct WarpResult {
  basic_equirect<T> frame;
  basic_image<T> coverage;  // 1 where the source was sampled, 0 elsewhere

  double coverage_fraction() const {
    double filled = 0.0;
    for (T v : coverage.data()) filled += static_cast<double>(v);
    return filled / static_cast<double>(coverage.size());
  }

  // Share of the sphere that is filled. Each row is weighted by the solid
  // angle of its band, which shrinks toward the poles.
  double solid_angle_fraction() const {
    const int w = coverage.width();
    const int h = coverage.height();
    double filled = 0.0;
    for (int y = 0; y < h; ++y) {
      const double top = std::numbers::pi / 2 - std::numbers::pi * y / h;
      const double band = (std::sin(top) - std::sin(top - std::numbers::pi / h)) / 2.0;
      double row = 0.0;
      for (int x = 0; x < w; ++x) row += static_cast<double>(coverage.at(x, y));
      filled += band * row / w;
    }
    return filled;
  }
};

/// Backward warp of a perspective image onto an equirect panorama seen from
/// the world origin. Each output pixel center is lifted to the scene sphere,
/// moved into the camera frame and projected through K. Pixels the camera
/// does not see stay 0 and are cleared in the coverage mask.
template <typename T = float, PerspectiveSource S>
WarpResult<T> warp_perspective_to_equirect(const S& src, const CameraIntrinsics& intrinsics, const CameraPose& pose,
                                           const SceneModel& scene, int out_width, int out_height) {
  detail::require_equirect_aspect(out_width, out_height);
  intrinsics.validate();
  scene.validate();
  const Vec3 t = pose.translation();
  if (!(t.squaredNorm() < scene.radius * scene.radius)) {
    throw DomainError("camera must be strictly inside the scene sphere");
  }
  const bool at_center = t.isZero(0.0);
  const Mat3 world_to_camera = pose.rotation().transpose();
  const double x_lo = -0.5, x_hi = src.width() - 0.5;
  const double y_lo = -0.5, y_hi = src.height() - 0.5;

  basic_image<T> out(out_width, out_height, src.channels());
  basic_image<T> mask(out_width, out_height, 1);
  parallel_for(static_cast<std::size_t>(out_height), [&](std::size_t row) {
    const int j = static_cast<int>(row);
    for (int i = 0; i < out_width; ++i) {
      const Vec3 d = equirect_to_direction(i + 0.5, j + 0.5, out_width, out_height);
      // With the camera at the center the projection is independent of the
      // sphere radius, so skip the scaling to keep results bit-identical.
      const Vec3 rel = at_center ? d : Vec3(ray_to_scene_point(Vec3::Zero(), d, scene) - t);
      const Vec3 p = world_to_camera * rel;
      if (!(p.z() > 0.0)) continue;
      const Vec2 px = project_to_pixel(intrinsics, p);
      if (px.x() < x_lo || px.x() > x_hi || px.y() < y_lo || px.y() > y_hi) continue;
      const Sample s = src.sample(px.x(), px.y());
      for (int c = 0; c < s.channels; ++c) out.at(i, j, c) = static_cast<T>(s[c]);
      mask.at(i, j) = T{1};
    }
  });
  return {basic_equirect<T>(std::move(out)), std::move(mask)};
}

template <typename T = float, PerspectiveSource S>
WarpResult<T> warp_perspective_to_equirect(const S& src, const Projection8DoF& params, const SceneModel& scene,
                                           int out_width, int out_height) {
  return warp_perspective_to_equirect<T>(src, params.intrinsics(), params.pose(), scene, out_width, out_height);
}

template <typename T>
WarpResult<T> warp_perspective_to_equirect(const basic_image<T>& src, const CameraIntrinsics& intrinsics,
                                           const CameraPose& pose, const SceneModel& scene, int out_width,
                                           int out_height, Interpolation mode = Interpolation::bilinear) {
  return warp_perspective_to_equirect<T>(RasterSource<T>(src, mode), intrinsics, pose, scene, out_width, out_height);
}

template <typename T>
WarpResult<T> warp_perspective_to_equirect(const basic_image<T>& src, const Projection8DoF& params,
                                           const SceneModel& scene, int out_width, int out_height,
                                           Interpolation mode = Interpolation::bilinear) {
  return warp_perspective_to_equirect<T>(RasterSource<T>(src, mode), params, scene, out_width, out_height);
}

/// Perspective crop of a panorama. Rotation only; the pose translation is
/// ignored since an equirect frame carries no depth.
template <typename T>
basic_image<T> warp_equirect_to_perspective(const basic_equirect<T>& src, const CameraIntrinsics& intrinsics,
                                            const CameraPose& pose, int out_width, int out_height,
                                            Interpolation mode = Interpolation::bilinear) {
  intrinsics.validate();
  const auto& img = src.image();
  const Mat3& r = pose.rotation();
  basic_image<T> out(out_width, out_height, img.channels());
  parallel_for(static_cast<std::size_t>(out_height), [&](std::size_t row) {
    const int j = static_cast<int>(row);
    for (int i = 0; i < out_width; ++i) {
      const Vec3 d = r * pixel_to_ray(intrinsics, Vec2(i, j));
      const Vec2 uv = direction_to_equirect(d, src.width(), src.height());
      const Sample s = sample_image(img, uv.x() - 0.5, uv.y() - 0.5, true, mode);
      for (int c = 0; c < s.channels; ++c) out.at(i, j, c) = static_cast<T>(s[c]);
    }
  });
  return out;
}

/// Rotates a panorama about the vertical axis: content moves right by
/// yaw / 360 * width columns. Integral shifts are exact index rolls.
template <typename T>
basic_equirect<T> yaw_shift(const basic_equirect<T>& src, double yaw_degrees) {
  const auto& img = src.image();
  const int w = img.width();
  const int h = img.height();
  const int ch = img.channels();
  const double shift = yaw_degrees / 360.0 * w;
  const double rounded = std::round(shift);
  basic_image<T> out(w, h, ch);
  if (std::abs(shift - rounded) < 1e-9) {
    long s = static_cast<long>(rounded) % w;
    if (s < 0) s += w;
    for (int j = 0; j < h; ++j) {
      for (int i = 0; i < w; ++i) {
        const int from = static_cast<int>((i - s + w) % w);
        for (int c = 0; c < ch; ++c) out.at(i, j, c) = img.at(from, j, c);
      }
    }
  } else {
    for (int j = 0; j < h; ++j) {
      for (int i = 0; i < w; ++i) {
        const Sample s = bilinear_sample(img, i - shift, j, true);
        for (int c = 0; c < ch; ++c) out.at(i, j, c) = static_cast<T>(s[c]);
      }
    }
  }
  return basic_equirect<T>(std::move(out));
}

}  // namespace panolab
