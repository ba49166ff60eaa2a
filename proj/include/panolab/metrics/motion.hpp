#pragma once

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "panolab/core/error.hpp"
#include "panolab/core/image.hpp"
#include "panolab/geometry/camera.hpp"
#include "panolab/geometry/warp.hpp"
#include "panolab/metrics/farneback.hpp"

namespace panolab {

/// Mean per-pixel flow magnitude.
inline double motion_magnitude(const FlowField& flow) {
  if (flow.width() == 0 || flow.height() == 0) throw InvalidInput("empty flow field");
  double sum = 0.0;
  for (int y = 0; y < flow.height(); ++y)
    for (int x = 0; x < flow.width(); ++x) sum += std::hypot(flow.dx(x, y), flow.dy(x, y));
  return sum / (static_cast<double>(flow.width()) * flow.height());
}

/// Mean flow magnitude over pixels where the mask is nonzero.
template <typename T>
double motion_magnitude(const FlowField& flow, const basic_image<T>& mask) {
  if (mask.width() != flow.width() || mask.height() != flow.height() || mask.channels() != 1) {
    throw InvalidInput("mask must be single-channel and match the flow dimensions");
  }
  double sum = 0.0;
  std::size_t count = 0;
  for (int y = 0; y < flow.height(); ++y)
    for (int x = 0; x < flow.width(); ++x) {
      if (mask.at(x, y) == T{0}) continue;
      sum += std::hypot(flow.dx(x, y), flow.dy(x, y));
      ++count;
    }
  if (count == 0) throw InvalidInput("mask selects no pixels");
  return sum / static_cast<double>(count);
}

/// Single-channel mask that is 1 everywhere except a border of the given width.
inline ImageBuffer interior_mask(int width, int height, int border) {
  ImageBuffer mask(width, height, 1);
  for (int y = border; y < height - border; ++y)
    for (int x = border; x < width - border; ++x) mask.at(x, y) = 1.0f;
  return mask;
}

struct CardinalMotionOptions {
  double fov_deg = 90.0;
  int crop_size = 256;
  int stride = 1;  // compare frames k and k + stride
  FarnebackParams flow;
  bool exclude_border = true;  // drop a window_size border from the statistics

  void validate() const {
    if (!(fov_deg > 0.0 && fov_deg < 180.0)) throw InvalidInput("fov must lie in (0, 180) degrees");
    if (crop_size < 8) throw InvalidInput("crop size must be at least 8");
    if (stride < 1) throw InvalidInput("stride must be at least 1");
    flow.validate();
    if (exclude_border && 2 * flow.window_size >= crop_size) throw InvalidInput("crop too small for border exclusion");
  }
};

/// Per-direction values in report order.
struct ViewMagnitudes {
  double front = 0.0;
  double back = 0.0;
  double left = 0.0;
  double right = 0.0;
};

struct MotionReport {
  ViewMagnitudes mean;
  std::vector<ViewMagnitudes> per_pair;
  CardinalMotionOptions options;
};

struct CardinalView {
  const char* name;
  double yaw_deg;
  double ViewMagnitudes::*slot;
};

inline constexpr std::array<CardinalView, 4> kCardinalViews = {{
    {"front", 0.0, &ViewMagnitudes::front},
    {"right", 90.0, &ViewMagnitudes::right},
    {"back", 180.0, &ViewMagnitudes::back},
    {"left", -90.0, &ViewMagnitudes::left},
}};

/// Mean flow magnitude between consecutive frames in four horizontal
/// perspective crops (front, right, back, left; pitch and roll zero).
template <typename T>
MotionReport cardinal_motion(std::span<const basic_equirect<T>> frames, const CardinalMotionOptions& options = {}) {
  options.validate();
  std::vector<std::size_t> picked;
  for (std::size_t k = 0; k < frames.size(); k += static_cast<std::size_t>(options.stride)) picked.push_back(k);
  if (frames.size() < 2 || picked.size() < 2) throw InvalidInput("motion needs at least two frames after striding");
  for (const auto& f : frames) {
    if (!f.image().same_shape(frames.front().image())) throw InvalidInput("frames differ in size");
  }

  const int n = options.crop_size;
  const CameraIntrinsics k = CameraIntrinsics::from_fov(options.fov_deg, n, n);
  const ImageBuffer mask = interior_mask(n, n, options.exclude_border ? options.flow.window_size : 0);

  MotionReport report;
  report.options = options;
  report.per_pair.resize(picked.size() - 1);
  for (const auto& view : kCardinalViews) {
    const CameraPose pose = CameraPose::from_euler({view.yaw_deg, 0.0, 0.0});
    basic_image<T> previous = warp_equirect_to_perspective(frames[picked[0]], k, pose, n, n);
    double sum = 0.0;
    for (std::size_t p = 1; p < picked.size(); ++p) {
      basic_image<T> current = warp_equirect_to_perspective(frames[picked[p]], k, pose, n, n);
      const double m = motion_magnitude(farneback_flow(previous, current, options.flow), mask);
      report.per_pair[p - 1].*view.slot = m;
      sum += m;
      previous = std::move(current);
    }
    report.mean.*view.slot = sum / static_cast<double>(picked.size() - 1);
  }
  return report;
}

}  // namespace panolab
