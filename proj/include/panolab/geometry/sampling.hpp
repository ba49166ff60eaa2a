#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <utility>

#include "panolab/core/image.hpp"

namespace panolab {

/// Up to three channel values produced by a sampler.
struct Sample {
  std::array<double, 3> value{};
  int channels = 0;

  double operator[](int c) const { return value[static_cast<std::size_t>(c)]; }
};

enum class Interpolation { bilinear, nearest };

namespace detail {
inline double wrap_coordinate(double x, int n) {
  double r = std::fmod(x, static_cast<double>(n));
  if (r < 0.0) r += n;
  if (r >= n) r -= n;
  return r;
}
}  // namespace detail

/// Bilinear interpolation in index space (pixel centers at integers). With
/// wrap_horizontal x is taken modulo the width; y is always clamped.
template <typename T>
Sample bilinear_sample(const basic_image<T>& img, double x, double y, bool wrap_horizontal) {
  const int w = img.width();
  const int h = img.height();
  Sample s;
  s.channels = img.channels();

  int x0, x1;
  double fx;
  if (wrap_horizontal) {
    const double xw = detail::wrap_coordinate(x, w);
    x0 = static_cast<int>(std::floor(xw));
    fx = xw - x0;
    if (x0 >= w) x0 -= w;
    x1 = x0 + 1 == w ? 0 : x0 + 1;
  } else {
    const double xc = std::clamp(x, 0.0, static_cast<double>(w - 1));
    x0 = static_cast<int>(std::floor(xc));
    fx = xc - x0;
    x1 = std::min(x0 + 1, w - 1);
  }
  const double yc = std::clamp(y, 0.0, static_cast<double>(h - 1));
  const int y0 = static_cast<int>(std::floor(yc));
  const double fy = yc - y0;
  const int y1 = std::min(y0 + 1, h - 1);

  const double w00 = (1.0 - fx) * (1.0 - fy);
  const double w10 = fx * (1.0 - fy);
  const double w01 = (1.0 - fx) * fy;
  const double w11 = fx * fy;
  for (int c = 0; c < s.channels; ++c) {
    s.value[c] = w00 * img.at(x0, y0, c) + w10 * img.at(x1, y0, c) + w01 * img.at(x0, y1, c) + w11 * img.at(x1, y1, c);
  }
  return s;
}

template <typename T>
Sample nearest_sample(const basic_image<T>& img, double x, double y, bool wrap_horizontal) {
  const int w = img.width();
  const int h = img.height();
  int xi = static_cast<int>(std::floor(x + 0.5));
  if (wrap_horizontal) {
    xi %= w;
    if (xi < 0) xi += w;
  } else {
    xi = std::clamp(xi, 0, w - 1);
  }
  const int yi = std::clamp(static_cast<int>(std::floor(y + 0.5)), 0, h - 1);
  Sample s;
  s.channels = img.channels();
  for (int c = 0; c < s.channels; ++c) s.value[c] = img.at(xi, yi, c);
  return s;
}

template <typename T>
Sample sample_image(const basic_image<T>& img, double x, double y, bool wrap_horizontal, Interpolation mode) {
  return mode == Interpolation::nearest ? nearest_sample(img, x, y, wrap_horizontal)
                                        : bilinear_sample(img, x, y, wrap_horizontal);
}

/// Anything a perspective warp can read from: a width x height pixel
/// footprint sampled at continuous index coordinates.
template <typename S>
concept PerspectiveSource = requires(const S& s, double x, double y) {
  { s.width() } -> std::convertible_to<int>;
  { s.height() } -> std::convertible_to<int>;
  { s.channels() } -> std::convertible_to<int>;
  { s.sample(x, y) } -> std::same_as<Sample>;
};

/// Raster image viewed as a perspective source.
template <typename T>
class RasterSource {
 public:
  explicit RasterSource(const basic_image<T>& image, Interpolation mode = Interpolation::bilinear)
      : image_(&image), mode_(mode) {}

  int width() const { return image_->width(); }
  int height() const { return image_->height(); }
  int channels() const { return image_->channels(); }
  Sample sample(double x, double y) const { return sample_image(*image_, x, y, false, mode_); }

 private:
  const basic_image<T>* image_;
  Interpolation mode_;
};

/// Continuous source defined by a callable (x, y) -> Sample; used for smooth
/// fixtures where raster interpolation kinks would pollute derivatives.
template <typename Fn>
class FunctionSource {
 public:
  FunctionSource(int width, int height, int channels, Fn fn)
      : width_(width), height_(height), channels_(channels), fn_(std::move(fn)) {}

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  Sample sample(double x, double y) const { return fn_(x, y); }

 private:
  int width_;
  int height_;
  int channels_;
  Fn fn_;
};

static_assert(PerspectiveSource<RasterSource<float>>);

}  // namespace panolab
