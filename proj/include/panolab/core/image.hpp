#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "panolab/core/error.hpp"

namespace panolab {

/// Row-major H x W x C raster, interleaved channels. Channel count is 1 or 3.
template <typename T>
class basic_image {
 public:
  using value_type = T;

  basic_image() = default;

  basic_image(int width, int height, int channels, T fill = T{0}) : width_(width), height_(height), channels_(channels) {
    if (width <= 0 || height <= 0) {
      throw InvalidInput("image dimensions must be positive, got " + std::to_string(width) + "x" + std::to_string(height));
    }
    if (channels != 1 && channels != 3) {
      throw InvalidInput("image must have 1 or 3 channels, got " + std::to_string(channels));
    }
    data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::size_t index(int x, int y, int c = 0) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  T& at(int x, int y, int c = 0) noexcept { return data_[index(x, y, c)]; }
  const T& at(int x, int y, int c = 0) const noexcept { return data_[index(x, y, c)]; }

  std::span<T> pixel(int x, int y) noexcept { return {data_.data() + index(x, y), static_cast<std::size_t>(channels_)}; }
  std::span<const T> pixel(int x, int y) const noexcept {
    return {data_.data() + index(x, y), static_cast<std::size_t>(channels_)};
  }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }

  bool same_shape(const basic_image& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
  }

  friend bool operator==(const basic_image&, const basic_image&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<T> data_;
};

using ImageBuffer = basic_image<float>;

template <typename To, typename From>
basic_image<To> image_cast(const basic_image<From>& src) {
  basic_image<To> out(src.width(), src.height(), src.channels());
  std::transform(src.data().begin(), src.data().end(), out.data().begin(), [](From v) { return static_cast<To>(v); });
  return out;
}

/// True when every sample is finite and inside [-eps, 1 + eps].
template <typename T>
bool samples_in_unit_range(const basic_image<T>& img, double eps = 1e-6) {
  return std::all_of(img.data().begin(), img.data().end(), [eps](T v) {
    const double d = static_cast<double>(v);
    return std::isfinite(d) && d >= -eps && d <= 1.0 + eps;
  });
}

/// 2:1 equirectangular panorama covering 360 x 180 degrees.
template <typename T>
class basic_equirect {
 public:
  basic_equirect() = default;

  explicit basic_equirect(basic_image<T> image) : image_(std::move(image)) {
    if (image_.width() != 2 * image_.height()) {
      throw InvalidInput("equirectangular frame must have width = 2 x height, got " + std::to_string(image_.width()) +
                         "x" + std::to_string(image_.height()));
    }
  }

  const basic_image<T>& image() const noexcept { return image_; }
  basic_image<T>& image() noexcept { return image_; }
  int width() const noexcept { return image_.width(); }
  int height() const noexcept { return image_.height(); }
  int channels() const noexcept { return image_.channels(); }

  friend bool operator==(const basic_equirect&, const basic_equirect&) = default;

 private:
  basic_image<T> image_;
};

using EquirectFrame = basic_equirect<float>;

}  // namespace panolab
