#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>

#include "panolab/core/error.hpp"
#include "panolab/core/image.hpp"

namespace panolab {

struct FarnebackParams {
  double pyramid_scale = 0.5;
  int levels = 3;  // pyramid layers including full resolution
  int window_size = 15;
  int iterations = 3;
  int poly_n = 5;  // width of the polynomial-expansion neighborhood
  double poly_sigma = 1.1;

  void validate() const {
    if (!(pyramid_scale > 0.0 && pyramid_scale < 1.0)) throw InvalidInput("pyramid_scale must lie in (0, 1)");
    if (levels < 1) throw InvalidInput("levels must be at least 1");
    if (window_size < 3 || window_size % 2 == 0) throw InvalidInput("window_size must be odd and >= 3");
    if (iterations < 1) throw InvalidInput("iterations must be at least 1");
    if (poly_n < 3 || poly_n % 2 == 0) throw InvalidInput("poly_n must be odd and >= 3");
    if (!(poly_sigma > 0.0)) throw InvalidInput("poly_sigma must be positive");
  }
};

/// Dense per-pixel displacement (dx, dy) in pixels, row-major.
class FlowField {
 public:
  FlowField() = default;
  FlowField(int width, int height) : width_(width), height_(height), data_(static_cast<std::size_t>(width) * height * 2, 0.0) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  double dx(int x, int y) const noexcept { return data_[offset(x, y)]; }
  double dy(int x, int y) const noexcept { return data_[offset(x, y) + 1]; }
  void set(int x, int y, double dx, double dy) noexcept {
    data_[offset(x, y)] = dx;
    data_[offset(x, y) + 1] = dy;
  }

  /// Interleaved dx, dy samples.
  const std::vector<double>& data() const noexcept { return data_; }
  std::vector<double>& data() noexcept { return data_; }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
  }

 private:
  std::size_t offset(int x, int y) const noexcept { return (static_cast<std::size_t>(y) * width_ + x) * 2; }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

namespace farneback_detail {

struct Plane {
  int w = 0;
  int h = 0;
  std::vector<double> v;

  Plane() = default;
  Plane(int width, int height) : w(width), h(height), v(static_cast<std::size_t>(width) * height, 0.0) {}
  double& operator()(int x, int y) { return v[static_cast<std::size_t>(y) * w + x]; }
  double operator()(int x, int y) const { return v[static_cast<std::size_t>(y) * w + x]; }
};

/// Rec. 601 luminance on the 0..255 scale, the range the regularizer below
/// is tuned for.
template <typename T>
Plane luminance(const basic_image<T>& img) {
  Plane p(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      double l = img.channels() == 3 ? 0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) + 0.114 * img.at(x, y, 2)
                                     : static_cast<double>(img.at(x, y, 0));
      p(x, y) = 255.0 * l;
    }
  }
  return p;
}

inline std::vector<double> gaussian_kernel(int radius, double sigma, bool normalize) {
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += k[i + radius];
  }
  if (normalize)
    for (double& v : k) v /= sum;
  return k;
}

/// Separable Gaussian blur with replicated borders.
inline Plane gaussian_blur(const Plane& src, int ksize, double sigma) {
  const int r = ksize / 2;
  const auto k = gaussian_kernel(r, sigma, true);
  Plane tmp(src.w, src.h), out(src.w, src.h);
  for (int y = 0; y < src.h; ++y)
    for (int x = 0; x < src.w; ++x) {
      double s = 0.0;
      for (int i = -r; i <= r; ++i) s += k[i + r] * src(std::clamp(x + i, 0, src.w - 1), y);
      tmp(x, y) = s;
    }
  for (int y = 0; y < src.h; ++y)
    for (int x = 0; x < src.w; ++x) {
      double s = 0.0;
      for (int i = -r; i <= r; ++i) s += k[i + r] * tmp(x, std::clamp(y + i, 0, src.h - 1));
      out(x, y) = s;
    }
  return out;
}

/// Pixel-center aligned bilinear resize.
inline Plane resize_linear(const Plane& src, int w, int h) {
  Plane out(w, h);
  const double sx = static_cast<double>(src.w) / w;
  const double sy = static_cast<double>(src.h) / h;
  for (int y = 0; y < h; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(src.h - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, src.h - 1);
    const double ay = fy - y0;
    for (int x = 0; x < w; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(src.w - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, src.w - 1);
      const double ax = fx - x0;
      out(x, y) = (1 - ay) * ((1 - ax) * src(x0, y0) + ax * src(x1, y0)) + ay * ((1 - ax) * src(x0, y1) + ax * src(x1, y1));
    }
  }
  return out;
}

/// Local quadratic model f(p + (x, y)) ~ c + bx x + by y + axx x^2 + ayy y^2 + axy x y
/// per pixel, fitted by Gaussian-weighted least squares.
struct Polynomial {
  double bx, by, axx, ayy, axy;
};

inline std::vector<Polynomial> polynomial_expansion(const Plane& f, int poly_n, double sigma) {
  const int n = poly_n / 2;
  const auto g = gaussian_kernel(n, sigma, false);

  Eigen::Matrix<double, 6, 6> gram = Eigen::Matrix<double, 6, 6>::Zero();
  for (int y = -n; y <= n; ++y)
    for (int x = -n; x <= n; ++x) {
      Eigen::Matrix<double, 6, 1> b;
      b << 1.0, x, y, double(x) * x, double(y) * y, double(x) * y;
      gram += g[x + n] * g[y + n] * b * b.transpose();
    }
  const Eigen::Matrix<double, 6, 6> inv = gram.inverse();

  // Horizontal moments sum_k g(k) k^m f(x + k, y) for m = 0, 1, 2.
  const std::size_t count = static_cast<std::size_t>(f.w) * f.h;
  std::vector<std::array<double, 3>> row(count);
  for (int y = 0; y < f.h; ++y)
    for (int x = 0; x < f.w; ++x) {
      std::array<double, 3> m{};
      for (int k = -n; k <= n; ++k) {
        const double v = g[k + n] * f(std::clamp(x + k, 0, f.w - 1), y);
        m[0] += v;
        m[1] += k * v;
        m[2] += double(k) * k * v;
      }
      row[static_cast<std::size_t>(y) * f.w + x] = m;
    }

  std::vector<Polynomial> out(count);
  for (int y = 0; y < f.h; ++y)
    for (int x = 0; x < f.w; ++x) {
      Eigen::Matrix<double, 6, 1> m = Eigen::Matrix<double, 6, 1>::Zero();
      for (int k = -n; k <= n; ++k) {
        const auto& r = row[static_cast<std::size_t>(std::clamp(y + k, 0, f.h - 1)) * f.w + x];
        const double gk = g[k + n];
        m(0) += gk * r[0];
        m(1) += gk * r[1];
        m(2) += gk * k * r[0];
        m(3) += gk * r[2];
        m(4) += gk * double(k) * k * r[0];
        m(5) += gk * k * r[1];
      }
      const Eigen::Matrix<double, 6, 1> c = inv * m;
      out[static_cast<std::size_t>(y) * f.w + x] = {c(1), c(2), c(3), c(4), c(5)};
    }
  return out;
}

/// Per-pixel normal equations: G = A^T A (3 entries) and h = A^T db.
using Moments = std::array<double, 5>;

inline void update_matrices(const std::vector<Polynomial>& r0, const std::vector<Polynomial>& r1, const FlowField& flow,
                            std::vector<Moments>& out) {
  static constexpr int kBorder = 5;
  static constexpr double kBorderWeight[kBorder] = {0.14, 0.14, 0.4472, 0.8, 1.0};
  const int w = flow.width();
  const int h = flow.height();
  out.resize(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::size_t idx = static_cast<std::size_t>(y) * w + x;
      const Polynomial& a = r0[idx];
      const double dx = flow.dx(x, y);
      const double dy = flow.dy(x, y);
      const double fx = x + dx;
      const double fy = y + dy;
      const int x1 = static_cast<int>(std::floor(fx));
      const int y1 = static_cast<int>(std::floor(fy));

      double b2x = 0.0, b2y = 0.0, axx, ayy, axy;
      if (x1 >= 0 && x1 < w - 1 && y1 >= 0 && y1 < h - 1) {
        const double ax = fx - x1;
        const double ay = fy - y1;
        const double w00 = (1 - ax) * (1 - ay), w10 = ax * (1 - ay), w01 = (1 - ax) * ay, w11 = ax * ay;
        const std::size_t i00 = static_cast<std::size_t>(y1) * w + x1;
        const Polynomial& p00 = r1[i00];
        const Polynomial& p10 = r1[i00 + 1];
        const Polynomial& p01 = r1[i00 + w];
        const Polynomial& p11 = r1[i00 + w + 1];
        auto lerp = [&](double Polynomial::*m) { return w00 * p00.*m + w10 * p10.*m + w01 * p01.*m + w11 * p11.*m; };
        b2x = lerp(&Polynomial::bx);
        b2y = lerp(&Polynomial::by);
        axx = 0.5 * (a.axx + lerp(&Polynomial::axx));
        ayy = 0.5 * (a.ayy + lerp(&Polynomial::ayy));
        axy = 0.25 * (a.axy + lerp(&Polynomial::axy));
      } else {
        axx = a.axx;
        ayy = a.ayy;
        axy = 0.5 * a.axy;
      }
      double hx = 0.5 * (a.bx - b2x) + axx * dx + axy * dy;
      double hy = 0.5 * (a.by - b2y) + axy * dx + ayy * dy;

      if (x < kBorder || x >= w - kBorder || y < kBorder || y >= h - kBorder) {
        double s = 1.0;
        if (x < kBorder) s *= kBorderWeight[x];
        if (x >= w - kBorder) s *= kBorderWeight[w - x - 1];
        if (y < kBorder) s *= kBorderWeight[y];
        if (y >= h - kBorder) s *= kBorderWeight[h - y - 1];
        hx *= s;
        hy *= s;
        axx *= s;
        ayy *= s;
        axy *= s;
      }
      out[idx] = {axx * axx + axy * axy, axy * (axx + ayy), ayy * ayy + axy * axy, axx * hx + axy * hy,
                  axy * hx + ayy * hy};
    }
}

/// Normalized box filter with replicated borders, in place.
inline void box_blur(std::vector<Moments>& m, int w, int h, int size) {
  const int r = size / 2;
  const double norm = 1.0 / (static_cast<double>(size) * size);
  std::vector<Moments> tmp(m.size());
  for (int y = 0; y < h; ++y) {
    Moments acc{};
    for (int k = -r; k <= r; ++k) {
      const auto& v = m[static_cast<std::size_t>(y) * w + std::clamp(k, 0, w - 1)];
      for (int c = 0; c < 5; ++c) acc[c] += v[c];
    }
    for (int x = 0; x < w; ++x) {
      tmp[static_cast<std::size_t>(y) * w + x] = acc;
      const auto& add = m[static_cast<std::size_t>(y) * w + std::min(x + r + 1, w - 1)];
      const auto& sub = m[static_cast<std::size_t>(y) * w + std::max(x - r, 0)];
      for (int c = 0; c < 5; ++c) acc[c] += add[c] - sub[c];
    }
  }
  for (int x = 0; x < w; ++x) {
    Moments acc{};
    for (int k = -r; k <= r; ++k) {
      const auto& v = tmp[static_cast<std::size_t>(std::clamp(k, 0, h - 1)) * w + x];
      for (int c = 0; c < 5; ++c) acc[c] += v[c];
    }
    for (int y = 0; y < h; ++y) {
      auto& dst = m[static_cast<std::size_t>(y) * w + x];
      for (int c = 0; c < 5; ++c) dst[c] = acc[c] * norm;
      const auto& add = tmp[static_cast<std::size_t>(std::min(y + r + 1, h - 1)) * w + x];
      const auto& sub = tmp[static_cast<std::size_t>(std::max(y - r, 0)) * w + x];
      for (int c = 0; c < 5; ++c) acc[c] += add[c] - sub[c];
    }
  }
}

inline void solve_flow(const std::vector<Moments>& m, FlowField& flow) {
  const int w = flow.width();
  for (int y = 0; y < flow.height(); ++y)
    for (int x = 0; x < w; ++x) {
      const auto& g = m[static_cast<std::size_t>(y) * w + x];
      const double inv_det = 1.0 / (g[0] * g[2] - g[1] * g[1] + 1e-3);
      flow.set(x, y, (g[2] * g[3] - g[1] * g[4]) * inv_det, (g[0] * g[4] - g[1] * g[3]) * inv_det);
    }
}

inline FlowField resize_flow(const FlowField& src, int w, int h) {
  Plane fx(src.width(), src.height()), fy(src.width(), src.height());
  for (int y = 0; y < src.height(); ++y)
    for (int x = 0; x < src.width(); ++x) {
      fx(x, y) = src.dx(x, y);
      fy(x, y) = src.dy(x, y);
    }
  const Plane rx = resize_linear(fx, w, h);
  const Plane ry = resize_linear(fy, w, h);
  const double kx = static_cast<double>(w) / src.width();
  const double ky = static_cast<double>(h) / src.height();
  FlowField out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out.set(x, y, rx(x, y) * kx, ry(x, y) * ky);
  return out;
}

}  // namespace farneback_detail

/// Two-frame dense optical flow by polynomial expansion, refined coarse to
/// fine. flow(x) is the displacement carrying prev(x) onto next(x + flow(x)).
template <typename T>
FlowField farneback_flow(const basic_image<T>& prev, const basic_image<T>& next, const FarnebackParams& params = {}) {
  namespace fd = farneback_detail;
  params.validate();
  if (prev.width() != next.width() || prev.height() != next.height()) {
    throw InvalidInput("flow frames differ in size");
  }
  const fd::Plane i0 = fd::luminance(prev);
  const fd::Plane i1 = fd::luminance(next);

  static constexpr int kMinSize = 32;
  int levels = 0;
  double scale = 1.0;
  for (; levels < params.levels; ++levels) {
    if (levels > 0 && (std::lround(i0.w * scale) < kMinSize || std::lround(i0.h * scale) < kMinSize)) break;
    scale *= params.pyramid_scale;
  }

  FlowField flow;
  std::vector<fd::Moments> m;
  for (int k = levels - 1; k >= 0; --k) {
    const double s = std::pow(params.pyramid_scale, k);
    const int w = std::max(1, static_cast<int>(std::lround(i0.w * s)));
    const int h = std::max(1, static_cast<int>(std::lround(i0.h * s)));

    double sigma = (1.0 / s - 1.0) * 0.5;
    const int ksize = std::max(3, static_cast<int>(std::lround(sigma * 5)) | 1);
    if (sigma <= 0.0) sigma = 0.3 * ((ksize - 1) * 0.5 - 1) + 0.8;
    fd::Plane a = fd::gaussian_blur(i0, ksize, sigma);
    fd::Plane b = fd::gaussian_blur(i1, ksize, sigma);
    if (w != i0.w || h != i0.h) {
      a = fd::resize_linear(a, w, h);
      b = fd::resize_linear(b, w, h);
    }

    flow = flow.width() == 0 ? FlowField(w, h) : fd::resize_flow(flow, w, h);

    const auto r0 = fd::polynomial_expansion(a, params.poly_n, params.poly_sigma);
    const auto r1 = fd::polynomial_expansion(b, params.poly_n, params.poly_sigma);
    fd::update_matrices(r0, r1, flow, m);
    for (int it = 0; it < params.iterations; ++it) {
      fd::box_blur(m, w, h, params.window_size);
      fd::solve_flow(m, flow);
      if (it + 1 < params.iterations) fd::update_matrices(r0, r1, flow, m);
    }
  }
  return flow;
}

}  // namespace panolab
