#pragma once

#include <algorithm>
#include <csetjmp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <png.h>

#include "panolab/core/error.hpp"
#include "panolab/core/image.hpp"
#include "panolab/core/log.hpp"
#include "panolab/io/atomic_write.hpp"

namespace panolab::io {

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline void png_error_to_longjmp(png_structp png, png_const_charp msg) {
  auto* text = static_cast<std::string*>(png_get_error_ptr(png));
  if (text) *text = msg;
  png_longjmp(png, 1);
}

inline void png_silent_warning(png_structp, png_const_charp) {}

struct RawPng {
  int width = 0;
  int height = 0;
  int bits = 0;
  int color = 0;
  bool unsupported = false;
  std::size_t rowbytes = 0;
  std::vector<unsigned char> bytes;
  std::vector<png_bytep> rows;
};

/// Decodes into `out`; false (with `message` set) when libpng reports an error.
inline bool read_png_rows(std::FILE* file, RawPng& out, std::string& message) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &message, png_error_to_longjmp, png_silent_warning);
  if (!png) {
    message = "cannot initialise PNG reader";
    return false;
  }
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    message = "cannot initialise PNG reader";
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_init_io(png, file);
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.bits = png_get_bit_depth(png, info);
  out.color = png_get_color_type(png, info);
  if (out.color == PNG_COLOR_TYPE_PALETTE || (out.bits != 8 && out.bits != 16)) {
    out.unsupported = true;
  } else {
    if (out.bits == 16) png_set_swap(png);  // host little-endian 16-bit samples
    png_read_update_info(png, info);
    out.rowbytes = png_get_rowbytes(png, info);
    out.bytes.resize(out.rowbytes * static_cast<std::size_t>(out.height));
    out.rows.resize(static_cast<std::size_t>(out.height));
    for (int y = 0; y < out.height; ++y) out.rows[static_cast<std::size_t>(y)] = out.bytes.data() + out.rowbytes * y;
    png_read_image(png, out.rows.data());
    png_read_end(png, nullptr);
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

}  // namespace detail

/// 8- or 16-bit gray/RGB PNG as floats in [0, 1]. Alpha is dropped with a
/// warning; palette images are rejected.
inline ImageBuffer load_png(const fs::path& path) {
  detail::FilePtr file(std::fopen(path.string().c_str(), "rb"));
  if (!file) throw IoError("cannot open " + path.string());
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw FormatError("not a PNG file: " + path.string());
  }

  detail::RawPng raw;
  std::string message;
  if (!detail::read_png_rows(file.get(), raw, message)) {
    throw IoError("corrupt PNG " + path.string() + ": " + message);
  }
  const int width = raw.width, height = raw.height, bits = raw.bits, color = raw.color;
  const std::size_t rowbytes = raw.rowbytes;
  if (raw.unsupported) {
    throw FormatError("unsupported PNG format in " + path.string() + " (palette or bit depth " + std::to_string(bits) +
                      "); expected 8/16-bit gray or RGB");
  }

  int in_channels = 0;
  int out_channels = 0;
  switch (color) {
    case PNG_COLOR_TYPE_GRAY: in_channels = 1; out_channels = 1; break;
    case PNG_COLOR_TYPE_GRAY_ALPHA: in_channels = 2; out_channels = 1; break;
    case PNG_COLOR_TYPE_RGB: in_channels = 3; out_channels = 3; break;
    case PNG_COLOR_TYPE_RGB_ALPHA: in_channels = 4; out_channels = 3; break;
    default: throw FormatError("unsupported PNG color type in " + path.string());
  }
  if (in_channels != out_channels) warn("dropping alpha channel of " + path.string());

  const double scale = 1.0 / ((1 << bits) - 1);
  const int bytes = bits / 8;
  ImageBuffer img(width, height, out_channels);
  for (int y = 0; y < height; ++y) {
    const unsigned char* row = raw.bytes.data() + rowbytes * y;
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < out_channels; ++c) {
        const unsigned char* p = row + (static_cast<std::size_t>(x) * in_channels + c) * bytes;
        const unsigned v = bytes == 1 ? p[0] : static_cast<unsigned>(p[0] | (p[1] << 8));
        img.at(x, y, c) = static_cast<float>(v * scale);
      }
    }
  }
  return img;
}

/// Byte for a [0, 1] sample: round half away from zero on the 255 scale.
inline unsigned char quantize_8bit(double v) {
  const double c = std::clamp(v, 0.0, 1.0);
  return static_cast<unsigned char>(std::round(c * 255.0));
}

/// 8-bit PNG. Samples outside [0, 1] are clamped with a warning.
template <typename T>
void save_png(const basic_image<T>& img, const fs::path& path) {
  std::size_t clamped = 0;
  std::vector<unsigned char> bytes(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) {
    const double v = static_cast<double>(img.data()[i]);
    if (!(v >= 0.0 && v <= 1.0)) ++clamped;
    bytes[i] = quantize_8bit(std::isnan(v) ? 0.0 : v);
  }
  if (clamped > 0) warn("clamped " + std::to_string(clamped) + " samples outside [0, 1] while writing " + path.string());

  fs::path tmp = path;
  tmp += ".tmp";
  {
    detail::FilePtr file(std::fopen(tmp.string().c_str(), "wb"));
    if (!file) throw IoError("cannot write " + path.string());
    std::string message;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message, detail::png_error_to_longjmp,
                                              detail::png_silent_warning);
    if (!png) throw IoError("cannot initialise PNG writer");
    png_infop info = png_create_info_struct(png);
    if (!info) {
      png_destroy_write_struct(&png, nullptr);
      throw IoError("cannot initialise PNG writer");
    }
    std::vector<png_bytep> rows(static_cast<std::size_t>(img.height()));
    const std::size_t stride = static_cast<std::size_t>(img.width()) * img.channels();
    for (int y = 0; y < img.height(); ++y) rows[static_cast<std::size_t>(y)] = bytes.data() + stride * y;
    if (setjmp(png_jmpbuf(png))) {
      png_destroy_write_struct(&png, &info);
      file.reset();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoError("failed writing PNG " + path.string() + ": " + message);
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()), static_cast<png_uint_32>(img.height()), 8,
                 img.channels() == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    if (std::fflush(file.get()) != 0) throw IoError("failed writing PNG " + path.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move temporary file into place at " + path.string());
}

}  // namespace panolab::io
