#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cctype>
#include <cstring>
#include <fstream>
#include <filesystem>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "panolab/core/error.hpp"
#include "panolab/core/image.hpp"
#include "panolab/io/atomic_write.hpp"

namespace panolab::io {

namespace detail {

/// Reads one whitespace-delimited header token.
inline std::string header_token(std::istream& in, const std::string& what, const std::string& path) {
  std::string tok;
  if (!(in >> tok)) throw FormatError("truncated header in " + path + ": missing " + what);
  return tok;
}

inline double header_number(std::istream& in, const std::string& what, const std::string& path) {
  const std::string tok = header_token(in, what, path);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != tok.size() || !std::isfinite(v)) throw FormatError("bad " + what + " '" + tok + "' in " + path);
  return v;
}

/// Consumes the single whitespace byte that ends a binary header.
inline void end_of_header(std::istream& in, const std::string& path) {
  const int c = in.get();
  if (c == EOF || !std::isspace(c)) throw FormatError("header of " + path + " is not terminated by whitespace");
}

template <typename U>
U byteswap_value(U v) {
  unsigned char b[sizeof(U)];
  std::memcpy(b, &v, sizeof(U));
  for (std::size_t i = 0; i < sizeof(U) / 2; ++i) std::swap(b[i], b[sizeof(U) - 1 - i]);
  std::memcpy(&v, b, sizeof(U));
  return v;
}

template <typename U>
void read_values(std::istream& in, std::vector<U>& out, bool little_endian, const std::string& path) {
  in.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(out.size() * sizeof(U)));
  if (in.gcount() != static_cast<std::streamsize>(out.size() * sizeof(U))) {
    throw FormatError("truncated payload in " + path);
  }
  if (little_endian != (std::endian::native == std::endian::little)) {
    for (auto& v : out) v = byteswap_value(v);
  }
}

}  // namespace detail

/// Parses a PFM stream: "PF" (RGB) or "Pf" (gray), dimensions, scale whose
/// sign gives the byte order (negative = little-endian), rows bottom to top.
inline ImageBuffer read_pfm(std::istream& in, const std::string& name = "<stream>") {
  const std::string magic = detail::header_token(in, "magic", name);
  int channels = 0;
  if (magic == "PF") channels = 3;
  else if (magic == "Pf") channels = 1;
  else throw FormatError("bad PFM magic '" + magic + "' in " + name);
  const double w = detail::header_number(in, "width", name);
  const double h = detail::header_number(in, "height", name);
  if (w < 1 || h < 1 || w != std::floor(w) || h != std::floor(h) || w > 1 << 20 || h > 1 << 20) {
    throw FormatError("bad PFM dimensions in " + name);
  }
  const double scale = detail::header_number(in, "scale", name);
  if (scale == 0.0) throw FormatError("PFM scale is zero in " + name);
  detail::end_of_header(in, name);

  const int width = static_cast<int>(w), height = static_cast<int>(h);
  std::vector<float> raw(static_cast<std::size_t>(width) * height * channels);
  detail::read_values(in, raw, scale < 0.0, name);
  ImageBuffer img(width, height, channels);
  const std::size_t stride = static_cast<std::size_t>(width) * channels;
  for (int y = 0; y < height; ++y) {
    const float* src = raw.data() + stride * (height - 1 - y);
    std::memcpy(&img.at(0, y), src, stride * sizeof(float));
  }
  return img;
}

inline ImageBuffer load_pfm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_pfm(in, path.string());
}

/// Little-endian PFM, bit-exact for float samples.
template <typename T>
void write_pfm(std::ostream& out, const basic_image<T>& img) {
  out << (img.channels() == 3 ? "PF" : "Pf") << '\n' << img.width() << ' ' << img.height() << "\n-1.0\n";
  const std::size_t stride = static_cast<std::size_t>(img.width()) * img.channels();
  std::vector<float> row(stride);
  for (int y = img.height() - 1; y >= 0; --y) {
    for (std::size_t i = 0; i < stride; ++i) {
      float v = static_cast<float>(img.data()[static_cast<std::size_t>(y) * stride + i]);
      if constexpr (std::endian::native != std::endian::little) v = detail::byteswap_value(v);
      row[i] = v;
    }
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(stride * sizeof(float)));
  }
}

template <typename T>
void save_pfm(const basic_image<T>& img, const fs::path& path) {
  write_atomically(path, [&](std::ostream& out) { write_pfm(out, img); });
}

}  // namespace panolab::io
