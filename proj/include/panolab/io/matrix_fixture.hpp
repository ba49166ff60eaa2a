#pragma once

#include <bit>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "panolab/core/error.hpp"
#include "panolab/io/atomic_write.hpp"
#include "panolab/io/pfm.hpp"

namespace panolab::io {

// Matrix fixtures: "PM\n<rows> <cols>\n-1.0\n" then rows*cols float64
// values, row-major, with the same byte-order convention as PFM.

inline void save_matrix(const Eigen::MatrixXd& m, const fs::path& path) {
  write_atomically(path, [&](std::ostream& out) {
    out << "PM\n" << m.rows() << ' ' << m.cols() << "\n-1.0\n";
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        double v = m(i, j);
        if constexpr (std::endian::native != std::endian::little) v = detail::byteswap_value(v);
        out.write(reinterpret_cast<const char*>(&v), sizeof v);
      }
    }
  });
}

inline Eigen::MatrixXd load_matrix(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::string name = path.string();
  if (detail::header_token(in, "magic", name) != "PM") throw FormatError("bad matrix fixture magic in " + name);
  const double rows = detail::header_number(in, "rows", name);
  const double cols = detail::header_number(in, "cols", name);
  if (rows < 0 || cols < 0 || rows != std::floor(rows) || cols != std::floor(cols)) {
    throw FormatError("bad matrix dimensions in " + name);
  }
  const double scale = detail::header_number(in, "scale", name);
  if (scale == 0.0) throw FormatError("matrix scale is zero in " + name);
  detail::end_of_header(in, name);
  const auto r = static_cast<Eigen::Index>(rows), c = static_cast<Eigen::Index>(cols);
  std::vector<double> raw(static_cast<std::size_t>(r * c));
  detail::read_values(in, raw, scale < 0.0, name);
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = raw[static_cast<std::size_t>(i * c + j)];
  return m;
}

}  // namespace panolab::io
