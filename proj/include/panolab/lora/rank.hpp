#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SVD>

#include "panolab/core/error.hpp"

namespace panolab::lora {

using Eigen::MatrixXd;

struct RankReport {
  std::vector<double> singular_values;  // descending
  std::size_t numerical_rank = 0;
  double rel_tolerance = 1e-8;
  std::size_t bound = 0;
  bool satisfied = true;
};

namespace detail {

inline void require_finite(const MatrixXd& m) {
  if (!m.allFinite()) throw InvalidInput("matrix has non-finite entries");
}

inline std::size_t count_above(const Eigen::VectorXd& s, double rel_tol) {
  if (s.size() == 0 || s(0) <= 0.0) return 0;
  const double cut = rel_tol * s(0);
  std::size_t n = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) >= cut) ++n;
  return n;
}

}  // namespace detail

inline std::vector<double> singular_values(const MatrixXd& m) {
  detail::require_finite(m);
  if (m.size() == 0) return {};
  Eigen::BDCSVD<MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  if (!s.allFinite()) throw NumericalError("singular value decomposition did not converge");
  return {s.data(), s.data() + s.size()};
}

/// Count of singular values >= rel_tol * sigma_1. The bound defaults to
/// min(rows, cols).
inline RankReport numerical_rank(const MatrixXd& m, double rel_tol = 1e-8) {
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw InvalidInput("rank tolerance must lie in (0, 1)");
  RankReport r;
  r.rel_tolerance = rel_tol;
  r.singular_values = singular_values(m);
  const Eigen::Map<const Eigen::VectorXd> s(r.singular_values.data(), static_cast<Eigen::Index>(r.singular_values.size()));
  r.numerical_rank = detail::count_above(s, rel_tol);
  r.bound = static_cast<std::size_t>(std::min(m.rows(), m.cols()));
  r.satisfied = r.numerical_rank <= r.bound;
  return r;
}

inline RankReport check_rank_bound(const MatrixXd& m, std::size_t bound, double rel_tol = 1e-8) {
  RankReport r = numerical_rank(m, rel_tol);
  r.bound = bound;
  r.satisfied = r.numerical_rank <= bound;
  return r;
}

/// Orthonormal basis of the numerical column space, strongest direction first.
inline MatrixXd column_space_basis(const MatrixXd& m, double rel_tol = 1e-8) {
  detail::require_finite(m);
  if (m.size() == 0) return MatrixXd(m.rows(), 0);
  Eigen::BDCSVD<MatrixXd> svd(m, Eigen::ComputeThinU);
  if (!svd.singularValues().allFinite()) throw NumericalError("singular value decomposition did not converge");
  const auto k = static_cast<Eigen::Index>(detail::count_above(svd.singularValues(), rel_tol));
  return svd.matrixU().leftCols(k);
}

/// Principal angles between two subspaces given by orthonormal bases,
/// ascending, min(k1, k2) of them.
inline std::vector<double> principal_angles(const MatrixXd& q1, const MatrixXd& q2) {
  if (q1.rows() != q2.rows()) throw InvalidInput("subspaces live in different dimensions");
  const Eigen::Index k = std::min(q1.cols(), q2.cols());
  std::vector<double> angles;
  if (k == 0) return angles;
  Eigen::JacobiSVD<MatrixXd> svd(q1.transpose() * q2);
  const auto& s = svd.singularValues();
  for (Eigen::Index i = 0; i < k; ++i) angles.push_back(std::acos(std::clamp(s(i), 0.0, 1.0)));
  std::sort(angles.begin(), angles.end());
  return angles;
}

}  // namespace panolab::lora
