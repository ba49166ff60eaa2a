#include <cmath>
#include <limits>
#include <numbers>

#include <gtest/gtest.h>

#include "panolab/core/random.hpp"
#include "panolab/lora/rank.hpp"

namespace panolab::lora {
namespace {

TEST(NumericalRank, IdentityAndOuterProduct) {
  EXPECT_EQ(numerical_rank(MatrixXd::Identity(5, 5)).numerical_rank, 5u);
  const Eigen::VectorXd u = Eigen::VectorXd::LinSpaced(6, 1, 6);
  const Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(4, -2, 1);
  const auto rep = numerical_rank(u * v.transpose());
  EXPECT_EQ(rep.numerical_rank, 1u);
  EXPECT_EQ(rep.bound, 4u);
  EXPECT_NEAR(rep.singular_values[0], u.norm() * v.norm(), 1e-12);
}

TEST(NumericalRank, RandomLowRankProducts) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const MatrixXd m = gaussian_matrix(20, 3, rng) * gaussian_matrix(3, 15, rng);
    ASSERT_EQ(numerical_rank(m).numerical_rank, 3u) << "seed " << seed;
  }
}

TEST(NumericalRank, ZeroAndEmpty) {
  EXPECT_EQ(numerical_rank(MatrixXd::Zero(3, 4)).numerical_rank, 0u);
  EXPECT_EQ(numerical_rank(MatrixXd(0, 4)).numerical_rank, 0u);
}

TEST(NumericalRank, ToleranceIsRelative) {
  Eigen::VectorXd s(3);
  s << 1e6, 1.0, 1e-3;
  const MatrixXd m = s.asDiagonal();
  EXPECT_EQ(numerical_rank(m, 1e-8).numerical_rank, 2u);
  EXPECT_EQ(numerical_rank(m, 1e-10).numerical_rank, 3u);
  EXPECT_EQ(numerical_rank(1e-20 * m, 1e-8).numerical_rank, 2u);
  EXPECT_THROW(numerical_rank(m, 0.0), InvalidInput);
  EXPECT_THROW(numerical_rank(m, 1.0), InvalidInput);
}

TEST(NumericalRank, RejectsNonFinite) {
  MatrixXd m = MatrixXd::Identity(3, 3);
  m(1, 2) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(numerical_rank(m), InvalidInput);
  m(1, 2) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(singular_values(m), InvalidInput);
}

TEST(CheckRankBound, ReportsViolation) {
  EXPECT_TRUE(check_rank_bound(MatrixXd::Identity(4, 4), 4).satisfied);
  const auto rep = check_rank_bound(MatrixXd::Identity(4, 4), 3);
  EXPECT_FALSE(rep.satisfied);
  EXPECT_EQ(rep.bound, 3u);
}

TEST(ColumnSpace, BasisIsOrthonormalAndSpansColumns) {
  Rng rng(2);
  const MatrixXd m = gaussian_matrix(12, 4, rng) * gaussian_matrix(4, 9, rng);
  const MatrixXd q = column_space_basis(m);
  ASSERT_EQ(q.cols(), 4);
  EXPECT_LT((q.transpose() * q - MatrixXd::Identity(4, 4)).norm(), 1e-12);
  EXPECT_LT((m - q * (q.transpose() * m)).norm(), 1e-10 * m.norm());
}

TEST(PrincipalAngles, KnownPlanes) {
  MatrixXd a = MatrixXd::Zero(3, 2);
  a(0, 0) = 1;
  a(1, 1) = 1;
  MatrixXd b = MatrixXd::Zero(3, 2);
  b(0, 0) = 1;
  b(1, 1) = std::cos(0.3);
  b(2, 1) = std::sin(0.3);
  const auto ang = principal_angles(a, b);
  ASSERT_EQ(ang.size(), 2u);
  EXPECT_NEAR(ang[0], 0.0, 1e-7);
  EXPECT_NEAR(ang[1], 0.3, 1e-12);
  MatrixXd c = MatrixXd::Zero(3, 1);
  c(2, 0) = 1;
  EXPECT_NEAR(principal_angles(a, c)[0], std::numbers::pi / 2, 1e-12);
  EXPECT_THROW(principal_angles(a, MatrixXd::Zero(4, 1)), InvalidInput);
}

}  // namespace
}  // namespace panolab::lora
