#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <unsupported/Eigen/MatrixFunctions>

#include "support.hpp"

using namespace hyperorbit;
using std::numbers::pi;

TEST(ExpK, MatchesEigenReference) {
  std::mt19937_64 rng(21);
  for (int n = 1; n <= 5; ++n) {
    for (const auto& part : testing_support::partitions_of(n)) {
      const RealMatrix b = testing_support::random_k_log(part, rng);
      const RealMatrix ours = exp_K(b, part);
      const RealMatrix ref = b.exp();
      EXPECT_LE(max_norm(RealMatrix(ours - ref)), 1e-10 * std::max(1.0, max_norm(ref)))
          << to_string(part);
    }
  }
}

TEST(ExpK, ZeroGivesIdentity) {
  const BlockPartition part{{2}, {1}};
  const RealMatrix e = exp_K(RealMatrix::Zero(4, 4), part);
  EXPECT_EQ(max_norm(RealMatrix(e - RealMatrix::Identity(4, 4))), 0.0);
}

TEST(ExpK, RejectsNonKInput) {
  RealMatrix b(2, 2);
  b << 0, 1, 0, 0;
  EXPECT_THROW(exp_K(b, BlockPartition{{2}, {}}), Error);
}

TEST(PrincipalLog, RoundTripOnRandomLogs) {
  std::mt19937_64 rng(5);
  for (int n = 2; n <= 4; ++n) {
    for (const auto& part : testing_support::partitions_of(n)) {
      const RealMatrix b = testing_support::random_k_log(part, rng);
      const RealMatrix a = exp_K(b, part);
      const auto res = principal_log_K(a, part);
      EXPECT_LE(max_norm(RealMatrix(res.B - b)), 1e-9 * (1.0 + max_norm(b))) << to_string(part);
    }
  }
}

TEST(PrincipalLog, NegativeTDiagonalIsDomainError) {
  RealMatrix a(1, 1);
  a << -2.0;
  try {
    principal_log_K(a, BlockPartition{{1}, {}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Domain);
  }
}

TEST(PrincipalLog, RotationByNinetyDegrees) {
  RealMatrix a(2, 2);
  a << 0, 1, -1, 0;  // S-block alpha = 0, beta = 1, i.e. i
  const BlockPartition part{{}, {1}};
  const auto res = principal_log_K(a, part);
  EXPECT_NEAR(res.B(0, 0), 0.0, 1e-15);
  EXPECT_NEAR(res.B(0, 1), pi / 2, 1e-15);
  ASSERT_EQ(res.branch_generators.size(), 1u);
  const std::vector<std::int64_t> k{1};
  const RealMatrix shifted = log_branch(res, k);
  EXPECT_NEAR(shifted(0, 1), pi / 2 - 2 * pi, 1e-14);
  EXPECT_LE(max_norm(RealMatrix(exp_K(shifted, part) - a)), 1e-14);
}

TEST(PrincipalLog, NegativeOneRotationTakesPlusPi) {
  RealMatrix a = -RealMatrix::Identity(2, 2);
  const auto res = principal_log_K(a, BlockPartition{{}, {1}});
  EXPECT_NEAR(res.B(0, 1), pi, 1e-15);
}

TEST(PrincipalLog, BranchesAllExponentiateToA) {
  std::mt19937_64 rng(8);
  const BlockPartition part{{1}, {2, 1}};
  const RealMatrix b = testing_support::random_k_log(part, rng);
  const RealMatrix a = exp_K(b, part);
  const auto res = principal_log_K(a, part);
  for (std::int64_t k1 = -2; k1 <= 2; ++k1) {
    for (std::int64_t k2 = -2; k2 <= 2; ++k2) {
      const std::vector<std::int64_t> k{k1, k2};
      const RealMatrix bk = log_branch(res, k);
      EXPECT_TRUE(is_in_K(bk, part));
      EXPECT_LE(max_norm(RealMatrix(exp_K(bk, part) - a)), 1e-9 * (1.0 + max_norm(a)));
    }
  }
  const std::vector<std::int64_t> wrong{1};
  EXPECT_THROW(log_branch(res, wrong), Error);
}

TEST(PrincipalLog, ScalarTBlock) {
  RealMatrix a(1, 1);
  a << std::exp(pi);
  EXPECT_NEAR(principal_log_K(a, BlockPartition{{1}, {}}).B(0, 0), pi, 1e-14);
}
