#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "dcl0/diag_qp.hpp"

namespace dcl0 {
namespace {

TEST(DiagQp, BoundedScalar) {
  DiagQp qp{LinearProgram(1), {1.0}};
  qp.base.set_bounds(0, 0.5, 2.0);
  const auto s = solve_diag_qp(qp, 1e-10, 100);
  ASSERT_EQ(s.status, LpStatus::Optimal);
  EXPECT_NEAR(s.point[0], 0.5, 1e-9);
  EXPECT_LE(s.gap, 1e-10);
}

TEST(DiagQp, InteriorScalar) {
  DiagQp qp{LinearProgram(1), {1.0}};
  qp.base.set_objective({-2.0});
  qp.base.set_bounds(0, 0.0, 2.0);
  const auto s = solve_diag_qp(qp, 1e-12, 100);
  ASSERT_EQ(s.status, LpStatus::Optimal);
  EXPECT_NEAR(s.point[0], 1.0, 1e-9);
  EXPECT_NEAR(s.objective_value, -1.0, 1e-12);
}

TEST(DiagQp, ZeroWeightsReduceToLp) {
  DiagQp qp{LinearProgram(2), {0.0, 0.0}};
  qp.base.set_objective({-1.0, -1.0});
  qp.base.add_row({1.0, 2.0}, 4.0);
  qp.base.add_row({3.0, 1.0}, 6.0);
  qp.base.set_lower(0, 0.0);
  qp.base.set_lower(1, 0.0);
  const auto s = solve_diag_qp(qp, 1e-9, 10);
  const auto lp = solve_lp(qp.base);
  ASSERT_EQ(s.status, LpStatus::Optimal);
  EXPECT_NEAR(s.objective_value, lp.objective_value, 1e-12);
}

TEST(DiagQp, InfeasibleReported) {
  DiagQp qp{LinearProgram(1), {1.0}};
  qp.base.set_bounds(0, 1.0, 2.0);
  qp.base.add_row({1.0}, 0.0);
  EXPECT_EQ(solve_diag_qp(qp, 1e-9, 10).status, LpStatus::Infeasible);
}

TEST(DiagQp, RejectsBadInput) {
  DiagQp qp{LinearProgram(1), {-1.0}};
  qp.base.set_bounds(0, 0.0, 1.0);
  EXPECT_THROW(solve_diag_qp(qp, 1e-9, 10), InvalidArgument);
  qp.quad_weights = {1.0};
  EXPECT_THROW(solve_diag_qp(qp, 0.0, 10), InvalidArgument);
  const std::vector<double> bad{5.0};
  EXPECT_THROW(solve_diag_qp(qp, 1e-9, 10, std::span<const double>(bad)), InvalidArgument);
}

// Separable box QP has the closed form clamp(-c/(2q), lo, hi).
TEST(DiagQp, RandomBoxesMatchClosedForm) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t n = 6;
    DiagQp qp{LinearProgram(n), std::vector<double>(n)};
    std::vector<double> c(n), expect(n);
    for (std::size_t j = 0; j < n; ++j) {
      c[j] = u(rng);
      qp.quad_weights[j] = 0.1 + std::fabs(u(rng));
      qp.base.set_bounds(j, -1.0, 1.0);
      expect[j] = std::clamp(-c[j] / (2 * qp.quad_weights[j]), -1.0, 1.0);
    }
    qp.base.set_objective(c);
    const auto s = solve_diag_qp(qp, 1e-12, 1000);
    ASSERT_EQ(s.status, LpStatus::Optimal);
    EXPECT_LE(s.gap, 1e-12);
    for (std::size_t j = 0; j < n; ++j) EXPECT_NEAR(s.point[j], expect[j], 1e-5);
    EXPECT_NEAR(s.objective_value, qp.evaluate(expect), 1e-10);
  }
}

// Coupled constraint: min sum v_j^2 s.t. sum v_j >= 1 gives v = 1/n.
TEST(DiagQp, CoupledRow) {
  const std::size_t n = 5;
  DiagQp qp{LinearProgram(n), std::vector<double>(n, 1.0)};
  qp.base.add_row(std::vector<double>(n, -1.0), -1.0);
  for (std::size_t j = 0; j < n; ++j) qp.base.set_bounds(j, -10.0, 10.0);
  const auto s = solve_diag_qp(qp, 1e-12, 1000);
  ASSERT_EQ(s.status, LpStatus::Optimal);
  for (double v : s.point) EXPECT_NEAR(v, 0.2, 1e-6);
}

TEST(DiagQp, IterationLimitThrowsWithBestPoint) {
  const std::size_t n = 8;
  DiagQp qp{LinearProgram(n), std::vector<double>(n, 1.0)};
  qp.base.add_row(std::vector<double>(n, -1.0), -1.0);
  for (std::size_t j = 0; j < n; ++j) qp.base.set_bounds(j, -1000.0, 1000.0);
  try {
    solve_diag_qp(qp, 1e-14, 1);
    FAIL() << "expected ToleranceNotMet";
  } catch (const ToleranceNotMet& e) {
    EXPECT_EQ(e.best_point().size(), n);
    EXPECT_GT(e.gap(), 1e-14);
  }
}

}  // namespace
}  // namespace dcl0
