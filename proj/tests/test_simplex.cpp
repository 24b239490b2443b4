#include <random>

#include <gtest/gtest.h>

#include "dcl0/simplex.hpp"
#include "oracles/vertex_enum.hpp"

namespace dcl0 {
namespace {

TEST(Simplex, SingleVariableUpperBoundRow) {
  LinearProgram lp(1);
  lp.set_objective({-1.0});
  lp.add_row({1.0}, 1.0);
  lp.add_row({-1.0}, 0.0);
  const LpSolution s = solve_lp(lp);
  ASSERT_EQ(s.status, LpStatus::Optimal);
  EXPECT_NEAR(s.point[0], 1.0, 1e-12);
  EXPECT_NEAR(s.objective_value, -1.0, 1e-12);
}

TEST(Simplex, DetectsInfeasibility) {
  LinearProgram lp(1);
  lp.set_objective({1.0});
  lp.add_row({1.0}, -1.0);
  lp.add_row({-1.0}, -2.0);
  EXPECT_EQ(solve_lp(lp).status, LpStatus::Infeasible);
}

TEST(Simplex, DetectsUnboundedness) {
  LinearProgram lp(2);
  lp.set_objective({-1.0, 0.0});
  lp.add_row({-1.0, 1.0}, 0.0);
  EXPECT_EQ(solve_lp(lp).status, LpStatus::Unbounded);
}

TEST(Simplex, FaceOptimumMatchesVertexEnumeration) {
  LinearProgram lp(2);
  lp.set_objective({-1.0, -1.0});
  lp.add_row({1.0, 1.0}, 1.0);
  lp.set_lower(0, 0.0);
  lp.set_lower(1, 0.0);
  const auto oracle = testing::vertex_enumeration(lp);
  ASSERT_TRUE(oracle);
  EXPECT_DOUBLE_EQ(oracle->objective, -1.0);
  const LpSolution s = solve_lp(lp);
  ASSERT_EQ(s.status, LpStatus::Optimal);
  EXPECT_NEAR(s.objective_value, oracle->objective, 1e-12);
  EXPECT_LE(lp.max_violation(s.point), kFeasibilityTol);
}

TEST(Simplex, FreeAndUpperBoundedVariables) {
  // min v0 + v1 with v0 free, v1 <= 3, v0 >= v1 - 2, v0 + v1 >= -4
  LinearProgram lp(2);
  lp.set_objective({1.0, 1.0});
  lp.set_upper(1, 3.0);
  lp.add_row({-1.0, 1.0}, 2.0);
  lp.add_row({-1.0, -1.0}, 4.0);
  const LpSolution s = solve_lp(lp);
  ASSERT_EQ(s.status, LpStatus::Optimal);
  EXPECT_NEAR(s.objective_value, -4.0, 1e-10);
}

TEST(Simplex, RejectsMalformedProblems) {
  LinearProgram lp(2);
  EXPECT_THROW(lp.add_row({1.0}, 0.0), InvalidArgument);
  lp.set_bounds(0, 2.0, 1.0);
  EXPECT_THROW(solve_lp(lp), InvalidArgument);
}

TEST(Simplex, WarmResolveMatchesColdSolve) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  LinearProgram lp(4);
  for (int i = 0; i < 6; ++i) lp.add_row({u(rng), u(rng), u(rng), u(rng)}, u(rng) + 1.0);
  for (std::size_t j = 0; j < 4; ++j) lp.set_bounds(j, -2.0, 2.0);
  SimplexSolver warm(lp);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> c{u(rng), u(rng), u(rng), u(rng)};
    LinearProgram cold = lp;
    cold.set_objective(c);
    const LpSolution a = warm.solve(c);
    const LpSolution b = solve_lp(cold);
    ASSERT_EQ(a.status, b.status);
    if (a.status == LpStatus::Optimal) {
      EXPECT_NEAR(a.objective_value, b.objective_value, 1e-10);
    }
  }
}

TEST(Simplex, DeterministicForIdenticalInput) {
  LinearProgram lp(3);
  lp.set_objective({-1.0, -1.0, -1.0});
  lp.add_row({1.0, 1.0, 1.0}, 1.0);
  for (std::size_t j = 0; j < 3; ++j) lp.set_lower(j, 0.0);
  const LpSolution a = solve_lp(lp);
  const LpSolution b = solve_lp(lp);
  EXPECT_EQ(a.point, b.point);
}

// Highly degenerate: many constraints through the optimum.
TEST(Simplex, SurvivesDegenerateVertex) {
  const int n = 3;
  LinearProgram lp(n);
  lp.set_objective({-1.0, -1.0, -1.0});
  for (int i = 0; i < 30; ++i) {
    const double s = 1.0 + 0.1 * i;
    lp.add_row({s, 1.0, 1.0 / s}, s + 1.0 + 1.0 / s);
  }
  for (int j = 0; j < n; ++j) lp.set_lower(j, 0.0);
  const auto oracle = testing::vertex_enumeration(lp);
  const LpSolution s = solve_lp(lp);
  ASSERT_EQ(s.status, LpStatus::Optimal);
  EXPECT_NEAR(s.objective_value, oracle->objective, 1e-8);
}

TEST(Simplex, RandomTinyLpsMatchVertexEnumeration) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> nv(1, 5), nr(0, 8);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = nv(rng);
    const int m = nr(rng);
    LinearProgram lp(n);
    std::vector<double> c(n);
    for (auto& x : c) x = u(rng);
    lp.set_objective(c);
    for (int i = 0; i < m; ++i) {
      std::vector<double> row(n);
      for (auto& x : row) x = u(rng);
      lp.add_row(row, u(rng));
    }
    for (int j = 0; j < n; ++j) lp.set_bounds(j, -1.0 - (u(rng) + 1.0), 1.0 + (u(rng) + 1.0));
    const auto oracle = testing::vertex_enumeration(lp);
    const LpSolution s = solve_lp(lp);
    if (!oracle) {
      EXPECT_EQ(s.status, LpStatus::Infeasible) << "trial " << trial;
      continue;
    }
    ASSERT_EQ(s.status, LpStatus::Optimal) << "trial " << trial;
    EXPECT_NEAR(s.objective_value, oracle->objective, 1e-8) << "trial " << trial;
    EXPECT_LE(lp.max_violation(s.point), kFeasibilityTol);
  }
}

}  // namespace
}  // namespace dcl0
