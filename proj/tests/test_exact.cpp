#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "dcl0/exact_penalty.hpp"
#include "support.hpp"

namespace dcl0 {
namespace {

using testing::one_d;
using testing::random_instance;

TEST(PPenalty, Examples) {
  EXPECT_EQ(p_penalty(std::vector<double>{0, 1, 1, 0}), 0.0);
  EXPECT_EQ(p_penalty(std::vector<double>{0.5, 0.5}), 1.0);
  EXPECT_NEAR(p_penalty(std::vector<double>{0.2, 0.9}), 0.3, 1e-15);
  EXPECT_THROW(p_penalty(std::vector<double>{1.2}), DomainError);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> v{u(rng), u(rng)};
    EXPECT_GT(p_penalty(v), 0.0);
  }
}

TEST(Thresholds, Examples) {
  EXPECT_DOUBLE_EQ(capped_theta_from_tau(0.5, 0.5, 1), 2.0);
  EXPECT_DOUBLE_EQ(capped_theta_from_tau(3, 1, 2), 2.0);
  EXPECT_NEAR(capped_theta_from_tau(0.7, 0.2, 3) * 0.2 * 3 - 0.2, 0.7, 1e-15);
  EXPECT_THROW(capped_theta_from_tau(0.1, 0.2, 1), InvalidArgument);
  EXPECT_DOUBLE_EQ(theta_zero_lower_bound(0.3, 1).value, 2.0);
  EXPECT_DOUBLE_EQ(theta_zero_lower_bound(0.3, 4).value, 0.5);
  EXPECT_TRUE(theta_zero_lower_bound(0.3, 4).partial);
  EXPECT_GT(theta_zero_lower_bound(0.3, 2).value, theta_zero_lower_bound(0.3, 3).value);
}

TEST(Kappa, Examples) {
  const SvmInstance u(Eigen::MatrixXd::Ones(1, 1), -Eigen::MatrixXd::Ones(1, 1), 0.5);
  EXPECT_DOUBLE_EQ(kappa_svm(u), 1.0);
  EXPECT_DOUBLE_EQ(kappa_svm(u) / 0.5, theta_star(u));
  const auto inst = random_instance(3, 4, 4, 0.3, 2);
  const SvmInstance tripled(3 * inst.a(), 3 * inst.b(), 0.3);
  EXPECT_NEAR(kappa_svm(tripled), 3 * kappa_svm(inst), 1e-14);
  EXPECT_LT(kappa_svm(inst.with_lambda(1 - 1e-12)), 1e-10);
}

TEST(SupportEnum, OneDimensional) {
  const auto r = support_enum_oracle(one_d(0.9), 10);
  EXPECT_NEAR(r.objective, 0.2, 1e-12);
  EXPECT_TRUE(r.support.empty());
  EXPECT_EQ(r.x(0), 0.0);
  const auto s = support_enum_oracle(one_d(0.05), 10);
  EXPECT_NEAR(s.objective, 0.05, 1e-12);
  ASSERT_EQ(s.support.size(), 1u);
}

TEST(SupportEnum, ZeroLambdaIsHingeOptimum) {
  const auto inst = random_instance(3, 5, 5, 0.5, 4);
  const auto r = support_enum_oracle(inst.a(), inst.b(), 0.0, 10);
  auto lp = build_hinge_lp(inst, 10.0);
  std::vector<double> c(lp.objective().begin(), lp.objective().end());
  for (double& v : c) v *= 2;  // (1 - 0) instead of (1 - 0.5)
  lp.set_objective(c);
  EXPECT_NEAR(r.objective, solve_lp(lp).objective_value, 1e-10);
}

TEST(SupportEnum, RefusesLargeN) {
  const auto inst = random_instance(16, 2, 2, 0.5, 1);
  EXPECT_THROW(support_enum_oracle(inst, 1), Refused);
  EXPECT_THROW(grid_oracle(random_instance(3, 2, 2, 0.5, 1), PenaltySpec::cap(1), 1, 0.1), Refused);
}

TEST(SupportEnum, DominatesRandomFeasiblePoints) {
  const auto inst = random_instance(4, 6, 6, 0.1, 5);
  const double m = 3;
  const auto r = support_enum_oracle(inst, m);
  EXPECT_NEAR(l0_objective(inst, r.x, r.b), r.objective, 1e-9);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-m, m);
  std::bernoulli_distribution zero(0.4);
  for (int i = 0; i < 100; ++i) {
    Eigen::VectorXd x(4);
    for (Eigen::Index j = 0; j < 4; ++j) x(j) = zero(rng) ? 0.0 : u(rng);
    EXPECT_LE(r.objective, l0_objective(inst, x, u(rng)) + 1e-12);
  }
}

TEST(GridOracle, MinHingeOverBIsExact) {
  const auto inst = random_instance(2, 5, 4, 0.3, 8);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int i = 0; i < 50; ++i) {
    Eigen::VectorXd x(2);
    x << u(rng), u(rng);
    const HingeMin hm = min_hinge_over_b(inst, x);
    EXPECT_NEAR(hm.value, hinge_loss(inst, x, hm.b), 1e-14);
    for (int k = -400; k <= 400; ++k) EXPECT_LE(hm.value, hinge_loss(inst, x, 0.01 * k) + 1e-14);
  }
}

TEST(GridOracle, PenaltyDominatesNearOne) {
  const auto inst = random_instance(2, 4, 4, 0.99, 3);
  const auto r = grid_oracle_capped(inst, PenaltySpec::cap(50), 1, 0.01);
  EXPECT_EQ(r.x.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_THROW(grid_oracle_capped(inst, PenaltySpec::exp(1), 1, 0.01), UnsupportedKind);
}

TEST(GridOracle, RefinementNeverIncreases) {
  const auto inst = random_instance(2, 4, 4, 0.2, 11);
  const auto spec = PenaltySpec::cap(3);
  double prev = grid_oracle_capped(inst, spec, 1, 0.1).objective;
  for (double h : {0.05, 0.025, 0.0125}) {
    const double cur = grid_oracle_capped(inst, spec, 1, h).objective;
    EXPECT_LE(cur, prev);
    prev = cur;
  }
}

// Capped-l1 above kappa/lambda reproduces the l0 optimum (grid tolerance).
TEST(Equivalence, CappedAboveKappaOverLambda) {
  const double h = 1e-3;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const std::size_t n = seed < 7 ? 1 : 2;
    const auto inst = random_instance(n, 5, 5, 0.1 + 0.05 * static_cast<double>(seed % 3), 700 + seed);
    const double m = 2;
    const double l0 = support_enum_oracle(inst, m).objective;
    const double theta = 1.1 * kappa_svm(inst) / inst.lambda();
    const double g = grid_oracle_capped(inst, PenaltySpec::cap(theta), m, n == 1 ? h : 1e-2).objective;
    EXPECT_GE(g, l0 - 1e-9) << seed;
    EXPECT_LE(g, l0 + 2 * (n == 1 ? h : 1e-2) * kappa_svm(inst) + 1e-9) << seed;
  }
}

TEST(Equivalence, ScadProbe) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto inst = random_instance(1, 5, 5, 0.2, 800 + seed);
    const double m = 2, a = 3;
    const double theta = a * 1.1 * (2 / m + kappa_svm(inst) / inst.lambda());
    const auto p = scad_equivalence_probe(inst, a, theta, m, 1e-3);
    EXPECT_TRUE(p.sandwich_ok);
    EXPECT_TRUE(p.equivalent) << p.scad_value << " vs " << p.l0_value;
  }
  const SvmInstance zero(Eigen::MatrixXd::Zero(3, 1), Eigen::MatrixXd::Zero(3, 1), 0.3);
  EXPECT_TRUE(scad_equivalence_probe(zero, 3, 5, 1, 1e-2).equivalent);
}

TEST(Equivalence, TinyScadThetaIsLoose) {
  int loose = 0;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto inst = random_instance(1, 5, 5, 0.05, 900 + seed);
    if (!scad_equivalence_probe(inst, 3, 0.01, 2, 1e-3).equivalent) ++loose;
  }
  EXPECT_GE(loose, 1);
}

// Penalized problem with continuous u in [|x|/M, 1], evaluated by a grid over
// (x, u), against the capped-l1 grid optimum at theta = (tau + l)/(l M).
TEST(Equivalence, PenalizedRelaxationMatchesCapped) {
  const double m = 2, h = 2e-3;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto inst = random_instance(1, 4, 4, 0.2, 950 + seed);
    const double lam = inst.lambda();
    for (double tau : {lam, 2 * lam, 5 * lam}) {
      double alpha = std::numeric_limits<double>::infinity();
      const long kx = std::lround(m / h);
      for (long i = -kx; i <= kx; ++i) {
        Eigen::VectorXd x(1);
        x(0) = static_cast<double>(i) * h;
        const double f = min_hinge_over_b(inst, x).value;
        const double ulo = std::fabs(x(0)) / m;
        double best_pi = std::numeric_limits<double>::infinity();
        const long ku = std::lround((1 - ulo) / h);
        for (long j = 0; j <= ku + 1; ++j) {
          const double uu = std::min(1.0, ulo + static_cast<double>(j) * h);
          best_pi = std::min(best_pi, uu + tau / lam * std::min(uu, 1 - uu));
        }
        alpha = std::min(alpha, f + lam * best_pi);
      }
      const double beta = grid_oracle_capped(inst, PenaltySpec::cap(capped_theta_from_tau(tau, lam, m)), m, h).objective;
      EXPECT_NEAR(alpha, beta, 1e-12) << "tau=" << tau;
    }
  }
}

}  // namespace
}  // namespace dcl0
