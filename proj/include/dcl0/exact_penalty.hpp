#pragma once

// Exact-penalty helpers for the l0 problem with a box |x_i| <= M, and two
// brute-force oracles: support enumeration (exact l0 optimum) and a grid
// search over x for n <= 2 with b minimized exactly.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "dcl0/error.hpp"
#include "dcl0/penalty.hpp"
#include "dcl0/simplex.hpp"
#include "dcl0/svm.hpp"

namespace dcl0 {

inline double p_penalty(std::span<const double> u) {
  double s = 0;
  for (double v : u) {
    if (!(v >= 0 && v <= 1)) throw DomainError("p_penalty: entries must lie in [0, 1]");
    s += std::min(v, 1.0 - v);
  }
  return s;
}

inline double capped_theta_from_tau(double tau, double lambda, double m) {
  if (!(lambda > 0) || !(m > 0)) throw InvalidArgument("capped_theta_from_tau: lambda and M must be positive");
  if (!(tau >= lambda)) throw InvalidArgument("capped_theta_from_tau: requires tau >= lambda");
  return (tau + lambda) / (lambda * m);
}

struct PartialBound {
  double value;
  bool partial;  // the full threshold also needs the (unknown) penalty threshold tau_0
};

inline PartialBound theta_zero_lower_bound(double lambda, double m) {
  if (!(lambda > 0) || !(m > 0)) throw InvalidArgument("theta_zero_lower_bound: lambda and M must be positive");
  return {2.0 / m, true};
}

inline double kappa_svm(const SvmInstance& inst) { return (1.0 - inst.lambda()) * data_spread(inst); }

struct OracleResult {
  double objective = std::numeric_limits<double>::infinity();
  Eigen::VectorXd x;
  double b = 0;
  std::vector<std::size_t> support;
};

inline constexpr std::size_t kOracleMaxFeatures = 15;

/// l0 optimum over the box |x_i| <= m by solving the hinge LP on every
/// support. lambda may be 0 here. Ties go to the smaller support, then the
/// lexicographically smaller bit mask.
inline OracleResult support_enum_oracle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double lambda, double m,
                                        std::size_t n_limit = kOracleMaxFeatures) {
  const auto n = static_cast<std::size_t>(a.cols());
  if (n > n_limit || n >= 63)
    throw Refused("support enumeration refused: " + std::to_string(n) + " features exceeds the limit of " +
                  std::to_string(n_limit));
  if (!(m > 0)) throw InvalidArgument("support_enum_oracle: box bound must be positive");
  if (!(lambda >= 0 && lambda < 1)) throw InvalidArgument("support_enum_oracle: lambda must lie in [0, 1)");
  // The instance only carries the data; lambda enters below.
  const SvmInstance inst(a, b, 0.5);
  const Layout lay(inst, false);
  LinearProgram lp = build_hinge_lp(inst, m);
  std::vector<double> c(lay.size(), 0.0);
  for (std::size_t j = 0; j < lay.n_a; ++j) c[lay.xi(j)] = (1.0 - lambda) / static_cast<double>(lay.n_a);
  for (std::size_t j = 0; j < lay.n_b; ++j) c[lay.zeta(j)] = (1.0 - lambda) / static_cast<double>(lay.n_b);
  lp.set_objective(std::move(c));

  std::vector<std::uint64_t> masks(std::uint64_t{1} << n);
  std::iota(masks.begin(), masks.end(), std::uint64_t{0});
  std::stable_sort(masks.begin(), masks.end(),
                   [](std::uint64_t x, std::uint64_t y) { return std::popcount(x) < std::popcount(y); });

  OracleResult best;
  for (std::uint64_t mask : masks) {
    for (std::size_t i = 0; i < n; ++i) {
      const bool on = (mask >> i) & 1u;
      lp.set_bounds(lay.x(i), on ? -m : 0.0, on ? m : 0.0);
    }
    const LpSolution s = solve_lp(lp);
    if (s.status != LpStatus::Optimal) throw NumericalError(std::string("support enumeration lp: ") + to_string(s.status));
    const double val = s.objective_value + lambda * static_cast<double>(std::popcount(mask));
    if (val < best.objective) {
      best.objective = val;
      best.x = iterate_from(lay, s.point).x;
      best.b = s.point[lay.b()];
      best.support.clear();
      for (std::size_t i = 0; i < n; ++i)
        if ((mask >> i) & 1u) best.support.push_back(i);
    }
  }
  return best;
}

inline OracleResult support_enum_oracle(const SvmInstance& inst, double m, std::size_t n_limit = kOracleMaxFeatures) {
  return support_enum_oracle(inst.a(), inst.b(), inst.lambda(), m, n_limit);
}

struct HingeMin {
  double value;
  double b;
};

/// min over b of the hinge loss at fixed x. The loss is convex piecewise
/// linear in b with slope -(1-l) at -inf; each A-term adds (1-l)/N_A at its
/// kink a^T x - 1, each B-term (1-l)/N_B at 1 + b^T x.
inline HingeMin min_hinge_over_b(const SvmInstance& inst, const Eigen::VectorXd& x) {
  const Eigen::MatrixXd& a = inst.a();
  const Eigen::MatrixXd& bm = inst.b();
  const auto na = a.rows(), nb = bm.rows(), n = a.cols();
  thread_local std::vector<double> pa, pb;
  thread_local std::vector<std::pair<double, double>> kinks;
  pa.assign(static_cast<std::size_t>(na), 0.0);
  pb.assign(static_cast<std::size_t>(nb), 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double xi = x(i);
    if (xi == 0.0) continue;
    for (Eigen::Index j = 0; j < na; ++j) pa[static_cast<std::size_t>(j)] += a(j, i) * xi;
    for (Eigen::Index j = 0; j < nb; ++j) pb[static_cast<std::size_t>(j)] += bm(j, i) * xi;
  }
  const double wa = 1.0 / static_cast<double>(na), wb = 1.0 / static_cast<double>(nb);
  // Kinks keep the order of the previous call: neighbouring grid points
  // leave them nearly sorted, so insertion sort is close to linear.
  const auto total = static_cast<std::size_t>(na + nb);
  if (kinks.size() != total) {
    kinks.clear();
    for (std::size_t k = 0; k < total; ++k) kinks.emplace_back(0.0, static_cast<double>(k));
  }
  for (auto& [pos, src] : kinks) {
    const auto k = static_cast<std::size_t>(src);
    pos = k < pa.size() ? pa[k] - 1.0 : 1.0 + pb[k - pa.size()];
  }
  for (std::size_t i = 1; i < total; ++i)
    for (std::size_t j = i; j > 0 && kinks[j] < kinks[j - 1]; --j) std::swap(kinks[j], kinks[j - 1]);
  double slope = -1.0;
  double at = kinks.front().first;
  for (const auto& [pos, src] : kinks) {
    at = pos;
    slope += static_cast<std::size_t>(src) < pa.size() ? wa : wb;
    if (slope >= -1e-15) break;
  }
  double sa = 0, sb = 0;
  for (double v : pa) sa += std::max(0.0, -v + at + 1.0);
  for (double v : pb) sb += std::max(0.0, v - at + 1.0);
  return {(1.0 - inst.lambda()) * (sa * wa + sb * wb), at};
}

/// Grid search over x in {k h : |k h| <= m}^n (n <= 2) of
/// hinge + lambda * sum pen(x_i), with b exact. Ties keep the first grid index.
inline OracleResult grid_oracle(const SvmInstance& inst, const std::function<double(double)>& pen, double m,
                                double resolution) {
  const std::size_t n = inst.n();
  if (n > 2) throw Refused("grid oracle refused: needs at most 2 features, got " + std::to_string(n));
  if (!(m > 0) || !(resolution > 0)) throw InvalidArgument("grid_oracle: box and resolution must be positive");
  const auto k = static_cast<long>(std::floor(m / resolution + 1e-9));
  std::vector<double> pts;
  std::vector<double> pvals;
  for (long i = -k; i <= k; ++i) {
    pts.push_back(static_cast<double>(i) * resolution);
    pvals.push_back(inst.lambda() * pen(pts.back()));
  }
  OracleResult best;
  Eigen::VectorXd x(static_cast<Eigen::Index>(n));
  auto consider = [&](double pen_sum) {
    const HingeMin h = min_hinge_over_b(inst, x);
    const double val = h.value + pen_sum;
    if (val < best.objective) {
      best.objective = val;
      best.x = x;
      best.b = h.b;
    }
  };
  if (n == 1) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      x(0) = pts[i];
      consider(pvals[i]);
    }
  } else {
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = 0; j < pts.size(); ++j) {
        x(0) = pts[i];
        x(1) = pts[j];
        consider(pvals[i] + pvals[j]);
      }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (best.x(static_cast<Eigen::Index>(i)) != 0.0) best.support.push_back(i);
  return best;
}

inline OracleResult grid_oracle(const SvmInstance& inst, const PenaltySpec& spec, double m, double resolution) {
  return grid_oracle(inst, [&spec](double t) { return value(spec, t); }, m, resolution);
}

inline OracleResult grid_oracle_capped(const SvmInstance& inst, const PenaltySpec& spec, double m, double resolution) {
  if (spec.kind() != PenaltyKind::Cap) throw UnsupportedKind("grid_oracle_capped: needs a cap penalty");
  return grid_oracle(inst, spec, m, resolution);
}

struct ScadProbe {
  bool equivalent;
  bool sandwich_ok;
  double scad_value;
  double l0_value;
};

/// Checks r_cap <= r_scad <= step on a grid for theta_cap = theta / a, then
/// compares the grid SCAD optimum with the l0 optimum within 2 h kappa.
inline ScadProbe scad_equivalence_probe(const SvmInstance& inst, double a, double theta, double m,
                                        double resolution = 1e-3) {
  const auto scad = PenaltySpec::scad(theta, a);
  const auto cap = PenaltySpec::cap(theta / a);
  bool sandwich = true;
  for (int k = 0; k <= 10000; ++k) {
    const double t = m * k / 10000.0;
    sandwich = sandwich && value(cap, t) <= value(scad, t) + 1e-12 && value(scad, t) <= step(t) + 1e-12;
  }
  const double l0 = support_enum_oracle(inst, m).objective;
  const double g = grid_oracle(inst, scad, m, resolution).objective;
  const double tol = 2.0 * resolution * kappa_svm(inst) + 1e-9;
  return {sandwich && std::fabs(g - l0) <= tol, sandwich, g, l0};
}

}  // namespace dcl0
