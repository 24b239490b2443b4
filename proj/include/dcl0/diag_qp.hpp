#pragma once

// Convex quadratic programs with a diagonal Hessian over an LP feasible set:
//
//   min  c^T v + sum_j q_j v_j^2   s.t. the rows and bounds of `base`,  q >= 0.
//
// Solved by conditional gradient with the simplex as linear-minimization
// oracle. Each step keeps the oracle vertices seen so far and re-minimizes the
// objective exactly over their convex hull (the fully corrective variant), so
// the objective never increases and polyhedral sets are handled in finitely
// many oracle calls. The run stops when the Frank-Wolfe gap
// <grad q(v), v - v_lp> certifies the requested tolerance.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dcl0/error.hpp"
#include "dcl0/simplex.hpp"

namespace dcl0 {

struct DiagQp {
  LinearProgram base;
  std::vector<double> quad_weights;

  void validate() const {
    base.validate();
    if (quad_weights.size() != base.n_vars()) throw InvalidArgument("DiagQp: quad_weights has wrong length");
    for (double q : quad_weights)
      if (!(q >= 0) || !std::isfinite(q)) throw InvalidArgument("DiagQp: quad_weights must be finite and nonnegative");
  }

  double evaluate(std::span<const double> v) const {
    double s = base.evaluate(v);
    for (std::size_t j = 0; j < v.size(); ++j) s += quad_weights[j] * v[j] * v[j];
    return s;
  }
};

struct QpSolution {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> point;
  double objective_value = std::numeric_limits<double>::quiet_NaN();
  double gap = std::numeric_limits<double>::infinity();
  std::size_t iterations = 0;
};

/// Thrown when the iteration budget runs out before the gap certificate.
class ToleranceNotMet : public Error {
 public:
  ToleranceNotMet(std::vector<double> best, double gap)
      : Error("diag qp: gap " + std::to_string(gap) + " above tolerance after iteration limit"),
        best_(std::move(best)),
        gap_(gap) {}
  const std::vector<double>& best_point() const noexcept { return best_; }
  double gap() const noexcept { return gap_; }

 private:
  std::vector<double> best_;
  double gap_;
};

namespace detail {

// min 0.5 mu^T H mu + g^T mu over the unit simplex, H symmetric PSD. Primal
// active-set method working in an orthonormal basis of {d : sum d = 0} on the
// free coordinates; zero-curvature descent directions are followed to the
// next bound. mu holds a feasible start and receives the result, which is
// never worse than the start.
inline void minimize_on_simplex(const Eigen::MatrixXd& h, const Eigen::VectorXd& g, Eigen::VectorXd& mu) {
  const Eigen::Index k = g.size();
  std::vector<bool> fixed(static_cast<std::size_t>(k));
  for (Eigen::Index j = 0; j < k; ++j) fixed[j] = mu(j) <= 0.0;
  const double scale = 1.0 + h.cwiseAbs().maxCoeff() + g.cwiseAbs().maxCoeff();
  Eigen::Index just_released = -1;
  std::vector<bool> frozen(static_cast<std::size_t>(k), false);

  for (int iter = 0; iter < 50 * (k + 10); ++iter) {
    std::vector<Eigen::Index> free;
    for (Eigen::Index j = 0; j < k; ++j)
      if (!fixed[j]) free.push_back(j);
    const auto p = static_cast<Eigen::Index>(free.size());
    const Eigen::VectorXd q = h * mu + g;

    Eigen::VectorXd dir = Eigen::VectorXd::Zero(p);
    bool ray = false;
    if (p > 1) {
      // Householder reflector sending e_0 to ones/sqrt(p); its other columns
      // span the sum-zero subspace.
      Eigen::VectorXd v = Eigen::VectorXd::Constant(p, -1.0 / std::sqrt(static_cast<double>(p)));
      v(0) += 1.0;
      v.normalize();
      const Eigen::MatrixXd refl = Eigen::MatrixXd::Identity(p, p) - 2.0 * v * v.transpose();
      const Eigen::MatrixXd z = refl.rightCols(p - 1);
      Eigen::MatrixXd hff(p, p);
      Eigen::VectorXd qf(p);
      for (Eigen::Index a = 0; a < p; ++a) {
        qf(a) = q(free[a]);
        for (Eigen::Index b = 0; b < p; ++b) hff(a, b) = h(free[a], free[b]);
      }
      const Eigen::MatrixXd hr = z.transpose() * hff * z;
      const Eigen::VectorXd gr = z.transpose() * qf;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hr);
      const Eigen::VectorXd ev = es.eigenvalues();
      const Eigen::MatrixXd u = es.eigenvectors();
      const double cut = 1e-12 * std::max(1.0, ev.cwiseAbs().maxCoeff());
      Eigen::VectorXd newton = Eigen::VectorXd::Zero(p - 1), flat = Eigen::VectorXd::Zero(p - 1);
      for (Eigen::Index c = 0; c < p - 1; ++c) {
        const double coef = u.col(c).dot(gr);
        if (ev(c) > cut)
          newton -= coef / ev(c) * u.col(c);
        else
          flat -= coef * u.col(c);
      }
      if (flat.norm() > 1e-13 * scale) {
        dir = z * flat;
        ray = true;
      } else {
        dir = z * newton;
      }
    }
    double decrease = 0;
    for (Eigen::Index a = 0; a < p; ++a) decrease -= q(free[a]) * dir(a);

    if (decrease <= 1e-15 * scale) {
      double nu = 0;
      for (Eigen::Index j : free) nu += q(j);
      nu /= static_cast<double>(p);
      Eigen::Index release = -1;
      double most = -1e-12 * scale;
      for (Eigen::Index j = 0; j < k; ++j) {
        if (!fixed[j] || frozen[j]) continue;
        const double red = q(j) - nu;
        if (red < most) {
          most = red;
          release = j;
        }
      }
      if (release < 0) return;
      fixed[release] = false;
      just_released = release;
      continue;
    }

    double alpha = ray ? std::numeric_limits<double>::infinity() : 1.0;
    Eigen::Index block = -1;
    for (Eigen::Index a = 0; a < p; ++a) {
      if (dir(a) < 0) {
        const double lim = -mu(free[a]) / dir(a);
        if (lim < alpha) {
          alpha = lim;
          block = a;
        }
      }
    }
    if (!std::isfinite(alpha)) return;
    if (block >= 0 && alpha <= 0 && free[block] == just_released) {
      // The release was numerically spurious: keep it at zero from now on.
      fixed[just_released] = true;
      frozen[just_released] = true;
      just_released = -1;
      continue;
    }
    for (Eigen::Index a = 0; a < p; ++a) mu(free[a]) = std::max(0.0, mu(free[a]) + alpha * dir(a));
    if (block >= 0) {
      mu(free[block]) = 0.0;
      fixed[free[block]] = true;
    }
    const double total = mu.sum();
    if (total > 0) mu /= total;
    if (alpha > 0) {
      just_released = -1;
      std::fill(frozen.begin(), frozen.end(), false);
    }
  }
}

}  // namespace detail

/// Conditional-gradient solve. `start`, when given, must be feasible and is
/// the first iterate; otherwise the LP over the linear part supplies it.
inline QpSolution solve_diag_qp(const DiagQp& qp, double tol, std::size_t max_iter,
                                std::optional<std::span<const double>> start = std::nullopt) {
  qp.validate();
  if (!(tol > 0)) throw InvalidArgument("solve_diag_qp: tol must be positive");
  const std::size_t n = qp.base.n_vars();

  bool has_quad = false;
  for (double q : qp.quad_weights) has_quad = has_quad || q > 0;
  SimplexSolver oracle(qp.base);
  if (!has_quad) {
    LpSolution lp = oracle.solve();
    return {lp.status, std::move(lp.point), lp.objective_value, lp.status == LpStatus::Optimal ? 0.0 : QpSolution{}.gap, 1};
  }

  std::vector<double> v;
  if (start) {
    if (start->size() != n) throw InvalidArgument("solve_diag_qp: start has wrong length");
    v.assign(start->begin(), start->end());
    if (qp.base.max_violation(v) > kFeasibilityTol) throw InvalidArgument("solve_diag_qp: start point is infeasible");
  } else {
    LpSolution lp = oracle.solve();
    if (lp.status != LpStatus::Optimal) return {lp.status, {}, lp.objective_value, QpSolution{}.gap, 1};
    v = std::move(lp.point);
  }

  const auto c = qp.base.objective();
  const auto& w = qp.quad_weights;
  std::vector<std::vector<double>> atoms{v};
  Eigen::VectorXd mu = Eigen::VectorXd::Ones(1);
  std::vector<double> grad(n);
  double gap = std::numeric_limits<double>::infinity();

  for (std::size_t it = 1; it <= max_iter; ++it) {
    for (std::size_t j = 0; j < n; ++j) grad[j] = c[j] + 2.0 * w[j] * v[j];
    LpSolution lp = oracle.solve(grad);
    if (lp.status != LpStatus::Optimal) return {lp.status, {}, lp.objective_value, QpSolution{}.gap, it};
    gap = 0;
    for (std::size_t j = 0; j < n; ++j) gap += grad[j] * (v[j] - lp.point[j]);
    if (gap <= tol) return {LpStatus::Optimal, v, qp.evaluate(v), std::max(gap, 0.0), it};

    bool known = false;
    for (const auto& a : atoms) known = known || a == lp.point;
    if (known) throw ToleranceNotMet(v, gap);
    atoms.push_back(std::move(lp.point));
    mu.conservativeResize(static_cast<Eigen::Index>(atoms.size()));
    mu(mu.size() - 1) = 0.0;

    const auto k = static_cast<Eigen::Index>(atoms.size());
    Eigen::MatrixXd h(k, k);
    Eigen::VectorXd g(k);
    for (Eigen::Index a = 0; a < k; ++a) {
      const auto& va = atoms[static_cast<std::size_t>(a)];
      double lin = 0;
      for (std::size_t j = 0; j < n; ++j) lin += c[j] * va[j];
      g(a) = lin;
      for (Eigen::Index b = a; b < k; ++b) {
        const auto& vb = atoms[static_cast<std::size_t>(b)];
        double s = 0;
        for (std::size_t j = 0; j < n; ++j)
          if (w[j] != 0.0) s += w[j] * va[j] * vb[j];
        h(a, b) = h(b, a) = 2.0 * s;
      }
    }
    // Plain Frank-Wolfe step toward the new atom with exact line search, kept
    // whenever the corrective solve does no better.
    Eigen::VectorXd mu_fw = mu;
    {
      const auto& sa = atoms.back();
      double lin = 0, quad = 0;
      for (std::size_t j = 0; j < n; ++j) {
        const double d = sa[j] - v[j];
        lin += grad[j] * d;
        quad += w[j] * d * d;
      }
      const double gamma = quad > 0 ? std::clamp(-lin / (2.0 * quad), 0.0, 1.0) : 1.0;
      mu_fw *= 1.0 - gamma;
      mu_fw(k - 1) += gamma;
    }
    detail::minimize_on_simplex(h, g, mu);
    auto master_value = [&](const Eigen::VectorXd& m) { return 0.5 * m.dot(h * m) + g.dot(m); };
    if (master_value(mu_fw) < master_value(mu)) mu = mu_fw;

    std::vector<std::vector<double>> kept;
    std::vector<double> kept_mu;
    std::fill(v.begin(), v.end(), 0.0);
    for (Eigen::Index a = 0; a < k; ++a) {
      if (mu(a) <= 0.0) continue;
      const auto& va = atoms[static_cast<std::size_t>(a)];
      for (std::size_t j = 0; j < n; ++j) v[j] += mu(a) * va[j];
      kept.push_back(va);
      kept_mu.push_back(mu(a));
    }
    atoms = std::move(kept);
    mu = Eigen::Map<Eigen::VectorXd>(kept_mu.data(), static_cast<Eigen::Index>(kept_mu.size()));
  }
  throw ToleranceNotMet(v, gap);
}

}  // namespace dcl0
