#pragma once

// The four DCA schemes for the sparse SVM plus the updating-theta outer loop
// for capped-l1.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dcl0/dca.hpp"
#include "dcl0/diag_qp.hpp"
#include "dcl0/penalty.hpp"
#include "dcl0/simplex.hpp"
#include "dcl0/svm.hpp"

namespace dcl0 {

enum class Scheme { Dca1, Dca2, Dca3, Dca4 };

inline const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::Dca1: return "dca1";
    case Scheme::Dca2: return "dca2";
    case Scheme::Dca3: return "dca3";
    case Scheme::Dca4: return "dca4";
  }
  return "?";
}

inline Scheme parse_scheme(std::string_view s) {
  if (s == "dca1") return Scheme::Dca1;
  if (s == "dca2") return Scheme::Dca2;
  if (s == "dca3") return Scheme::Dca3;
  if (s == "dca4") return Scheme::Dca4;
  throw ParseError("unknown scheme '" + std::string(s) + "' (expected dca1, dca2, dca3 or dca4)");
}

inline bool compatible(Scheme s, const PenaltySpec& spec) {
  return (s == Scheme::Dca4) == (spec.kind() == PenaltyKind::PiL);
}

inline void require_compatible(Scheme s, const PenaltySpec& spec) {
  if (!compatible(s, spec))
    throw InvalidArgument(std::string("scheme ") + to_string(s) + " cannot be paired with penalty " +
                          std::string(kind_name(spec.kind())) + (s == Scheme::Dca4 ? " (dca4 needs pil)" : " (pil needs dca4)"));
}

struct SchemeOptions {
  std::optional<double> x_box;  // |x_i| <= x_box in every subproblem
  double eps_pert = kDefaultEpsPert;
  double qp_tol = 1e-6;
  std::size_t qp_max_iter = 20000;
};

struct FsResult {
  ModelIterate model;
  DcaTrace trace;
  double objective = 0;  // approx objective (l0 objective for updating-theta runs)
  double theta = 0;      // theta of the penalty at the end of the run
  std::vector<double> theta_trace;
  std::size_t start_index = 0;
};

inline StepSize iterate_step(const SvmInstance& inst, const ModelIterate& prev, const ModelIterate& next) {
  const Eigen::VectorXd xa0 = slack_a(inst, prev.x, prev.b), xb0 = slack_b(inst, prev.x, prev.b);
  const Eigen::VectorXd xa1 = slack_a(inst, next.x, next.b), xb1 = slack_b(inst, next.x, next.b);
  return {(next.x - prev.x).norm() + std::fabs(next.b - prev.b) + (xa1 - xa0).norm() + (xb1 - xb0).norm(),
          prev.x.norm() + std::fabs(prev.b) + xa0.norm() + xb0.norm()};
}

/// Minimizer of the hinge loss alone: the default start point.
inline ModelIterate hinge_start(const SvmInstance& inst, std::optional<double> x_box = std::nullopt) {
  const LpSolution s = solve_lp(build_hinge_lp(inst, x_box));
  if (s.status != LpStatus::Optimal) throw NumericalError(std::string("hinge lp: ") + to_string(s.status));
  return iterate_from(Layout(inst, false), s.point);
}

inline ModelIterate random_start(std::size_t n, std::uint64_t seed, std::optional<double> x_box = std::nullopt) {
  std::mt19937_64 rng(seed);
  const double r = x_box ? std::min(1.0, *x_box) : 1.0;
  std::uniform_real_distribution<double> u(-r, r);
  ModelIterate m{Eigen::VectorXd(static_cast<Eigen::Index>(n)), 0};
  for (Eigen::Index i = 0; i < m.x.size(); ++i) m.x(i) = u(rng);
  m.b = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
  return m;
}

namespace detail {

inline ModelIterate solve_or_throw(SimplexSolver& solver, std::span<const double> c, const Layout& lay) {
  LpSolution s = solver.solve(c);
  if (s.status != LpStatus::Optimal) throw NumericalError(std::string("subproblem lp: ") + to_string(s.status));
  return iterate_from(lay, s.point);
}

inline std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace detail

/// One DCA run from a given start.
inline FsResult run_scheme_from(const SvmInstance& inst, const PenaltySpec& spec, Scheme scheme, const DcaConfig& cfg,
                                ModelIterate x0, const SchemeOptions& opt = {}) {
  require_compatible(scheme, spec);
  check_dim(inst, x0.x);
  const double lam = inst.lambda();
  const std::size_t n = inst.n();
  auto change = [&inst](const ModelIterate& p, const ModelIterate& q) { return iterate_step(inst, p, q); };
  auto approx = [&](const ModelIterate& m) { return approx_objective(inst, spec, m.x, m.b); };
  std::vector<double> zero(n, 0.0);
  DcaResult<ModelIterate> res;

  switch (scheme) {
    case Scheme::Dca1: {
      const Layout lay(inst, true);
      SimplexSolver solver(build_dca1_lp(inst, spec, zero, opt.x_box));
      auto subgrad = [&](const ModelIterate& m) {
        std::vector<double> zb(n);
        for (std::size_t i = 0; i < n; ++i) zb[i] = lam * psi_subgrad(spec, m.x(static_cast<Eigen::Index>(i)));
        return zb;
      };
      auto solve = [&](const ModelIterate&, const std::vector<double>& zb) {
        return detail::solve_or_throw(solver, dca1_objective(inst, spec, zb), lay);
      };
      res = run_dca(subgrad, solve, approx, change, std::move(x0), cfg);
      break;
    }
    case Scheme::Dca2: {
      const Layout lay(inst, true);
      SimplexSolver solver(build_dca2_lp(inst, zero, opt.x_box));
      auto weights = [&](const ModelIterate& m) {
        std::vector<double> w(n);
        for (std::size_t i = 0; i < n; ++i) w[i] = lam * l1_weight(spec, std::fabs(m.x(static_cast<Eigen::Index>(i))));
        return w;
      };
      auto solve = [&](const ModelIterate&, const std::vector<double>& w) {
        return detail::solve_or_throw(solver, dca2_objective(inst, w), lay);
      };
      res = run_dca(weights, solve, approx, change, std::move(x0), cfg);
      break;
    }
    case Scheme::Dca3: {
      const double box = opt.x_box.value_or(kDefaultBox);
      x0.x = x0.x.cwiseMax(-box).cwiseMin(box);
      const Layout lay(inst, false);
      auto perturbed = [&](const ModelIterate& m) { return perturbed_objective(inst, spec, opt.eps_pert, m.x, m.b); };
      auto weights = [&](const ModelIterate& m) {
        std::vector<double> w(n);
        for (std::size_t i = 0; i < n; ++i) {
          const double xi = m.x(static_cast<Eigen::Index>(i));
          w[i] = lam * l2_weight(spec, opt.eps_pert, xi * xi);
        }
        return w;
      };
      auto solve = [&](const ModelIterate& m, const std::vector<double>& w) {
        const DiagQp qp = build_dca3_qp(inst, w, box);
        const std::vector<double> start = lift(inst, lay, m);
        try {
          const QpSolution s = solve_diag_qp(qp, opt.qp_tol, opt.qp_max_iter, std::span<const double>(start));
          if (s.status != LpStatus::Optimal) throw NumericalError(std::string("subproblem qp: ") + to_string(s.status));
          return iterate_from(lay, s.point);
        } catch (const ToleranceNotMet& e) {
          return iterate_from(lay, e.best_point());
        }
      };
      res = run_dca(weights, solve, perturbed, change, std::move(x0), cfg);
      break;
    }
    case Scheme::Dca4: {
      const Layout lay(inst, true);
      SimplexSolver solver(build_dca4_lp(inst, spec, zero, opt.x_box));
      auto subgrad = [&](const ModelIterate& m) {
        std::vector<double> zb(n);
        for (std::size_t i = 0; i < n; ++i) zb[i] = lam * pil_psi_subgrad(spec, m.x(static_cast<Eigen::Index>(i)));
        return zb;
      };
      auto solve = [&](const ModelIterate&, const std::vector<double>& zb) {
        return detail::solve_or_throw(solver, dca4_objective(inst, spec, zb), lay);
      };
      res = run_dca(subgrad, solve, approx, change, std::move(x0), cfg);
      break;
    }
  }
  FsResult out;
  out.objective = approx_objective(inst, spec, res.state.x, res.state.b);
  out.model = std::move(res.state);
  out.trace = std::move(res.trace);
  out.theta = spec.theta();
  return out;
}

/// Start 0 uses the hinge-loss minimizer; further starts are random in
/// [-1, 1]^n x [-1, 1] seeded by cfg.seed + index. Best objective wins.
inline FsResult run_scheme(const SvmInstance& inst, const PenaltySpec& spec, Scheme scheme, const DcaConfig& cfg,
                           const SchemeOptions& opt = {}) {
  cfg.validate();
  require_compatible(scheme, spec);
  const std::optional<double> start_box = scheme == Scheme::Dca3 ? std::optional(opt.x_box.value_or(kDefaultBox)) : opt.x_box;
  return best_of_starts(
      cfg.n_starts, cfg.seed,
      [&](std::size_t i, std::uint64_t s) {
        ModelIterate x0 = i == 0 ? hinge_start(inst, start_box) : random_start(inst.n(), s, start_box);
        FsResult r = run_scheme_from(inst, spec, scheme, cfg, std::move(x0), opt);
        r.start_index = i;
        return r;
      },
      [](const FsResult& r) { return r.objective; });
}

/// Capped-l1 DCA1 with theta raised along the iterations, capped at theta_star.
inline FsResult updating_theta_from(const SvmInstance& inst, double delta_theta, const DcaConfig& cfg, ModelIterate x,
                                    const SchemeOptions& opt = {}) {
  if (!(delta_theta > 0)) throw InvalidArgument("updating theta: delta_theta must be positive");
  cfg.validate();
  check_dim(inst, x.x);
  const std::size_t n = inst.n();
  const double lam = inst.lambda();
  const double ts = theta_star(inst);
  FsResult out;
  if (!(ts > 0)) {
    // All features are zero: nothing can be selected.
    out.model = {Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n)), x.b};
    out.objective = l0_objective(inst, out.model.x, out.model.b);
    out.trace.objectives.push_back(out.objective);
    out.trace.terminated_by = Termination::FixedPoint;
    return out;
  }

  const Layout lay(inst, true);
  SimplexSolver solver(build_dca1_lp(inst, PenaltySpec::cap(1.0), std::vector<double>(n, 0.0), opt.x_box));
  double alpha = std::numeric_limits<double>::infinity();
  double theta = 0;
  out.trace.objectives.push_back(l0_objective(inst, x.x, x.b));
  out.trace.terminated_by = Termination::MaxIter;

  for (std::size_t k = 1; k <= cfg.max_iter; ++k) {
    double amax = -1;
    for (double v : x.x)
      if (std::fabs(v) > 0 && std::fabs(v) < alpha) amax = std::max(amax, std::fabs(v));
    if (amax >= 0) alpha = amax;
    theta = std::min(ts, std::max(1.0 / alpha, theta + delta_theta));
    const PenaltySpec spec = PenaltySpec::cap(theta);

    std::vector<double> zb(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double xi = x.x(static_cast<Eigen::Index>(i));
      const double ax = std::fabs(xi);
      if (ax > alpha) {
        zb[i] = detail::sign(xi) * lam * theta;
      } else if (ax == alpha) {
        const double fm = one_sided_deriv(inst, spec, x.x, x.b, i, Side::Left);
        const double fp = one_sided_deriv(inst, spec, x.x, x.b, i, Side::Right);
        if (xi * (fm + fp) < 0) zb[i] = detail::sign(xi) * lam * theta;
      }
    }
    ModelIterate next;
    try {
      next = detail::solve_or_throw(solver, dca1_objective(inst, spec, zb), lay);
    } catch (const Error& e) {
      std::throw_with_nested(DcaIterationError(k, e.what()));
    }
    const StepSize st = iterate_step(inst, x, next);
    x = std::move(next);
    out.theta_trace.push_back(theta);
    out.trace.objectives.push_back(l0_objective(inst, x.x, x.b));
    out.trace.iterate_change.push_back(st.delta);
    out.trace.iterations = k;
    if (stop_check(st, cfg.stop_tol)) {
      out.trace.terminated_by = Termination::Tolerance;
      break;
    }
  }
  out.objective = l0_objective(inst, x.x, x.b);
  out.theta = theta;
  out.model = std::move(x);
  return out;
}

inline FsResult updating_theta_run(const SvmInstance& inst, double delta_theta, const DcaConfig& cfg,
                                   const SchemeOptions& opt = {}) {
  cfg.validate();
  return best_of_starts(
      cfg.n_starts, cfg.seed,
      [&](std::size_t i, std::uint64_t s) {
        ModelIterate x0 = i == 0 ? hinge_start(inst, opt.x_box) : random_start(inst.n(), s, opt.x_box);
        FsResult r = updating_theta_from(inst, delta_theta, cfg, std::move(x0), opt);
        r.start_index = i;
        return r;
      },
      [](const FsResult& r) { return r.objective; });
}

}  // namespace dcl0
