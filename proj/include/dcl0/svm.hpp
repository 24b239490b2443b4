#pragma once

// Linear SVM with a sparsity term:
//
//   min  (1-l) (sum xi / N_A + sum zeta / N_B) + l * sum_i r(x_i)
//   s.t. a_j^T x - b >= 1 - xi_j,  -(b_j^T x - b) >= 1 - zeta_j,  xi, zeta >= 0
//
// where rows a_j of A are the +1 class and rows b_j of B the -1 class. The
// builders below produce the convex subproblems of the four DCA schemes; all
// share the variable layout [x | b | xi | zeta | aux], aux being z or t.

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dcl0/diag_qp.hpp"
#include "dcl0/error.hpp"
#include "dcl0/penalty.hpp"
#include "dcl0/simplex.hpp"

namespace dcl0 {

inline constexpr double kSelectThreshold = 1e-5;
inline constexpr double kDefaultBox = 1e3;
inline constexpr double kDefaultEpsPert = 1e-4;

class SvmInstance {
 public:
  SvmInstance(Eigen::MatrixXd a, Eigen::MatrixXd b, double lambda) : a_(std::move(a)), b_(std::move(b)), lambda_(lambda) {
    if (a_.rows() < 1 || b_.rows() < 1) throw InvalidArgument("SvmInstance: both classes need at least one point");
    if (a_.cols() != b_.cols()) throw InvalidArgument("SvmInstance: A and B have different feature counts");
    if (a_.cols() < 1) throw InvalidArgument("SvmInstance: no features");
    if (!(lambda > 0 && lambda < 1)) throw InvalidArgument("SvmInstance: lambda must lie in (0, 1)");
    if (!a_.allFinite() || !b_.allFinite()) throw InvalidArgument("SvmInstance: non-finite feature value");
  }

  const Eigen::MatrixXd& a() const noexcept { return a_; }
  const Eigen::MatrixXd& b() const noexcept { return b_; }
  double lambda() const noexcept { return lambda_; }
  std::size_t n() const noexcept { return static_cast<std::size_t>(a_.cols()); }
  std::size_t n_a() const noexcept { return static_cast<std::size_t>(a_.rows()); }
  std::size_t n_b() const noexcept { return static_cast<std::size_t>(b_.rows()); }

  SvmInstance with_lambda(double lambda) const { return SvmInstance(a_, b_, lambda); }

 private:
  Eigen::MatrixXd a_;
  Eigen::MatrixXd b_;
  double lambda_;
};

struct ModelIterate {
  Eigen::VectorXd x;
  double b = 0;
};

inline Eigen::VectorXd slack_a(const SvmInstance& inst, const Eigen::VectorXd& x, double b) {
  return (-(inst.a() * x).array() + b + 1.0).cwiseMax(0.0).matrix();
}

inline Eigen::VectorXd slack_b(const SvmInstance& inst, const Eigen::VectorXd& x, double b) {
  return ((inst.b() * x).array() - b + 1.0).cwiseMax(0.0).matrix();
}

inline void check_dim(const SvmInstance& inst, const Eigen::VectorXd& x) {
  if (static_cast<std::size_t>(x.size()) != inst.n()) throw InvalidArgument("svm: x has wrong dimension");
}

inline double hinge_loss(const SvmInstance& inst, const Eigen::VectorXd& x, double b) {
  check_dim(inst, x);
  return (1.0 - inst.lambda()) *
         (slack_a(inst, x, b).sum() / static_cast<double>(inst.n_a()) + slack_b(inst, x, b).sum() / static_cast<double>(inst.n_b()));
}

inline double l0_objective(const SvmInstance& inst, const Eigen::VectorXd& x, double b) {
  double nnz = 0;
  for (double v : x) nnz += step(v);
  return hinge_loss(inst, x, b) + inst.lambda() * nnz;
}

inline double approx_objective(const SvmInstance& inst, const PenaltySpec& spec, const Eigen::VectorXd& x, double b) {
  double pen = 0;
  for (double v : x) pen += value(spec, v);
  return hinge_loss(inst, x, b) + inst.lambda() * pen;
}

// Objective tracked by the reweighted-l2 scheme: r applied to sqrt(x^2 + eps).
inline double perturbed_objective(const SvmInstance& inst, const PenaltySpec& spec, double eps_pert,
                                  const Eigen::VectorXd& x, double b) {
  double pen = 0;
  for (double v : x) pen += value(spec, std::sqrt(v * v + eps_pert));
  return hinge_loss(inst, x, b) + inst.lambda() * pen;
}

// Lifted objective over (x, b, xi, zeta, z) with |x| <= z; r is evaluated on z.
inline double lifted_objective(const SvmInstance& inst, const PenaltySpec& spec, const Eigen::VectorXd& xi,
                               const Eigen::VectorXd& zeta, const Eigen::VectorXd& z) {
  double pen = 0;
  for (double v : z) pen += value(spec, v);
  return (1.0 - inst.lambda()) * (xi.sum() / static_cast<double>(inst.n_a()) + zeta.sum() / static_cast<double>(inst.n_b())) +
         inst.lambda() * pen;
}

/// Same, with slacks given explicitly rather than recomputed.
inline double slack_objective(const SvmInstance& inst, const PenaltySpec& spec, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& xi, const Eigen::VectorXd& zeta) {
  double pen = 0;
  for (double v : x) pen += value(spec, v);
  return (1.0 - inst.lambda()) * (xi.sum() / static_cast<double>(inst.n_a()) + zeta.sum() / static_cast<double>(inst.n_b())) +
         inst.lambda() * pen;
}

struct Layout {
  std::size_t n, n_a, n_b;
  bool aux;

  explicit Layout(const SvmInstance& inst, bool with_aux)
      : n(inst.n()), n_a(inst.n_a()), n_b(inst.n_b()), aux(with_aux) {}

  std::size_t x(std::size_t i) const { return i; }
  std::size_t b() const { return n; }
  std::size_t xi(std::size_t j) const { return n + 1 + j; }
  std::size_t zeta(std::size_t j) const { return n + 1 + n_a + j; }
  std::size_t z(std::size_t i) const { return n + 1 + n_a + n_b + i; }
  std::size_t size() const { return n + 1 + n_a + n_b + (aux ? n : 0); }
};

inline ModelIterate iterate_from(const Layout& lay, std::span<const double> v) {
  ModelIterate m{Eigen::VectorXd(static_cast<Eigen::Index>(lay.n)), v[lay.b()]};
  for (std::size_t i = 0; i < lay.n; ++i) m.x(static_cast<Eigen::Index>(i)) = v[lay.x(i)];
  return m;
}

// Point (x, b, closed-form slacks[, aux]) in the layout.
inline std::vector<double> lift(const SvmInstance& inst, const Layout& lay, const ModelIterate& m,
                                std::span<const double> aux = {}) {
  std::vector<double> v(lay.size(), 0.0);
  const Eigen::VectorXd xa = slack_a(inst, m.x, m.b), xb = slack_b(inst, m.x, m.b);
  for (std::size_t i = 0; i < lay.n; ++i) v[lay.x(i)] = m.x(static_cast<Eigen::Index>(i));
  v[lay.b()] = m.b;
  for (std::size_t j = 0; j < lay.n_a; ++j) v[lay.xi(j)] = xa(static_cast<Eigen::Index>(j));
  for (std::size_t j = 0; j < lay.n_b; ++j) v[lay.zeta(j)] = xb(static_cast<Eigen::Index>(j));
  if (lay.aux)
    for (std::size_t i = 0; i < aux.size(); ++i) v[lay.z(i)] = aux[i];
  return v;
}

namespace detail {

inline std::vector<double> hinge_costs(const SvmInstance& inst, const Layout& lay) {
  std::vector<double> c(lay.size(), 0.0);
  const double lam = inst.lambda();
  for (std::size_t j = 0; j < lay.n_a; ++j) c[lay.xi(j)] = (1.0 - lam) / static_cast<double>(lay.n_a);
  for (std::size_t j = 0; j < lay.n_b; ++j) c[lay.zeta(j)] = (1.0 - lam) / static_cast<double>(lay.n_b);
  return c;
}

// Margin rows plus slack bounds and the optional box on x. Objective holds the
// hinge part only.
inline LinearProgram margin_lp(const SvmInstance& inst, const Layout& lay, std::optional<double> x_box) {
  if (x_box && !(*x_box > 0)) throw InvalidArgument("svm: box bound must be positive");
  LinearProgram lp(lay.size());
  lp.set_objective(hinge_costs(inst, lay));

  for (std::size_t j = 0; j < lay.n_a; ++j) {
    std::vector<double> row(lay.size(), 0.0);
    for (std::size_t i = 0; i < lay.n; ++i) row[lay.x(i)] = -inst.a()(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
    row[lay.b()] = 1.0;
    row[lay.xi(j)] = -1.0;
    lp.add_row(std::move(row), -1.0);
  }
  for (std::size_t j = 0; j < lay.n_b; ++j) {
    std::vector<double> row(lay.size(), 0.0);
    for (std::size_t i = 0; i < lay.n; ++i) row[lay.x(i)] = inst.b()(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
    row[lay.b()] = -1.0;
    row[lay.zeta(j)] = -1.0;
    lp.add_row(std::move(row), -1.0);
  }
  for (std::size_t j = 0; j < lay.n_a; ++j) lp.set_lower(lay.xi(j), 0.0);
  for (std::size_t j = 0; j < lay.n_b; ++j) lp.set_lower(lay.zeta(j), 0.0);
  if (x_box)
    for (std::size_t i = 0; i < lay.n; ++i) lp.set_bounds(lay.x(i), -*x_box, *x_box);
  return lp;
}

// |x_i| <= aux_i rows.
inline void add_abs_rows(LinearProgram& lp, const Layout& lay) {
  for (std::size_t i = 0; i < lay.n; ++i) {
    std::vector<double> row(lay.size(), 0.0);
    row[lay.x(i)] = 1.0;
    row[lay.z(i)] = -1.0;
    lp.add_row(row, 0.0);
    row[lay.x(i)] = -1.0;
    lp.add_row(std::move(row), 0.0);
  }
}

inline void check_vec(const SvmInstance& inst, std::span<const double> v, const char* what) {
  if (v.size() != inst.n()) throw InvalidArgument(std::string("svm: ") + what + " has wrong dimension");
}

}  // namespace detail

/// Hinge loss alone (no sparsity term).
inline LinearProgram build_hinge_lp(const SvmInstance& inst, std::optional<double> x_box = std::nullopt) {
  return detail::margin_lp(inst, Layout(inst, false), x_box);
}

inline std::vector<double> dca1_objective(const SvmInstance& inst, const PenaltySpec& spec, std::span<const double> zbar) {
  detail::check_vec(inst, zbar, "zbar");
  const Layout lay(inst, true);
  std::vector<double> c = detail::hinge_costs(inst, lay);
  const double pen = inst.lambda() * eta(spec);
  for (std::size_t i = 0; i < lay.n; ++i) {
    c[lay.z(i)] = pen;
    c[lay.x(i)] = -zbar[i];
  }
  return c;
}

inline LinearProgram build_dca1_lp(const SvmInstance& inst, const PenaltySpec& spec, std::span<const double> zbar,
                                   std::optional<double> x_box = std::nullopt) {
  if (spec.kind() == PenaltyKind::PiL) throw UnsupportedKind("build_dca1_lp: pil needs the dca4 scheme");
  const Layout lay(inst, true);
  LinearProgram lp = detail::margin_lp(inst, lay, x_box);
  detail::add_abs_rows(lp, lay);
  for (std::size_t i = 0; i < lay.n; ++i) lp.set_lower(lay.z(i), 0.0);
  lp.set_objective(dca1_objective(inst, spec, zbar));
  return lp;
}

inline std::vector<double> dca2_objective(const SvmInstance& inst, std::span<const double> w) {
  detail::check_vec(inst, w, "w");
  const Layout lay(inst, true);
  std::vector<double> c = detail::hinge_costs(inst, lay);
  for (std::size_t i = 0; i < lay.n; ++i) {
    if (!(w[i] >= 0) || !std::isfinite(w[i])) throw InvalidArgument("build_dca2_lp: weights must be finite and nonnegative");
    c[lay.z(i)] = w[i];
  }
  return c;
}

inline LinearProgram build_dca2_lp(const SvmInstance& inst, std::span<const double> w,
                                   std::optional<double> x_box = std::nullopt) {
  const Layout lay(inst, true);
  LinearProgram lp = detail::margin_lp(inst, lay, x_box);
  detail::add_abs_rows(lp, lay);
  for (std::size_t i = 0; i < lay.n; ++i) lp.set_lower(lay.z(i), 0.0);
  lp.set_objective(dca2_objective(inst, w));
  return lp;
}

inline DiagQp build_dca3_qp(const SvmInstance& inst, std::span<const double> w, double x_box = kDefaultBox) {
  detail::check_vec(inst, w, "w");
  const Layout lay(inst, false);
  DiagQp qp{detail::margin_lp(inst, lay, x_box), std::vector<double>(lay.size(), 0.0)};
  for (std::size_t i = 0; i < lay.n; ++i) {
    if (!(w[i] >= 0) || !std::isfinite(w[i])) throw InvalidArgument("build_dca3_qp: weights must be finite and nonnegative");
    qp.quad_weights[lay.x(i)] = w[i];
  }
  return qp;
}

inline std::vector<double> dca4_objective(const SvmInstance& inst, const PenaltySpec& spec, std::span<const double> zbar) {
  if (spec.kind() != PenaltyKind::PiL) throw UnsupportedKind("build_dca4_lp: needs a pil penalty");
  detail::check_vec(inst, zbar, "zbar");
  const Layout lay(inst, true);
  std::vector<double> c = detail::hinge_costs(inst, lay);
  const double slope = inst.lambda() * spec.theta() / (spec.a() - 1.0);
  for (std::size_t i = 0; i < lay.n; ++i) {
    c[lay.z(i)] = slope;
    c[lay.x(i)] = -zbar[i];
  }
  return c;
}

inline LinearProgram build_dca4_lp(const SvmInstance& inst, const PenaltySpec& spec, std::span<const double> zbar,
                                   std::optional<double> x_box = std::nullopt) {
  const Layout lay(inst, true);
  std::vector<double> c = dca4_objective(inst, spec, zbar);
  LinearProgram lp = detail::margin_lp(inst, lay, x_box);
  detail::add_abs_rows(lp, lay);
  for (std::size_t i = 0; i < lay.n; ++i) lp.set_lower(lay.z(i), 1.0 / spec.theta());
  lp.set_objective(std::move(c));
  return lp;
}

/// max_i (sum_j |A_ji| / N_A + sum_j |B_ji| / N_B)
inline double data_spread(const SvmInstance& inst) {
  const Eigen::RowVectorXd s = inst.a().cwiseAbs().colwise().sum() / static_cast<double>(inst.n_a()) +
                               inst.b().cwiseAbs().colwise().sum() / static_cast<double>(inst.n_b());
  return s.maxCoeff();
}

inline double theta_star(const SvmInstance& inst) {
  return (1.0 - inst.lambda()) * data_spread(inst) / inst.lambda();
}

/// One-sided partial derivative in x_i of hinge_loss + lambda * sum r(x_j).
inline double one_sided_deriv(const SvmInstance& inst, const PenaltySpec& spec, const Eigen::VectorXd& x, double b,
                              std::size_t i, Side side) {
  check_dim(inst, x);
  if (i >= inst.n()) throw InvalidArgument("one_sided_deriv: index out of range");
  const auto ii = static_cast<Eigen::Index>(i);
  auto term = [side](double w, double dw, double scale) {
    if (std::fabs(w) > 1e-12 * scale) return w > 0 ? dw : 0.0;
    return side == Side::Right ? std::max(0.0, dw) : std::min(0.0, dw);
  };
  double sa = 0, sb = 0;
  for (Eigen::Index j = 0; j < inst.a().rows(); ++j) {
    const double dot = inst.a().row(j).dot(x);
    const double scale = 1.0 + std::fabs(b) + inst.a().row(j).cwiseAbs().dot(x.cwiseAbs());
    sa += term(-dot + b + 1.0, -inst.a()(j, ii), scale);
  }
  for (Eigen::Index j = 0; j < inst.b().rows(); ++j) {
    const double dot = inst.b().row(j).dot(x);
    const double scale = 1.0 + std::fabs(b) + inst.b().row(j).cwiseAbs().dot(x.cwiseAbs());
    sb += term(dot - b + 1.0, inst.b()(j, ii), scale);
  }
  const double hinge =
      (1.0 - inst.lambda()) * (sa / static_cast<double>(inst.n_a()) + sb / static_cast<double>(inst.n_b()));
  return hinge + inst.lambda() * derivative(spec, x(ii), side);
}

/// Percentage of points on the correct side of x^T u = b; ties are errors.
inline double pwco(const Eigen::VectorXd& x, double b, const Eigen::MatrixXd& features, std::span<const int> labels) {
  if (features.rows() == 0) throw DomainError("pwco: empty dataset");
  if (static_cast<std::size_t>(features.rows()) != labels.size()) throw InvalidArgument("pwco: label count mismatch");
  if (features.cols() != x.size()) throw InvalidArgument("pwco: feature dimension mismatch");
  const Eigen::VectorXd s = (features * x).array() - b;
  std::size_t ok = 0;
  for (Eigen::Index j = 0; j < s.size(); ++j) {
    const int y = labels[static_cast<std::size_t>(j)];
    if ((y > 0 && s(j) > 0) || (y < 0 && s(j) < 0)) ++ok;
  }
  return 100.0 * static_cast<double>(ok) / static_cast<double>(s.size());
}

inline double pwco(const Eigen::VectorXd& x, double b, const SvmInstance& inst) {
  Eigen::MatrixXd f(inst.a().rows() + inst.b().rows(), inst.a().cols());
  f << inst.a(), inst.b();
  std::vector<int> y(static_cast<std::size_t>(f.rows()), -1);
  std::fill(y.begin(), y.begin() + inst.a().rows(), 1);
  return pwco(x, b, f, y);
}

inline std::vector<std::size_t> selected_features(const Eigen::VectorXd& x) {
  std::vector<std::size_t> idx;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (std::fabs(x(i)) > kSelectThreshold) idx.push_back(static_cast<std::size_t>(i));
  return idx;
}

}  // namespace dcl0
