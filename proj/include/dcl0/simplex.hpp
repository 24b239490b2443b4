#pragma once

// Dense two-phase primal simplex for
//
//   min  c^T v   s.t.  row_i . v <= rhs_i,   lower_j <= v_j <= upper_j
//
// with optional (possibly infinite) bounds. Pricing is Dantzig's rule; after a
// run of degenerate pivots the solver switches to Bland's smallest-index rule
// until the objective moves again, so it cannot cycle. Everything is
// deterministic for a fixed input.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dcl0/error.hpp"

namespace dcl0 {

inline constexpr double kFeasibilityTol = 1e-8;
inline constexpr double kPivotTol = 1e-11;

class LinearProgram {
 public:
  struct Row {
    std::vector<double> coef;
    double rhs;
  };

  explicit LinearProgram(std::size_t n_vars)
      : n_vars_(n_vars), objective_(n_vars, 0.0), lower_(n_vars), upper_(n_vars) {}

  std::size_t n_vars() const noexcept { return n_vars_; }
  std::size_t n_rows() const noexcept { return rows_.size(); }

  std::span<double> objective() noexcept { return objective_; }
  std::span<const double> objective() const noexcept { return objective_; }
  void set_objective(std::vector<double> c) {
    if (c.size() != n_vars_) throw InvalidArgument("LinearProgram: objective has wrong length");
    objective_ = std::move(c);
  }

  const std::vector<Row>& rows() const noexcept { return rows_; }

  /// Adds coef . v <= rhs.
  void add_row(std::vector<double> coef, double rhs) {
    if (coef.size() != n_vars_) throw InvalidArgument("LinearProgram: row has wrong length");
    rows_.push_back({std::move(coef), rhs});
  }

  void set_lower(std::size_t j, std::optional<double> v) { lower_.at(j) = v; }
  void set_upper(std::size_t j, std::optional<double> v) { upper_.at(j) = v; }
  void set_bounds(std::size_t j, std::optional<double> lo, std::optional<double> hi) {
    set_lower(j, lo);
    set_upper(j, hi);
  }
  std::optional<double> lower(std::size_t j) const { return lower_.at(j); }
  std::optional<double> upper(std::size_t j) const { return upper_.at(j); }

  void validate() const {
    if (objective_.size() != n_vars_) throw InvalidArgument("LinearProgram: objective has wrong length");
    for (const auto& r : rows_)
      if (r.coef.size() != n_vars_) throw InvalidArgument("LinearProgram: row has wrong length");
    for (std::size_t j = 0; j < n_vars_; ++j)
      if (lower_[j] && upper_[j] && *lower_[j] > *upper_[j])
        throw InvalidArgument("LinearProgram: lower bound exceeds upper bound for variable " + std::to_string(j));
  }

  double evaluate(std::span<const double> v) const {
    double s = 0;
    for (std::size_t j = 0; j < n_vars_; ++j) s += objective_[j] * v[j];
    return s;
  }

  /// Largest violation of any row or bound at v (0 when feasible).
  double max_violation(std::span<const double> v) const {
    double worst = 0;
    for (const auto& r : rows_) {
      double s = 0;
      for (std::size_t j = 0; j < n_vars_; ++j) s += r.coef[j] * v[j];
      worst = std::max(worst, s - r.rhs);
    }
    for (std::size_t j = 0; j < n_vars_; ++j) {
      if (lower_[j]) worst = std::max(worst, *lower_[j] - v[j]);
      if (upper_[j]) worst = std::max(worst, v[j] - *upper_[j]);
    }
    return worst;
  }

 private:
  std::size_t n_vars_;
  std::vector<double> objective_;
  std::vector<Row> rows_;
  std::vector<std::optional<double>> lower_;
  std::vector<std::optional<double>> upper_;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
  }
  return "?";
}

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> point;  // empty unless Optimal
  double objective_value = std::numeric_limits<double>::quiet_NaN();
};

/// Simplex over a fixed feasible set. The first solve() runs both phases;
/// later calls with a new objective restart phase 2 from the last basis.
class SimplexSolver {
 public:
  explicit SimplexSolver(const LinearProgram& lp) : lp_(lp) {
    lp_.validate();
    build_standard_form();
  }

  LpSolution solve() { return solve(lp_.objective()); }

  LpSolution solve(std::span<const double> objective) {
    if (objective.size() != lp_.n_vars()) throw InvalidArgument("SimplexSolver: objective has wrong length");
    lp_.set_objective(std::vector<double>(objective.begin(), objective.end()));
    if (!phase1_done_) run_phase1();
    if (infeasible_) return {LpStatus::Infeasible, {}, std::numeric_limits<double>::quiet_NaN()};
    if (pivots_since_refactor_ > kRefactorEvery) refactor();

    set_phase2_costs();
    if (!iterate(false)) return {LpStatus::Unbounded, {}, -std::numeric_limits<double>::infinity()};

    std::vector<double> v = extract();
    if (lp_.max_violation(v) > kFeasibilityTol) {
      refactor();
      set_phase2_costs();
      if (!iterate(false)) return {LpStatus::Unbounded, {}, -std::numeric_limits<double>::infinity()};
      v = extract();
      const double viol = lp_.max_violation(v);
      if (viol > kFeasibilityTol)
        throw NumericalError("simplex: solution violates constraints by " + std::to_string(viol));
    }
    return {LpStatus::Optimal, v, lp_.evaluate(v)};
  }

  std::size_t pivot_count() const noexcept { return total_pivots_; }

 private:
  using Tableau = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  static constexpr double kRatioTol = 1e-9;
  static constexpr double kOptTol = 1e-10;
  static constexpr int kStallLimit = 25;
  static constexpr std::size_t kRefactorEvery = 2000;

  // v_j = offset + scale * y[col] - y[col_neg]
  struct VarMap {
    long col = -1;
    long col_neg = -1;
    double offset = 0;
    double scale = 1;
  };

  void build_standard_form() {
    const std::size_t n = lp_.n_vars();
    map_.resize(n);
    std::vector<std::pair<std::size_t, double>> range_rows;  // (y col, width)
    long ny = 0;
    for (std::size_t j = 0; j < n; ++j) {
      const auto lo = lp_.lower(j);
      const auto hi = lp_.upper(j);
      VarMap& m = map_[j];
      if (lo) {
        m.col = ny++;
        m.offset = *lo;
        if (hi) range_rows.emplace_back(static_cast<std::size_t>(m.col), *hi - *lo);
      } else if (hi) {
        m.col = ny++;
        m.offset = *hi;
        m.scale = -1;
      } else {
        m.col = ny++;
        m.col_neg = ny++;
      }
    }
    ny_ = static_cast<std::size_t>(ny);

    const std::size_t m_rows = lp_.n_rows() + range_rows.size();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m_rows), static_cast<Eigen::Index>(ny_));
    Eigen::VectorXd b(static_cast<Eigen::Index>(m_rows));
    std::size_t i = 0;
    for (const auto& row : lp_.rows()) {
      double rhs = row.rhs;
      for (std::size_t j = 0; j < n; ++j) {
        const double c = row.coef[j];
        if (c == 0.0) continue;
        const VarMap& m = map_[j];
        a(i, m.col) += c * m.scale;
        if (m.col_neg >= 0) a(i, m.col_neg) -= c;
        rhs -= c * m.offset;
      }
      b(i) = rhs;
      ++i;
    }
    for (const auto& [col, width] : range_rows) {
      a(i, col) = 1.0;
      b(i) = width;
      ++i;
    }

    m_ = m_rows;
    std::size_t n_art = 0;
    for (std::size_t r = 0; r < m_; ++r)
      if (b(r) < 0) ++n_art;
    ncols_ = ny_ + m_ + n_art;
    art_begin_ = ny_ + m_;

    full_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(ncols_));
    full_rhs_ = b;
    basis_.assign(m_, 0);
    std::size_t next_art = art_begin_;
    for (std::size_t r = 0; r < m_; ++r) {
      full_.row(r).head(ny_) = a.row(r);
      full_(r, ny_ + r) = 1.0;
      if (b(r) < 0) {
        full_.row(r) *= -1.0;
        full_rhs_(r) = -b(r);
        full_(r, next_art) = 1.0;
        basis_[r] = next_art++;
      } else {
        basis_[r] = ny_ + r;
      }
    }
    tableau_ = full_;
    rhs_ = full_rhs_;
    eligible_.assign(ncols_, true);
  }

  bool is_art(std::size_t col) const noexcept { return col >= art_begin_; }

  void compute_reduced_costs(const Eigen::VectorXd& cost) {
    cost_ = cost;
    d_ = cost;
    for (std::size_t r = 0; r < m_; ++r) {
      const double cb = cost(basis_[r]);
      if (cb != 0.0) d_ -= cb * tableau_.row(r).transpose();
    }
  }

  void run_phase1() {
    phase1_done_ = true;
    Eigen::VectorXd c1 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ncols_));
    for (std::size_t j = art_begin_; j < ncols_; ++j) c1(j) = 1.0;
    compute_reduced_costs(c1);
    iterate(true);

    double infeas = 0;
    for (std::size_t r = 0; r < m_; ++r)
      if (is_art(basis_[r])) infeas += std::max(0.0, rhs_(r));
    const double scale = std::max(1.0, full_rhs_.size() ? full_rhs_.cwiseAbs().maxCoeff() : 0.0);
    if (infeas > kFeasibilityTol * scale) {
      infeasible_ = true;
      return;
    }
    // Drive remaining artificials out of the basis; rows where that is
    // impossible are redundant and keep a zero artificial forever.
    for (std::size_t r = 0; r < m_; ++r) {
      if (!is_art(basis_[r])) continue;
      long best = -1;
      double best_abs = 1e-9;
      for (std::size_t j = 0; j < art_begin_; ++j) {
        const double v = std::fabs(tableau_(r, j));
        if (v > best_abs) {
          best_abs = v;
          best = static_cast<long>(j);
        }
      }
      if (best >= 0) pivot(r, static_cast<std::size_t>(best));
    }
    for (std::size_t j = art_begin_; j < ncols_; ++j) eligible_[j] = false;
  }

  void set_phase2_costs() {
    Eigen::VectorXd c2 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ncols_));
    const auto obj = lp_.objective();
    for (std::size_t j = 0; j < lp_.n_vars(); ++j) {
      const VarMap& m = map_[j];
      c2(m.col) += obj[j] * m.scale;
      if (m.col_neg >= 0) c2(m.col_neg) -= obj[j];
    }
    compute_reduced_costs(c2);
  }

  // Returns false when the current phase is unbounded.
  bool iterate(bool phase1) {
    bool bland = false;
    int stall = 0;
    const std::size_t limit = 50 * (m_ + ncols_) + 1000;
    for (std::size_t it = 0;; ++it) {
      if (it > limit) throw NumericalError("simplex: iteration limit reached");
      long enter = -1;
      double best = -kOptTol;
      for (std::size_t j = 0; j < ncols_; ++j) {
        if (!eligible_[j]) continue;
        const double dj = d_(j);
        if (dj < best) {
          enter = static_cast<long>(j);
          if (bland) break;
          best = dj;
        }
      }
      if (enter < 0) return true;
      const auto e = static_cast<std::size_t>(enter);

      long leave = -1;
      double min_ratio = std::numeric_limits<double>::infinity();
      double max_entry = 0;
      for (std::size_t r = 0; r < m_; ++r) {
        const double t = tableau_(r, e);
        max_entry = std::max(max_entry, t);
        if (t <= kRatioTol) continue;
        const double ratio = std::max(rhs_(r), 0.0) / t;
        if (leave < 0 || ratio < min_ratio - 1e-12 * (1.0 + min_ratio)) {
          leave = static_cast<long>(r);
          min_ratio = ratio;
        } else if (ratio <= min_ratio + 1e-12 * (1.0 + min_ratio)) {
          const auto lr = static_cast<std::size_t>(leave);
          const bool better = bland ? basis_[r] < basis_[lr] : t > tableau_(lr, e);
          if (better) {
            leave = static_cast<long>(r);
            min_ratio = std::min(min_ratio, ratio);
          }
        }
      }
      if (leave < 0) {
        if (max_entry > kPivotTol)
          throw DegeneratePivot("simplex: largest pivot candidate " + std::to_string(max_entry) +
                                " is below the ratio-test tolerance");
        if (phase1) throw NumericalError("simplex: phase 1 reported unbounded");
        return false;
      }
      if (min_ratio <= 1e-12) {
        if (++stall > kStallLimit) bland = true;
      } else {
        stall = 0;
        bland = false;
      }
      pivot(static_cast<std::size_t>(leave), e);
    }
  }

  void pivot(std::size_t r, std::size_t e) {
    const double p = tableau_(r, e);
    if (std::fabs(p) < kPivotTol) throw DegeneratePivot("simplex: pivot element " + std::to_string(p) + " below 1e-11");
    tableau_.row(r) /= p;
    rhs_(r) /= p;
    nz_.clear();
    for (std::size_t j = 0; j < ncols_; ++j)
      if (tableau_(r, j) != 0.0) nz_.push_back(j);
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      const double f = tableau_(i, e);
      if (f == 0.0) continue;
      for (std::size_t j : nz_) tableau_(i, j) -= f * tableau_(r, j);
      tableau_(i, e) = 0.0;
      rhs_(i) -= f * rhs_(r);
    }
    const double de = d_(e);
    if (de != 0.0) {
      for (std::size_t j : nz_) d_(j) -= de * tableau_(r, j);
      d_(e) = 0.0;
    }
    basis_[r] = e;
    ++total_pivots_;
    ++pivots_since_refactor_;
  }

  // Rebuilds the tableau from the original rows and the current basis.
  void refactor() {
    Eigen::MatrixXd basis_cols(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(m_));
    for (std::size_t r = 0; r < m_; ++r) basis_cols.col(r) = full_.col(basis_[r]);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis_cols);
    tableau_ = lu.solve(full_);
    rhs_ = lu.solve(full_rhs_);
    for (std::size_t r = 0; r < m_; ++r) {
      tableau_.col(basis_[r]).setZero();
      tableau_(r, basis_[r]) = 1.0;
    }
    pivots_since_refactor_ = 0;
    if (cost_.size() == static_cast<Eigen::Index>(ncols_)) compute_reduced_costs(Eigen::VectorXd(cost_));
  }

  std::vector<double> extract() const {
    std::vector<double> y(ny_, 0.0);
    for (std::size_t r = 0; r < m_; ++r)
      if (basis_[r] < ny_) y[basis_[r]] = std::max(rhs_(r), 0.0);
    std::vector<double> v(lp_.n_vars());
    for (std::size_t j = 0; j < v.size(); ++j) {
      const VarMap& m = map_[j];
      double val = m.offset + m.scale * y[m.col];
      if (m.col_neg >= 0) val -= y[m.col_neg];
      if (std::fabs(val) < kPivotTol) val = 0.0;
      v[j] = val;
    }
    return v;
  }

  LinearProgram lp_;
  std::vector<VarMap> map_;
  std::size_t ny_ = 0;
  std::size_t m_ = 0;
  std::size_t ncols_ = 0;
  std::size_t art_begin_ = 0;

  Eigen::MatrixXd full_;
  Eigen::VectorXd full_rhs_;
  Tableau tableau_;
  Eigen::VectorXd rhs_;
  Eigen::VectorXd d_;
  Eigen::VectorXd cost_;
  std::vector<std::size_t> basis_;
  std::vector<bool> eligible_;
  std::vector<std::size_t> nz_;

  bool phase1_done_ = false;
  bool infeasible_ = false;
  std::size_t total_pivots_ = 0;
  std::size_t pivots_since_refactor_ = 0;
};

inline LpSolution solve_lp(const LinearProgram& lp) {
  SimplexSolver solver(lp);
  return solver.solve();
}

/// Plain-text dump for cross-checking against other solvers. Not a stable
/// format.
inline void write_lp_text(std::ostream& os, const LinearProgram& lp) {
  auto bound = [](const std::optional<double>& b, const char* inf) -> std::string {
    return b ? std::to_string(*b) : std::string(inf);
  };
  os << "vars " << lp.n_vars() << " rows " << lp.n_rows() << "\n";
  os.precision(17);
  os << "min";
  for (double c : lp.objective()) os << ' ' << c;
  os << "\n";
  for (const auto& r : lp.rows()) {
    os << "row";
    for (double c : r.coef) os << ' ' << c;
    os << " <= " << r.rhs << "\n";
  }
  for (std::size_t j = 0; j < lp.n_vars(); ++j) {
    if (!lp.lower(j) && !lp.upper(j)) continue;
    os << "bound " << j << ' ' << bound(lp.lower(j), "-inf") << ' ' << bound(lp.upper(j), "inf") << "\n";
  }
}

}  // namespace dcl0
