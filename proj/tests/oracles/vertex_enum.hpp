#pragma once

// Test-only brute force: the optimum of a bounded LP is attained at a vertex,
// so enumerate every n-subset of constraints, solve it as equalities and keep
// the best feasible point. Independent of the simplex code path.

#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "dcl0/simplex.hpp"

namespace dcl0::testing {

struct VertexOptimum {
  double objective;
  std::vector<double> point;
};

inline std::optional<VertexOptimum> vertex_enumeration(const LinearProgram& lp) {
  const std::size_t n = lp.n_vars();
  std::vector<std::vector<double>> g;
  std::vector<double> h;
  for (const auto& r : lp.rows()) {
    g.push_back(r.coef);
    h.push_back(r.rhs);
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (lp.lower(j)) {
      std::vector<double> row(n, 0.0);
      row[j] = -1.0;
      g.push_back(row);
      h.push_back(-*lp.lower(j));
    }
    if (lp.upper(j)) {
      std::vector<double> row(n, 0.0);
      row[j] = 1.0;
      g.push_back(row);
      h.push_back(*lp.upper(j));
    }
  }
  const std::size_t m = g.size();
  std::optional<VertexOptimum> best;
  std::vector<std::size_t> pick(n);
  for (std::size_t i = 0; i < n; ++i) pick[i] = i;
  if (n > m) return best;
  while (true) {
    Eigen::MatrixXd a(n, n);
    Eigen::VectorXd b(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) a(i, j) = g[pick[i]][j];
      b(i) = h[pick[i]];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (lu.rank() == static_cast<Eigen::Index>(n)) {
      Eigen::VectorXd v = lu.solve(b);
      std::vector<double> pt(v.data(), v.data() + n);
      if (lp.max_violation(pt) <= 1e-9) {
        const double obj = lp.evaluate(pt);
        if (!best || obj < best->objective) best = VertexOptimum{obj, pt};
      }
    }
    // next combination
    std::size_t i = n;
    while (i > 0 && pick[i - 1] == m - n + i - 1) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < n; ++j) pick[j] = pick[j - 1] + 1;
  }
  return best;
}

}  // namespace dcl0::testing
