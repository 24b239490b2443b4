#pragma once

#include <algorithm>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "dcl0/dataset.hpp"
#include "dcl0/svm.hpp"

namespace dcl0::testing {

inline Eigen::MatrixXd uniform_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng, double lo = -1, double hi = 1) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = u(rng);
  return m;
}

inline SvmInstance random_instance(std::size_t n, std::size_t na, std::size_t nb, double lambda, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd a = uniform_matrix(static_cast<Eigen::Index>(na), static_cast<Eigen::Index>(n), rng);
  Eigen::MatrixXd b = uniform_matrix(static_cast<Eigen::Index>(nb), static_cast<Eigen::Index>(n), rng);
  return SvmInstance(std::move(a), std::move(b), lambda);
}

inline SvmInstance one_d(double lambda) {
  return SvmInstance(Eigen::MatrixXd::Constant(1, 1, 2.0), Eigen::MatrixXd::Constant(1, 1, -2.0), lambda);
}

// Gaussian features; labels from a k-sparse separator plus N(0, sigma) noise on the margin.
struct SparseProblem {
  Dataset train, test;
  std::vector<std::size_t> support;
};

inline SparseProblem sparse_problem(std::size_t n, std::size_t k, std::size_t m_train, std::size_t m_test, double sigma,
                                    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::shuffle(idx.begin(), idx.end(), rng);
  SparseProblem p;
  p.support.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(p.support.begin(), p.support.end());
  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  std::uniform_real_distribution<double> mag(1.0, 2.0);
  std::bernoulli_distribution coin(0.5);
  for (std::size_t i : p.support) w(static_cast<Eigen::Index>(i)) = coin(rng) ? mag(rng) : -mag(rng);
  std::normal_distribution<double> g(0.0, 1.0);
  auto make = [&](std::size_t m) {
    Dataset d;
    d.features.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t c = 0; c < n; ++c) d.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = g(rng);
      const double margin = d.features.row(static_cast<Eigen::Index>(r)).dot(w) + sigma * g(rng);
      d.labels.push_back(margin >= 0 ? 1 : -1);
    }
    return d;
  };
  p.train = make(m_train);
  p.test = make(m_test);
  return p;
}

}  // namespace dcl0::testing
