#pragma once

// Labelled datasets: LIBSVM and CSV readers, a LIBSVM writer, k-fold index
// generation and z-score standardization.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dcl0/error.hpp"
#include "dcl0/svm.hpp"

namespace dcl0 {

struct Dataset {
  Eigen::MatrixXd features;  // one row per point
  std::vector<int> labels;   // +1 or -1
  std::vector<std::string> feature_names;

  std::size_t rows() const noexcept { return labels.size(); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(features.cols()); }

  Dataset subset(std::span<const std::size_t> idx) const {
    Dataset d;
    d.features.resize(static_cast<Eigen::Index>(idx.size()), features.cols());
    for (std::size_t r = 0; r < idx.size(); ++r) {
      if (idx[r] >= rows()) throw InvalidArgument("Dataset::subset: index out of range");
      d.features.row(static_cast<Eigen::Index>(r)) = features.row(static_cast<Eigen::Index>(idx[r]));
      d.labels.push_back(labels[idx[r]]);
    }
    d.feature_names = feature_names;
    return d;
  }

  // Pads with zero columns; never drops any.
  void widen(std::size_t n) {
    if (n <= cols()) return;
    const auto old = features.cols();
    features.conservativeResize(Eigen::NoChange, static_cast<Eigen::Index>(n));
    features.rightCols(static_cast<Eigen::Index>(n) - old).setZero();
  }

  SvmInstance instance(double lambda) const {
    std::size_t na = 0;
    for (int y : labels) na += y > 0;
    const std::size_t nb = rows() - na;
    if (na == 0 || nb == 0) throw InvalidArgument("dataset needs points of both classes");
    Eigen::MatrixXd a(static_cast<Eigen::Index>(na), features.cols()), b(static_cast<Eigen::Index>(nb), features.cols());
    Eigen::Index ia = 0, ib = 0;
    for (std::size_t r = 0; r < rows(); ++r) {
      if (labels[r] > 0)
        a.row(ia++) = features.row(static_cast<Eigen::Index>(r));
      else
        b.row(ib++) = features.row(static_cast<Eigen::Index>(r));
    }
    return SvmInstance(std::move(a), std::move(b), lambda);
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size() && std::isfinite(out);
}

// +1 / -1, with 0 and 2 mapped to -1 (flagged through `remapped`).
inline bool parse_label(std::string_view s, int& y, bool& remapped) {
  double v;
  if (!parse_double(s, v)) return false;
  remapped = false;
  if (v == 1) {
    y = 1;
  } else if (v == -1) {
    y = -1;
  } else if (v == 0 || v == 2) {
    y = -1;
    remapped = true;
  } else {
    return false;
  }
  return true;
}

}  // namespace detail

inline Dataset parse_libsvm(std::istream& in, const std::string& source, std::ostream* warn = &std::cerr) {
  std::vector<std::vector<std::pair<std::size_t, double>>> rows;
  Dataset ds;
  std::size_t n = 0, remapped_count = 0, lineno = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = detail::trim(line);
    if (const auto hash = sv.find('#'); hash != std::string_view::npos) sv = detail::trim(sv.substr(0, hash));
    if (sv.empty()) continue;
    std::istringstream tok{std::string(sv)};
    std::string t;
    tok >> t;
    int y;
    bool remapped;
    if (!detail::parse_label(t, y, remapped)) throw ParseError(source, lineno, "unreadable label '" + t + "'");
    remapped_count += remapped;
    std::vector<std::pair<std::size_t, double>> row;
    std::size_t last = 0;
    while (tok >> t) {
      const auto colon = t.find(':');
      if (colon == std::string::npos) throw ParseError(source, lineno, "malformed token '" + t + "'");
      std::size_t idx = 0;
      const auto [p, ec] = std::from_chars(t.data(), t.data() + colon, idx);
      double v;
      if (ec != std::errc() || p != t.data() + colon || idx == 0 || !detail::parse_double(std::string_view(t).substr(colon + 1), v))
        throw ParseError(source, lineno, "malformed token '" + t + "'");
      if (idx <= last) throw ParseError(source, lineno, "feature indices must be strictly increasing");
      last = idx;
      row.emplace_back(idx, v);
    }
    n = std::max(n, last);
    rows.push_back(std::move(row));
    ds.labels.push_back(y);
  }
  ds.features = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (const auto& [idx, v] : rows[r]) ds.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(idx - 1)) = v;
  if (remapped_count > 0 && warn)
    *warn << "warning: " << source << ": " << remapped_count << " label(s) 0/2 mapped to -1\n";
  return ds;
}

inline Dataset load_libsvm(const std::string& path, std::ostream* warn = &std::cerr) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return parse_libsvm(in, path, warn);
}

inline void write_libsvm(std::ostream& os, const Dataset& ds) {
  char buf[64];
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    os << (ds.labels[r] > 0 ? "+1" : "-1");
    for (std::size_t c = 0; c < ds.cols(); ++c) {
      const double v = ds.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
      if (v == 0.0) continue;
      const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
      os << ' ' << (c + 1) << ':' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
    }
    os << '\n';
  }
}

/// CSV with a header row; `label_col` names the column holding +1/-1.
inline Dataset parse_csv(std::istream& in, const std::string& source, const std::string& label_col,
                         std::ostream* warn = &std::cerr) {
  auto split = [](std::string_view s) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
      const auto comma = s.find(',', pos);
      out.emplace_back(detail::trim(s.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos)));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    return out;
  };
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (!detail::trim(line).empty()) {
      header = split(line);
      break;
    }
  }
  if (header.empty()) throw ParseError(source, lineno, "missing header row");
  const auto it = std::find(header.begin(), header.end(), label_col);
  if (it == header.end()) throw ParseError(source, lineno, "label column '" + label_col + "' not in header");
  const auto lc = static_cast<std::size_t>(it - header.begin());

  Dataset ds;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (c != lc) ds.feature_names.push_back(header[c]);
  std::vector<double> flat;
  std::size_t remapped_count = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size())
      throw ParseError(source, lineno, "expected " + std::to_string(header.size()) + " fields, got " + std::to_string(cells.size()));
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c == lc) {
        int y;
        bool remapped;
        if (!detail::parse_label(cells[c], y, remapped)) throw ParseError(source, lineno, "label '" + cells[c] + "' is not +1/-1");
        remapped_count += remapped;
        ds.labels.push_back(y);
      } else {
        double v;
        if (!detail::parse_double(cells[c], v)) throw ParseError(source, lineno, "bad number '" + cells[c] + "'");
        flat.push_back(v);
      }
    }
  }
  const auto m = static_cast<Eigen::Index>(ds.labels.size()), n = static_cast<Eigen::Index>(header.size() - 1);
  ds.features = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(flat.data(), m, n);
  if (remapped_count > 0 && warn)
    *warn << "warning: " << source << ": " << remapped_count << " label(s) 0/2 mapped to -1\n";
  return ds;
}

inline Dataset load_csv(const std::string& path, const std::string& label_col, std::ostream* warn = &std::cerr) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return parse_csv(in, path, label_col, warn);
}

/// Seeded shuffle of 0..m-1 cut into k contiguous chunks (sizes differ by at most one).
inline std::vector<std::vector<std::size_t>> kfold_indices(std::size_t m, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw InvalidArgument("kfold_indices: need at least 2 folds");
  if (m < k) throw InvalidArgument("kfold_indices: fewer points than folds");
  std::vector<std::size_t> perm(m);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t len = m / k + (f < m % k ? 1 : 0);
    folds[f].assign(perm.begin() + static_cast<std::ptrdiff_t>(pos), perm.begin() + static_cast<std::ptrdiff_t>(pos + len));
    pos += len;
  }
  return folds;
}

/// Z-scores both sets with the training mean and (population) standard
/// deviation. Constant training features are only centred.
inline std::pair<Dataset, Dataset> standardize(const Dataset& train, const Dataset& test, std::ostream* warn = &std::cerr) {
  if (train.cols() != test.cols()) throw InvalidArgument("standardize: train and test feature counts differ");
  if (train.rows() == 0) throw InvalidArgument("standardize: empty training set");
  const Eigen::RowVectorXd mean = train.features.colwise().mean();
  Eigen::RowVectorXd sd = ((train.features.rowwise() - mean).array().square().colwise().sum() / static_cast<double>(train.rows())).sqrt();
  std::size_t constant = 0;
  for (Eigen::Index c = 0; c < sd.size(); ++c)
    if (!(sd(c) > 0)) {
      sd(c) = 1.0;
      ++constant;
    }
  if (constant > 0 && warn) *warn << "warning: " << constant << " constant feature(s) left unscaled\n";
  std::pair<Dataset, Dataset> out{train, test};
  out.first.features = (train.features.rowwise() - mean).array().rowwise() / sd.array();
  out.second.features = (test.features.rowwise() - mean).array().rowwise() / sd.array();
  return out;
}

}  // namespace dcl0
