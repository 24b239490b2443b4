#pragma once

// Run reports, k-fold parameter selection and scheme x penalty comparisons.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <future>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "dcl0/dataset.hpp"
#include "dcl0/exact_penalty.hpp"
#include "dcl0/schemes.hpp"

namespace dcl0 {

struct RunRequest {
  Scheme scheme = Scheme::Dca1;
  PenaltySpec penalty = PenaltySpec::cap(5);
  double lambda = 0.1;
  bool update_theta = false;
  double delta_theta = 1.0;
  DcaConfig dca;
  SchemeOptions options;
};

struct FsRunReport {
  std::string scheme;
  std::string penalty;
  double lambda = 0;
  double theta = 0;
  bool update_theta = false;
  std::vector<std::size_t> sf_indices;
  double pwco_train = 0;
  std::optional<double> pwco_test;
  std::size_t iterations = 0;
  double objective = 0;
  double wall_seconds = 0;
  std::vector<double> theta_trace;
  std::string terminated_by;
  std::size_t start_index = 0;
  Eigen::VectorXd x;
  double b = 0;
  DcaTrace trace;
};

/// Runs the request on `train` and scores it on both sets.
inline FsRunReport train_and_report(const RunRequest& req, const Dataset& train, const Dataset* test = nullptr) {
  const auto t0 = std::chrono::steady_clock::now();
  const SvmInstance inst = train.instance(req.lambda);
  FsResult r = req.update_theta ? updating_theta_run(inst, req.delta_theta, req.dca, req.options)
                                : run_scheme(inst, req.penalty, req.scheme, req.dca, req.options);
  FsRunReport rep;
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  rep.scheme = to_string(req.update_theta ? Scheme::Dca1 : req.scheme);
  rep.penalty = req.update_theta ? to_string(PenaltySpec::cap(r.theta > 0 ? r.theta : 1.0)) : to_string(req.penalty);
  rep.lambda = req.lambda;
  rep.theta = r.theta;
  rep.update_theta = req.update_theta;
  rep.sf_indices = selected_features(r.model.x);
  rep.pwco_train = pwco(r.model.x, r.model.b, train.features, train.labels);
  if (test) {
    if (test->cols() != train.cols()) throw InvalidArgument("test set has a different feature count");
    rep.pwco_test = pwco(r.model.x, r.model.b, test->features, test->labels);
  }
  rep.iterations = r.trace.iterations;
  rep.objective = r.objective;
  rep.theta_trace = r.theta_trace;
  rep.terminated_by = to_string(r.trace.terminated_by);
  rep.start_index = r.start_index;
  rep.x = r.model.x;
  rep.b = r.model.b;
  rep.trace = std::move(r.trace);
  return rep;
}

inline nlohmann::ordered_json to_json(const FsRunReport& r, bool with_wall = true) {
  nlohmann::ordered_json j;
  j["scheme"] = r.scheme;
  j["penalty"] = r.penalty;
  j["lambda"] = r.lambda;
  j["theta"] = r.theta;
  j["update_theta"] = r.update_theta;
  j["sf"] = r.sf_indices.size();
  j["sf_indices"] = r.sf_indices;
  j["pwco_train"] = r.pwco_train;
  j["pwco_test"] = r.pwco_test ? nlohmann::ordered_json(*r.pwco_test) : nlohmann::ordered_json(nullptr);
  j["iterations"] = r.iterations;
  j["objective"] = r.objective;
  if (with_wall) j["wall_seconds"] = r.wall_seconds;
  j["theta_trace"] = r.theta_trace;
  j["terminated_by"] = r.terminated_by;
  j["b"] = r.b;
  j["x"] = std::vector<double>(r.x.data(), r.x.data() + r.x.size());
  return j;
}

inline std::string csv_header() {
  return "scheme,penalty,lambda,theta,update_theta,sf,sf_indices,pwco_train,pwco_test,iterations,objective,wall_seconds,"
         "terminated_by";
}

inline std::string csv_row(const FsRunReport& r, bool with_wall = true) {
  std::ostringstream os;
  os.precision(17);
  std::string idx;
  for (std::size_t i = 0; i < r.sf_indices.size(); ++i) idx += (i ? ";" : "") + std::to_string(r.sf_indices[i]);
  os << r.scheme << ',' << r.penalty << ',' << r.lambda << ',' << r.theta << ',' << (r.update_theta ? "true" : "false")
     << ',' << r.sf_indices.size() << ',' << idx << ',' << r.pwco_train << ',';
  if (r.pwco_test) os << *r.pwco_test;
  os << ',' << r.iterations << ',' << r.objective << ',';
  if (with_wall) os << r.wall_seconds;
  os << ',' << r.terminated_by;
  return os.str();
}

// ---------------------------------------------------------------------------
// Cross-validation

inline PenaltySpec respec(const PenaltySpec& base, double theta, double a) {
  switch (base.kind()) {
    case PenaltyKind::Exp: return PenaltySpec::exp(theta);
    case PenaltyKind::LpPlus: return PenaltySpec::lp_plus(theta, base.eps());
    case PenaltyKind::LpMinus: return PenaltySpec::lp_minus(theta, base.p());
    case PenaltyKind::Log: return PenaltySpec::log(theta);
    case PenaltyKind::Scad: return PenaltySpec::scad(theta, a);
    case PenaltyKind::Cap: return PenaltySpec::cap(theta);
    case PenaltyKind::PiL: return PenaltySpec::pil(theta, a);
  }
  return base;
}

inline bool uses_a(PenaltyKind k) { return k == PenaltyKind::Scad || k == PenaltyKind::PiL; }

struct CvGrid {
  std::vector<double> lambda{0.001, 0.002, 0.003, 0.004, 0.05, 0.1, 0.25, 0.4, 0.7, 0.9};
  std::vector<double> theta{0.001, 0.005, 0.01, 0.1, 0.5, 1, 2, 3, 5, 10, 20, 50, 100, 500};
  std::vector<double> a{1, 2, 3, 5, 10, 20, 30, 50, 100};
};

struct CvCell {
  double lambda = 0;
  double theta = 0;  // 0 for updating-theta runs
  double a = 0;      // 0 when the penalty has no shape parameter
  double mean_pwco = 0;
  double mean_sf = 0;
};

struct CvOutcome {
  CvCell best;
  std::vector<CvCell> cells;
  std::vector<std::string> warnings;
};

/// True when `c` beats `best`: higher validation accuracy, then fewer
/// selected features, then smaller theta. Earlier grid cells win full ties.
inline bool cv_better(const CvCell& c, const CvCell& best) {
  if (c.mean_pwco != best.mean_pwco) return c.mean_pwco > best.mean_pwco;
  if (c.mean_sf != best.mean_sf) return c.mean_sf < best.mean_sf;
  return c.theta < best.theta;
}

namespace detail {

template <class T, class F>
std::vector<T> parallel_map(std::size_t count, F&& f) {
  std::vector<T> out(count);
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  if (hw == 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) out[i] = f(i);
    return out;
  }
  for (std::size_t start = 0; start < count; start += hw) {
    std::vector<std::future<T>> futs;
    for (std::size_t i = start; i < std::min(count, start + hw); ++i) futs.push_back(std::async(std::launch::async, f, i));
    for (std::size_t i = 0; i < futs.size(); ++i) out[start + i] = futs[i].get();
  }
  return out;
}

}  // namespace detail

/// k-fold selection of (lambda, theta[, a]) by mean validation accuracy.
/// With req.update_theta only lambda is searched.
inline CvOutcome cross_validate(const RunRequest& req, const Dataset& data, const CvGrid& grid, std::size_t folds,
                                std::uint64_t seed) {
  CvOutcome out;
  if (grid.lambda.empty() || (!req.update_theta && grid.theta.empty())) throw InvalidArgument("cv: empty parameter grid");
  std::vector<double> as{0.0};
  if (!req.update_theta && uses_a(req.penalty.kind())) {
    as.clear();
    for (double a : grid.a) {
      if (a > 1)
        as.push_back(a);
      else
        out.warnings.push_back("grid value a=" + format_number(a) + " skipped (a must exceed 1)");
    }
    if (as.empty()) throw InvalidArgument("cv: no admissible value in the a grid");
  }
  const std::vector<double> thetas = req.update_theta ? std::vector<double>{0.0} : grid.theta;
  for (double l : grid.lambda)
    for (double t : thetas)
      for (double a : as) out.cells.push_back({l, t, a, 0, 0});

  const auto fold_idx = kfold_indices(data.rows(), folds, seed);
  std::vector<Dataset> tr(folds), va(folds);
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<std::size_t> rest;
    for (std::size_t g = 0; g < folds; ++g)
      if (g != f) rest.insert(rest.end(), fold_idx[g].begin(), fold_idx[g].end());
    std::sort(rest.begin(), rest.end());
    tr[f] = data.subset(rest);
    va[f] = data.subset(fold_idx[f]);
  }

  struct Score {
    double pwco = 0, sf = 0;
  };
  const std::size_t total = out.cells.size() * folds;
  const auto scores = detail::parallel_map<Score>(total, [&](std::size_t job) {
    const CvCell& c = out.cells[job / folds];
    const std::size_t f = job % folds;
    RunRequest r = req;
    r.lambda = c.lambda;
    if (!req.update_theta) r.penalty = respec(req.penalty, c.theta, c.a);
    const FsRunReport rep = train_and_report(r, tr[f], &va[f]);
    return Score{*rep.pwco_test, static_cast<double>(rep.sf_indices.size())};
  });
  for (std::size_t ci = 0; ci < out.cells.size(); ++ci) {
    double p = 0, s = 0;
    for (std::size_t f = 0; f < folds; ++f) {
      p += scores[ci * folds + f].pwco;
      s += scores[ci * folds + f].sf;
    }
    out.cells[ci].mean_pwco = p / static_cast<double>(folds);
    out.cells[ci].mean_sf = s / static_cast<double>(folds);
  }
  out.best = out.cells.front();
  for (const auto& c : out.cells)
    if (cv_better(c, out.best)) out.best = c;
  return out;
}

// ---------------------------------------------------------------------------
// Comparison table

struct MeanStd {
  double mean = 0, std = 0;
};

inline MeanStd mean_std(const std::vector<double>& v) {
  MeanStd m;
  if (v.empty()) return m;
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  for (double x : v) m.std += (x - m.mean) * (x - m.mean);
  m.std = std::sqrt(m.std / static_cast<double>(v.size()));
  return m;
}

struct CompareRow {
  Scheme scheme;
  PenaltySpec penalty;
  bool compatible = true;
  MeanStd sf, pwco_train, pwco_test, objective, seconds;
};

/// One row per (scheme, penalty); each compatible row aggregates `starts`
/// single-start runs (start 0 from the hinge minimizer, the rest random).
inline std::vector<CompareRow> compare(const std::vector<Scheme>& schemes, const std::vector<PenaltySpec>& penalties,
                                       double lambda, const DcaConfig& cfg, const SchemeOptions& opt, const Dataset& train,
                                       const Dataset* test) {
  std::vector<CompareRow> rows;
  const SvmInstance inst = train.instance(lambda);
  for (Scheme s : schemes)
    for (const auto& p : penalties) {
      CompareRow row{s, p, compatible(s, p), {}, {}, {}, {}, {}};
      if (row.compatible) {
        std::vector<double> sf, ptr, pte, obj, sec;
        for (std::size_t i = 0; i < cfg.n_starts; ++i) {
          const auto t0 = std::chrono::steady_clock::now();
          const std::optional<double> box = s == Scheme::Dca3 ? std::optional(opt.x_box.value_or(kDefaultBox)) : opt.x_box;
          ModelIterate x0 = i == 0 ? hinge_start(inst, box) : random_start(inst.n(), cfg.seed + i, box);
          const FsResult r = run_scheme_from(inst, p, s, cfg, std::move(x0), opt);
          sec.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
          sf.push_back(static_cast<double>(selected_features(r.model.x).size()));
          ptr.push_back(pwco(r.model.x, r.model.b, train.features, train.labels));
          if (test) pte.push_back(pwco(r.model.x, r.model.b, test->features, test->labels));
          obj.push_back(r.objective);
        }
        row.sf = mean_std(sf);
        row.pwco_train = mean_std(ptr);
        row.pwco_test = mean_std(pte);
        row.objective = mean_std(obj);
        row.seconds = mean_std(sec);
      }
      rows.push_back(row);
    }
  return rows;
}

/// Oracle output in the run-report shape, scheme "oracle".
inline nlohmann::ordered_json oracle_json(const OracleResult& o, double lambda, double box, const Dataset& train,
                                          const Dataset* test) {
  nlohmann::ordered_json j;
  j["scheme"] = "oracle";
  j["penalty"] = "l0";
  j["lambda"] = lambda;
  j["box"] = box;
  j["sf"] = selected_features(o.x).size();
  j["sf_indices"] = selected_features(o.x);
  j["pwco_train"] = pwco(o.x, o.b, train.features, train.labels);
  j["pwco_test"] = test ? nlohmann::ordered_json(pwco(o.x, o.b, test->features, test->labels)) : nlohmann::ordered_json(nullptr);
  j["objective"] = o.objective;
  j["b"] = o.b;
  j["x"] = std::vector<double>(o.x.data(), o.x.data() + o.x.size());
  return j;
}

}  // namespace dcl0
