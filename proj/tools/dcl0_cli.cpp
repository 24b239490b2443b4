// dcl0: train, cross-validate, compare and check l0-approximating DCA
// feature selection for linear SVMs.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dcl0/dataset.hpp"
#include "dcl0/exact_penalty.hpp"
#include "dcl0/experiment.hpp"

namespace {

using dcl0::Dataset;
using json = nlohmann::ordered_json;

struct Options {
  std::string data, test, label_col = "label";
  std::string penalty = "cap:theta=5";
  std::string scheme = "dca1";
  std::vector<std::string> penalties, schemes;  // compare
  double lambda = 0.1;
  bool update_theta = false;
  double dtheta = 1.0;
  double tol = 1e-5;
  std::size_t max_iter = 500;
  std::size_t starts = 1;
  std::uint64_t seed = 0;
  std::size_t folds = 10;
  std::vector<double> grid_lambda, grid_theta, grid_a;
  bool standardize = false;
  std::string format = "json";
  std::string out;
  std::optional<double> box;
};

Dataset load(const std::string& path, const Options& o) {
  if (!std::filesystem::exists(path)) throw dcl0::Error("no such file '" + path + "'");
  const auto ext = std::filesystem::path(path).extension().string();
  return ext == ".csv" ? dcl0::load_csv(path, o.label_col) : dcl0::load_libsvm(path);
}

struct Data {
  Dataset train;
  std::optional<Dataset> test;
  const Dataset* test_ptr() const { return test ? &*test : nullptr; }
};

Data load_all(const Options& o) {
  Data d{load(o.data, o), std::nullopt};
  if (!o.test.empty()) {
    d.test = load(o.test, o);
    const std::size_t n = std::max(d.train.cols(), d.test->cols());
    d.train.widen(n);
    d.test->widen(n);
  }
  if (o.standardize) {
    auto [tr, te] = dcl0::standardize(d.train, d.test ? *d.test : d.train);
    d.train = std::move(tr);
    if (d.test) d.test = std::move(te);
  }
  return d;
}

dcl0::RunRequest request(const Options& o) {
  dcl0::RunRequest r;
  r.scheme = dcl0::parse_scheme(o.scheme);
  r.penalty = dcl0::parse_penalty(o.penalty);
  r.lambda = o.lambda;
  r.update_theta = o.update_theta;
  r.delta_theta = o.dtheta;
  r.dca.stop_tol = o.tol;
  r.dca.max_iter = o.max_iter;
  r.dca.n_starts = o.starts;
  r.dca.seed = o.seed;
  r.dca.validate();
  r.options.x_box = o.box;
  if (r.update_theta) {
    if (r.scheme != dcl0::Scheme::Dca1) throw dcl0::InvalidArgument("--update-theta runs dca1 with the capped-l1 penalty");
  } else {
    dcl0::require_compatible(r.scheme, r.penalty);
  }
  return r;
}

// Temp file in the target directory, then rename over the destination.
void write_atomic(const std::string& path, const std::string& text) {
  const std::filesystem::path dst(path);
  std::filesystem::path tmp = dst;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw dcl0::Error("cannot write '" + tmp.string() + "'");
    f << text;
    if (!f.flush()) throw dcl0::Error("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, dst, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw dcl0::Error("cannot rename onto '" + path + "': " + ec.message());
  }
}

void emit(const Options& o, const std::string& text) {
  std::cout << text;
  if (!o.out.empty()) write_atomic(o.out, text);
}

std::string fmt_json(const json& j) { return j.dump(2) + "\n"; }

std::string cmd_train(const Options& o) {
  const Data d = load_all(o);
  const auto rep = dcl0::train_and_report(request(o), d.train, d.test_ptr());
  if (o.format == "csv") return dcl0::csv_header() + "\n" + dcl0::csv_row(rep) + "\n";
  return fmt_json(dcl0::to_json(rep));
}

std::string cmd_report(const Options& o) {
  const Data d = load_all(o);
  const auto req = request(o);
  const auto rep = dcl0::train_and_report(req, d.train, d.test_ptr());
  std::ostringstream os;
  os.precision(17);
  os << "iteration,objective,iterate_change,theta\n";
  for (std::size_t k = 0; k < rep.trace.objectives.size(); ++k) {
    os << k << ',' << rep.trace.objectives[k] << ',';
    if (k > 0) os << rep.trace.iterate_change[k - 1];
    os << ',';
    if (!req.update_theta)
      os << req.penalty.theta();
    else if (k > 0)
      os << rep.theta_trace[k - 1];
    os << '\n';
  }
  return os.str();
}

std::string cmd_cv(const Options& o, std::vector<std::string>& warnings) {
  const Data d = load_all(o);
  dcl0::RunRequest req = request(o);
  dcl0::CvGrid grid;
  if (!o.grid_lambda.empty()) grid.lambda = o.grid_lambda;
  if (!o.grid_theta.empty()) grid.theta = o.grid_theta;
  if (!o.grid_a.empty()) grid.a = o.grid_a;
  const auto cv = dcl0::cross_validate(req, d.train, grid, o.folds, o.seed);
  warnings = cv.warnings;

  req.lambda = cv.best.lambda;
  if (!req.update_theta) req.penalty = dcl0::respec(req.penalty, cv.best.theta, cv.best.a);
  const auto rep = dcl0::train_and_report(req, d.train, d.test_ptr());
  if (o.format == "csv") {
    std::ostringstream os;
    os.precision(17);
    os << "lambda,theta,a,mean_pwco,mean_sf,selected\n";
    for (const auto& c : cv.cells) {
      const bool sel = c.lambda == cv.best.lambda && c.theta == cv.best.theta && c.a == cv.best.a;
      os << c.lambda << ',' << c.theta << ',' << c.a << ',' << c.mean_pwco << ',' << c.mean_sf << ',' << (sel ? 1 : 0) << '\n';
    }
    return os.str();
  }
  json j;
  j["folds"] = o.folds;
  j["best"] = {{"lambda", cv.best.lambda}, {"theta", cv.best.theta}, {"a", cv.best.a},
               {"mean_pwco", cv.best.mean_pwco}, {"mean_sf", cv.best.mean_sf}};
  json cells = json::array();
  for (const auto& c : cv.cells)
    cells.push_back({{"lambda", c.lambda}, {"theta", c.theta}, {"a", c.a}, {"mean_pwco", c.mean_pwco}, {"mean_sf", c.mean_sf}});
  j["cells"] = std::move(cells);
  j["final"] = dcl0::to_json(rep);
  return fmt_json(j);
}

std::string cmd_compare(const Options& o) {
  const Data d = load_all(o);
  std::vector<dcl0::Scheme> schemes;
  for (const auto& s : o.schemes.empty() ? std::vector<std::string>{"dca1", "dca2", "dca3", "dca4"} : o.schemes)
    schemes.push_back(dcl0::parse_scheme(s));
  std::vector<dcl0::PenaltySpec> pens;
  for (const auto& p : o.penalties.empty() ? std::vector<std::string>{o.penalty} : o.penalties)
    pens.push_back(dcl0::parse_penalty(p));
  dcl0::DcaConfig cfg;
  cfg.stop_tol = o.tol;
  cfg.max_iter = o.max_iter;
  cfg.n_starts = o.starts;
  cfg.seed = o.seed;
  cfg.validate();
  dcl0::SchemeOptions opt;
  opt.x_box = o.box;
  const auto rows = dcl0::compare(schemes, pens, o.lambda, cfg, opt, d.train, d.test_ptr());

  if (o.format == "csv") {
    std::ostringstream os;
    os.precision(17);
    os << "scheme,penalty,compatible,sf_mean,sf_std,pwco_train_mean,pwco_train_std,pwco_test_mean,pwco_test_std,"
          "objective_mean,objective_std,seconds_mean\n";
    for (const auto& r : rows) {
      os << dcl0::to_string(r.scheme) << ',' << dcl0::to_string(r.penalty) << ',' << (r.compatible ? "true" : "false");
      if (r.compatible) {
        os << ',' << r.sf.mean << ',' << r.sf.std << ',' << r.pwco_train.mean << ',' << r.pwco_train.std << ',';
        if (d.test) os << r.pwco_test.mean << ',' << r.pwco_test.std;
        else os << ',';
        os << ',' << r.objective.mean << ',' << r.objective.std << ',' << r.seconds.mean;
      } else {
        os << ",,,,,,,,,";
      }
      os << '\n';
    }
    return os.str();
  }
  json arr = json::array();
  for (const auto& r : rows) {
    json j;
    j["scheme"] = dcl0::to_string(r.scheme);
    j["penalty"] = dcl0::to_string(r.penalty);
    j["compatible"] = r.compatible;
    if (r.compatible) {
      auto ms = [](const dcl0::MeanStd& m) { return json{{"mean", m.mean}, {"std", m.std}}; };
      j["sf"] = ms(r.sf);
      j["pwco_train"] = ms(r.pwco_train);
      j["pwco_test"] = d.test ? ms(r.pwco_test) : json(nullptr);
      j["objective"] = ms(r.objective);
      j["wall_seconds"] = r.seconds.mean;
    }
    arr.push_back(std::move(j));
  }
  return fmt_json(json{{"lambda", o.lambda}, {"starts", o.starts}, {"rows", std::move(arr)}});
}

std::string cmd_oracle(const Options& o) {
  const Data d = load_all(o);
  const double m = o.box.value_or(10.0);
  Options dca_opt = o;
  dca_opt.box = m;
  const auto req = request(dca_opt);
  const dcl0::SvmInstance inst = d.train.instance(o.lambda);
  const auto orc = dcl0::support_enum_oracle(inst, m);
  const auto rep = dcl0::train_and_report(req, d.train, d.test_ptr());
  const double dca_l0 = dcl0::l0_objective(inst, rep.x, rep.b);
  if (o.format == "csv") {
    std::ostringstream os;
    os.precision(17);
    os << "scheme,penalty,lambda,box,sf,oracle_objective,dca_l0_objective,gap\n"
       << "oracle,l0," << o.lambda << ',' << m << ',' << orc.support.size() << ',' << orc.objective << ',' << dca_l0 << ','
       << dca_l0 - orc.objective << '\n';
    return os.str();
  }
  json j = dcl0::oracle_json(orc, o.lambda, m, d.train, d.test_ptr());
  j["dca"] = dcl0::to_json(rep);
  j["dca_l0_objective"] = dca_l0;
  j["gap"] = dca_l0 - orc.objective;
  return fmt_json(j);
}

std::string one_line(const std::exception& e) {
  std::string msg = e.what();
  try {
    std::rethrow_if_nested(e);
  } catch (const std::exception& inner) {
    msg += ": " + one_line(inner);
  } catch (...) {
  }
  for (char& c : msg)
    if (c == '\n' || c == '\r') c = ' ';
  return msg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"l0-approximating DCA feature selection for linear SVMs"};
  app.require_subcommand(1);
  Options o;

  auto common = [&o](CLI::App* c) {
    c->add_option("--data", o.data, "training set (LIBSVM, or CSV by extension)")->required();
    c->add_option("--test", o.test, "test set");
    c->add_option("--label-col", o.label_col, "CSV label column")->capture_default_str();
    c->add_option("--scheme", o.scheme, "dca1|dca2|dca3|dca4")->capture_default_str();
    c->add_option("--lambda", o.lambda, "trade-off in (0, 1)")->capture_default_str();
    c->add_flag("--update-theta", o.update_theta, "capped-l1 dca1 with the updating-theta rule");
    c->add_option("--dtheta", o.dtheta, "theta increment for --update-theta")->capture_default_str();
    c->add_option("--tol", o.tol, "stopping tolerance")->capture_default_str();
    c->add_option("--max-iter", o.max_iter, "iteration limit")->capture_default_str();
    c->add_option("--starts", o.starts, "number of starting points")->capture_default_str();
    c->add_option("--seed", o.seed, "random seed")->capture_default_str();
    c->add_option("--box", o.box, "bound |x_i| <= box in every subproblem");
    c->add_flag("--standardize", o.standardize, "z-score features with training statistics");
    c->add_option("--format", o.format, "json|csv")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
    c->add_option("--out", o.out, "also write the output here");
  };

  auto* train = app.add_subcommand("train", "single run, prints a report");
  common(train);
  train->add_option("--penalty", o.penalty, "e.g. cap:theta=5, scad:theta=2,a=4")->capture_default_str();

  auto* report = app.add_subcommand("report", "per-iteration trace as CSV");
  common(report);
  report->add_option("--penalty", o.penalty, "penalty spec")->capture_default_str();

  auto* cv = app.add_subcommand("cv", "k-fold selection of lambda, theta and a");
  common(cv);
  cv->add_option("--penalty", o.penalty, "penalty family (its theta/a are replaced by the grid)")->capture_default_str();
  cv->add_option("--folds", o.folds, "number of folds")->capture_default_str();
  cv->add_option("--grid-lambda", o.grid_lambda, "lambda values")->delimiter(',');
  cv->add_option("--grid-theta", o.grid_theta, "theta values")->delimiter(',');
  cv->add_option("--grid-a", o.grid_a, "a values (scad, pil)")->delimiter(',');

  auto* cmp = app.add_subcommand("compare", "schemes x penalties table");
  common(cmp);
  cmp->remove_option(cmp->get_option("--scheme"));
  cmp->add_option("--scheme", o.schemes, "schemes (repeatable or comma separated)")->delimiter(',');
  cmp->add_option("--penalty", o.penalties, "penalties (repeatable)");

  auto* orc = app.add_subcommand("oracle", "exact l0 optimum and the gap of a DCA run");
  common(orc);
  orc->add_option("--penalty", o.penalty, "penalty of the DCA run")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << one_line(e) << '\n';
    return e.get_exit_code() != 0 ? e.get_exit_code() : 2;
  }

  try {
    std::string text;
    std::vector<std::string> warnings;
    if (*train) text = cmd_train(o);
    else if (*report) text = cmd_report(o);
    else if (*cv) text = cmd_cv(o, warnings);
    else if (*cmp) text = cmd_compare(o);
    else text = cmd_oracle(o);
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
    emit(o, text);
  } catch (const std::exception& e) {
    std::cerr << "error: " << one_line(e) << '\n';
    return 1;
  }
  return 0;
}
