#pragma once

// Generic DCA loop: y = subgradient of H at x, x' = argmin of the convexified
// problem, repeat until the iterate stops moving or the objective stalls.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <future>
#include <ostream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "dcl0/error.hpp"

namespace dcl0 {

enum class Termination { Tolerance, MaxIter, FixedPoint };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::Tolerance: return "tolerance";
    case Termination::MaxIter: return "max_iter";
    case Termination::FixedPoint: return "fixed_point";
  }
  return "?";
}

struct DcaConfig {
  double stop_tol = 1e-5;
  std::size_t max_iter = 500;
  std::size_t n_starts = 1;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(stop_tol > 0)) throw InvalidArgument("DcaConfig: stop_tol must be positive");
    if (max_iter < 1) throw InvalidArgument("DcaConfig: max_iter must be at least 1");
    if (n_starts < 1) throw InvalidArgument("DcaConfig: n_starts must be at least 1");
  }
};

struct DcaTrace {
  std::vector<double> objectives;      // objectives[0] is the start point
  std::vector<double> iterate_change;  // one entry per iteration
  std::size_t iterations = 0;
  Termination terminated_by = Termination::MaxIter;
};

// Size of a step in the sense of the stopping rule: `delta` is the summed norm
// of the change, `scale` the summed norm of the previous iterate.
struct StepSize {
  double delta = 0;
  double scale = 0;
};

inline bool stop_check(StepSize s, double stop_tol) { return s.delta <= stop_tol * (1.0 + s.scale); }

/// The objective rose by more than the allowed slack.
class DescentViolation : public Error {
 public:
  DescentViolation(std::size_t iteration, double before, double after)
      : Error("dca: objective increased at iteration " + std::to_string(iteration) + " from " + std::to_string(before) +
              " to " + std::to_string(after)),
        iteration_(iteration) {}
  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

/// A subproblem failure; the original exception is nested.
class DcaIterationError : public Error {
 public:
  DcaIterationError(std::size_t iteration, const std::string& what)
      : Error("dca iteration " + std::to_string(iteration) + ": " + what), iteration_(iteration) {}
  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

inline constexpr double kDescentSlack = 1e-9;
inline constexpr double kFixedPointTol = 1e-13;

inline bool descent_ok(double before, double after) {
  return after <= before + kDescentSlack * std::max(1.0, std::fabs(before));
}

template <class State>
struct DcaResult {
  State state;
  DcaTrace trace;
};

// subgrad(x) -> Y, solve(x, y) -> State, objective(x) -> double,
// change(prev, next) -> StepSize.
template <class State, class Subgrad, class Solve, class Objective, class Change>
DcaResult<State> run_dca(Subgrad&& subgrad, Solve&& solve, Objective&& objective, Change&& change, State x0,
                         const DcaConfig& cfg) {
  cfg.validate();
  DcaResult<State> out{std::move(x0), {}};
  DcaTrace& tr = out.trace;
  double f = objective(out.state);
  tr.objectives.push_back(f);

  for (std::size_t k = 1; k <= cfg.max_iter; ++k) {
    State next;
    try {
      auto y = subgrad(out.state);
      next = solve(out.state, y);
    } catch (const Error& e) {
      std::throw_with_nested(DcaIterationError(k, e.what()));
    }
    const double f_next = objective(next);
    const StepSize step = change(out.state, next);
    tr.objectives.push_back(f_next);
    tr.iterate_change.push_back(step.delta);
    tr.iterations = k;
    if (!descent_ok(f, f_next)) throw DescentViolation(k, f, f_next);

    const bool fixed = std::fabs(f_next - f) <= kFixedPointTol * std::max(1.0, std::fabs(f));
    const bool small = stop_check(step, cfg.stop_tol);
    out.state = std::move(next);
    f = f_next;
    if (fixed) {
      tr.terminated_by = Termination::FixedPoint;
      return out;
    }
    if (small) {
      tr.terminated_by = Termination::Tolerance;
      return out;
    }
  }
  tr.terminated_by = Termination::MaxIter;
  return out;
}

inline bool trace_is_descent(const DcaTrace& tr) {
  for (std::size_t k = 1; k < tr.objectives.size(); ++k)
    if (!descent_ok(tr.objectives[k - 1], tr.objectives[k])) return false;
  return true;
}

inline void write_trace_csv(std::ostream& os, const DcaTrace& tr) {
  const auto old = os.precision(17);
  os << "iteration,objective,iterate_change\n";
  for (std::size_t k = 0; k < tr.objectives.size(); ++k) {
    os << k << ',' << tr.objectives[k] << ',';
    if (k > 0) os << tr.iterate_change[k - 1];
    os << '\n';
  }
  os.precision(old);
}

/// Runs `run(index, seed + index)` for every start and keeps the result with
/// the smallest `objective_of`; ties go to the lowest index. Starts run
/// concurrently when more than one hardware thread is available.
template <class Run, class ObjectiveOf>
auto best_of_starts(std::size_t n_starts, std::uint64_t seed, Run&& run, ObjectiveOf&& objective_of) {
  using R = decltype(run(std::size_t{0}, std::uint64_t{0}));
  if (n_starts < 1) throw InvalidArgument("best_of_starts: n_starts must be at least 1");
  std::vector<R> results;
  results.reserve(n_starts);
  if (n_starts > 1 && std::thread::hardware_concurrency() > 1) {
    std::vector<std::future<R>> futs;
    for (std::size_t i = 0; i < n_starts; ++i)
      futs.push_back(std::async(std::launch::async, [&run, i, seed] { return run(i, seed + i); }));
    for (auto& f : futs) results.push_back(f.get());
  } else {
    for (std::size_t i = 0; i < n_starts; ++i) results.push_back(run(i, seed + i));
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < n_starts; ++i)
    if (objective_of(results[i]) < objective_of(results[best])) best = i;
  return std::move(results[best]);
}

}  // namespace dcl0
