#pragma once

// Zero-norm approximation penalties r_theta and their DC decompositions.
//
// Every penalty is even, nondecreasing on [0, inf) and tends pointwise to the
// step function s(t) = [t != 0] as theta grows. For the concave kinds the DC
// split is r(t) = eta*|t| - psi(t) with eta = r'(0+); PiL carries its own
// polyhedral split phi_pil - psi_pil.
//
// All subgradient and weight rules below are lambda-free: callers multiply by
// the trade-off parameter themselves.

#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <string_view>

#include "dcl0/error.hpp"

namespace dcl0 {

enum class PenaltyKind { Exp, LpPlus, LpMinus, Log, Scad, Cap, PiL };

enum class Side { Left, Right };

inline constexpr double kDefaultLpEps = 1e-9;

class PenaltySpec {
 public:
  static PenaltySpec exp(double theta) { return {PenaltyKind::Exp, theta, 0, 0, 0}; }
  static PenaltySpec lp_plus(double theta, double eps = kDefaultLpEps) {
    return {PenaltyKind::LpPlus, theta, 0, 0, eps};
  }
  static PenaltySpec lp_minus(double theta, double p) { return {PenaltyKind::LpMinus, theta, 0, p, 0}; }
  static PenaltySpec log(double theta) { return {PenaltyKind::Log, theta, 0, 0, 0}; }
  static PenaltySpec scad(double theta, double a) { return {PenaltyKind::Scad, theta, a, 0, 0}; }
  static PenaltySpec cap(double theta) { return {PenaltyKind::Cap, theta, 0, 0, 0}; }
  static PenaltySpec pil(double theta, double a) { return {PenaltyKind::PiL, theta, a, 0, 0}; }

  PenaltyKind kind() const noexcept { return kind_; }
  double theta() const noexcept { return theta_; }
  double a() const noexcept { return a_; }
  double p() const noexcept { return p_; }
  double eps() const noexcept { return eps_; }

  bool concave() const noexcept { return kind_ != PenaltyKind::PiL; }

  PenaltySpec with_theta(double theta) const { return {kind_, theta, a_, p_, eps_}; }

  friend bool operator==(const PenaltySpec&, const PenaltySpec&) = default;

 private:
  PenaltySpec(PenaltyKind kind, double theta, double a, double p, double eps)
      : kind_(kind), theta_(theta), a_(a), p_(p), eps_(eps) {
    if (!(theta > 0) || !std::isfinite(theta)) throw InvalidArgument("penalty: theta must be a positive finite number");
    if ((kind == PenaltyKind::Scad || kind == PenaltyKind::PiL) && !(a > 1 && std::isfinite(a)))
      throw InvalidArgument("penalty: parameter a must be > 1");
    if (kind == PenaltyKind::LpMinus && !(p < 0 && std::isfinite(p)))
      throw InvalidArgument("penalty: parameter p must be < 0");
    if (kind == PenaltyKind::LpPlus && !(eps > 0 && std::isfinite(eps)))
      throw InvalidArgument("penalty: parameter eps must be > 0");
  }

  PenaltyKind kind_;
  double theta_;
  double a_;
  double p_;
  double eps_;
};

inline double step(double t) noexcept { return t != 0.0 ? 1.0 : 0.0; }

namespace detail {

inline double sign(double t) noexcept { return t > 0 ? 1.0 : (t < 0 ? -1.0 : 0.0); }

// r restricted to u = |t| >= 0.
inline double profile(const PenaltySpec& s, double u) {
  const double th = s.theta();
  switch (s.kind()) {
    case PenaltyKind::Exp:
      return -std::expm1(-th * u);
    case PenaltyKind::LpPlus:
      return std::pow(u + s.eps(), 1.0 / th);
    case PenaltyKind::LpMinus:
      return 1.0 - std::pow(1.0 + th * u, s.p());
    case PenaltyKind::Log:
      return std::log1p(th * u) / std::log1p(th);
    case PenaltyKind::Scad: {
      const double a = s.a();
      if (u <= 1.0 / th) return 2.0 * th * u / (a + 1.0);
      if (u < a / th) return (-th * th * u * u + 2.0 * a * th * u - 1.0) / (a * a - 1.0);
      return 1.0;
    }
    case PenaltyKind::Cap:
      return std::min(1.0, th * u);
    case PenaltyKind::PiL:
      return std::min(1.0, std::max(0.0, (th * u - 1.0) / (s.a() - 1.0)));
  }
  return 0.0;
}

// One-sided derivatives of the profile at u >= 0. The left derivative is only
// meaningful for u > 0.
inline double profile_deriv(const PenaltySpec& s, double u, Side side) {
  const double th = s.theta();
  switch (s.kind()) {
    case PenaltyKind::Exp:
      return th * std::exp(-th * u);
    case PenaltyKind::LpPlus:
      return std::pow(u + s.eps(), 1.0 / th - 1.0) / th;
    case PenaltyKind::LpMinus:
      return -s.p() * th * std::pow(1.0 + th * u, s.p() - 1.0);
    case PenaltyKind::Log:
      return th / (std::log1p(th) * (1.0 + th * u));
    case PenaltyKind::Scad: {
      const double a = s.a();
      if (u <= 1.0 / th) return 2.0 * th / (a + 1.0);
      if (u < a / th) return 2.0 * th * (a - th * u) / (a * a - 1.0);
      return 0.0;
    }
    case PenaltyKind::Cap: {
      const bool on_slope = side == Side::Right ? u < 1.0 / th : u <= 1.0 / th;
      return on_slope ? th : 0.0;
    }
    case PenaltyKind::PiL: {
      const double lo = 1.0 / th;
      const double hi = s.a() / th;
      const bool inside = side == Side::Right ? (u >= lo && u < hi) : (u > lo && u <= hi);
      return inside ? th / (s.a() - 1.0) : 0.0;
    }
  }
  return 0.0;
}

inline void require_concave(const PenaltySpec& s, const char* op) {
  if (!s.concave()) throw UnsupportedKind(std::string(op) + ": not defined for the PiL penalty");
}

inline void require_pil(const PenaltySpec& s, const char* op) {
  if (s.concave()) throw UnsupportedKind(std::string(op) + ": requires the PiL penalty");
}

}  // namespace detail

/// r_theta(t).
inline double value(const PenaltySpec& spec, double t) { return detail::profile(spec, std::fabs(t)); }

/// One-sided derivative of r at t.
inline double derivative(const PenaltySpec& spec, double t, Side side) {
  if (t > 0) return detail::profile_deriv(spec, t, side);
  if (t < 0) {
    const Side mirrored = side == Side::Right ? Side::Left : Side::Right;
    return -detail::profile_deriv(spec, -t, mirrored);
  }
  const double right = detail::profile_deriv(spec, 0.0, Side::Right);
  return side == Side::Right ? right : -right;
}

/// Slope of the convex majorant eta*|t| used by the first DC split; equals r'(0+).
inline double eta(const PenaltySpec& spec) {
  detail::require_concave(spec, "eta");
  const double th = spec.theta();
  switch (spec.kind()) {
    case PenaltyKind::Exp:
    case PenaltyKind::Cap:
      return th;
    case PenaltyKind::LpPlus:
      return std::pow(spec.eps(), 1.0 / th - 1.0) / th;
    case PenaltyKind::LpMinus:
      return -spec.p() * th;
    case PenaltyKind::Log:
      return th / std::log1p(th);
    case PenaltyKind::Scad:
      return 2.0 * th / (spec.a() + 1.0);
    case PenaltyKind::PiL:
      break;
  }
  return 0.0;
}

/// Element of -d(-r)(z) for z >= 0: the reweighted-l1 weight. Where r has a
/// kink (Capped-l1 at z = 1/theta) the left derivative is returned.
inline double l1_weight(const PenaltySpec& spec, double z) {
  detail::require_concave(spec, "l1_weight");
  if (!(z >= 0)) throw DomainError("l1_weight: z must be nonnegative");
  return detail::profile_deriv(spec, z, Side::Left);
}

/// Reweighted-l2 weight: l1_weight at t = sqrt(z + eps_pert), divided by 2t.
inline double l2_weight(const PenaltySpec& spec, double eps_pert, double z) {
  detail::require_concave(spec, "l2_weight");
  if (!(eps_pert > 0)) throw DomainError("l2_weight: eps_pert must be positive");
  if (!(z >= 0)) throw DomainError("l2_weight: z must be nonnegative");
  const double t = std::sqrt(z + eps_pert);
  return detail::profile_deriv(spec, t, Side::Left) / (2.0 * t);
}

/// psi(t) = eta*|t| - r(t).
inline double psi_value(const PenaltySpec& spec, double t) {
  if (!spec.concave()) {
    return spec.theta() / (spec.a() - 1.0) * std::max(spec.a() / spec.theta(), std::fabs(t)) - 1.0;
  }
  return eta(spec) * std::fabs(t) - value(spec, t);
}

/// Element of d psi(t); zero at t = 0 and wherever zero is admissible.
inline double psi_subgrad(const PenaltySpec& spec, double t) {
  detail::require_concave(spec, "psi_subgrad");
  if (t == 0.0) return 0.0;
  return detail::sign(t) * (eta(spec) - l1_weight(spec, std::fabs(t)));
}

inline double pil_phi_value(const PenaltySpec& spec, double t) {
  detail::require_pil(spec, "pil_phi_value");
  return spec.theta() / (spec.a() - 1.0) * std::max(1.0 / spec.theta(), std::fabs(t));
}

inline double pil_phi_subgrad(const PenaltySpec& spec, double t) {
  detail::require_pil(spec, "pil_phi_subgrad");
  if (std::fabs(t) <= 1.0 / spec.theta()) return 0.0;
  return detail::sign(t) * spec.theta() / (spec.a() - 1.0);
}

inline double pil_psi_subgrad(const PenaltySpec& spec, double t) {
  detail::require_pil(spec, "pil_psi_subgrad");
  const double slope = spec.theta() / (spec.a() - 1.0);
  const double knee = spec.a() / spec.theta();
  if (t > knee) return slope;
  if (t < -knee) return -slope;
  return 0.0;
}

/// First DC component: eta*|t| for concave kinds, phi_pil for PiL.
inline double phi_value(const PenaltySpec& spec, double t) {
  return spec.concave() ? eta(spec) * std::fabs(t) : pil_phi_value(spec, t);
}

// ---------------------------------------------------------------------------
// Text form: "kind:key=value,key=value".

inline std::string_view kind_name(PenaltyKind k) {
  switch (k) {
    case PenaltyKind::Exp: return "exp";
    case PenaltyKind::LpPlus: return "lp+";
    case PenaltyKind::LpMinus: return "lp-";
    case PenaltyKind::Log: return "log";
    case PenaltyKind::Scad: return "scad";
    case PenaltyKind::Cap: return "cap";
    case PenaltyKind::PiL: return "pil";
  }
  return "?";
}

/// Shortest decimal representation that round-trips.
inline std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string to_string(const PenaltySpec& s) {
  std::string out(kind_name(s.kind()));
  out += ":theta=" + format_number(s.theta());
  switch (s.kind()) {
    case PenaltyKind::Scad:
    case PenaltyKind::PiL:
      out += ",a=" + format_number(s.a());
      break;
    case PenaltyKind::LpMinus:
      out += ",p=" + format_number(s.p());
      break;
    case PenaltyKind::LpPlus:
      out += ",eps=" + format_number(s.eps());
      break;
    default:
      break;
  }
  return out;
}

inline PenaltySpec parse_penalty(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw ParseError("penalty '" + std::string(text) + "': expected kind:key=value");
  const std::string_view name = text.substr(0, colon);

  std::map<std::string, double, std::less<>> params;
  std::string_view rest = text.substr(colon + 1);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = rest.substr(0, comma);
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) throw ParseError("penalty '" + std::string(text) + "': bad parameter '" + std::string(item) + "'");
    const std::string key(item.substr(0, eq));
    const std::string_view num = item.substr(eq + 1);
    double v = 0;
    auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), v);
    if (ec != std::errc() || ptr != num.data() + num.size())
      throw ParseError("penalty '" + std::string(text) + "': bad number for " + key);
    if (!params.emplace(key, v).second) throw ParseError("penalty '" + std::string(text) + "': duplicate key " + key);
  }

  auto take = [&](const char* key) -> double {
    auto it = params.find(key);
    if (it == params.end()) throw ParseError("penalty '" + std::string(text) + "': missing " + key);
    double v = it->second;
    params.erase(it);
    return v;
  };
  auto take_or = [&](const char* key, double fallback) {
    return params.count(key) ? take(key) : fallback;
  };

  PenaltySpec spec = [&] {
    if (name == "exp") return PenaltySpec::exp(take("theta"));
    if (name == "lp+") {
      const double th = take("theta");
      return PenaltySpec::lp_plus(th, take_or("eps", kDefaultLpEps));
    }
    if (name == "lp-") {
      const double th = take("theta");
      return PenaltySpec::lp_minus(th, take("p"));
    }
    if (name == "log") return PenaltySpec::log(take("theta"));
    if (name == "scad") {
      const double th = take("theta");
      return PenaltySpec::scad(th, take("a"));
    }
    if (name == "cap") return PenaltySpec::cap(take("theta"));
    if (name == "pil") {
      const double th = take("theta");
      return PenaltySpec::pil(th, take("a"));
    }
    throw ParseError("penalty '" + std::string(text) + "': unknown kind '" + std::string(name) + "'");
  }();
  if (!params.empty()) throw ParseError("penalty '" + std::string(text) + "': unexpected parameter " + params.begin()->first);
  return spec;
}

}  // namespace dcl0
