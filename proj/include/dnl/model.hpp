#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dnl/errors.hpp"

namespace dnl {

/// Diffusion exponent p > 2 together with its conjugate q = p/(p-1).
class Exponent {
 public:
  explicit Exponent(double p) : p_(p), q_(p / (p - 1.0)) {
    if (!std::isfinite(p) || !(p > 2.0))
      throw std::invalid_argument("Exponent: requires p > 2, got " + std::to_string(p));
  }
  double p() const { return p_; }
  double q() const { return q_; }

 private:
  double p_;
  double q_;
};

/// a -> |a|^{p-2} a (scalar).
inline double power_map(const Exponent& e, double a) {
  if (a == 0.0) return 0.0;
  return std::pow(std::abs(a), e.p() - 2.0) * a;
}

/// a -> |a|^{(p-2)/2} a (scalar). Satisfies |half_power_map(a)|^2 = |a|^p.
inline double half_power_map(const Exponent& e, double a) {
  if (a == 0.0) return 0.0;
  return std::pow(std::abs(a), 0.5 * (e.p() - 2.0)) * a;
}

namespace detail {

inline double euclid_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace detail

/// a -> |a|^{p-2} a with |a| the Euclidean norm: every component scaled
/// by |a|^{p-2}. Odd, and zero at a = 0.
inline std::vector<double> power_map(const Exponent& e, std::span<const double> a) {
  const double norm = detail::euclid_norm(a);
  const double scale = (norm == 0.0) ? 0.0 : std::pow(norm, e.p() - 2.0);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = scale * a[i];
  return out;
}

/// a -> |a|^{(p-2)/2} a with |a| the Euclidean norm.
inline std::vector<double> half_power_map(const Exponent& e, std::span<const double> a) {
  const double norm = detail::euclid_norm(a);
  const double scale = (norm == 0.0) ? 0.0 : std::pow(norm, 0.5 * (e.p() - 2.0));
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = scale * a[i];
  return out;
}

/// <|b|^{p-2} b - |a|^{p-2} a, b - a>; nonnegative, zero iff a = b.
inline double monotonicity_gap(const Exponent& e, std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("monotonicity_gap: length mismatch");
  const auto pa = power_map(e, a);
  const auto pb = power_map(e, b);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (pb[i] - pa[i]) * (b[i] - a[i]);
  return acc;
}

/// Signed relative slack of lhs >= rhs: (lhs - rhs) / max(|lhs|, |rhs|),
/// zero when both sides vanish.
inline double relative_slack(double lhs, double rhs) {
  const double denom = std::max(std::abs(lhs), std::abs(rhs));
  if (denom == 0.0) return 0.0;
  return (lhs - rhs) / denom;
}

/// The three vector inequalities the energy estimates rest on, evaluated at
/// one pair (a, b):
///   gap            = <|b|^{p-2}b - |a|^{p-2}a, b - a>
///   half_bound     = (4/p^2) | |b|^{(p-2)/2}b - |a|^{(p-2)/2}a |^2   (gap >= half_bound)
///   convexity      : p <|b|^{p-2}b, b - a>  >=  |b|^p - |a|^p
///   lower_bound    = 2^{2-p} |b - a|^p                               (gap >= lower_bound)
/// Flags are true when the inequality holds with relative slack >= -1e-12.
struct InequalityReport {
  double gap = 0.0;
  double half_bound = 0.0;
  double convexity_slack = 0.0;  // |b|^p - |a|^p - p<|b|^{p-2}b, b-a>, must be <= 0
  double lower_bound = 0.0;

  double slack_half = 0.0;
  double slack_convexity = 0.0;
  double slack_lower = 0.0;

  bool ok_half = false;
  bool ok_convexity = false;
  bool ok_lower = false;

  bool all_ok() const { return ok_half && ok_convexity && ok_lower; }
};

inline InequalityReport check_vector_inequalities(const Exponent& e,
                                                  std::span<const double> a,
                                                  std::span<const double> b,
                                                  double tol = 1e-12) {
  if (a.size() != b.size())
    throw std::invalid_argument("check_vector_inequalities: length mismatch");
  InequalityReport r;
  const double p = e.p();

  r.gap = monotonicity_gap(e, a, b);

  const auto ha = half_power_map(e, a);
  const auto hb = half_power_map(e, b);
  double half_diff_sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = hb[i] - ha[i];
    half_diff_sq += d * d;
  }
  r.half_bound = (4.0 / (p * p)) * half_diff_sq;

  const double na = detail::euclid_norm(a);
  const double nb = detail::euclid_norm(b);
  const auto pb = power_map(e, b);
  std::vector<double> diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diff[i] = b[i] - a[i];
  const double pairing = detail::dot(pb, diff);
  r.convexity_slack = std::pow(nb, p) - std::pow(na, p) - p * pairing;

  r.lower_bound = std::pow(2.0, 2.0 - p) * std::pow(detail::euclid_norm(diff), p);

  r.slack_half = relative_slack(r.gap, r.half_bound);
  r.slack_convexity = relative_slack(p * pairing, std::pow(nb, p) - std::pow(na, p));
  r.slack_lower = relative_slack(r.gap, r.lower_bound);

  r.ok_half = r.slack_half >= -tol;
  r.ok_convexity = r.slack_convexity >= -tol;
  r.ok_lower = r.slack_lower >= -tol;
  return r;
}

/// Discrete residual of the identity
///   d/dt(|u|^{p-2}u) = (2(p-1)/p) |u|^{(p-2)/2} d/dt(|u|^{(p-2)/2}u)
/// on a sampled scalar path: maximum over interior samples of the difference
/// between the backward quotient of |u|^{p-2}u and the factored form. Decays
/// at first order in h for smooth paths away from sign changes.
inline double chain_rule_identity_residual(const Exponent& e, std::span<const double> u, double h) {
  if (u.size() < 2)
    throw std::invalid_argument("chain_rule_identity_residual: need at least 2 samples");
  const double factor = 2.0 * (e.p() - 1.0) / e.p();
  double worst = 0.0;
  for (std::size_t k = 1; k < u.size(); ++k) {
    const double lhs = (power_map(e, u[k]) - power_map(e, u[k - 1])) / h;
    const double weight = (u[k] == 0.0) ? 0.0 : std::pow(std::abs(u[k]), 0.5 * (e.p() - 2.0));
    const double rhs = factor * weight * (half_power_map(e, u[k]) - half_power_map(e, u[k - 1])) / h;
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

}  // namespace dnl
