#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dnl/discretization.hpp"
#include "dnl/errors.hpp"
#include "dnl/geometry.hpp"
#include "dnl/model.hpp"
#include "dnl/solver.hpp"
#include "dnl/stepper.hpp"

namespace dnl {

/// Pass/fail evidence for an order principle. The margin is signed so that
/// negative values are violations; pass <=> worst_violation >= -tolerance.
struct PrincipleReport {
  std::string principle;      // "maximum" | "comparison"
  double worst_violation = 0.0;
  std::size_t worst_node = 0;
  std::size_t worst_step = 0;
  double tolerance = 0.0;
  bool pass = false;
};

/// Interior values must stay inside the range of the discrete parabolic
/// boundary (initial state plus lateral node values over all steps).
inline PrincipleReport max_principle_check(const DiscreteSolution& sol, double tol = 1e-9) {
  PrincipleReport rep;
  rep.principle = "maximum";
  rep.tolerance = tol;

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : sol.states[0]) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const std::size_t last = sol.mesh.node_count() - 1;
  for (std::size_t k = 1; k <= sol.grid.step_count; ++k) {
    for (std::size_t i : {std::size_t{0}, last}) {
      lo = std::min(lo, sol.states[k][i]);
      hi = std::max(hi, sol.states[k][i]);
    }
  }

  rep.worst_violation = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k <= sol.grid.step_count; ++k) {
    for (std::size_t i = 1; i < last; ++i) {
      const double margin = std::min(sol.states[k][i] - lo, hi - sol.states[k][i]);
      if (margin < rep.worst_violation) {
        rep.worst_violation = margin;
        rep.worst_node = i;
        rep.worst_step = k;
      }
    }
  }
  if (!std::isfinite(rep.worst_violation)) rep.worst_violation = 0.0;  // no interior nodes
  rep.pass = rep.worst_violation >= -tol;
  return rep;
}

/// Checks lower <= upper at every node and step. Requires matching mesh and
/// grid, and verifies the boundary ordering first (initial slice everywhere,
/// lateral values at every step).
inline PrincipleReport comparison_check(const DiscreteSolution& upper, const DiscreteSolution& lower,
                                        double tol = 1e-9) {
  if (upper.mesh.nodes != lower.mesh.nodes || upper.grid.step_count != lower.grid.step_count ||
      std::abs(upper.grid.final_time - lower.grid.final_time) > 1e-12 * std::max(1.0, upper.grid.final_time))
    throw std::invalid_argument("comparison_check: solutions live on different discretizations");

  const std::size_t last = upper.mesh.node_count() - 1;
  for (std::size_t i = 0; i <= last; ++i)
    if (lower.states[0][i] > upper.states[0][i] + tol)
      throw precondition_error("comparison_check: initial data not ordered at node " + std::to_string(i),
                               static_cast<std::ptrdiff_t>(i));
  for (std::size_t k = 1; k <= upper.grid.step_count; ++k)
    for (std::size_t i : {std::size_t{0}, last})
      if (lower.states[k][i] > upper.states[k][i] + tol)
        throw precondition_error("comparison_check: lateral boundary not ordered at node " + std::to_string(i),
                                 static_cast<std::ptrdiff_t>(i));

  PrincipleReport rep;
  rep.principle = "comparison";
  rep.tolerance = tol;
  rep.worst_violation = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k <= upper.grid.step_count; ++k) {
    for (std::size_t i = 0; i <= last; ++i) {
      const double margin = upper.states[k][i] - lower.states[k][i];
      if (margin < rep.worst_violation) {
        rep.worst_violation = margin;
        rep.worst_node = i;
        rep.worst_step = k;
      }
    }
  }
  rep.pass = rep.worst_violation >= -tol;
  return rep;
}

/// Result of the three-solution squeeze experiment: for each gamma the
/// solutions with data psi - gamma, psi, psi + gamma must order, and the
/// L^p(Omega_T) gap between the outer pair must shrink with gamma.
struct SqueezeEntry {
  double gamma = 0.0;
  double worst_lower = 0.0;  // min margin of u_0 - u_{-gamma}
  double worst_upper = 0.0;  // min margin of u_{+gamma} - u_0
  double gap = 0.0;          // || u_{+gamma} - u_{-gamma} ||_{L^p(Omega_T)}
};

struct SqueezeReport {
  std::vector<SqueezeEntry> entries;
  bool ordering_ok = false;
  bool gaps_decreasing = false;
  bool complete = false;  // false when a solve failed mid-experiment
  double tolerance = 0.0;
};

inline SqueezeReport gamma_squeeze(const ProblemSpec& spec, const std::vector<double>& gammas,
                                   const TimeGrid& grid, const Mesh& mesh, const SolveConfig& cfg,
                                   double tol = 1e-9) {
  if (gammas.empty()) throw std::invalid_argument("gamma_squeeze: empty gamma ladder");
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    if (!(gammas[i] > 0.0)) throw std::invalid_argument("gamma_squeeze: gammas must be positive");
    if (i > 0 && !(gammas[i] < gammas[i - 1]))
      throw std::invalid_argument("gamma_squeeze: gammas must decrease strictly");
  }

  SqueezeReport rep;
  rep.tolerance = tol;
  rep.ordering_ok = true;
  try {
    const DiscreteSolution base = solve(spec, grid, mesh, cfg);
    for (double gamma : gammas) {
      ProblemSpec up = spec;
      up.boundary = shift_boundary(spec.boundary, gamma);
      ProblemSpec down = spec;
      down.boundary = shift_boundary(spec.boundary, -gamma);
      const DiscreteSolution u_plus = solve(up, grid, mesh, cfg);
      const DiscreteSolution u_minus = solve(down, grid, mesh, cfg);

      SqueezeEntry entry;
      entry.gamma = gamma;
      entry.worst_lower = comparison_check(base, u_minus, tol).worst_violation;
      entry.worst_upper = comparison_check(u_plus, base, tol).worst_violation;
      entry.gap = lp_spacetime_distance(u_plus, u_minus, spec.p.p(), cfg.quadrature_order);
      rep.ordering_ok = rep.ordering_ok && entry.worst_lower >= -tol && entry.worst_upper >= -tol;
      rep.entries.push_back(entry);
    }
    rep.complete = true;
  } catch (const solve_error&) {
    rep.complete = false;
  }

  rep.gaps_decreasing = rep.entries.size() >= 1;
  for (std::size_t i = 1; i < rep.entries.size(); ++i)
    rep.gaps_decreasing = rep.gaps_decreasing && rep.entries[i].gap < rep.entries[i - 1].gap;
  return rep;
}

/// Smooth test field vanishing on the lateral boundary, from a small
/// closed-form registry:
///   bump {scale}              scale (x-a)(b-x)
///   bump-linear {c0, c1}      (c0 + c1 t)(x-a)(b-x)
///   bump-exp {scale, rate}    scale e^{-rate t}(x-a)(b-x)
struct TestField {
  std::string family;
  std::vector<double> params;
  SpaceTimeFn value;
  SpaceTimeFn dt;
  SpaceTimeFn dx;
};

inline TestField make_test_field(const std::string& family, const std::vector<double>& params,
                                 double a, double b) {
  auto expect = [&](std::size_t n) {
    if (params.size() != n)
      throw std::invalid_argument("make_test_field: family '" + family + "' needs " +
                                  std::to_string(n) + " parameters");
  };
  auto bump = [a, b](double x) { return (x - a) * (b - x); };
  auto dbump = [a, b](double x) { return (a + b) - 2.0 * x; };
  TestField f;
  f.family = family;
  f.params = params;
  if (family == "bump") {
    expect(1);
    const double s = params[0];
    f.value = [=](double x, double) { return s * bump(x); };
    f.dt = [](double, double) { return 0.0; };
    f.dx = [=](double x, double) { return s * dbump(x); };
  } else if (family == "bump-linear") {
    expect(2);
    const double c0 = params[0], c1 = params[1];
    f.value = [=](double x, double t) { return (c0 + c1 * t) * bump(x); };
    f.dt = [=](double x, double) { return c1 * bump(x); };
    f.dx = [=](double x, double t) { return (c0 + c1 * t) * dbump(x); };
  } else if (family == "bump-exp") {
    expect(2);
    const double s = params[0], r = params[1];
    f.value = [=](double x, double t) { return s * std::exp(-r * t) * bump(x); };
    f.dt = [=](double x, double t) { return -r * s * std::exp(-r * t) * bump(x); };
    f.dx = [=](double x, double t) { return s * std::exp(-r * t) * dbump(x); };
  } else {
    throw std::invalid_argument("make_test_field: unknown family '" + family + "'");
  }
  return f;
}

/// Residual of the weak form over a time window aligned to step boundaries,
/// against a smooth test field vanishing on the lateral boundary:
///   | int zeta |u|^{p-2}u |_{t1}^{t2}
///     + int int ( -|u|^{p-2}u zeta_t + |u_x|^{p-2}u_x zeta_x ) |.
/// Vanishes for the continuum solution; tends to zero under refinement for
/// the discrete one.
inline double weak_form_residual(const DiscreteSolution& sol, const TestField& zeta, double t1,
                                 double t2, int quad_order = 4) {
  const double scale = std::max(1.0, sol.max_abs());
  for (double t : {t1, t2, 0.5 * (t1 + t2)}) {
    if (std::abs(zeta.value(sol.mesh.a(), t)) > 1e-12 * scale ||
        std::abs(zeta.value(sol.mesh.b(), t)) > 1e-12 * scale)
      throw precondition_error("weak_form_residual: test field must vanish at the endpoints");
  }
  if (!(t1 < t2) || t1 < -1e-12 || t2 > sol.grid.final_time * (1.0 + 1e-12))
    throw std::invalid_argument("weak_form_residual: window must satisfy 0 <= t1 < t2 <= T");

  const QuadratureRule quad = gauss_rule(quad_order);
  const std::size_t k1 = sol.grid.snap_down(t1);
  const std::size_t k2 = std::max<std::size_t>(sol.grid.snap_down(t2), k1 + 1);

  auto boundary_term = [&](std::size_t k) {
    const double t = sol.grid.time_of(k);
    const NodalVector& u = sol.states[k];
    return integrate(sol.mesh, quad, [&](double x) {
      return zeta.value(x, t) * power_map(sol.p, nodal_value_at(sol.mesh, u, x));
    });
  };

  double acc = boundary_term(k2) - boundary_term(k1);
  for (std::size_t k = k1 + 1; k <= k2; ++k) {
    const NodalVector& u = sol.states[k];
    const auto slopes = element_slopes(sol.mesh, u);
    const double t0 = sol.grid.time_of(k - 1);
    for (std::size_t qt = 0; qt < quad.points.size(); ++qt) {
      const double t = t0 + quad.points[qt] * sol.grid.step;
      const double wt = sol.grid.step * quad.weights[qt];
      for (std::size_t e = 0; e < sol.mesh.element_count(); ++e) {
        const double x0 = sol.mesh.nodes[e];
        const double len = sol.mesh.element_length(e);
        const double flux = power_map(sol.p, slopes[e]);
        for (std::size_t qx = 0; qx < quad.points.size(); ++qx) {
          const double sigma = quad.points[qx];
          const double x = x0 + sigma * len;
          const double uq = (1.0 - sigma) * u[e] + sigma * u[e + 1];
          acc += wt * len * quad.weights[qx] *
                 (-power_map(sol.p, uq) * zeta.dt(x, t) + flux * zeta.dx(x, t));
        }
      }
    }
  }
  return std::abs(acc);
}

/// Exact solutions used as oracles: the linear heat mode and the separable
/// mode e^{-lambda t} v(x) built on the first eigenfunction of the 1D
/// p-Laplacian with zero endpoint values.
struct ExactSolution {
  std::string family;  // "heat-sine" | "separable-p"
  double domain_a = 0.0;
  double domain_b = 1.0;
  SpaceTimeFn value;
  // separable-p extras
  double lambda = 0.0;
  double shoot_residual = 0.0;
  std::shared_ptr<const std::vector<double>> profile;       // v samples on a uniform grid
  std::shared_ptr<const std::vector<double>> profile_flux;  // |v'|^{p-2}v' samples
  std::function<double(double)> v;
  std::function<double(double)> v_prime;
};

/// u(x, t) = amplitude e^{-pi^2 t} sin(pi x) on (0, 1); valid only in the
/// p -> 2 mode (the march is run with p = 2 + tiny).
inline ExactSolution heat_sine_solution(const Exponent& p, double amplitude = 1.0) {
  if (p.p() - 2.0 > 1e-9)
    throw std::invalid_argument("heat_sine_solution: requires the p -> 2 mode");
  ExactSolution ex;
  ex.family = "heat-sine";
  ex.value = [amplitude](double x, double t) {
    return amplitude * std::exp(-M_PI * M_PI * t) * std::sin(M_PI * x);
  };
  return ex;
}

namespace detail {

// One shot of the eigen-ODE v' = phi^{-1}(w), w' = -(p-1) lambda |v|^{p-2} v
// from v(0) = 0, w(0) = 1, integrated by RK4 on `resolution` uniform steps.
// Returns v(1) and fills the sample arrays; an interior zero crossing of v
// is reported as overshoot through `crossed`.
inline double shoot_eigen(double p, double lambda, std::size_t resolution, std::vector<double>& v_out,
                          std::vector<double>& w_out, bool& crossed) {
  const double dx = 1.0 / static_cast<double>(resolution);
  const double inv = 1.0 / (p - 1.0);
  auto phi_inverse = [&](double w) {
    if (w == 0.0) return 0.0;
    return std::copysign(std::pow(std::abs(w), inv), w);
  };
  auto rate = [&](double v) {
    if (v == 0.0) return 0.0;
    return -(p - 1.0) * lambda * std::pow(std::abs(v), p - 2.0) * v;
  };
  v_out.assign(resolution + 1, 0.0);
  w_out.assign(resolution + 1, 0.0);
  double v = 0.0, w = 1.0;
  v_out[0] = v;
  w_out[0] = w;
  crossed = false;
  for (std::size_t i = 0; i < resolution; ++i) {
    const double k1v = phi_inverse(w), k1w = rate(v);
    const double k2v = phi_inverse(w + 0.5 * dx * k1w), k2w = rate(v + 0.5 * dx * k1v);
    const double k3v = phi_inverse(w + 0.5 * dx * k2w), k3w = rate(v + 0.5 * dx * k2v);
    const double k4v = phi_inverse(w + dx * k3w), k4w = rate(v + dx * k3v);
    v += dx * (k1v + 2.0 * k2v + 2.0 * k3v + k4v) / 6.0;
    w += dx * (k1w + 2.0 * k2w + 2.0 * k3w + k4w) / 6.0;
    v_out[i + 1] = v;
    w_out[i + 1] = w;
    if (i + 1 < resolution && v < 0.0) crossed = true;
  }
  return v;
}

}  // namespace detail

/// First eigenpair of (|v'|^{p-2}v')' = -(p-1) lambda |v|^{p-2} v on (0, 1)
/// with v(0) = v(1) = 0, v > 0 inside, by shooting with bisection on lambda.
/// v is normalized to maximum one. The separable solution e^{-lambda t} v(x)
/// then solves the evolution equation.
inline ExactSolution separable_oracle(const Exponent& p_exp, std::size_t resolution) {
  if (resolution < 100) throw std::invalid_argument("separable_oracle: resolution must be >= 100");
  const double p = p_exp.p();

  std::vector<double> v_samples, w_samples;
  bool crossed = false;
  auto endpoint = [&](double lambda) {
    const double end = detail::shoot_eigen(p, lambda, resolution, v_samples, w_samples, crossed);
    return crossed ? -std::abs(end) - 1.0 : end;  // interior crossing counts as overshoot
  };

  double lo = 1e-3;
  if (!(endpoint(lo) > 0.0)) throw oracle_error("separable_oracle: lower bracket failed");
  double hi = lo;
  for (int i = 0; i < 64 && endpoint(hi) > 0.0; ++i) hi *= 2.0;
  if (endpoint(hi) > 0.0) throw oracle_error("separable_oracle: upper bracket failed");

  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (endpoint(mid) > 0.0 ? lo : hi) = mid;
  }
  const double lambda = 0.5 * (lo + hi);
  const double end = detail::shoot_eigen(p, lambda, resolution, v_samples, w_samples, crossed);
  if (crossed) throw oracle_error("separable_oracle: converged to a sign-changing mode");

  double vmax = 0.0;
  for (double v : v_samples) vmax = std::max(vmax, v);
  if (!(vmax > 0.0)) throw oracle_error("separable_oracle: degenerate profile");
  const double flux_scale = std::pow(vmax, p - 1.0);
  for (double& v : v_samples) v /= vmax;
  for (double& w : w_samples) w /= flux_scale;
  const double residual = std::abs(end) / vmax;
  if (residual > 1e-10)
    throw oracle_error("separable_oracle: endpoint residual " + std::to_string(residual) +
                       " exceeds certification threshold");

  ExactSolution ex;
  ex.family = "separable-p";
  ex.lambda = lambda;
  ex.shoot_residual = residual;
  auto samples = std::make_shared<const std::vector<double>>(std::move(v_samples));
  auto flux = std::make_shared<const std::vector<double>>(std::move(w_samples));
  ex.profile = samples;
  ex.profile_flux = flux;
  const double n = static_cast<double>(resolution);
  ex.v = [samples, n](double x) {
    const double s = std::clamp(x, 0.0, 1.0) * n;
    const auto i = std::min(static_cast<std::size_t>(s), static_cast<std::size_t>(n) - 1);
    const double t = s - static_cast<double>(i);
    return (1.0 - t) * (*samples)[i] + t * (*samples)[i + 1];
  };
  ex.v_prime = [samples, n](double x) {
    const double s = std::clamp(x, 0.0, 1.0) * n;
    const auto i = std::min(static_cast<std::size_t>(s), static_cast<std::size_t>(n) - 1);
    return ((*samples)[i + 1] - (*samples)[i]) * n;
  };
  auto v_eval = ex.v;
  const double lam = lambda;
  ex.value = [v_eval, lam](double x, double t) { return std::exp(-lam * t) * v_eval(x); };
  return ex;
}

/// Boundary data induced by an exact solution (used to drive the march
/// toward an oracle).
inline BoundaryData boundary_from_exact(const ExactSolution& ex) {
  BoundaryData b;
  b.family = "custom";
  if (ex.family == "heat-sine") {
    const double pi = M_PI;
    b.value = ex.value;
    b.dt = [v = ex.value, pi](double x, double t) { return -pi * pi * v(x, t); };
    b.dx = [pi](double x, double t) { return pi * std::exp(-pi * pi * t) * std::cos(pi * x); };
    b.dxdt = [pi](double x, double t) { return -pi * pi * pi * std::exp(-pi * pi * t) * std::cos(pi * x); };
  } else {
    const double lam = ex.lambda;
    b.value = ex.value;
    b.dt = [v = ex.value, lam](double x, double t) { return -lam * v(x, t); };
    b.dx = [vp = ex.v_prime, lam](double x, double t) { return std::exp(-lam * t) * vp(x); };
    b.dxdt = [vp = ex.v_prime, lam](double x, double t) { return -lam * std::exp(-lam * t) * vp(x); };
  }
  return b;
}

/// Error norms of a discrete solution against an oracle.
struct ErrorNorms {
  double lp_spacetime = 0.0;
  double linf_final = 0.0;
};

inline ErrorNorms error_vs_oracle(const DiscreteSolution& sol, const ExactSolution& exact,
                                  int quad_order = 4) {
  if (std::abs(sol.mesh.a() - exact.domain_a) > 1e-12 || std::abs(sol.mesh.b() - exact.domain_b) > 1e-12)
    throw std::invalid_argument("error_vs_oracle: domain mismatch");
  ErrorNorms n;
  n.lp_spacetime = lp_spacetime_error(sol, exact.value, sol.p.p(), quad_order);
  n.linf_final = linf_final_error(sol, exact.value, quad_order);
  return n;
}

/// Discrete solution obtained by sampling an exact solution at the grid
/// times and mesh nodes (diagnostic constructor; step metadata is synthetic).
inline DiscreteSolution sample_exact(const ExactSolution& exact, const Exponent& p, const TimeGrid& grid,
                                     const Mesh& mesh) {
  DiscreteSolution sol{p, grid, mesh, {}, {}, {}, true};
  sol.boundary.grid = grid;
  for (std::size_t k = 0; k <= grid.step_count; ++k) {
    const double t = grid.time_of(k);
    NodalVector u(mesh.node_count());
    for (std::size_t i = 0; i < mesh.node_count(); ++i) u[i] = exact.value(mesh.nodes[i], t);
    sol.boundary.slices.push_back(u);
    sol.states.push_back(std::move(u));
  }
  sol.steps.assign(grid.step_count, StepResult{{}, 0, 0.0, 0.0, 0.0, true, {}});
  return sol;
}

}  // namespace dnl
