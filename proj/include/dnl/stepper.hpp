#pragma once

#include <cmath>
#include <limits>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "dnl/errors.hpp"
#include "dnl/geometry.hpp"
#include "dnl/model.hpp"

namespace dnl {

/// One implicit time step as a convex minimization instance over the
/// interior coefficients: minimize over w
///   F(w) = (1/p) int |d/dx(u)|^p + (1/h) int ( |u|^p/p - |u_prev|^{p-2}u_prev u ),
/// where u = boundary_slice + sum_j w_j e_j and e_j are the interior hats.
struct StepProblem {
  Exponent p;
  const Basis* basis = nullptr;
  double h = 0.0;                // time step
  NodalVector previous;          // full nodal state at t - h
  NodalVector boundary_slice;    // averaged boundary data on this slab
  bool lumped_time = true;       // nodal quadrature of the time terms
};

/// Damped-Newton controls. The gradient tolerance is absolute, scaled by
/// max(1, gradient norm at the warm start).
struct SolveConfig {
  double gradient_tol = 1e-10;
  int max_iterations = 100;
  double eps_reg_scale = 1e-6;   // initial Hessian smoothing: scale * mean slope^2
  double eps_reg_floor = 1e-14;
  double backtrack_factor = 0.5;
  double sufficient_decrease = 1e-4;
  int max_backtracks = 60;
  bool lumped_time = true;       // quadrature of the time terms
  int quadrature_order = 4;
};

/// Solved state of one step: interior coefficients and solver diagnostics.
struct StepResult {
  std::vector<double> interior_coeffs;
  int iterations = 0;
  double gradient_norm = 0.0;
  double functional = 0.0;
  double tolerance = 0.0;  // effective gradient tolerance of this solve
  bool converged = false;
  std::vector<double> f_history;  // functional value at the warm start and each accepted iterate
};

/// Full nodal state boundary_slice + interior coefficients.
inline NodalVector full_state(const StepProblem& sp, const std::vector<double>& w) {
  NodalVector u = sp.boundary_slice;
  const auto& interior = sp.basis->interior_nodes;
  for (std::size_t j = 0; j < interior.size(); ++j) u[interior[j]] += w[j];
  return u;
}

namespace detail {

inline void check_sizes(const StepProblem& sp, const std::vector<double>& w) {
  const std::size_t nodes = sp.basis->mesh.node_count();
  if (sp.previous.size() != nodes || sp.boundary_slice.size() != nodes)
    throw std::invalid_argument("StepProblem: nodal vectors must match the mesh");
  if (w.size() != sp.basis->interior_count())
    throw std::invalid_argument("StepProblem: interior coefficient count mismatch");
}

// Symmetric tridiagonal SPD solve (Thomas algorithm without pivoting).
inline std::vector<double> solve_tridiag(std::vector<double> diag, std::vector<double> off,
                                         std::vector<double> rhs) {
  const std::size_t n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    if (!(diag[i - 1] > 0.0))
      throw numeric_error("solve_step: regularized Hessian lost positive definiteness",
                          static_cast<std::ptrdiff_t>(i - 1));
    const double m = off[i - 1] / diag[i - 1];
    diag[i] -= m * off[i - 1];
    rhs[i] -= m * rhs[i - 1];
  }
  if (!(diag[n - 1] > 0.0))
    throw numeric_error("solve_step: regularized Hessian lost positive definiteness",
                        static_cast<std::ptrdiff_t>(n - 1));
  std::vector<double> x(n);
  x[n - 1] = rhs[n - 1] / diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;)
    x[i] = (rhs[i] - off[i] * x[i + 1]) / diag[i];
  return x;
}

}  // namespace detail

inline double functional_value(const StepProblem& sp, const std::vector<double>& w) {
  detail::check_sizes(sp, w);
  const Mesh& mesh = sp.basis->mesh;
  const QuadratureRule& quad = sp.basis->quad;
  const double p = sp.p.p();
  const NodalVector u = full_state(sp, w);

  double acc = 0.0;
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const double len = mesh.element_length(e);
    const double slope = (u[e + 1] - u[e]) / len;
    double local = len * std::pow(std::abs(slope), p) / p;
    if (!sp.lumped_time) {
      double mass = 0.0;
      for (std::size_t q = 0; q < quad.points.size(); ++q) {
        const double uq = sp.basis->hat_left[q] * u[e] + sp.basis->hat_right[q] * u[e + 1];
        const double vq = sp.basis->hat_left[q] * sp.previous[e] + sp.basis->hat_right[q] * sp.previous[e + 1];
        mass += quad.weights[q] * (std::pow(std::abs(uq), p) / p - power_map(sp.p, vq) * uq);
      }
      local += len * mass / sp.h;
    }
    if (!std::isfinite(local))
      throw numeric_error("functional_value: non-finite contribution", static_cast<std::ptrdiff_t>(e));
    acc += local;
  }
  if (sp.lumped_time) {
    const auto lump = lumped_weights(mesh);
    double mass = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
      mass += lump[i] * (std::pow(std::abs(u[i]), p) / p - power_map(sp.p, sp.previous[i]) * u[i]);
    if (!std::isfinite(mass)) throw numeric_error("functional_value: non-finite time term");
    acc += mass / sp.h;
  }
  return acc;
}

inline std::vector<double> functional_gradient(const StepProblem& sp, const std::vector<double>& w) {
  detail::check_sizes(sp, w);
  const Mesh& mesh = sp.basis->mesh;
  const QuadratureRule& quad = sp.basis->quad;
  const NodalVector u = full_state(sp, w);
  const std::size_t n = mesh.element_count();

  // Gradient with respect to the full nodal values, then restricted to the
  // interior (boundary values are fixed by the slice).
  std::vector<double> g(mesh.node_count(), 0.0);
  for (std::size_t e = 0; e < n; ++e) {
    const double len = mesh.element_length(e);
    const double flux = power_map(sp.p, (u[e + 1] - u[e]) / len);
    if (!std::isfinite(flux))
      throw numeric_error("functional_gradient: non-finite flux", static_cast<std::ptrdiff_t>(e));
    g[e] -= flux;
    g[e + 1] += flux;
    if (!sp.lumped_time) {
      for (std::size_t q = 0; q < quad.points.size(); ++q) {
        const double uq = sp.basis->hat_left[q] * u[e] + sp.basis->hat_right[q] * u[e + 1];
        const double vq = sp.basis->hat_left[q] * sp.previous[e] + sp.basis->hat_right[q] * sp.previous[e + 1];
        const double dens = (power_map(sp.p, uq) - power_map(sp.p, vq)) / sp.h;
        g[e] += len * quad.weights[q] * dens * sp.basis->hat_left[q];
        g[e + 1] += len * quad.weights[q] * dens * sp.basis->hat_right[q];
      }
    }
  }
  if (sp.lumped_time) {
    const auto lump = lumped_weights(mesh);
    for (std::size_t i = 0; i < u.size(); ++i)
      g[i] += lump[i] * (power_map(sp.p, u[i]) - power_map(sp.p, sp.previous[i])) / sp.h;
  }

  std::vector<double> out(sp.basis->interior_count());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = g[sp.basis->interior_nodes[j]];
  return out;
}

namespace detail {

// Tridiagonal Hessian over the interior nodes, with the degenerate weights
// |s|^{p-2} smoothed to (s^2 + eps)^{(p-2)/2}. The smoothing enters the
// Hessian only; objective and gradient stay exact.
struct Tridiag {
  std::vector<double> diag;
  std::vector<double> off;
};

inline Tridiag assemble_hessian(const StepProblem& sp, const std::vector<double>& w, double eps) {
  const Mesh& mesh = sp.basis->mesh;
  const QuadratureRule& quad = sp.basis->quad;
  const double p = sp.p.p();
  const NodalVector u = full_state(sp, w);
  const std::size_t m = sp.basis->interior_count();

  // Work with full nodal indexing, then slice the interior block (nodes 1..n-1).
  const std::size_t nodes = mesh.node_count();
  std::vector<double> diag(nodes, 0.0), off(nodes - 1, 0.0);
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const double len = mesh.element_length(e);
    const double slope = (u[e + 1] - u[e]) / len;
    const double weight = (p - 1.0) * std::pow(slope * slope + eps, 0.5 * (p - 2.0));
    const double k = weight / len;
    diag[e] += k;
    diag[e + 1] += k;
    off[e] -= k;
    if (!sp.lumped_time) {
      for (std::size_t q = 0; q < quad.points.size(); ++q) {
        const double uq = sp.basis->hat_left[q] * u[e] + sp.basis->hat_right[q] * u[e + 1];
        const double wq = (p - 1.0) * std::pow(uq * uq + eps, 0.5 * (p - 2.0)) / sp.h;
        const double c = len * quad.weights[q] * wq;
        diag[e] += c * sp.basis->hat_left[q] * sp.basis->hat_left[q];
        diag[e + 1] += c * sp.basis->hat_right[q] * sp.basis->hat_right[q];
        off[e] += c * sp.basis->hat_left[q] * sp.basis->hat_right[q];
      }
    }
  }
  if (sp.lumped_time) {
    const auto lump = lumped_weights(mesh);
    for (std::size_t i = 0; i < nodes; ++i)
      diag[i] += lump[i] * (p - 1.0) * std::pow(u[i] * u[i] + eps, 0.5 * (p - 2.0)) / sp.h;
  }

  Tridiag h;
  h.diag.assign(diag.begin() + 1, diag.begin() + 1 + m);
  h.off.assign(off.begin() + 1, off.begin() + m);  // couplings between interior neighbours
  return h;
}

}  // namespace detail

/// Minimize the step functional by damped Newton with backtracking on the
/// exact objective. Starts from `warm_start` (zero when absent). A returned
/// result with converged = false means the iteration budget ran out; the
/// caller decides what to do.
inline StepResult solve_step(const StepProblem& sp, const SolveConfig& cfg,
                             const std::vector<double>* warm_start = nullptr) {
  const std::size_t m = sp.basis->interior_count();
  std::vector<double> w(m, 0.0);
  if (warm_start) {
    if (warm_start->size() != m)
      throw std::invalid_argument("solve_step: warm start size mismatch");
    w = *warm_start;
  }
  detail::check_sizes(sp, w);

  auto norm2 = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
  };

  std::vector<double> g = functional_gradient(sp, w);
  const double tol = cfg.gradient_tol * std::max(1.0, norm2(g));

  // Initial smoothing proportional to the mean squared slope of the warm start.
  double mean_slope_sq = 0.0;
  {
    const NodalVector u = full_state(sp, w);
    const auto slopes = element_slopes(sp.basis->mesh, u);
    for (double s : slopes) mean_slope_sq += s * s;
    mean_slope_sq /= static_cast<double>(slopes.size());
  }
  double eps = std::max(cfg.eps_reg_scale * mean_slope_sq, cfg.eps_reg_floor);

  StepResult res;
  double f = functional_value(sp, w);
  res.f_history.push_back(f);
  int it = 0;
  for (; it < cfg.max_iterations; ++it) {
    const double gnorm = norm2(g);
    if (gnorm <= tol) {
      res.converged = true;
      break;
    }
    auto hess = detail::assemble_hessian(sp, w, eps);
    std::vector<double> rhs(m);
    for (std::size_t j = 0; j < m; ++j) rhs[j] = -g[j];
    std::vector<double> delta = detail::solve_tridiag(hess.diag, hess.off, rhs);

    double slope = 0.0;
    for (std::size_t j = 0; j < m; ++j) slope += g[j] * delta[j];
    if (!(slope < 0.0)) {  // fall back to steepest descent if roundoff spoiled SPD
      delta = rhs;
      slope = -gnorm * gnorm;
    }

    // Once the predicted decrease drops below the rounding resolution of F,
    // the backtracking test cannot certify progress any more; the objective
    // is strictly convex, so the plain Newton step is the right move.
    const double f_resolution = 32.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(f));
    if (-slope <= f_resolution) {
      for (std::size_t j = 0; j < m; ++j) w[j] += delta[j];
      f = functional_value(sp, w);
      res.f_history.push_back(f);
      eps = std::max(eps * 0.1, cfg.eps_reg_floor);
      g = functional_gradient(sp, w);
      continue;
    }

    double s = 1.0;
    bool accepted = false;
    std::vector<double> trial(m);
    for (int bt = 0; bt <= cfg.max_backtracks; ++bt) {
      for (std::size_t j = 0; j < m; ++j) trial[j] = w[j] + s * delta[j];
      const double ft = functional_value(sp, trial);
      if (ft <= f + cfg.sufficient_decrease * s * slope) {
        w.swap(trial);
        f = ft;
        res.f_history.push_back(f);
        accepted = true;
        break;
      }
      s *= cfg.backtrack_factor;
    }
    if (!accepted) break;  // no decrease found at the smallest step
    if (s == 1.0) eps = std::max(eps * 0.1, cfg.eps_reg_floor);
    g = functional_gradient(sp, w);
  }

  res.interior_coeffs = std::move(w);
  res.iterations = it;
  res.gradient_norm = norm2(g);
  res.tolerance = tol;
  res.functional = f;
  if (res.gradient_norm <= tol) res.converged = true;
  return res;
}

/// Weak-form residual of the step equation tested against every interior hat:
/// max_j | int |u'|^{p-2}u' e_j' + (1/h) int (|u|^{p-2}u - |u_prev|^{p-2}u_prev) e_j |.
/// This is the optimality system of the step functional, assembled node by node.
inline double step_residual(const StepProblem& sp, const std::vector<double>& interior_coeffs) {
  detail::check_sizes(sp, interior_coeffs);
  const Mesh& mesh = sp.basis->mesh;
  const QuadratureRule& quad = sp.basis->quad;
  const NodalVector u = full_state(sp, interior_coeffs);
  const auto slopes = element_slopes(mesh, u);
  const auto lump = lumped_weights(mesh);

  double worst = 0.0;
  for (std::size_t idx = 0; idx < sp.basis->interior_count(); ++idx) {
    const std::size_t i = sp.basis->interior_nodes[idx];
    // e_i rises on element i-1 and falls on element i.
    double r = power_map(sp.p, slopes[i - 1]) - power_map(sp.p, slopes[i]);
    if (sp.lumped_time) {
      r += lump[i] * (power_map(sp.p, u[i]) - power_map(sp.p, sp.previous[i])) / sp.h;
    } else {
      for (std::size_t e : {i - 1, i}) {
        const double len = mesh.element_length(e);
        for (std::size_t q = 0; q < quad.points.size(); ++q) {
          const double uq = sp.basis->hat_left[q] * u[e] + sp.basis->hat_right[q] * u[e + 1];
          const double vq = sp.basis->hat_left[q] * sp.previous[e] + sp.basis->hat_right[q] * sp.previous[e + 1];
          const double hat = (e == i - 1) ? sp.basis->hat_right[q] : sp.basis->hat_left[q];
          r += len * quad.weights[q] * hat * (power_map(sp.p, uq) - power_map(sp.p, vq)) / sp.h;
        }
      }
    }
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

}  // namespace dnl
