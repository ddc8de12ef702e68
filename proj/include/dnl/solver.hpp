#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dnl/discretization.hpp"
#include "dnl/errors.hpp"
#include "dnl/geometry.hpp"
#include "dnl/model.hpp"
#include "dnl/stepper.hpp"

namespace dnl {

/// The continuous problem: exponent, space-time cylinder, boundary data.
struct ProblemSpec {
  Exponent p;
  double domain_a = 0.0;
  double domain_b = 1.0;
  double final_time = 1.0;
  BoundaryData boundary;
};

/// Discrete solution of the full time march: nodal states u_k for
/// k = 0..m_t, piecewise linear in space and piecewise constant in time
/// (state k lives on the slab ((k-1)h, kh]). State 0 interpolates the
/// initial data; boundary nodes of state k carry the averaged boundary
/// slice k.
struct DiscreteSolution {
  Exponent p;
  TimeGrid grid;
  Mesh mesh;
  AveragedBoundary boundary;
  std::vector<NodalVector> states;   // size m_t + 1
  std::vector<StepResult> steps;     // size m_t
  bool lumped_time = true;

  double max_abs() const {
    double m = 0.0;
    for (const auto& u : states)
      for (double v : u) m = std::max(m, std::abs(v));
    return m;
  }
};

/// A time march aborted at a non-converged step; carries the converged prefix.
class solve_error : public std::runtime_error {
 public:
  solve_error(std::size_t step, DiscreteSolution partial_solution)
      : std::runtime_error("solve: step " + std::to_string(step) + " did not converge"),
        step_index(step),
        partial(std::move(partial_solution)) {}
  std::size_t step_index;
  DiscreteSolution partial;
};

/// March the implicit scheme over the whole grid: state 0 interpolates the
/// initial data, each following state minimizes the step functional against
/// the previous one, warm-started from the previous interior coefficients.
inline DiscreteSolution solve(const ProblemSpec& spec, const TimeGrid& grid, const Mesh& mesh,
                              const SolveConfig& cfg) {
  const QuadratureRule quad = gauss_rule(cfg.quadrature_order);
  const Basis basis = make_basis(mesh, quad);

  DiscreteSolution sol{spec.p, grid, basis.mesh, average_boundary(spec.boundary, grid, basis.mesh, quad),
                       {}, {}, cfg.lumped_time};
  sol.states.reserve(grid.step_count + 1);
  sol.steps.reserve(grid.step_count);
  sol.states.push_back(interpolate_nodal(
      [&](double x) { return spec.boundary.value(x, 0.0); }, basis.mesh));

  std::vector<double> warm(basis.interior_count(), 0.0);
  for (std::size_t k = 1; k <= grid.step_count; ++k) {
    StepProblem sp{spec.p, &basis, grid.step, sol.states.back(), sol.boundary.slice(k), cfg.lumped_time};
    StepResult res = solve_step(sp, cfg, &warm);
    if (!res.converged) throw solve_error(k, std::move(sol));
    warm = res.interior_coeffs;
    sol.states.push_back(full_state(sp, res.interior_coeffs));
    sol.steps.push_back(std::move(res));
  }
  return sol;
}

/// Value of the discrete solution at (x, t): linear interpolation in space,
/// the slab value in time (exact at nodes and step boundaries).
inline double evaluate(const DiscreteSolution& sol, double x, double t) {
  const double pad_x = 1e-12 * sol.mesh.length();
  const double pad_t = 1e-12 * std::max(sol.grid.final_time, 1.0);
  if (x < sol.mesh.a() - pad_x || x > sol.mesh.b() + pad_x)
    throw std::invalid_argument("evaluate: x outside the domain");
  if (t < -pad_t || t > sol.grid.final_time + pad_t)
    throw std::invalid_argument("evaluate: t outside [0, T]");
  const std::size_t k = sol.grid.slab_of(t);
  return nodal_value_at(sol.mesh, sol.states[k], x);
}

/// L^p(Omega_T) distance between two discrete solutions by composite
/// quadrature: Gauss in space on the finer mesh, the slab value in time on
/// the finer grid (matching the piecewise-constant time structure).
inline double lp_spacetime_distance(const DiscreteSolution& a, const DiscreteSolution& b,
                                    double p_norm, int quad_order = 4) {
  const DiscreteSolution& fine = (a.grid.step_count >= b.grid.step_count) ? a : b;
  const DiscreteSolution& mesh_fine = (a.mesh.element_count() >= b.mesh.element_count()) ? a : b;
  const QuadratureRule quad = gauss_rule(quad_order);
  double acc = 0.0;
  for (std::size_t k = 1; k <= fine.grid.step_count; ++k) {
    const double t = fine.grid.time_of(k);
    double space = 0.0;
    for (std::size_t e = 0; e < mesh_fine.mesh.element_count(); ++e) {
      const double x0 = mesh_fine.mesh.nodes[e];
      const double len = mesh_fine.mesh.element_length(e);
      for (std::size_t q = 0; q < quad.points.size(); ++q) {
        const double x = x0 + quad.points[q] * len;
        space += len * quad.weights[q] * std::pow(std::abs(evaluate(a, x, t) - evaluate(b, x, t)), p_norm);
      }
    }
    acc += fine.grid.step * space;
  }
  return std::pow(acc, 1.0 / p_norm);
}

/// L^p(Omega_T) error against a space-time function, same quadrature
/// convention (the function is sampled at each slab's right endpoint).
inline double lp_spacetime_error(const DiscreteSolution& sol, const SpaceTimeFn& exact,
                                 double p_norm, int quad_order = 4) {
  const QuadratureRule quad = gauss_rule(quad_order);
  double acc = 0.0;
  for (std::size_t k = 1; k <= sol.grid.step_count; ++k) {
    const double t = sol.grid.time_of(k);
    double space = 0.0;
    for (std::size_t e = 0; e < sol.mesh.element_count(); ++e) {
      const double x0 = sol.mesh.nodes[e];
      const double len = sol.mesh.element_length(e);
      for (std::size_t q = 0; q < quad.points.size(); ++q) {
        const double x = x0 + quad.points[q] * len;
        space += len * quad.weights[q] * std::pow(std::abs(evaluate(sol, x, t) - exact(x, t)), p_norm);
      }
    }
    acc += sol.grid.step * space;
  }
  return std::pow(acc, 1.0 / p_norm);
}

/// Sup-norm error at the final time, sampled at nodes and quadrature points.
inline double linf_final_error(const DiscreteSolution& sol, const SpaceTimeFn& exact,
                               int quad_order = 4) {
  const QuadratureRule quad = gauss_rule(quad_order);
  const double T = sol.grid.final_time;
  const NodalVector& u = sol.states.back();
  double worst = 0.0;
  for (std::size_t i = 0; i < sol.mesh.node_count(); ++i)
    worst = std::max(worst, std::abs(u[i] - exact(sol.mesh.nodes[i], T)));
  for (std::size_t e = 0; e < sol.mesh.element_count(); ++e) {
    const double x0 = sol.mesh.nodes[e];
    const double len = sol.mesh.element_length(e);
    for (std::size_t q = 0; q < quad.points.size(); ++q) {
      const double x = x0 + quad.points[q] * len;
      worst = std::max(worst, std::abs(nodal_value_at(sol.mesh, u, x) - exact(x, T)));
    }
  }
  return worst;
}

/// One rung of a refinement ladder.
struct RefinementRung {
  std::size_t time_steps = 0;
  std::size_t elements = 0;
};

/// Per-rung errors of a refinement study. With an oracle, `errors` holds
/// L^p(Omega_T) errors against it; otherwise distances to the finest rung
/// (zero on the last rung). `gaps` holds consecutive rung-to-rung distances.
struct ConvergenceReport {
  std::vector<RefinementRung> rungs;
  std::vector<double> errors;
  std::vector<double> gaps;        // size rungs-1
  std::vector<double> reductions;  // errors[r-1] / errors[r], 0 on the first rung
  std::vector<double> linf_final;  // only with an oracle
  bool incomplete = false;
};

inline ConvergenceReport refine_study(const ProblemSpec& spec, const std::vector<RefinementRung>& ladder,
                                      const SolveConfig& cfg, const SpaceTimeFn* oracle = nullptr) {
  if (ladder.size() < 2)
    throw std::invalid_argument("refine_study: ladder needs at least 2 rungs");
  for (std::size_t r = 1; r < ladder.size(); ++r) {
    const bool mono = ladder[r].time_steps >= ladder[r - 1].time_steps &&
                      ladder[r].elements >= ladder[r - 1].elements;
    const bool strict = ladder[r].time_steps > ladder[r - 1].time_steps ||
                        ladder[r].elements > ladder[r - 1].elements;
    if (!mono || !strict)
      throw std::invalid_argument("refine_study: ladder must refine strictly");
  }

  ConvergenceReport rep;
  rep.rungs = ladder;
  std::vector<DiscreteSolution> sols;
  for (const auto& rung : ladder) {
    try {
      sols.push_back(solve(spec, build_time_grid(spec.final_time, rung.time_steps),
                           build_uniform_mesh(rung.elements, spec.domain_a, spec.domain_b), cfg));
    } catch (const solve_error&) {
      rep.incomplete = true;
      break;
    }
  }

  const double p = spec.p.p();
  for (std::size_t r = 0; r + 1 < sols.size(); ++r)
    rep.gaps.push_back(lp_spacetime_distance(sols[r], sols[r + 1], p, cfg.quadrature_order));
  for (std::size_t r = 0; r < sols.size(); ++r) {
    if (oracle) {
      rep.errors.push_back(lp_spacetime_error(sols[r], *oracle, p, cfg.quadrature_order));
      rep.linf_final.push_back(linf_final_error(sols[r], *oracle, cfg.quadrature_order));
    } else {
      rep.errors.push_back(lp_spacetime_distance(sols[r], sols.back(), p, cfg.quadrature_order));
    }
  }
  for (std::size_t r = 0; r < rep.errors.size(); ++r)
    rep.reductions.push_back((r == 0 || rep.errors[r] == 0.0) ? 0.0 : rep.errors[r - 1] / rep.errors[r]);
  return rep;
}

}  // namespace dnl
