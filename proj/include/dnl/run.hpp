#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dnl/config.hpp"
#include "dnl/errors.hpp"
#include "dnl/estimates.hpp"
#include "dnl/report.hpp"
#include "dnl/solver.hpp"
#include "dnl/verification.hpp"

namespace dnl {

/// Exit codes of run_command: 0 all checks pass, 1 a check failed,
/// 2 the solve failed, 3 configuration error (thrown as config_error).
struct RunOutcome {
  int exit_code = 0;
  Json report;
};

namespace detail {

struct Check {
  std::string name;
  bool pass = false;
  double worst_slack = 0.0;
};

class PhaseTimer {
 public:
  void start() { t0_ = std::chrono::steady_clock::now(); }
  void stop(Json& timings, const std::string& phase) {
    const auto dt = std::chrono::steady_clock::now() - t0_;
    timings[phase] = std::chrono::duration<double>(dt).count();
    start();
  }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

inline Json checks_json(const std::vector<Check>& checks) {
  Json arr = Json::array();
  for (const auto& c : checks) {
    Json j;
    j["name"] = c.name;
    j["pass"] = c.pass;
    j["worst_slack"] = c.worst_slack;
    arr.push_back(j);
  }
  return arr;
}

inline bool all_pass(const std::vector<Check>& checks) {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

struct Emitter {
  std::filesystem::path dir;
  std::string format;
  Json inventory = Json::array();

  bool wants_csv() const { return format == "csv" || format == "both"; }
  bool wants_json() const { return format == "json" || format == "both"; }

  void emit(const std::string& name, const std::string& content) {
    const auto path = dir / name;
    write_file(path, content);
    Json entry;
    entry["path"] = name;
    entry["bytes"] = content.size();
    entry["fnv1a64"] = hex64(fnv1a64(content));
    inventory.push_back(entry);
  }
};

/// Oracle selected by the configuration; for the separable mode the boundary
/// data is replaced by the oracle-induced one.
inline std::unique_ptr<ExactSolution> resolve_oracle(const RunConfig& cfg, ProblemSpec& spec) {
  if (cfg.oracle == "none") return nullptr;
  if (cfg.oracle == "heat") {
    if (spec.p.p() - 2.0 > 1e-9)
      throw config_error("config: the heat oracle requires p = 2 + 1e-12 (p -> 2 mode)");
    const double amp = (cfg.boundary_family == "sin-bump") ? cfg.boundary_params[0] : 1.0;
    return std::make_unique<ExactSolution>(heat_sine_solution(spec.p, amp));
  }
  if (std::abs(spec.domain_a) > 1e-12 || std::abs(spec.domain_b - 1.0) > 1e-12)
    throw config_error("config: the separable oracle is defined on the unit interval");
  auto ex = std::make_unique<ExactSolution>(separable_oracle(spec.p, cfg.oracle_resolution));
  spec.boundary = boundary_from_exact(*ex);
  return ex;
}

inline DiscreteSolution load_solution_csv(const std::string& path, const RunConfig& cfg,
                                          const ProblemSpec& spec, const TimeGrid& grid,
                                          const Mesh& mesh) {
  std::ifstream in(path);
  if (!in) throw config_error("config: cannot read stored solution '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != "step,time,node,x,value")
    throw invalid_data("stored solution: unexpected header");
  DiscreteSolution sol{spec.p, grid, mesh,
                       average_boundary(spec.boundary, grid, mesh, gauss_rule(cfg.quadrature_order)),
                       {}, {}, cfg.lumped_time};
  sol.states.assign(grid.step_count + 1, NodalVector(mesh.node_count(), 0.0));
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    double step, time, node, x, value;
    char c;
    if (!(ls >> step >> c >> time >> c >> node >> c >> x >> c >> value))
      throw invalid_data("stored solution: malformed row '" + line + "'");
    const auto k = static_cast<std::size_t>(step);
    const auto i = static_cast<std::size_t>(node);
    if (k > grid.step_count || i >= mesh.node_count())
      throw invalid_data("stored solution: row outside the configured grid");
    if (std::abs(x - mesh.nodes[i]) > 1e-10 * std::max(1.0, std::abs(x)))
      throw invalid_data("stored solution: node coordinates disagree with the configured mesh");
    sol.states[k][i] = value;
    ++rows;
  }
  if (rows != (grid.step_count + 1) * mesh.node_count())
    throw invalid_data("stored solution: row count does not cover the grid");
  sol.steps.assign(grid.step_count, StepResult{{}, 0, 0.0, 0.0, 0.0, true, {}});
  return sol;
}

}  // namespace detail

inline RunOutcome run_command(const std::string& command, const RunConfig& cfg) {
  using detail::Check;
  if (command != "solve" && command != "verify" && command != "squeeze" &&
      command != "convergence" && command != "ineq")
    throw config_error("unknown command '" + command + "'");

  detail::Emitter emit{cfg.out_dir, cfg.format, Json::array()};
  Json report;
  Json timings;
  detail::PhaseTimer timer;
  std::vector<Check> checks;
  int exit_code = 0;

  report["command"] = command;
  report["config"] = emit_config_ini(cfg);

  ProblemSpec spec{Exponent(cfg.p), cfg.domain_a, cfg.domain_b, cfg.final_time,
                   make_boundary(cfg.boundary_family, cfg.boundary_params)};
  const TimeGrid grid = build_time_grid(cfg.final_time, cfg.time_steps);
  const Mesh mesh = build_uniform_mesh(cfg.elements, cfg.domain_a, cfg.domain_b);
  Json results;

  try {
    if (command == "solve" || command == "verify") {
      const auto oracle = detail::resolve_oracle(cfg, spec);
      timer.stop(timings, "setup");

      DiscreteSolution sol =
          (command == "verify" && !cfg.solution_csv.empty())
              ? detail::load_solution_csv(cfg.solution_csv, cfg, spec, grid, mesh)
              : solve(spec, grid, mesh, cfg.solver);
      timer.stop(timings, "solve");

      const double principle_tol = cfg.lumped_time ? 1e-9 : 1e-3;
      const PrincipleReport mp = max_principle_check(sol, principle_tol);
      checks.push_back({"max_principle", mp.pass, mp.worst_violation});
      results["max_principle"] = Json{{"worst_violation", mp.worst_violation},
                                      {"node", mp.worst_node},
                                      {"step", mp.worst_step},
                                      {"tolerance", mp.tolerance}};

      if (command == "solve") {
        double worst_res = 0.0;
        bool all_conv = true;
        for (const auto& s : sol.steps) {
          worst_res = std::max(worst_res, s.gradient_norm);
          all_conv = all_conv && s.converged;
        }
        checks.push_back({"step_residuals", all_conv, worst_res});

        const ContractionReport cr =
            check_average_contraction(spec.boundary, mesh, grid, spec.p, cfg.quadrature_order);
        checks.push_back({"average_contraction", cr.pass, std::min(cr.slack_value, cr.slack_grad)});
        results["average_contraction"] = Json{{"lhs_value", cr.lhs_value},
                                              {"rhs_value", cr.rhs_value},
                                              {"lhs_grad", cr.lhs_grad},
                                              {"rhs_grad", cr.rhs_grad}};

        const auto estimates = check_galerkin_estimate(sol, spec.boundary, cfg.resolved_cutoffs(),
                                                       cfg.quadrature_order);
        Json est = Json::array();
        bool ratios_ok = true, gamma_ok = true, link_ok = true;
        for (const auto& rep : estimates) {
          ratios_ok = ratios_ok && !rep.degenerate && std::isfinite(rep.ratio);
          gamma_ok = gamma_ok && rep.gamma_stable;
          link_ok = link_ok && rep.dt_energy_link_ok;
          est.push_back(Json{{"t_star", rep.t_star},
                             {"term_a", rep.ledger.term_a},
                             {"term_b", rep.ledger.term_b},
                             {"term_c", rep.ledger.term_c},
                             {"term_d", rep.ledger.term_d},
                             {"lhs", rep.ledger.lhs()},
                             {"majorant", rep.majorant},
                             {"ratio", rep.ratio},
                             {"dt_power_energy", rep.dt_power_energy},
                             {"t_regularity", rep.t_regularity},
                             {"uniform_bound_constant", rep.uniform_bound_constant}});
        }
        results["estimates"] = est;
        checks.push_back({"estimate_ratios_finite", ratios_ok, 0.0});
        checks.push_back({"majorant_gamma_stability", gamma_ok, 0.0});
        checks.push_back({"dt_energy_link", link_ok, 0.0});

        const GronwallTrace tr = gronwall_trace(sol, spec.boundary, cfg.quadrature_order);
        results["gronwall_constant"] = tr.empirical_constant;
        if (emit.wants_csv()) {
          std::vector<std::vector<double>> rows;
          for (std::size_t k = 0; k < tr.times.size(); ++k) rows.push_back({tr.times[k], tr.xi[k]});
          emit.emit("trace.csv", csv_text({"tau", "xi"}, rows));
          emit.emit("solution.csv", solution_csv(sol));
        }
      } else {
        const TestField zeta = make_test_field(cfg.zeta_family, cfg.zeta_params, cfg.domain_a, cfg.domain_b);
        const double res = weak_form_residual(sol, zeta, cfg.window_t1, cfg.resolved_window_t2(),
                                              cfg.quadrature_order);
        checks.push_back({"weak_form_residual_finite", std::isfinite(res), res});
        results["weak_form_residual"] = res;

        // zero-boundary propagation diagnostic (recorded, never asserted):
        // if the data vanishes on the parabolic boundary up to some step,
        // the solution should vanish there too.
        std::size_t zero_steps = 0;
        const std::size_t last = mesh.node_count() - 1;
        bool initial_zero = true;
        for (double v : sol.states[0]) initial_zero = initial_zero && std::abs(v) <= 1e-12;
        if (initial_zero) {
          for (std::size_t k = 1; k <= grid.step_count; ++k) {
            if (std::abs(sol.states[k][0]) > 1e-12 || std::abs(sol.states[k][last]) > 1e-12) break;
            zero_steps = k;
          }
        }
        if (zero_steps > 0) {
          double sup = 0.0;
          for (std::size_t k = 1; k <= zero_steps; ++k)
            for (double v : sol.states[k]) sup = std::max(sup, std::abs(v));
          results["zero_propagation"] =
              Json{{"zero_boundary_until", grid.time_of(zero_steps)}, {"interior_sup", sup},
                   {"consistent", sup <= 1e-9}};
        }
      }

      if (oracle) {
        const ErrorNorms err = error_vs_oracle(sol, *oracle, cfg.quadrature_order);
        results["oracle_error"] = Json{{"lp_spacetime", err.lp_spacetime}, {"linf_final", err.linf_final}};
        if (oracle->family == "separable-p") results["oracle_lambda"] = oracle->lambda;
      }
      results["summary"] = solution_summary(sol);
      timer.stop(timings, "checks");
    } else if (command == "squeeze") {
      timer.stop(timings, "setup");
      const SqueezeReport rep = gamma_squeeze(spec, cfg.gammas, grid, mesh, cfg.solver,
                                              cfg.lumped_time ? 1e-9 : 1e-3);
      timer.stop(timings, "solve");
      if (!rep.complete) {
        checks.push_back({"squeeze_complete", false, 0.0});
        exit_code = 2;
      }
      double worst = 0.0;
      Json entries = Json::array();
      std::vector<std::vector<double>> rows;
      for (const auto& e : rep.entries) {
        worst = std::min({worst, e.worst_lower, e.worst_upper});
        entries.push_back(Json{{"gamma", e.gamma},
                               {"gap", e.gap},
                               {"worst_lower", e.worst_lower},
                               {"worst_upper", e.worst_upper}});
        rows.push_back({e.gamma, e.gap});
      }
      results["squeeze"] = entries;
      checks.push_back({"squeeze_ordering", rep.ordering_ok, worst});
      checks.push_back({"squeeze_gaps_decreasing", rep.gaps_decreasing, 0.0});
      if (emit.wants_csv()) emit.emit("squeeze.csv", csv_text({"gamma", "gap"}, rows));
      timer.stop(timings, "checks");
    } else if (command == "convergence") {
      const auto oracle = detail::resolve_oracle(cfg, spec);
      std::vector<RefinementRung> ladder;
      std::size_t mt = cfg.ladder_time_steps, n = cfg.ladder_elements;
      for (std::size_t r = 0; r < cfg.ladder_rungs; ++r, mt *= 2, n *= 2) ladder.push_back({mt, n});
      timer.stop(timings, "setup");

      const SpaceTimeFn* oracle_fn = oracle ? &oracle->value : nullptr;
      const ConvergenceReport rep = refine_study(spec, ladder, cfg.solver, oracle_fn);
      timer.stop(timings, "solve");

      checks.push_back({"ladder_complete", !rep.incomplete, 0.0});
      bool shrinking = true;
      if (oracle) {
        for (std::size_t r = 1; r < rep.errors.size(); ++r)
          shrinking = shrinking && rep.errors[r] < rep.errors[r - 1];
        checks.push_back({"errors_decreasing", shrinking, 0.0});
      } else {
        for (std::size_t r = 1; r < rep.gaps.size(); ++r)
          shrinking = shrinking && rep.gaps[r] < rep.gaps[r - 1];
        checks.push_back({"gaps_decreasing", shrinking, 0.0});
      }
      Json rungs = Json::array();
      std::vector<std::vector<double>> rows;
      for (std::size_t r = 0; r < rep.rungs.size() && r < rep.errors.size(); ++r) {
        rungs.push_back(Json{{"time_steps", rep.rungs[r].time_steps},
                             {"elements", rep.rungs[r].elements},
                             {"error", rep.errors[r]},
                             {"reduction", rep.reductions[r]}});
        rows.push_back({static_cast<double>(rep.rungs[r].time_steps),
                        static_cast<double>(rep.rungs[r].elements), rep.errors[r], rep.reductions[r]});
      }
      results["rungs"] = rungs;
      if (!rep.gaps.empty()) results["gaps"] = rep.gaps;
      if (!rep.linf_final.empty()) results["linf_final"] = rep.linf_final;
      if (oracle && oracle->family == "separable-p") results["oracle_lambda"] = oracle->lambda;
      if (emit.wants_csv()) emit.emit("convergence.csv", csv_text({"mt", "n", "error", "reduction"}, rows));
      if (rep.incomplete) exit_code = 2;
      timer.stop(timings, "checks");
    } else {  // ineq
      if (!cfg.seed_set)
        throw config_error("config: the ineq command requires an explicit seed "
                           "(--seed or experiment.seed)");
      timer.stop(timings, "setup");
      std::mt19937_64 rng(cfg.seed);
      std::uniform_real_distribution<double> dist(-5.0, 5.0);
      double worst_slack = 0.0;
      std::size_t violations = 0;
      for (std::size_t i = 0; i < cfg.ineq_samples; ++i) {
        const std::size_t dim = 1 + static_cast<std::size_t>(rng() % 3);
        std::vector<double> a(dim), b(dim);
        for (auto& x : a) x = dist(rng);
        for (auto& x : b) x = dist(rng);
        const InequalityReport r = check_vector_inequalities(spec.p, a, b);
        if (!r.all_ok()) ++violations;
        worst_slack = std::min({worst_slack, r.slack_half, r.slack_convexity, r.slack_lower});
      }
      results["samples"] = cfg.ineq_samples;
      results["violations"] = violations;
      checks.push_back({"vector_inequalities", violations == 0, worst_slack});
      timer.stop(timings, "solve");
      timer.stop(timings, "checks");
    }
  } catch (const solve_error& err) {
    checks.push_back({"solve_converged", false, static_cast<double>(err.step_index)});
    results["failed_step"] = err.step_index;
    exit_code = 2;
  }

  report["results"] = results;
  report["checks"] = detail::checks_json(checks);
  report["timings"] = timings;
  if (exit_code == 0 && !detail::all_pass(checks)) exit_code = 1;

  if (emit.wants_json()) emit.emit("report.json", json_text(report));

  // manifest: resolved config, artifact version, timings, output inventory
  Json manifest;
  manifest["command"] = command;
  manifest["version"] = "0.1.0";
  manifest["config"] = emit_config_ini(cfg);
  manifest["timings"] = timings;
  manifest["outputs"] = emit.inventory;
  write_file(std::filesystem::path(cfg.out_dir) / "manifest.json", json_text(manifest));

  return RunOutcome{exit_code, report};
}

}  // namespace dnl
