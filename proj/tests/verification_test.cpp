#include <doctest.h>

#include <cmath>

#include "dnl/verification.hpp"

using namespace dnl;

namespace {

ProblemSpec heat_spec(double T = 0.1) {
  return ProblemSpec{Exponent(2.0 + 1e-12), 0.0, 1.0, T,
                     make_boundary("sin-bump", {1.0, 1.0, M_PI * M_PI})};
}

}  // namespace

TEST_CASE("maximum principle on constant, heat, and ramp data") {
  ProblemSpec flat{Exponent(3.0), 0.0, 1.0, 1.0, make_boundary("constant", {2.0})};
  const DiscreteSolution fsol = solve(flat, build_time_grid(1.0, 8), build_uniform_mesh(8, 0.0, 1.0),
                                      SolveConfig{});
  const PrincipleReport frep = max_principle_check(fsol);
  CHECK(frep.pass);
  CHECK(frep.worst_violation == doctest::Approx(0.0).epsilon(1e-12));

  const ProblemSpec hs = heat_spec();
  const DiscreteSolution hsol = solve(hs, build_time_grid(hs.final_time, 50),
                                      build_uniform_mesh(16, 0.0, 1.0), SolveConfig{});
  CHECK(max_principle_check(hsol).pass);
  CHECK(hsol.max_abs() <= 1.0 + 1e-9);
  for (const auto& u : hsol.states)
    for (double v : u) CHECK(v >= -1e-9);

  ProblemSpec ramp{Exponent(3.0), 0.0, 1.0, 0.5, make_boundary("affine-xt", {0.0, 1.0, 0.0, 0.0})};
  const DiscreteSolution rsol = solve(ramp, build_time_grid(0.5, 10), build_uniform_mesh(10, 0.0, 1.0),
                                      SolveConfig{});
  CHECK(max_principle_check(rsol).pass);
  for (const auto& u : rsol.states)
    for (double v : u) {
      CHECK(v >= -1e-9);
      CHECK(v <= 1.0 + 1e-9);
    }
}

TEST_CASE("comparison principle") {
  const TimeGrid grid = build_time_grid(0.5, 10);
  const Mesh mesh = build_uniform_mesh(10, 0.0, 1.0);

  ProblemSpec base{Exponent(3.0), 0.0, 1.0, 0.5, make_boundary("affine-xt", {1.0, 0.5, 0.2, 0.0})};
  const DiscreteSolution u0 = solve(base, grid, mesh, SolveConfig{});

  // identical inputs compare with zero violation
  const PrincipleReport same = comparison_check(u0, u0);
  CHECK(same.pass);
  CHECK(same.worst_violation == 0.0);

  // boundary data ordered by a constant: ordering holds at all nodes and steps
  ProblemSpec up = base;
  up.boundary = shift_boundary(base.boundary, 0.1);
  const DiscreteSolution u1 = solve(up, grid, mesh, SolveConfig{});
  const PrincipleReport rep = comparison_check(u1, u0);
  CHECK(rep.pass);

  // transitivity across a three-solution chain
  ProblemSpec up2 = base;
  up2.boundary = shift_boundary(base.boundary, 0.2);
  const DiscreteSolution u2 = solve(up2, grid, mesh, SolveConfig{});
  CHECK(comparison_check(u2, u1).pass);
  CHECK(comparison_check(u2, u0).pass);

  // constants 0 <= 1
  ProblemSpec zero{Exponent(3.0), 0.0, 1.0, 0.5, make_boundary("constant", {0.0})};
  ProblemSpec one{Exponent(3.0), 0.0, 1.0, 0.5, make_boundary("constant", {1.0})};
  const DiscreteSolution z = solve(zero, grid, mesh, SolveConfig{});
  const DiscreteSolution o = solve(one, grid, mesh, SolveConfig{});
  CHECK(comparison_check(o, z).pass);

  // unordered boundary data is a precondition failure, not a report
  CHECK_THROWS_AS(comparison_check(z, o), precondition_error);

  // different discretizations cannot be compared
  const DiscreteSolution other = solve(base, grid, build_uniform_mesh(11, 0.0, 1.0), SolveConfig{});
  CHECK_THROWS_AS(comparison_check(u0, other), std::invalid_argument);
}

TEST_CASE("gamma squeeze: constants give the closed-form gap") {
  const double T = 1.0, p = 3.0;
  ProblemSpec spec{Exponent(p), 0.0, 1.0, T, make_boundary("constant", {1.0})};
  const TimeGrid grid = build_time_grid(T, 10);
  const Mesh mesh = build_uniform_mesh(8, 0.0, 1.0);
  const SqueezeReport rep = gamma_squeeze(spec, {0.2, 0.1, 0.05}, grid, mesh, SolveConfig{});
  REQUIRE(rep.complete);
  CHECK(rep.ordering_ok);
  CHECK(rep.gaps_decreasing);
  for (const auto& entry : rep.entries) {
    const double expected = 2.0 * entry.gamma * std::pow(1.0 * T, 1.0 / p);
    CHECK(entry.gap == doctest::Approx(expected).epsilon(1e-10));
  }
  // the gap is exactly linear in gamma for constants
  CHECK(rep.entries[1].gap / rep.entries[2].gap == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("gamma squeeze: heat-mode ladder orders and collapses") {
  const ProblemSpec spec = heat_spec();
  const SqueezeReport rep = gamma_squeeze(spec, {0.2, 0.1, 0.05}, build_time_grid(spec.final_time, 50),
                                          build_uniform_mesh(16, 0.0, 1.0), SolveConfig{});
  REQUIRE(rep.complete);
  CHECK(rep.ordering_ok);
  CHECK(rep.gaps_decreasing);
}

TEST_CASE("gamma squeeze validates the ladder") {
  const ProblemSpec spec = heat_spec();
  const TimeGrid grid = build_time_grid(spec.final_time, 10);
  const Mesh mesh = build_uniform_mesh(8, 0.0, 1.0);
  CHECK_THROWS_AS(gamma_squeeze(spec, {}, grid, mesh, SolveConfig{}), std::invalid_argument);
  CHECK_THROWS_AS(gamma_squeeze(spec, {0.1, 0.2}, grid, mesh, SolveConfig{}), std::invalid_argument);
  CHECK_THROWS_AS(gamma_squeeze(spec, {0.1, -0.05}, grid, mesh, SolveConfig{}), std::invalid_argument);
}

TEST_CASE("weak form residual telescopes for constants") {
  ProblemSpec flat{Exponent(3.0), 0.0, 1.0, 1.0, make_boundary("constant", {1.3})};
  const DiscreteSolution sol = solve(flat, build_time_grid(1.0, 10), build_uniform_mesh(8, 0.0, 1.0),
                                     SolveConfig{});
  const TestField zeta = make_test_field("bump", {1.0}, 0.0, 1.0);
  CHECK(weak_form_residual(sol, zeta, 0.0, 1.0) <= 1e-12);

  const TestField zero = make_test_field("bump", {0.0}, 0.0, 1.0);
  CHECK(weak_form_residual(sol, zero, 0.0, 1.0) == 0.0);

  // a field that misses the endpoints is rejected
  const TestField off = make_test_field("bump", {1.0}, 0.25, 0.75);
  CHECK_THROWS_AS(weak_form_residual(sol, off, 0.0, 1.0), precondition_error);
}

TEST_CASE("weak form residual shrinks under refinement in heat mode") {
  const ProblemSpec spec = heat_spec();
  const TestField zeta = make_test_field("bump", {1.0}, 0.0, 1.0);
  double prev = 0.0;
  std::size_t mt = 25, n = 8;
  for (int rung = 0; rung < 3; ++rung) {
    const DiscreteSolution sol = solve(spec, build_time_grid(spec.final_time, mt),
                                       build_uniform_mesh(n, 0.0, 1.0), SolveConfig{});
    const double res = weak_form_residual(sol, zeta, 0.0, spec.final_time);
    if (rung > 0) CHECK(res < prev / 1.5);
    prev = res;
    mt *= 2;
    n *= 2;
  }
}

TEST_CASE("separable oracle: p -> 2 recovers the sine eigenpair") {
  const ExactSolution ex = separable_oracle(Exponent(2.0 + 1e-12), 2000);
  CHECK(std::abs(ex.lambda - M_PI * M_PI) <= 1e-6);
  for (double x : {0.1, 0.25, 0.5, 0.8})
    CHECK(std::abs(ex.v(x) - std::sin(M_PI * x)) <= 1e-6);
  CHECK(ex.shoot_residual <= 1e-10);
}

TEST_CASE("separable oracle: certification and positivity") {
  const ExactSolution ex = separable_oracle(Exponent(3.0), 4096);
  CHECK(ex.shoot_residual <= 1e-10);
  const auto& v = *ex.profile;
  CHECK(v.front() == 0.0);
  CHECK(std::abs(v.back()) <= 1e-10);
  for (std::size_t i = 1; i + 1 < v.size(); ++i) CHECK(v[i] > 0.0);
  double vmax = 0.0;
  for (double s : v) vmax = std::max(vmax, s);
  CHECK(vmax == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("separable oracle satisfies its own equation in integral form") {
  const Exponent p(3.0);
  const ExactSolution ex = separable_oracle(p, 8192);
  const auto& v = *ex.profile;
  const auto& w = *ex.profile_flux;
  const std::size_t n = v.size() - 1;
  const double dx = 1.0 / static_cast<double>(n);
  const QuadratureRule quad = gauss_rule(4);

  // flux equation: w_{i+1} - w_i = -(p-1) lambda int |v|^{p-2} v over the cell
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double cell = 0.0;
    for (std::size_t q = 0; q < quad.points.size(); ++q) {
      const double vi = (1.0 - quad.points[q]) * v[i] + quad.points[q] * v[i + 1];
      cell += quad.weights[q] * power_map(p, vi);
    }
    const double res = w[i + 1] - w[i] + (p.p() - 1.0) * ex.lambda * dx * cell;
    worst = std::max(worst, std::abs(res));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("oracle samples reproduce themselves and drive the weak form") {
  const Exponent p(3.0);
  const ExactSolution ex = separable_oracle(p, 512);
  const Mesh mesh = build_uniform_mesh(512, 0.0, 1.0);  // aligned with the profile samples
  const TimeGrid grid = build_time_grid(0.001, 500);
  const DiscreteSolution sampled = sample_exact(ex, p, grid, mesh);

  const ErrorNorms norms = error_vs_oracle(sampled, ex);
  CHECK(norms.lp_spacetime <= 1e-10);
  CHECK(norms.linf_final <= 1e-12);

  const TestField zeta = make_test_field("bump", {1.0}, 0.0, 1.0);
  CHECK(weak_form_residual(sampled, zeta, 0.0, grid.final_time) <= 1e-6);

  const Mesh wrong = build_uniform_mesh(16, 0.0, 2.0);
  const DiscreteSolution other = sample_exact(ex, p, grid, wrong);
  CHECK_THROWS_AS(error_vs_oracle(other, ex), std::invalid_argument);
}

TEST_CASE("zero boundary data propagates zero") {
  ProblemSpec spec{Exponent(3.0), 0.0, 1.0, 1.0, make_boundary("constant", {0.0})};
  const DiscreteSolution sol = solve(spec, build_time_grid(1.0, 10), build_uniform_mesh(8, 0.0, 1.0),
                                     SolveConfig{});
  CHECK(sol.max_abs() <= 1e-9);
}

TEST_CASE("heat-sine oracle guards its mode") {
  CHECK_NOTHROW(heat_sine_solution(Exponent(2.0 + 1e-12)));
  CHECK_THROWS_AS(heat_sine_solution(Exponent(3.0)), std::invalid_argument);
}
