#include <doctest.h>

#include <cmath>

#include "dnl/discretization.hpp"
#include "dnl/estimates.hpp"

using namespace dnl;

TEST_CASE("time grid construction") {
  const TimeGrid g = build_time_grid(1.0, 10);
  CHECK(g.step == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(g.step_count == 10);

  const TimeGrid single = build_time_grid(0.5, 1);
  CHECK(single.step == 0.5);

  const TimeGrid thirds = build_time_grid(1.0, 3);
  CHECK(3.0 * thirds.step == doctest::Approx(1.0).epsilon(1e-15));

  CHECK_THROWS_AS(build_time_grid(1.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(build_time_grid(-1.0, 4), std::invalid_argument);
  CHECK_THROWS_AS(build_time_grid(0.0, 4), std::invalid_argument);
}

TEST_CASE("time grid slab and snapping conventions") {
  const TimeGrid g = build_time_grid(1.0, 4);
  CHECK(g.slab_of(0.0) == 0);
  CHECK(g.slab_of(0.1) == 1);
  CHECK(g.slab_of(0.25) == 1);  // state k lives on ((k-1)h, kh]
  CHECK(g.slab_of(0.26) == 2);
  CHECK(g.slab_of(1.0) == 4);
  CHECK(g.snap_down(1.0) == 4);
  CHECK(g.snap_down(0.3) == 1);
  CHECK(g.snap_down(0.5) == 2);
}

TEST_CASE("slab lookup is exact at step boundaries even for huge grids") {
  const TimeGrid g = build_time_grid(0.7, 100000);
  for (std::size_t k : {std::size_t{1}, std::size_t{3}, std::size_t{999}, std::size_t{31415},
                        std::size_t{99999}, std::size_t{100000}}) {
    CHECK(g.slab_of(g.time_of(k)) == k);
    CHECK(g.snap_down(g.time_of(k)) == k);
  }
}

TEST_CASE("boundary family registry") {
  CHECK(boundary_families().size() == 5);

  const BoundaryData c = make_boundary("constant", {2.5});
  CHECK(c.value(0.3, 0.7) == 2.5);
  CHECK(c.dt(0.3, 0.7) == 0.0);

  const BoundaryData aff = make_boundary("affine-xt", {1.0, 2.0, 3.0, 4.0});
  CHECK(aff.value(0.5, 0.25) == doctest::Approx(1.0 + 1.0 + 0.75 + 0.5).epsilon(1e-15));
  CHECK(aff.dt(0.5, 0.25) == doctest::Approx(3.0 + 4.0 * 0.5).epsilon(1e-15));
  CHECK(aff.dx(0.5, 0.25) == doctest::Approx(2.0 + 4.0 * 0.25).epsilon(1e-15));
  CHECK(aff.dxdt(0.5, 0.25) == 4.0);

  const BoundaryData sb = make_boundary("sin-bump", {2.0, 1.0, 3.0});
  CHECK(sb.value(0.5, 0.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(sb.dt(0.5, 0.0) == doctest::Approx(-6.0).epsilon(1e-15));

  const BoundaryData sep = make_boundary("separable-product", {1.0, 0.0, 1.0, 1.0, 1.0, 0.0});
  CHECK(sep.value(2.0, 3.0) == doctest::Approx((1.0 + 4.0) * (1.0 + 3.0)).epsilon(1e-15));
  CHECK(sep.dxdt(2.0, 3.0) == doctest::Approx(4.0 * 1.0).epsilon(1e-15));

  std::vector<double> coeffs(12, 0.0);
  coeffs[3 * 1 + 1] = 2.0;  // 2 x t
  const BoundaryData poly = make_boundary("polynomial", coeffs);
  CHECK(poly.value(0.5, 0.25) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(poly.dxdt(0.5, 0.25) == doctest::Approx(2.0).epsilon(1e-15));

  CHECK_THROWS_AS(make_boundary("unknown", {}), std::invalid_argument);
  CHECK_THROWS_AS(make_boundary("constant", {1.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(make_boundary("constant", {std::nan("")}), std::invalid_argument);
}

TEST_CASE("boundary averaging") {
  const Mesh mesh = build_uniform_mesh(4, 0.0, 1.0);
  const TimeGrid grid = build_time_grid(1.0, 5);
  const QuadratureRule quad = gauss_rule(4);

  const AveragedBoundary constant =
      average_boundary(make_boundary("constant", {3.0}), grid, mesh, quad);
  REQUIRE(constant.slices.size() == 6);
  for (const auto& slice : constant.slices)
    for (double v : slice) CHECK(v == doctest::Approx(3.0).epsilon(1e-14));

  // psi = t: the first slab average is h/2 at every node, slice 0 is 0
  const AveragedBoundary ramp =
      average_boundary(make_boundary("affine-xt", {0.0, 0.0, 1.0, 0.0}), grid, mesh, quad);
  for (double v : ramp.slices[0]) CHECK(v == 0.0);
  for (double v : ramp.slices[1]) CHECK(v == doctest::Approx(0.5 * grid.step).epsilon(1e-14));

  // psi = x is time independent: every slice interpolates x
  const AveragedBoundary lin =
      average_boundary(make_boundary("affine-xt", {0.0, 1.0, 0.0, 0.0}), grid, mesh, quad);
  for (std::size_t k = 0; k <= grid.step_count; ++k)
    for (std::size_t i = 0; i < mesh.node_count(); ++i)
      CHECK(lin.slices[k][i] == doctest::Approx(mesh.nodes[i]).epsilon(1e-14));
}

TEST_CASE("boundary averaging commutes with constant shifts") {
  const Mesh mesh = build_uniform_mesh(6, 0.0, 2.0);
  const TimeGrid grid = build_time_grid(0.8, 7);
  const QuadratureRule quad = gauss_rule(4);
  const BoundaryData psi = make_boundary("sin-bump", {1.3, 2.0, 0.7});
  const double gamma = 0.25;

  const AveragedBoundary base = average_boundary(psi, grid, mesh, quad);
  const AveragedBoundary shifted = average_boundary(shift_boundary(psi, gamma), grid, mesh, quad);
  for (std::size_t k = 0; k <= grid.step_count; ++k)
    for (std::size_t i = 0; i < mesh.node_count(); ++i)
      CHECK(shifted.slices[k][i] ==
            doctest::Approx(base.slices[k][i] + gamma).epsilon(1e-14));
}

TEST_CASE("backward differences") {
  const double h = 0.5;
  std::vector<NodalVector> constant(4, NodalVector{2.0, 2.0});
  for (const auto& d : backward_difference(constant, h))
    for (double v : d) CHECK(v == 0.0);

  std::vector<NodalVector> ramp{{0.0}, {h}, {2.0 * h}};
  const auto d = backward_difference(ramp, h);
  REQUIRE(d.size() == 2);
  CHECK(d[0][0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(d[1][0] == doctest::Approx(1.0).epsilon(1e-15));

  std::vector<NodalVector> pair{{0.0}, {1.0}};
  CHECK(backward_difference(pair, 0.5)[0][0] == doctest::Approx(2.0).epsilon(1e-15));

  std::vector<NodalVector> single{{1.0}};
  CHECK_THROWS_AS(backward_difference(single, h), std::invalid_argument);
}

TEST_CASE("slab averages contract the time-derivative energy") {
  const Mesh mesh = build_uniform_mesh(5, 0.0, 1.0);
  const Exponent p(3.0);

  const std::vector<BoundaryData> families = {
      make_boundary("constant", {1.0}),
      make_boundary("affine-xt", {0.3, 0.5, 1.0, 0.25}),
      make_boundary("sin-bump", {1.0, 1.0, 2.0}),
      make_boundary("separable-product", {0.5, 1.0, -0.5, 1.0, 0.4, 0.2}),
      make_boundary("polynomial", {0.2, 0.1, 0.05, 0.0, 0.3, -0.1, 0.4, 0.0, 0.2, 0.1, 0.0, 0.0}),
  };
  for (std::size_t mt : {std::size_t{10}, std::size_t{100}}) {
    const TimeGrid grid = build_time_grid(1.0, mt);
    for (const auto& psi : families) {
      const ContractionReport rep = check_average_contraction(psi, mesh, grid, p);
      CHECK(rep.pass);
      CHECK(rep.slack_value >= -1e-8);
      CHECK(rep.slack_grad >= -1e-8);
    }
  }

  // psi = t: every slab-average difference has slope exactly one, equality
  const BoundaryData ramp = make_boundary("affine-xt", {0.0, 0.0, 1.0, 0.0});
  const TimeGrid grid = build_time_grid(1.0, 10);
  const ContractionReport rep = check_average_contraction(ramp, mesh, grid, p);
  CHECK(std::abs(rep.lhs_value - rep.rhs_value) <= 1e-12 * std::max(1.0, rep.rhs_value));
  CHECK(rep.pass);
}
