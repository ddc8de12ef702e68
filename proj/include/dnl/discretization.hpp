#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dnl/errors.hpp"
#include "dnl/geometry.hpp"

namespace dnl {

/// Pointwise function of (x, t).
using SpaceTimeFn = std::function<double(double, double)>;

/// Uniform time grid: m_t steps of size h covering [0, T].
struct TimeGrid {
  double step = 0.0;        // h
  std::size_t step_count = 0;  // m_t
  double final_time = 0.0;  // T = m_t * h

  double time_of(std::size_t k) const { return static_cast<double>(k) * step; }

  // Edge guard for slab lookups: k*h/h can miss k by about k ulps, so the
  // tolerance must grow with the index.
  static constexpr double kEdgeGuard = 1e-9;

  /// Largest step index k with k*h <= t (up to roundoff), clamped to [0, m_t].
  std::size_t snap_down(double t) const {
    if (t <= 0.0) return 0;
    const double r = t / step;
    const auto k = static_cast<std::size_t>(r + kEdgeGuard * std::max(1.0, r));
    return std::min(k, step_count);
  }

  /// Slab index carrying time t under the convention u_k lives on ((k-1)h, kh].
  std::size_t slab_of(double t) const {
    if (t <= 0.0) return 0;
    const double r = t / step;
    const auto k = static_cast<std::size_t>(std::ceil(r - kEdgeGuard * std::max(1.0, r)));
    return std::min(std::max<std::size_t>(k, 1), step_count);
  }
};

inline TimeGrid build_time_grid(double final_time, std::size_t step_count) {
  if (!std::isfinite(final_time) || !(final_time > 0.0))
    throw std::invalid_argument("build_time_grid: final time must be positive and finite");
  if (step_count == 0)
    throw std::invalid_argument("build_time_grid: need at least one step");
  TimeGrid g;
  g.final_time = final_time;
  g.step_count = step_count;
  g.step = final_time / static_cast<double>(step_count);
  return g;
}

/// Analytic boundary/initial data: a named C^2 family with closed-form
/// evaluators for the value and the derivatives entering the estimates.
struct BoundaryData {
  std::string family;          // registry tag, or "custom"
  std::vector<double> params;
  SpaceTimeFn value;
  SpaceTimeFn dt;    // time derivative
  SpaceTimeFn dx;    // space derivative
  SpaceTimeFn dxdt;  // mixed derivative
};

inline const std::vector<std::string>& boundary_families() {
  static const std::vector<std::string> families = {
      "constant", "affine-xt", "sin-bump", "separable-product", "polynomial"};
  return families;
}

/// Construct a registry family.
///   constant           {c}                      c
///   affine-xt          {c0, cx, ct, cxt}        c0 + cx x + ct t + cxt x t
///   sin-bump           {amp, freq, decay}       amp e^{-decay t} sin(freq pi x)
///   separable-product  {s0,s1,s2, g0,g1,g2}     (s0+s1 x+s2 x^2)(g0+g1 t+g2 t^2)
///   polynomial         {c_ij : i<4, j<3}        sum c_ij x^i t^j (x-major order)
inline BoundaryData make_boundary(const std::string& family, const std::vector<double>& params) {
  for (double v : params)
    if (!std::isfinite(v)) throw std::invalid_argument("make_boundary: non-finite parameter");
  auto expect = [&](std::size_t n) {
    if (params.size() != n)
      throw std::invalid_argument("make_boundary: family '" + family + "' needs " +
                                  std::to_string(n) + " parameters, got " +
                                  std::to_string(params.size()));
  };
  BoundaryData b;
  b.family = family;
  b.params = params;
  if (family == "constant") {
    expect(1);
    const double c = params[0];
    b.value = [c](double, double) { return c; };
    b.dt = b.dx = b.dxdt = [](double, double) { return 0.0; };
  } else if (family == "affine-xt") {
    expect(4);
    const double c0 = params[0], cx = params[1], ct = params[2], cxt = params[3];
    b.value = [=](double x, double t) { return c0 + cx * x + ct * t + cxt * x * t; };
    b.dt = [=](double x, double) { return ct + cxt * x; };
    b.dx = [=](double, double t) { return cx + cxt * t; };
    b.dxdt = [=](double, double) { return cxt; };
  } else if (family == "sin-bump") {
    expect(3);
    const double amp = params[0], freq = params[1], decay = params[2];
    const double w = freq * M_PI;
    b.value = [=](double x, double t) { return amp * std::exp(-decay * t) * std::sin(w * x); };
    b.dt = [=](double x, double t) { return -decay * amp * std::exp(-decay * t) * std::sin(w * x); };
    b.dx = [=](double x, double t) { return amp * w * std::exp(-decay * t) * std::cos(w * x); };
    b.dxdt = [=](double x, double t) { return -decay * amp * w * std::exp(-decay * t) * std::cos(w * x); };
  } else if (family == "separable-product") {
    expect(6);
    const double s0 = params[0], s1 = params[1], s2 = params[2];
    const double g0 = params[3], g1 = params[4], g2 = params[5];
    auto S = [=](double x) { return s0 + s1 * x + s2 * x * x; };
    auto Sp = [=](double x) { return s1 + 2.0 * s2 * x; };
    auto G = [=](double t) { return g0 + g1 * t + g2 * t * t; };
    auto Gp = [=](double t) { return g1 + 2.0 * g2 * t; };
    b.value = [=](double x, double t) { return S(x) * G(t); };
    b.dt = [=](double x, double t) { return S(x) * Gp(t); };
    b.dx = [=](double x, double t) { return Sp(x) * G(t); };
    b.dxdt = [=](double x, double t) { return Sp(x) * Gp(t); };
  } else if (family == "polynomial") {
    expect(12);
    auto c = [params](int i, int j) { return params[static_cast<std::size_t>(3 * i + j)]; };
    b.value = [=](double x, double t) {
      double acc = 0.0;
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 3; ++j) acc += c(i, j) * std::pow(x, i) * std::pow(t, j);
      return acc;
    };
    b.dt = [=](double x, double t) {
      double acc = 0.0;
      for (int i = 0; i < 4; ++i)
        for (int j = 1; j < 3; ++j) acc += c(i, j) * j * std::pow(x, i) * std::pow(t, j - 1);
      return acc;
    };
    b.dx = [=](double x, double t) {
      double acc = 0.0;
      for (int i = 1; i < 4; ++i)
        for (int j = 0; j < 3; ++j) acc += c(i, j) * i * std::pow(x, i - 1) * std::pow(t, j);
      return acc;
    };
    b.dxdt = [=](double x, double t) {
      double acc = 0.0;
      for (int i = 1; i < 4; ++i)
        for (int j = 1; j < 3; ++j) acc += c(i, j) * i * j * std::pow(x, i - 1) * std::pow(t, j - 1);
      return acc;
    };
  } else {
    throw std::invalid_argument("make_boundary: unknown family '" + family + "'");
  }
  return b;
}

/// The same data shifted by a constant: value + gamma, derivatives unchanged.
inline BoundaryData shift_boundary(const BoundaryData& base, double gamma) {
  BoundaryData b = base;
  b.family = "custom";
  auto inner = base.value;
  b.value = [inner, gamma](double x, double t) { return inner(x, t) + gamma; };
  return b;
}

/// Piecewise-constant-in-time averaged boundary data: slice k holds the
/// nodal interpolant of the slab average over ((k-1)h, kh); slice 0 holds
/// the pointwise initial data.
struct AveragedBoundary {
  TimeGrid grid;
  std::vector<NodalVector> slices;  // size step_count + 1

  const NodalVector& slice(std::size_t k) const { return slices[k]; }
};

inline AveragedBoundary average_boundary(const BoundaryData& psi, const TimeGrid& grid,
                                         const Mesh& mesh, const QuadratureRule& quad) {
  AveragedBoundary ab;
  ab.grid = grid;
  ab.slices.resize(grid.step_count + 1);
  ab.slices[0].resize(mesh.node_count());
  for (std::size_t i = 0; i < mesh.node_count(); ++i) {
    ab.slices[0][i] = psi.value(mesh.nodes[i], 0.0);
    if (!std::isfinite(ab.slices[0][i]))
      throw invalid_data("average_boundary: non-finite initial value at node " + std::to_string(i));
  }
  for (std::size_t k = 1; k <= grid.step_count; ++k) {
    const double t0 = static_cast<double>(k - 1) * grid.step;
    ab.slices[k].resize(mesh.node_count());
    for (std::size_t i = 0; i < mesh.node_count(); ++i) {
      double avg = 0.0;
      for (std::size_t q = 0; q < quad.points.size(); ++q)
        avg += quad.weights[q] * psi.value(mesh.nodes[i], t0 + quad.points[q] * grid.step);
      if (!std::isfinite(avg))
        throw invalid_data("average_boundary: non-finite average at node " + std::to_string(i));
      ab.slices[k][i] = avg;
    }
  }
  return ab;
}

/// Backward difference quotients of a time series of nodal vectors:
/// result[k-1] = (series[k] - series[k-1]) / h for k = 1..N-1.
inline std::vector<NodalVector> backward_difference(const std::vector<NodalVector>& series, double h) {
  if (series.size() < 2)
    throw std::invalid_argument("backward_difference: need at least 2 slices");
  std::vector<NodalVector> out(series.size() - 1);
  for (std::size_t k = 1; k < series.size(); ++k) {
    out[k - 1].resize(series[k].size());
    for (std::size_t i = 0; i < series[k].size(); ++i)
      out[k - 1][i] = (series[k][i] - series[k - 1][i]) / h;
  }
  return out;
}

}  // namespace dnl
