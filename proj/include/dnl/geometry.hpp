#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dnl/errors.hpp"

namespace dnl {

/// One real value per mesh node.
using NodalVector = std::vector<double>;

/// Pointwise function of a spatial coordinate.
using SpatialFn = std::function<double(double)>;

/// 1D mesh of an interval [a, b]: strictly increasing node coordinates,
/// nodes.size() = element_count() + 1.
struct Mesh {
  std::vector<double> nodes;

  double a() const { return nodes.front(); }
  double b() const { return nodes.back(); }
  double length() const { return b() - a(); }
  std::size_t node_count() const { return nodes.size(); }
  std::size_t element_count() const { return nodes.size() - 1; }
  double element_length(std::size_t e) const { return nodes[e + 1] - nodes[e]; }

  /// Index of the element containing x, clamped to the boundary elements.
  std::size_t locate(double x) const {
    auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
    std::ptrdiff_t e = (it - nodes.begin()) - 1;
    e = std::max<std::ptrdiff_t>(0, std::min<std::ptrdiff_t>(e, static_cast<std::ptrdiff_t>(element_count()) - 1));
    return static_cast<std::size_t>(e);
  }
};

inline Mesh build_uniform_mesh(std::size_t n_elements, double a, double b) {
  if (!std::isfinite(a) || !std::isfinite(b))
    throw std::invalid_argument("build_uniform_mesh: endpoints must be finite");
  if (!(a < b))
    throw std::invalid_argument("build_uniform_mesh: requires a < b");
  if (n_elements == 0)
    throw std::invalid_argument("build_uniform_mesh: requires at least one element");
  Mesh m;
  m.nodes.resize(n_elements + 1);
  const double len = (b - a) / static_cast<double>(n_elements);
  for (std::size_t i = 0; i <= n_elements; ++i)
    m.nodes[i] = a + static_cast<double>(i) * len;
  m.nodes.front() = a;
  m.nodes.back() = b;
  return m;
}

/// Quadrature points and weights on the reference element [0, 1].
/// Weights sum to 1; a rule of `order` points integrates polynomials of
/// degree <= 2*order-1 exactly.
struct QuadratureRule {
  int order = 0;
  std::vector<double> points;
  std::vector<double> weights;
};

namespace detail {

// Legendre polynomial P_n and derivative at x, by the three-term recurrence.
inline void legendre(int n, double x, double& p, double& dp) {
  double p0 = 1.0, p1 = x;
  if (n == 0) { p = p0; dp = 0.0; return; }
  for (int k = 2; k <= n; ++k) {
    const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = pk;
  }
  p = p1;
  dp = n * (x * p1 - p0) / (x * x - 1.0);
}

}  // namespace detail

inline QuadratureRule gauss_rule(int order) {
  if (order < 1 || order > 10)
    throw std::invalid_argument("gauss_rule: supported orders are 1..10, got " + std::to_string(order));
  QuadratureRule rule;
  rule.order = order;
  rule.points.resize(order);
  rule.weights.resize(order);
  const int n = order;
  for (int i = 0; i < n; ++i) {
    // Root of P_n on (-1, 1), refined by Newton iteration.
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double p = 0.0, dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      detail::legendre(n, x, p, dp);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    detail::legendre(n, x, p, dp);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // Map [-1, 1] -> [0, 1]; the loop produces descending x, store ascending.
    rule.points[n - 1 - i] = 0.5 * (1.0 + x);
    rule.weights[n - 1 - i] = 0.5 * w;
  }
  return rule;
}

/// Piecewise-linear nodal hat basis on a mesh. The interior hats (nodes
/// 1..n-1) vanish at both interval endpoints and span the zero-trace space;
/// reference-element values of the two local hats are tabulated at the
/// quadrature points.
struct Basis {
  Mesh mesh;
  QuadratureRule quad;
  std::vector<std::size_t> interior_nodes;  // 1, 2, ..., n-1
  std::vector<double> hat_left;             // 1 - sigma_q per quadrature point
  std::vector<double> hat_right;            // sigma_q per quadrature point

  std::size_t interior_count() const { return interior_nodes.size(); }
};

inline Basis make_basis(Mesh mesh, QuadratureRule quad) {
  Basis b;
  b.mesh = std::move(mesh);
  b.quad = std::move(quad);
  const std::size_t n = b.mesh.element_count();
  if (n >= 2) {
    b.interior_nodes.resize(n - 1);
    for (std::size_t j = 0; j + 1 < n; ++j) b.interior_nodes[j] = j + 1;
  }
  b.hat_left.resize(b.quad.points.size());
  b.hat_right.resize(b.quad.points.size());
  for (std::size_t q = 0; q < b.quad.points.size(); ++q) {
    b.hat_left[q] = 1.0 - b.quad.points[q];
    b.hat_right[q] = b.quad.points[q];
  }
  return b;
}

inline NodalVector interpolate_nodal(const SpatialFn& f, const Mesh& mesh) {
  NodalVector v(mesh.node_count());
  for (std::size_t i = 0; i < mesh.node_count(); ++i) {
    v[i] = f(mesh.nodes[i]);
    if (!std::isfinite(v[i]))
      throw invalid_data("interpolate_nodal: non-finite sample at node " + std::to_string(i));
  }
  return v;
}

/// Value of the piecewise-linear interpolant of nodal values at x.
inline double nodal_value_at(const Mesh& mesh, const NodalVector& values, double x) {
  const std::size_t e = mesh.locate(x);
  const double t = (x - mesh.nodes[e]) / mesh.element_length(e);
  return (1.0 - t) * values[e] + t * values[e + 1];
}

/// Constant slope of the interpolant on each element.
inline std::vector<double> element_slopes(const Mesh& mesh, const NodalVector& values) {
  std::vector<double> s(mesh.element_count());
  for (std::size_t e = 0; e < mesh.element_count(); ++e)
    s[e] = (values[e + 1] - values[e]) / mesh.element_length(e);
  return s;
}

/// Integral of each nodal hat over the mesh (row sums of the mass matrix).
inline std::vector<double> lumped_weights(const Mesh& mesh) {
  std::vector<double> w(mesh.node_count(), 0.0);
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const double half = 0.5 * mesh.element_length(e);
    w[e] += half;
    w[e + 1] += half;
  }
  return w;
}

/// Composite quadrature of a pointwise function over the mesh.
inline double integrate(const Mesh& mesh, const QuadratureRule& quad, const SpatialFn& f) {
  double acc = 0.0;
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const double x0 = mesh.nodes[e];
    const double len = mesh.element_length(e);
    double local = 0.0;
    for (std::size_t q = 0; q < quad.points.size(); ++q)
      local += quad.weights[q] * f(x0 + quad.points[q] * len);
    acc += len * local;
  }
  return acc;
}

}  // namespace dnl
