#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "dnl/model.hpp"

using namespace dnl;

TEST_CASE("exponent bookkeeping") {
  const Exponent e(3.0);
  CHECK(e.p() == 3.0);
  CHECK(e.q() == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(1.0 / e.p() + 1.0 / e.q() == doctest::Approx(1.0).epsilon(1e-14));

  const Exponent near2(2.0 + 1e-12);
  CHECK(1.0 / near2.p() + 1.0 / near2.q() == doctest::Approx(1.0).epsilon(1e-14));

  CHECK_THROWS_AS(Exponent(2.0), std::invalid_argument);
  CHECK_THROWS_AS(Exponent(1.5), std::invalid_argument);
  CHECK_THROWS_AS(Exponent(std::nan("")), std::invalid_argument);
}

TEST_CASE("power map values") {
  CHECK(power_map(Exponent(3.0), 2.0) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(power_map(Exponent(4.0), -2.0) == doctest::Approx(-8.0).epsilon(1e-15));
  CHECK(power_map(Exponent(2.5), 0.0) == 0.0);

  // vector version scales by the Euclidean norm
  const std::vector<double> a{3.0, 4.0};
  const auto out = power_map(Exponent(3.0), a);
  CHECK(out[0] == doctest::Approx(15.0).epsilon(1e-15));  // |a| = 5
  CHECK(out[1] == doctest::Approx(20.0).epsilon(1e-15));
}

TEST_CASE("half power map values") {
  CHECK(half_power_map(Exponent(4.0), 3.0) == doctest::Approx(9.0).epsilon(1e-15));
  CHECK(half_power_map(Exponent(4.0), -3.0) == doctest::Approx(-9.0).epsilon(1e-15));
  for (double p : {2.5, 3.0, 4.0, 7.0})
    CHECK(half_power_map(Exponent(p), 1.0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("maps are odd and strictly monotone, and halves square to powers") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> dist(-10.0, 10.0);
  for (double p : {2.5, 3.0, 4.0}) {
    const Exponent e(p);
    for (int i = 0; i < 10000; ++i) {
      const double x = dist(rng), y = dist(rng);
      CHECK(power_map(e, -x) == -power_map(e, x));
      CHECK(half_power_map(e, -x) == -half_power_map(e, x));
      const double lo = std::min(x, y), hi = std::max(x, y);
      if (lo < hi) {
        CHECK(power_map(e, lo) < power_map(e, hi));
        CHECK(half_power_map(e, lo) < half_power_map(e, hi));
      }
      const double half = half_power_map(e, x);
      const double target = std::pow(std::abs(x), p);
      CHECK(std::abs(half * half - target) <= 1e-12 * std::max(1.0, target));
    }
  }
}

TEST_CASE("monotonicity gap") {
  const Exponent p4(4.0);
  const std::vector<double> v{1.0, 2.0};
  CHECK(monotonicity_gap(p4, v, v) == 0.0);

  // p -> 2 reduces to the squared Euclidean distance
  const Exponent near2(2.0 + 1e-12);
  const std::vector<double> zero{0.0, 0.0}, b{3.0, 4.0};
  CHECK(monotonicity_gap(near2, zero, b) == doctest::Approx(25.0).epsilon(1e-9));

  const std::vector<double> z1{0.0}, o1{1.0};
  CHECK(monotonicity_gap(p4, z1, o1) == doctest::Approx(1.0).epsilon(1e-15));

  const std::vector<double> short_vec{1.0};
  CHECK_THROWS_AS(monotonicity_gap(p4, short_vec, b), std::invalid_argument);
}

TEST_CASE("monotonicity gap is symmetric under swapping the arguments") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> dist(-5.0, 5.0);
  const Exponent e(3.0);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> a{dist(rng), dist(rng), dist(rng)};
    std::vector<double> b{dist(rng), dist(rng), dist(rng)};
    CHECK(monotonicity_gap(e, a, b) == monotonicity_gap(e, b, a));
  }
}

TEST_CASE("vector inequality report: closed forms") {
  const Exponent p4(4.0);
  const std::vector<double> a{1.0, -2.0, 0.5};

  const InequalityReport same = check_vector_inequalities(p4, a, a);
  CHECK(same.gap == 0.0);
  CHECK(same.half_bound == 0.0);
  CHECK(same.lower_bound == 0.0);
  CHECK(same.all_ok());

  const std::vector<double> z{0.0}, o{1.0};
  const InequalityReport r = check_vector_inequalities(p4, z, o);
  CHECK(r.gap == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r.half_bound == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(r.lower_bound == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(r.all_ok());
}

TEST_CASE("vector inequalities hold on random pairs") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> dist(-5.0, 5.0);
  for (double p : {2.5, 3.0, 4.0}) {
    const Exponent e(p);
    for (int i = 0; i < 2000; ++i) {
      const std::size_t dim = 1 + static_cast<std::size_t>(rng() % 3);
      std::vector<double> a(dim), b(dim);
      for (auto& x : a) x = dist(rng);
      for (auto& x : b) x = dist(rng);
      const InequalityReport r = check_vector_inequalities(e, a, b);
      CHECK(r.all_ok());
      // stored slacks are a pure function of the inputs
      const InequalityReport again = check_vector_inequalities(e, a, b);
      CHECK(r.gap == again.gap);
      CHECK(r.slack_half == again.slack_half);
      CHECK(r.slack_convexity == again.slack_convexity);
      CHECK(r.slack_lower == again.slack_lower);
      CHECK(r.convexity_slack <= 1e-12 * std::max(1.0, std::abs(r.convexity_slack)));
    }
  }
}

TEST_CASE("chain rule identity residual") {
  const Exponent p3(3.0);
  const std::vector<double> constant(10, 1.7);
  CHECK(chain_rule_identity_residual(p3, constant, 0.1) == 0.0);
  const std::vector<double> zeros(10, 0.0);
  CHECK(chain_rule_identity_residual(p3, zeros, 0.1) == 0.0);
  const std::vector<double> one_sample{1.0};
  CHECK_THROWS_AS(chain_rule_identity_residual(p3, one_sample, 0.1), std::invalid_argument);

  // u(t) = t on [1, 2]: the residual decays at first order in the step
  auto residual_at = [&](double h) {
    std::vector<double> u;
    for (double t = 1.0; t <= 2.0 + 1e-12; t += h) u.push_back(t);
    return chain_rule_identity_residual(p3, u, h);
  };
  double h = 0.1;
  double prev = residual_at(h);
  for (int halving = 0; halving < 4; ++halving) {
    h *= 0.5;
    const double next = residual_at(h);
    const double order = std::log2(prev / next);
    CHECK(order > 0.8);
    CHECK(order < 1.2);
    prev = next;
  }
}
