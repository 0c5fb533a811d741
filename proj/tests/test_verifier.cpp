#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "quadforge/polyspace.hpp"
#include "quadforge/quadrature.hpp"
#include "quadforge/verifier.hpp"

using namespace quadforge;

TEST_CASE("one-dimensional Gauss rules") {
  const auto g1 = gauss_legendre_1d(1);
  CHECK(g1.nodes == std::vector<double>{0.5});
  CHECK(g1.weights[0] == doctest::Approx(1.0).epsilon(1e-15));

  const auto g2 = gauss_legendre_1d(2);
  const double d = 0.5 / std::sqrt(3.0);
  CHECK(g2.nodes[0] == doctest::Approx(0.5 - d).epsilon(1e-15));
  CHECK(g2.nodes[1] == doctest::Approx(0.5 + d).epsilon(1e-15));
  CHECK(g2.weights[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(g2.weights[1] == doctest::Approx(0.5).epsilon(1e-15));

  const auto g3 = gauss_legendre_1d(3);
  double s = 0.0;
  for (std::size_t k = 0; k < 3; ++k) s += g3.weights[k] * std::pow(g3.nodes[k], 5);
  CHECK(std::abs(s - 1.0 / 6.0) < 1e-15);

  CHECK_THROWS_AS(gauss_legendre_1d(0), std::invalid_argument);
}

TEST_CASE("Gauss rules integrate monomials up to degree 2m-1") {
  for (int m = 1; m <= 30; ++m) {
    const auto g = gauss_legendre_1d(m);
    double wsum = 0.0;
    for (double w : g.weights) wsum += w;
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-14));
    for (int k = 0; k <= 2 * m - 1; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < g.nodes.size(); ++i) s += g.weights[i] * std::pow(g.nodes[i], k);
      CHECK(s == doctest::Approx(1.0 / (k + 1)).epsilon(1e-13));
    }
  }
}

TEST_CASE("oracle integrals") {
  CHECK(oracle_integral([](std::span<const double>) { return 1.0; }, 2, 1) == doctest::Approx(1.0).epsilon(1e-15));

  const auto basis = product_space_basis(2, 3);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const MultiIndex a = basis.exponent_set()[i];
    const std::vector<MultiIndex> one = {a};
    const std::vector<MultiIndex> two = {a, a};
    if (i != 0) CHECK(std::abs(oracle_integral(one, 8)) < 1e-13);
    CHECK(std::abs(oracle_integral(two, 8) - 1.0) < 1e-12);
  }

  const std::vector<MultiIndex> too_high = {MultiIndex(4, 0), MultiIndex(3, 0)};
  CHECK_THROWS_AS(oracle_integral(too_high, 3), std::invalid_argument);
}

TEST_CASE("oracle agrees with analytic integrals on every in-range space") {
  auto check_space = [](int dim, int p) {
    const auto basis = product_space_basis(dim, p);
    double worst = 0.0;
    for (std::size_t i = 0; i < basis.size(); ++i) {
      const std::vector<MultiIndex> one = {basis.exponent_set()[i]};
      worst = std::max(worst, std::abs(oracle_integral(one, 2 * p) - basis.exact_integrals()[i]));
    }
    INFO("dim ", dim, " p ", p);
    CHECK(worst < 1e-13);
  };
  for (int p = 1; p <= 10; ++p) check_space(2, p);
  for (int p = 1; p <= 6; ++p) check_space(3, p);
}

TEST_CASE("tensor Gauss baseline verifies exact") {
  for (int p = 1; p <= 10; ++p) {
    const auto r = verify_rule(tensor_gauss_rule(2, p + 1), p);
    INFO("2D p ", p, " max error ", r.max_abs_error);
    CHECK(r.verdict == Verdict::exact);
    CHECK(r.q == static_cast<std::size_t>((p + 1) * (p + 1)));
  }
  for (int p = 1; p <= 4; ++p) {
    const auto r = verify_rule(tensor_gauss_rule(3, p + 1), p);
    INFO("3D p ", p, " max error ", r.max_abs_error);
    CHECK(r.verdict == Verdict::exact);
  }
}

TEST_CASE("verdicts for broken rules") {
  const auto gauss = tensor_gauss_rule(2, 3);

  auto heavy = gauss;
  heavy.mutable_params()[2] = 1.5;
  const auto h = verify_rule(heavy, 2);
  CHECK_FALSE(h.bounds_ok);
  CHECK(h.verdict == Verdict::infeasible);

  auto nudged = gauss;
  nudged.mutable_params()[2] += 1e-6;
  const auto n = verify_rule(nudged, 2);
  CHECK(n.verdict == Verdict::inexact);
  CHECK(n.max_abs_error > 1e-7);

  const auto relaxed = verify_rule(heavy, 2, kDefaultVerifyTolerance, false);
  CHECK(relaxed.verdict == Verdict::inexact);

  // Exact but outside the domain: 1-point rule for constants placed at x = 1.2.
  const QuadratureRule outside(2, {1.2, 0.5, 1.0});
  CHECK(verify_rule(outside, 1, 10.0, true).verdict == Verdict::infeasible);
  CHECK(verify_rule(outside, 1, 10.0, false).verdict == Verdict::exact);

  CHECK(to_string(Verdict::exact) == "exact");
  CHECK(to_string(Verdict::inexact) == "inexact");
  CHECK(to_string(Verdict::infeasible) == "infeasible");
}

TEST_CASE("cardinality tables") {
  const auto t2 = check_cardinalities(2, 2, 10);
  CHECK(t2.pass());
  CHECK(t2.rows.size() == 9);
  CHECK_FALSE(t2.first_failure().has_value());

  const auto t3 = check_cardinalities(3, 3, 8);
  CHECK(t3.pass());
  CHECK(t3.rows.size() == 6);

  const auto corrupted = [](int dim, int p) {
    auto t = trunk_exponent_set(dim, p);
    return p == 6 ? t.without(MultiIndex(1, 1)) : t;
  };
  const auto bad = check_cardinalities(2, 2, 10, corrupted);
  CHECK_FALSE(bad.pass());
  REQUIRE(bad.first_failure().has_value());
  CHECK(*bad.first_failure() == 6);
}
