#include "quadforge/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace quadforge {

GaussRule1D gauss_legendre_1d(int m) {
  if (m < 1) throw std::invalid_argument("Gauss-Legendre point count must be >= 1");
  GaussRule1D g;
  g.nodes.resize(static_cast<std::size_t>(m));
  g.weights.resize(static_cast<std::size_t>(m));
  const int half = (m + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= m; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      pp = m * (z * p1 - p2) / (z * z - 1.0);
      const double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) <= 1e-15) break;
    }
    // Weight from the derivative at the converged root.
    double p1 = 1.0, p2 = 0.0;
    for (int j = 1; j <= m; ++j) {
      const double p3 = p2;
      p2 = p1;
      p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
    }
    pp = m * (z * p1 - p2) / (z * z - 1.0);
    const double w = 1.0 / ((1.0 - z * z) * pp * pp);  // half of the [-1,1] weight
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(m - 1 - i);
    g.nodes[lo] = 0.5 - 0.5 * z;
    g.nodes[hi] = 0.5 + 0.5 * z;
    g.weights[lo] = w;
    g.weights[hi] = w;
  }
  if (m % 2 == 1) g.nodes[static_cast<std::size_t>(m / 2)] = 0.5;
  return g;
}

namespace {

double legendre_oracle(int n, double x) {
  return std::sqrt(2.0 * n + 1.0) * std::legendre(static_cast<unsigned>(n), 2.0 * x - 1.0);
}

double oracle_basis_value(const MultiIndex& a, std::span<const double> x) {
  double v = 1.0;
  for (int k = 0; k < a.dim(); ++k) v *= legendre_oracle(a[k], x[static_cast<std::size_t>(k)]);
  return v;
}

template <class F>
double tensor_sum(int dim, const GaussRule1D& g, F&& f) {
  const std::size_t m = g.nodes.size();
  std::size_t total = 1;
  for (int k = 0; k < dim; ++k) total *= m;
  std::vector<double> x(static_cast<std::size_t>(dim));
  double s = 0.0;
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rest = flat;
    double w = 1.0;
    for (int k = dim - 1; k >= 0; --k) {
      const std::size_t idx = rest % m;
      rest /= m;
      x[static_cast<std::size_t>(k)] = g.nodes[idx];
      w *= g.weights[idx];
    }
    s += w * f(std::span<const double>(x));
  }
  return s;
}

}  // namespace

double oracle_integral(const ScalarField& f, int dim, int p) {
  if (p < 0) throw std::invalid_argument("oracle degree must be non-negative");
  return tensor_sum(dim, gauss_legendre_1d(p + 1), f);
}

double oracle_integral(std::span<const MultiIndex> legendre_factors, int p) {
  if (legendre_factors.empty()) throw std::invalid_argument("no factors to integrate");
  const int dim = legendre_factors.front().dim();
  for (int k = 0; k < dim; ++k) {
    int deg = 0;
    for (const auto& a : legendre_factors) deg += a[k];
    if (deg > 2 * p) {
      throw std::invalid_argument("integrand degree " + std::to_string(deg) + " on axis " +
                                  std::to_string(k) + " exceeds oracle exactness 2p = " +
                                  std::to_string(2 * p));
    }
  }
  return tensor_sum(dim, gauss_legendre_1d(p + 1), [&](std::span<const double> x) {
    double v = 1.0;
    for (const auto& a : legendre_factors) v *= oracle_basis_value(a, x);
    return v;
  });
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::exact: return "exact";
    case Verdict::inexact: return "inexact";
    case Verdict::infeasible: return "infeasible";
  }
  return "unknown";
}

VerificationReport verify_rule(const QuadratureRule& rule, int p, double tolerance,
                               bool enforce_feasibility) {
  const ExponentSet space = product_exponent_set(trunk_exponent_set(rule.dim(), p));
  const GaussRule1D g = gauss_legendre_1d(p + 1);

  VerificationReport r;
  r.dim = rule.dim();
  r.p = p;
  r.q = rule.size();
  r.tolerance = tolerance;
  r.oracle_points_per_dim = p + 1;
  r.per_function_errors.resize(space.size());

  for (std::size_t i = 0; i < space.size(); ++i) {
    const MultiIndex& a = space[i];
    const double reference =
        tensor_sum(rule.dim(), g, [&](std::span<const double> x) { return oracle_basis_value(a, x); });
    double approx = 0.0;
    for (std::size_t j = 0; j < rule.size(); ++j) approx += rule.weight(j) * oracle_basis_value(a, rule.point(j));
    const double e = reference - approx;
    r.per_function_errors[i] = e;
    r.max_abs_error = std::max(r.max_abs_error, std::abs(e));
    r.loss_squared += e * e;
  }
  r.rms_error = std::sqrt(r.loss_squared / static_cast<double>(space.size()));
  r.weight_sum_deviation = std::abs(rule.weight_sum() - 1.0);
  r.bounds_ok = rule.bounds_ok();

  const bool errors_ok = r.max_abs_error < tolerance;
  if (enforce_feasibility && !r.bounds_ok) {
    r.verdict = Verdict::infeasible;
  } else if (!errors_ok) {
    r.verdict = Verdict::inexact;
  } else if (enforce_feasibility && r.weight_sum_deviation > kWeightSumTolerance) {
    r.verdict = Verdict::infeasible;
  } else {
    r.verdict = Verdict::exact;
  }
  return r;
}

bool CardinalityTable::pass() const {
  return std::all_of(rows.begin(), rows.end(), [](const CardinalityRow& r) { return r.pass; });
}

std::optional<int> CardinalityTable::first_failure() const {
  for (const auto& r : rows) {
    if (!r.pass) return r.p;
  }
  return std::nullopt;
}

CardinalityTable check_cardinalities(int dim, int p_lo, int p_hi, const TrunkBuilder& builder) {
  CardinalityTable table;
  for (int p = p_lo; p <= p_hi; ++p) {
    CardinalityRow row;
    row.dim = dim;
    row.p = p;
    const ExponentSet trunk = builder(dim, p);
    const ExponentSet product = product_exponent_set(trunk);
    row.trunk_enumerated = static_cast<long>(trunk.size());
    row.trunk_formula = trunk_cardinality(dim, p);
    row.product_enumerated = static_cast<long>(product.size());
    row.product_formula = product_cardinality(dim, p);
    row.lower_bound = trunk_cardinality(dim, 2 * p);
    row.upper_bound = 1;
    for (int k = 0; k < dim; ++k) row.upper_bound *= 2 * p + 1;
    row.downward_closed = trunk.is_downward_closed() && product.is_downward_closed();
    row.pass = row.downward_closed && row.trunk_enumerated == row.trunk_formula &&
               row.product_enumerated == row.product_formula &&
               row.lower_bound < row.product_enumerated && row.product_enumerated < row.upper_bound;
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace quadforge
