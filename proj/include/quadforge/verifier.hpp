#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "quadforge/polyspace.hpp"
#include "quadforge/quadrature.hpp"

namespace quadforge {

struct GaussRule1D {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// m-point Gauss-Legendre rule mapped to [0,1]; exact to degree 2m-1.
GaussRule1D gauss_legendre_1d(int m);

/// Tensor Gauss integration with p+1 points per axis; exact for per-axis degree <= 2p.
double oracle_integral(const ScalarField& f, int dim, int p);

/// Integral of a product of orthonormal Legendre functions, one factor per
/// multi-index. Throws if the summed per-axis degree exceeds 2p.
double oracle_integral(std::span<const MultiIndex> legendre_factors, int p);

enum class Verdict { exact, inexact, infeasible };

std::string to_string(Verdict v);

struct VerificationReport {
  int dim = 0;
  int p = 0;
  std::size_t q = 0;
  double tolerance = 0.0;
  double max_abs_error = 0.0;
  double rms_error = 0.0;
  double loss_squared = 0.0;
  std::vector<double> per_function_errors;
  double weight_sum_deviation = 0.0;
  bool bounds_ok = false;
  Verdict verdict = Verdict::inexact;
  int oracle_points_per_dim = 0;
};

inline constexpr double kDefaultVerifyTolerance = 1e-10;
inline constexpr double kWeightSumTolerance = 1e-12;

/// Re-derives every basis error of the degree-p product space against the
/// tensor Gauss oracle, with the basis evaluated through std::legendre rather
/// than the optimizer's recurrences.
VerificationReport verify_rule(const QuadratureRule& rule, int p,
                               double tolerance = kDefaultVerifyTolerance,
                               bool enforce_feasibility = true);

struct CardinalityRow {
  int dim = 0;
  int p = 0;
  long trunk_enumerated = 0;
  long trunk_formula = 0;
  long product_enumerated = 0;
  long product_formula = 0;
  long lower_bound = 0;  // |T|(2p)
  long upper_bound = 0;  // (2p+1)^dim
  bool downward_closed = false;
  bool pass = false;
};

struct CardinalityTable {
  std::vector<CardinalityRow> rows;
  bool pass() const;
  /// First failing p, if any.
  std::optional<int> first_failure() const;
};

using TrunkBuilder = std::function<ExponentSet(int dim, int p)>;

/// Enumerated trunk and product sizes against the closed forms, plus the strict
/// sandwich |T|(2p) < |S|(p) < (2p+1)^dim, for p in [p_lo, p_hi].
CardinalityTable check_cardinalities(int dim, int p_lo, int p_hi,
                                     const TrunkBuilder& builder = trunk_exponent_set);

}  // namespace quadforge
