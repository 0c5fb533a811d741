#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace quadforge {

inline constexpr int kMaxDim = 3;

/// Exponent tuple of a monomial in 2 or 3 variables.
class MultiIndex {
public:
  MultiIndex() = default;
  MultiIndex(int dim, std::array<int, kMaxDim> exponents);
  MultiIndex(int i, int j) : MultiIndex(2, {i, j, 0}) {}
  MultiIndex(int i, int j, int k) : MultiIndex(3, {i, j, k}) {}

  int dim() const { return dim_; }
  int operator[](int axis) const { return exponents_[static_cast<std::size_t>(axis)]; }
  int total_degree() const;
  int max_component() const;

  /// Componentwise sum (Minkowski sum of two singletons).
  MultiIndex operator+(const MultiIndex& other) const;

  /// Graded order: total degree first, then larger leading exponents first.
  friend bool graded_less(const MultiIndex& a, const MultiIndex& b);
  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;

private:
  int dim_ = 2;
  std::array<int, kMaxDim> exponents_{};
};

bool graded_less(const MultiIndex& a, const MultiIndex& b);

enum class SpaceKind { trunk, product, custom };

/// A canonically ordered, duplicate-free set of multi-indices.
///
/// Downward closure is not enforced on construction so that corrupted sets can
/// be represented for validation; trunk and product builders always produce
/// closed sets.
class ExponentSet {
public:
  ExponentSet(int dim, int degree, std::vector<MultiIndex> indices,
              SpaceKind kind = SpaceKind::custom);

  int dim() const { return dim_; }
  /// Trunk degree p the set was built from (for product sets, the factor degree).
  int degree() const { return degree_; }
  SpaceKind kind() const { return kind_; }
  std::size_t size() const { return indices_.size(); }
  const std::vector<MultiIndex>& indices() const { return indices_; }
  const MultiIndex& operator[](std::size_t i) const { return indices_[i]; }

  bool contains(const MultiIndex& alpha) const;
  bool is_downward_closed() const;
  int max_component() const;
  int max_total_degree() const;

  /// Copy with one index removed (negative controls in validation).
  ExponentSet without(const MultiIndex& alpha) const;

private:
  int dim_;
  int degree_;
  SpaceKind kind_;
  std::vector<MultiIndex> indices_;
};

// Orthonormal shifted Legendre polynomials on [0,1]: sqrt(2n+1) * P_n(2x-1).
double shifted_legendre_eval(int n, double x);
double shifted_legendre_deriv(int n, double x);

/// Fills values[k] (and derivs[k] when non-empty) for k = 0..values.size()-1 in
/// one sweep of the three-term recurrence.
void shifted_legendre_table(double x, std::span<double> values, std::span<double> derivs);

/// Trunk (serendipity) space: monomials whose superlinear degree is at most p,
/// i.e. the sum of exponents that are >= 2 does not exceed p.
ExponentSet trunk_exponent_set(int dim, int p);

/// Closed-form |T|(p); defined for dim 2 with p >= 2 and dim 3 with p >= 3.
long trunk_cardinality(int dim, int p);

/// Minkowski sum {a + b : a, b in t}: the monomial support of span(U x V) for U = V.
ExponentSet product_exponent_set(const ExponentSet& t);

/// Closed-form |S|(p); same ranges as trunk_cardinality.
long product_cardinality(int dim, int p);

/// Product of orthonormal shifted Legendre polynomials, one per multi-index.
class SpaceBasis {
public:
  explicit SpaceBasis(ExponentSet exponents);

  int dim() const { return exponents_.dim(); }
  std::size_t size() const { return exponents_.size(); }
  const ExponentSet& exponent_set() const { return exponents_; }
  const std::vector<double>& exact_integrals() const { return exact_integrals_; }
  /// Largest per-coordinate degree over all basis functions.
  int max_degree() const { return max_degree_; }

  double evaluate(std::size_t i, std::span<const double> point) const;
  /// d v_i / d x_axis at point.
  double partial(std::size_t i, int axis, std::span<const double> point) const;

private:
  ExponentSet exponents_;
  std::vector<double> exact_integrals_;
  int max_degree_;
};

SpaceBasis build_basis(const ExponentSet& e);

/// The integration space for trunk degree p: basis of product_exponent_set(trunk_exponent_set).
SpaceBasis product_space_basis(int dim, int p);

}  // namespace quadforge
