#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "quadforge/polyspace.hpp"

namespace quadforge {

/// q weighted points in the unit square or cube.
///
/// Stored flat as (x, y[, z], w) per point, which is also the optimizer's
/// parameter layout.
class QuadratureRule {
public:
  QuadratureRule(int dim, std::vector<double> params);
  QuadratureRule(int dim, const std::vector<std::vector<double>>& points,
                 const std::vector<double>& weights);

  int dim() const { return dim_; }
  std::size_t size() const { return params_.size() / stride(); }
  std::size_t stride() const { return static_cast<std::size_t>(dim_) + 1; }

  std::span<const double> point(std::size_t j) const { return {params_.data() + j * stride(), static_cast<std::size_t>(dim_)}; }
  double coord(std::size_t j, int axis) const { return params_[j * stride() + static_cast<std::size_t>(axis)]; }
  double weight(std::size_t j) const { return params_[j * stride() + static_cast<std::size_t>(dim_)]; }
  double weight_sum() const;

  std::span<const double> params() const { return params_; }
  std::vector<double>& mutable_params() { return params_; }

  /// Coordinates and weights strictly inside (0,1), weights summing to 1 within tol.
  bool is_feasible(double weight_sum_tol = 1e-12) const;
  bool bounds_ok() const;

  friend bool operator==(const QuadratureRule&, const QuadratureRule&) = default;

private:
  int dim_;
  std::vector<double> params_;
};

/// Midpoint-mapped (m per axis)^dim tensor Gauss-Legendre rule on the unit domain.
QuadratureRule tensor_gauss_rule(int dim, int points_per_dim);

/// Signed per-basis-function errors: exact - sum_j w_j v_i(x_j).
std::vector<double> integration_errors(const SpaceBasis& basis, const QuadratureRule& rule);

struct LossValue {
  double L;
  double L_squared;
};

/// Worst-case relative error. The basis is orthonormal, so e^T M^{-1} e = |e|^2.
LossValue loss(const SpaceBasis& basis, const QuadratureRule& rule);

/// e^T M^{-1} e for a general symmetric positive definite Gram matrix.
double loss_squared_with_gram(std::span<const double> errors, const Eigen::MatrixXd& gram);

/// Analytic gradient of L^2 in the rule's parameter layout.
std::vector<double> loss_gradient(const SpaceBasis& basis, const QuadratureRule& rule);

/// Gram matrix of the orthonormal basis: the identity, no integration needed.
Eigen::MatrixXd gram_matrix(const SpaceBasis& basis);

using ScalarField = std::function<double(std::span<const double>)>;

/// Gram matrix of arbitrary functions on [0,1]^dim by tensor Gauss integration,
/// exact when each pairwise product has per-coordinate degree <= max_product_degree.
Eigen::MatrixXd gram_matrix_generic(std::span<const ScalarField> functions, int dim,
                                    int max_product_degree);

/// Gram matrix of the basis via the generic integration path.
Eigen::MatrixXd gram_matrix_integrated(const SpaceBasis& basis);

/// ceil(|S| / (dim + 1)) with |S| from the enumerated product set.
long q_lower_bound(int dim, int p);

/// 1 - q / (p+1)^dim.
double savings(long q, int dim, int p);

/// (p+1)^dim, the tensor Gauss point count for the same space.
long gauss_point_count(int dim, int p);

/// Fast L^2 and gradient evaluation for one basis, with reusable workspace.
///
/// Tabulates the 1D Legendre values per point once per call instead of
/// evaluating each basis function from scratch. Not thread safe; give each
/// restart its own kernel.
class LossKernel {
public:
  explicit LossKernel(const SpaceBasis& basis);

  /// Returns L^2; writes dL^2/dparams into gradient when it is non-empty.
  double evaluate(std::span<const double> params, std::span<double> gradient);

  std::span<const double> errors() const { return errors_; }

private:
  int dim_;
  std::size_t n_;
  std::size_t table_len_;
  std::vector<int> exponents_;  // n * dim, flat
  std::vector<double> exact_;
  std::vector<double> values_;  // q * dim * table_len
  std::vector<double> derivs_;
  std::vector<double> errors_;
};

}  // namespace quadforge
