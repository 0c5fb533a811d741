#include "quadforge/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "quadforge/verifier.hpp"

namespace quadforge {

QuadratureRule::QuadratureRule(int dim, std::vector<double> params)
    : dim_(dim), params_(std::move(params)) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("rule dimension must be 2 or 3");
  if (params_.empty() || params_.size() % stride() != 0) {
    throw std::invalid_argument("rule parameter count must be a positive multiple of dim + 1");
  }
}

QuadratureRule::QuadratureRule(int dim, const std::vector<std::vector<double>>& points,
                               const std::vector<double>& weights)
    : dim_(dim) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("rule dimension must be 2 or 3");
  if (points.size() != weights.size() || points.empty()) {
    throw std::invalid_argument("points and weights must have equal, nonzero length");
  }
  params_.reserve(points.size() * stride());
  for (std::size_t j = 0; j < points.size(); ++j) {
    if (points[j].size() != static_cast<std::size_t>(dim)) {
      throw std::invalid_argument("point " + std::to_string(j) + " has wrong dimension");
    }
    params_.insert(params_.end(), points[j].begin(), points[j].end());
    params_.push_back(weights[j]);
  }
}

double QuadratureRule::weight_sum() const {
  double s = 0.0;
  for (std::size_t j = 0; j < size(); ++j) s += weight(j);
  return s;
}

bool QuadratureRule::bounds_ok() const {
  for (double v : params_) {
    if (!(v > 0.0 && v < 1.0)) return false;
  }
  return true;
}

bool QuadratureRule::is_feasible(double weight_sum_tol) const {
  return bounds_ok() && std::abs(weight_sum() - 1.0) <= weight_sum_tol;
}

QuadratureRule tensor_gauss_rule(int dim, int points_per_dim) {
  const auto g = gauss_legendre_1d(points_per_dim);
  const std::size_t m = g.nodes.size();
  std::vector<double> params;
  std::size_t total = 1;
  for (int k = 0; k < dim; ++k) total *= m;
  params.reserve(total * static_cast<std::size_t>(dim + 1));
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rest = flat;
    double w = 1.0;
    std::vector<double> coords(static_cast<std::size_t>(dim));
    for (int k = dim - 1; k >= 0; --k) {
      const std::size_t idx = rest % m;
      rest /= m;
      coords[static_cast<std::size_t>(k)] = g.nodes[idx];
      w *= g.weights[idx];
    }
    params.insert(params.end(), coords.begin(), coords.end());
    params.push_back(w);
  }
  return QuadratureRule(dim, std::move(params));
}

namespace {

void check_dims(const SpaceBasis& basis, const QuadratureRule& rule) {
  if (basis.dim() != rule.dim()) {
    throw std::invalid_argument("basis dimension " + std::to_string(basis.dim()) +
                                " does not match rule dimension " + std::to_string(rule.dim()));
  }
}

}  // namespace

std::vector<double> integration_errors(const SpaceBasis& basis, const QuadratureRule& rule) {
  check_dims(basis, rule);
  std::vector<double> e(basis.size());
  std::vector<double> terms(rule.size());
  for (std::size_t i = 0; i < basis.size(); ++i) {
    for (std::size_t j = 0; j < rule.size(); ++j) terms[j] = rule.weight(j) * basis.evaluate(i, rule.point(j));
    // Summing in sorted order makes the result independent of point order.
    std::sort(terms.begin(), terms.end());
    double s = 0.0;
    for (double t : terms) s += t;
    e[i] = basis.exact_integrals()[i] - s;
  }
  return e;
}

LossValue loss(const SpaceBasis& basis, const QuadratureRule& rule) {
  double l2 = 0.0;
  for (double ei : integration_errors(basis, rule)) l2 += ei * ei;
  return {std::sqrt(l2), l2};
}

double loss_squared_with_gram(std::span<const double> errors, const Eigen::MatrixXd& gram) {
  if (gram.rows() != static_cast<Eigen::Index>(errors.size()) || gram.cols() != gram.rows()) {
    throw std::invalid_argument("Gram matrix shape does not match error vector");
  }
  const Eigen::Map<const Eigen::VectorXd> e(errors.data(), static_cast<Eigen::Index>(errors.size()));
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  return e.dot(ldlt.solve(e));
}

std::vector<double> loss_gradient(const SpaceBasis& basis, const QuadratureRule& rule) {
  const auto e = integration_errors(basis, rule);
  const int dim = rule.dim();
  std::vector<double> grad(rule.params().size(), 0.0);
  for (std::size_t j = 0; j < rule.size(); ++j) {
    const auto x = rule.point(j);
    const double w = rule.weight(j);
    double gw = 0.0;
    for (std::size_t i = 0; i < basis.size(); ++i) gw += e[i] * basis.evaluate(i, x);
    grad[j * rule.stride() + static_cast<std::size_t>(dim)] = -2.0 * gw;
    for (int axis = 0; axis < dim; ++axis) {
      double gx = 0.0;
      for (std::size_t i = 0; i < basis.size(); ++i) gx += e[i] * basis.partial(i, axis, x);
      grad[j * rule.stride() + static_cast<std::size_t>(axis)] = -2.0 * w * gx;
    }
  }
  return grad;
}

Eigen::MatrixXd gram_matrix(const SpaceBasis& basis) {
  const auto n = static_cast<Eigen::Index>(basis.size());
  return Eigen::MatrixXd::Identity(n, n);
}

Eigen::MatrixXd gram_matrix_generic(std::span<const ScalarField> functions, int dim,
                                    int max_product_degree) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("dimension out of range");
  const auto g = gauss_legendre_1d(max_product_degree / 2 + 1);
  const std::size_t m = g.nodes.size();
  std::size_t total = 1;
  for (int k = 0; k < dim; ++k) total *= m;

  // V(i, k) = sqrt(w_k) f_i(x_k), so M = V V^T.
  const auto n = static_cast<Eigen::Index>(functions.size());
  Eigen::MatrixXd v(n, static_cast<Eigen::Index>(total));
  std::vector<double> x(static_cast<std::size_t>(dim));
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rest = flat;
    double w = 1.0;
    for (int k = dim - 1; k >= 0; --k) {
      const std::size_t idx = rest % m;
      rest /= m;
      x[static_cast<std::size_t>(k)] = g.nodes[idx];
      w *= g.weights[idx];
    }
    const double sw = std::sqrt(w);
    for (Eigen::Index i = 0; i < n; ++i) {
      v(i, static_cast<Eigen::Index>(flat)) = sw * functions[static_cast<std::size_t>(i)](x);
    }
  }
  return v * v.transpose();
}

Eigen::MatrixXd gram_matrix_integrated(const SpaceBasis& basis) {
  std::vector<ScalarField> fs;
  fs.reserve(basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i) {
    fs.emplace_back([&basis, i](std::span<const double> x) { return basis.evaluate(i, x); });
  }
  return gram_matrix_generic(fs, basis.dim(), 2 * basis.max_degree());
}

long q_lower_bound(int dim, int p) {
  const auto s = static_cast<long>(product_exponent_set(trunk_exponent_set(dim, p)).size());
  return (s + dim) / (dim + 1);
}

long gauss_point_count(int dim, int p) {
  long q = 1;
  for (int k = 0; k < dim; ++k) q *= (p + 1);
  return q;
}

double savings(long q, int dim, int p) {
  if (q < 1) throw std::invalid_argument("point count must be >= 1");
  return 1.0 - static_cast<double>(q) / static_cast<double>(gauss_point_count(dim, p));
}

LossKernel::LossKernel(const SpaceBasis& basis)
    : dim_(basis.dim()),
      n_(basis.size()),
      table_len_(static_cast<std::size_t>(basis.max_degree()) + 1),
      exact_(basis.exact_integrals()),
      errors_(basis.size()) {
  exponents_.reserve(n_ * static_cast<std::size_t>(dim_));
  for (const auto& a : basis.exponent_set().indices()) {
    for (int k = 0; k < dim_; ++k) exponents_.push_back(a[k]);
  }
}

double LossKernel::evaluate(std::span<const double> params, std::span<double> gradient) {
  const auto d = static_cast<std::size_t>(dim_);
  const std::size_t stride = d + 1;
  const std::size_t q = params.size() / stride;
  const bool want_grad = !gradient.empty();
  const std::size_t per_point = d * table_len_;
  values_.resize(q * per_point);
  if (want_grad) derivs_.resize(q * per_point);

  for (std::size_t j = 0; j < q; ++j) {
    for (std::size_t k = 0; k < d; ++k) {
      const std::size_t off = j * per_point + k * table_len_;
      shifted_legendre_table(params[j * stride + k], std::span(values_).subspan(off, table_len_),
                             want_grad ? std::span(derivs_).subspan(off, table_len_) : std::span<double>{});
    }
  }

  std::copy(exact_.begin(), exact_.end(), errors_.begin());
  const int* ex = exponents_.data();
  for (std::size_t j = 0; j < q; ++j) {
    const double w = params[j * stride + d];
    const double* vx = values_.data() + j * per_point;
    const double* vy = vx + table_len_;
    if (d == 2) {
      for (std::size_t i = 0; i < n_; ++i) errors_[i] -= w * vx[ex[2 * i]] * vy[ex[2 * i + 1]];
    } else {
      const double* vz = vy + table_len_;
      for (std::size_t i = 0; i < n_; ++i) {
        errors_[i] -= w * vx[ex[3 * i]] * vy[ex[3 * i + 1]] * vz[ex[3 * i + 2]];
      }
    }
  }

  double l2 = 0.0;
  for (double e : errors_) l2 += e * e;
  if (!want_grad) return l2;

  const double* e = errors_.data();
  for (std::size_t j = 0; j < q; ++j) {
    const double w = params[j * stride + d];
    const double* vx = values_.data() + j * per_point;
    const double* vy = vx + table_len_;
    const double* dx = derivs_.data() + j * per_point;
    const double* dy = dx + table_len_;
    double gw = 0.0, gx = 0.0, gy = 0.0, gz = 0.0;
    if (d == 2) {
      for (std::size_t i = 0; i < n_; ++i) {
        const int a = ex[2 * i], b = ex[2 * i + 1];
        gw += e[i] * vx[a] * vy[b];
        gx += e[i] * dx[a] * vy[b];
        gy += e[i] * vx[a] * dy[b];
      }
    } else {
      const double* vz = vy + table_len_;
      const double* dz = dy + table_len_;
      for (std::size_t i = 0; i < n_; ++i) {
        const int a = ex[3 * i], b = ex[3 * i + 1], c = ex[3 * i + 2];
        const double yz = vy[b] * vz[c];
        gw += e[i] * vx[a] * yz;
        gx += e[i] * dx[a] * yz;
        gy += e[i] * vx[a] * dy[b] * vz[c];
        gz += e[i] * vx[a] * vy[b] * dz[c];
      }
      gradient[j * stride + 2] = -2.0 * w * gz;
    }
    gradient[j * stride + 0] = -2.0 * w * gx;
    gradient[j * stride + 1] = -2.0 * w * gy;
    gradient[j * stride + d] = -2.0 * gw;
  }
  return l2;
}

}  // namespace quadforge
