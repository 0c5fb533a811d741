#include "quadforge/polyspace.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>

namespace quadforge {

namespace {

void check_dim(int dim) {
  if (dim != 2 && dim != 3) {
    throw std::invalid_argument("dimension must be 2 or 3, got " + std::to_string(dim));
  }
}

int superlinear_degree(const MultiIndex& a) {
  int s = 0;
  for (int k = 0; k < a.dim(); ++k) {
    if (a[k] >= 2) s += a[k];
  }
  return s;
}

}  // namespace

MultiIndex::MultiIndex(int dim, std::array<int, kMaxDim> exponents)
    : dim_(dim), exponents_(exponents) {
  if (dim < 1 || dim > kMaxDim) {
    throw std::invalid_argument("multi-index dimension out of range");
  }
  for (int k = 0; k < kMaxDim; ++k) {
    if (k >= dim) exponents_[static_cast<std::size_t>(k)] = 0;
    if (exponents_[static_cast<std::size_t>(k)] < 0) {
      throw std::invalid_argument("multi-index exponents must be non-negative");
    }
  }
}

int MultiIndex::total_degree() const {
  return std::accumulate(exponents_.begin(), exponents_.end(), 0);
}

int MultiIndex::max_component() const {
  return *std::max_element(exponents_.begin(), exponents_.end());
}

MultiIndex MultiIndex::operator+(const MultiIndex& other) const {
  if (dim_ != other.dim_) throw std::invalid_argument("multi-index dimension mismatch");
  MultiIndex r = *this;
  for (std::size_t k = 0; k < kMaxDim; ++k) r.exponents_[k] += other.exponents_[k];
  return r;
}

bool graded_less(const MultiIndex& a, const MultiIndex& b) {
  const int da = a.total_degree();
  const int db = b.total_degree();
  if (da != db) return da < db;
  return a.exponents_ > b.exponents_;
}

ExponentSet::ExponentSet(int dim, int degree, std::vector<MultiIndex> indices, SpaceKind kind)
    : dim_(dim), degree_(degree), kind_(kind), indices_(std::move(indices)) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("exponent set dimension out of range");
  for (const auto& a : indices_) {
    if (a.dim() != dim) throw std::invalid_argument("multi-index dimension does not match set");
  }
  std::sort(indices_.begin(), indices_.end(), graded_less);
  indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
}

bool ExponentSet::contains(const MultiIndex& alpha) const {
  return std::binary_search(indices_.begin(), indices_.end(), alpha, graded_less);
}

bool ExponentSet::is_downward_closed() const {
  // Checking unit decrements suffices: closure under single steps implies
  // closure under every componentwise-smaller index.
  for (const auto& a : indices_) {
    for (int k = 0; k < dim_; ++k) {
      if (a[k] == 0) continue;
      std::array<int, kMaxDim> e{a[0], a[1], a[2]};
      --e[static_cast<std::size_t>(k)];
      if (!contains(MultiIndex(dim_, e))) return false;
    }
  }
  return true;
}

int ExponentSet::max_component() const {
  int m = 0;
  for (const auto& a : indices_) m = std::max(m, a.max_component());
  return m;
}

int ExponentSet::max_total_degree() const {
  int m = 0;
  for (const auto& a : indices_) m = std::max(m, a.total_degree());
  return m;
}

ExponentSet ExponentSet::without(const MultiIndex& alpha) const {
  std::vector<MultiIndex> kept;
  kept.reserve(indices_.size());
  std::copy_if(indices_.begin(), indices_.end(), std::back_inserter(kept),
               [&](const MultiIndex& a) { return !(a == alpha); });
  return ExponentSet(dim_, degree_, std::move(kept), SpaceKind::custom);
}

double shifted_legendre_eval(int n, double x) {
  if (n < 0) throw std::invalid_argument("Legendre degree must be non-negative");
  const double t = 2.0 * x - 1.0;
  double p_prev = 1.0;
  double p = t;
  if (n == 0) return 1.0;
  for (int k = 1; k < n; ++k) {
    const double p_next = ((2.0 * k + 1.0) * t * p - k * p_prev) / (k + 1.0);
    p_prev = p;
    p = p_next;
  }
  return std::sqrt(2.0 * n + 1.0) * p;
}

double shifted_legendre_deriv(int n, double x) {
  if (n < 0) throw std::invalid_argument("Legendre degree must be non-negative");
  if (n == 0) return 0.0;
  // P'_{k+1} = P'_{k-1} + (2k+1) P_k
  const double t = 2.0 * x - 1.0;
  double p_prev = 1.0, p = t;      // P_0, P_1
  double d_prev = 0.0, d = 1.0;    // P'_0, P'_1
  for (int k = 1; k < n; ++k) {
    const double p_next = ((2.0 * k + 1.0) * t * p - k * p_prev) / (k + 1.0);
    const double d_next = d_prev + (2.0 * k + 1.0) * p;
    p_prev = p;
    p = p_next;
    d_prev = d;
    d = d_next;
  }
  return 2.0 * std::sqrt(2.0 * n + 1.0) * d;
}

void shifted_legendre_table(double x, std::span<double> values, std::span<double> derivs) {
  const std::size_t count = values.size();
  if (count == 0) return;
  const bool with_derivs = !derivs.empty();
  const double t = 2.0 * x - 1.0;
  double p_prev = 1.0, p = t;
  double d_prev = 0.0, d = 1.0;
  for (std::size_t k = 0; k < count; ++k) {
    double pk, dk;
    if (k == 0) {
      pk = 1.0;
      dk = 0.0;
    } else if (k == 1) {
      pk = t;
      dk = 1.0;
    } else {
      const double m = static_cast<double>(k - 1);
      const double p_next = ((2.0 * m + 1.0) * t * p - m * p_prev) / (m + 1.0);
      const double d_next = d_prev + (2.0 * m + 1.0) * p;
      p_prev = p;
      p = p_next;
      d_prev = d;
      d = d_next;
      pk = p;
      dk = d;
    }
    const double scale = std::sqrt(2.0 * static_cast<double>(k) + 1.0);
    values[k] = scale * pk;
    if (with_derivs) derivs[k] = 2.0 * scale * dk;
  }
}

ExponentSet trunk_exponent_set(int dim, int p) {
  check_dim(dim);
  if (p < 1) throw std::invalid_argument("trunk degree must be >= 1, got " + std::to_string(p));
  std::vector<MultiIndex> out;
  const int kz = dim == 3 ? p : 0;
  for (int i = 0; i <= p; ++i) {
    for (int j = 0; j <= p; ++j) {
      for (int k = 0; k <= kz; ++k) {
        MultiIndex a(dim, {i, j, k});
        if (superlinear_degree(a) <= p) out.push_back(a);
      }
    }
  }
  return ExponentSet(dim, p, std::move(out), SpaceKind::trunk);
}

long trunk_cardinality(int dim, int p) {
  check_dim(dim);
  const long q = p;
  if (dim == 2) {
    if (p < 2) throw std::invalid_argument("2D trunk cardinality formula requires p >= 2");
    return (q + 1) * (q + 2) / 2 + 2;
  }
  if (p < 3) throw std::invalid_argument("3D trunk cardinality formula requires p >= 3");
  return (q + 1) * (q + 2) * (q + 3) / 6 + 3 * q + 3;
}

ExponentSet product_exponent_set(const ExponentSet& t) {
  std::set<MultiIndex, decltype(&graded_less)> sums(&graded_less);
  for (const auto& a : t.indices()) {
    for (const auto& b : t.indices()) sums.insert(a + b);
  }
  return ExponentSet(t.dim(), t.degree(), std::vector<MultiIndex>(sums.begin(), sums.end()),
                     SpaceKind::product);
}

long product_cardinality(int dim, int p) {
  check_dim(dim);
  const long q = p;
  if (dim == 2) {
    if (p < 2) throw std::invalid_argument("2D product cardinality formula requires p >= 2");
    return 2 * q * q + 5 * q + 4;
  }
  if (p < 3) throw std::invalid_argument("3D product cardinality formula requires p >= 3");
  return (4 * q * q * q + 24 * q * q + 56 * q + 21) / 3;
}

SpaceBasis::SpaceBasis(ExponentSet exponents)
    : exponents_(std::move(exponents)),
      exact_integrals_(exponents_.size(), 0.0),
      max_degree_(exponents_.max_component()) {
  // Orthogonality against the constant mode leaves only alpha = 0 with a
  // nonzero integral.
  for (std::size_t i = 0; i < exponents_.size(); ++i) {
    if (exponents_[i].total_degree() == 0) exact_integrals_[i] = 1.0;
  }
}

double SpaceBasis::evaluate(std::size_t i, std::span<const double> point) const {
  const auto& a = exponents_[i];
  double v = 1.0;
  for (int k = 0; k < a.dim(); ++k) v *= shifted_legendre_eval(a[k], point[static_cast<std::size_t>(k)]);
  return v;
}

double SpaceBasis::partial(std::size_t i, int axis, std::span<const double> point) const {
  const auto& a = exponents_[i];
  double v = 1.0;
  for (int k = 0; k < a.dim(); ++k) {
    const double x = point[static_cast<std::size_t>(k)];
    v *= (k == axis) ? shifted_legendre_deriv(a[k], x) : shifted_legendre_eval(a[k], x);
  }
  return v;
}

SpaceBasis build_basis(const ExponentSet& e) { return SpaceBasis(e); }

SpaceBasis product_space_basis(int dim, int p) {
  return SpaceBasis(product_exponent_set(trunk_exponent_set(dim, p)));
}

}  // namespace quadforge
