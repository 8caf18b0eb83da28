#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hyperorbit/error.hpp"

namespace hyperorbit {

struct IntegerRelation {
  std::vector<std::int64_t> coefficients;
  std::vector<double> target_values;  // first (or only) row of the values
  double residual = 0.0;              // max over rows of |sum c_i v_i|
};

struct RelationSearch {
  std::optional<IntegerRelation> relation;
  // No relation (at the data precision) has Euclidean norm below this; an
  // absence claim covers every coefficient vector with max |c_i| below
  // certified_height.
  double certified_height = 0.0;
  std::int64_t requested_height = 0;

  bool found() const { return relation.has_value(); }
  bool certifies_height() const {
    return !relation && certified_height >= double(requested_height);
  }
};

struct RelationOptions {
  // Relative accuracy of the supplied values; 0 selects 64 ulps of the
  // scalar type.
  double precision = 0.0;
  // Lattice weight is margin / (precision * max|v|): vectors that only
  // look like relations sit a factor 1/margin above the acceptance bound.
  double margin = 1e-4;
  double lll_delta = 0.99;
};

inline constexpr std::int64_t kMaxRelationHeight = std::int64_t{1} << 52;

namespace detail {

// LLL over integer coefficient rows, held as exact integers in Real; the
// real coordinates of each lattice vector are recomputed from its integers
// so they never drift.
template <class Real>
class RelationLattice {
 public:
  RelationLattice(const std::vector<std::vector<Real>>& rows, Real weight)
      : values_(rows), weight_(weight), dim_(rows.front().size()) {
    coeffs_.assign(dim_, std::vector<Real>(dim_, Real(0)));
    for (std::size_t i = 0; i < dim_; ++i) coeffs_[i][i] = Real(1);
    using std::ldexp;
    exact_limit_ = ldexp(Real(1), std::numeric_limits<Real>::digits - 2);
  }

  std::size_t dim() const { return dim_; }
  const std::vector<Real>& coefficients(std::size_t i) const { return coeffs_[i]; }

  // sum_j c_j v_j for each value row.
  std::vector<Real> forms(const std::vector<Real>& c) const {
    std::vector<Real> out;
    for (const auto& row : values_) {
      Real acc = 0;
      for (std::size_t j = 0; j < dim_; ++j) acc += c[j] * row[j];
      out.push_back(acc);
    }
    return out;
  }

  std::vector<Real> embed(std::size_t i) const {
    std::vector<Real> v;
    v.reserve(dim_ + values_.size());
    for (const auto& c : coeffs_[i]) v.push_back(c);
    for (const auto& f : forms(coeffs_[i])) v.push_back(weight_ * f);
    return v;
  }

  void reduce(double delta) {
    if (dim_ < 2) {
      gram_schmidt();
      return;
    }
    gram_schmidt();
    std::size_t k = 1;
    std::size_t guard = 0;
    while (k < dim_) {
      if (++guard > 200000) throw_domain("integer_relation: LLL did not converge");
      for (std::size_t j = k; j-- > 0;) size_reduce(k, j);
      const Real lhs = b_norm2_[k];
      const Real rhs = (Real(delta) - mu_[k][k - 1] * mu_[k][k - 1]) * b_norm2_[k - 1];
      if (lhs >= rhs) {
        ++k;
      } else {
        std::swap(coeffs_[k], coeffs_[k - 1]);
        gram_schmidt();
        k = std::max<std::size_t>(k - 1, 1);
      }
    }
  }

  // Lower bound on the shortest nonzero lattice vector.
  Real min_gram_schmidt_norm() const {
    using std::sqrt;
    Real best = sqrt(b_norm2_[0]);
    for (const auto& n2 : b_norm2_) {
      const Real v = sqrt(n2);
      if (v < best) best = v;
    }
    return best;
  }

 private:
  void size_reduce(std::size_t k, std::size_t j) {
    using std::abs;
    using std::round;
    if (abs(mu_[k][j]) <= Real(0.5)) return;
    const Real q = round(mu_[k][j]);
    for (std::size_t t = 0; t < dim_; ++t) {
      coeffs_[k][t] -= q * coeffs_[j][t];
      if (abs(coeffs_[k][t]) > exact_limit_) {
        throw_domain("integer_relation: lattice coefficients exceed the exact integer range");
      }
    }
    for (std::size_t t = 0; t <= j; ++t) {
      mu_[k][t] -= q * (t == j ? Real(1) : mu_[j][t]);
    }
    rows_[k] = embed(k);
  }

  void gram_schmidt() {
    rows_.resize(dim_);
    for (std::size_t i = 0; i < dim_; ++i) rows_[i] = embed(i);
    const std::size_t width = rows_[0].size();
    star_.assign(dim_, std::vector<Real>(width, Real(0)));
    mu_.assign(dim_, std::vector<Real>(dim_, Real(0)));
    b_norm2_.assign(dim_, Real(0));
    for (std::size_t i = 0; i < dim_; ++i) {
      star_[i] = rows_[i];
      for (std::size_t j = 0; j < i; ++j) {
        Real dot = 0;
        for (std::size_t t = 0; t < width; ++t) dot += rows_[i][t] * star_[j][t];
        mu_[i][j] = b_norm2_[j] > Real(0) ? dot / b_norm2_[j] : Real(0);
        for (std::size_t t = 0; t < width; ++t) star_[i][t] -= mu_[i][j] * star_[j][t];
      }
      Real n2 = 0;
      for (std::size_t t = 0; t < width; ++t) n2 += star_[i][t] * star_[i][t];
      b_norm2_[i] = n2;
    }
  }

  std::vector<std::vector<Real>> values_;
  Real weight_;
  std::size_t dim_;
  Real exact_limit_;
  std::vector<std::vector<Real>> coeffs_;
  std::vector<std::vector<Real>> rows_;
  std::vector<std::vector<Real>> star_;
  std::vector<std::vector<Real>> mu_;
  std::vector<Real> b_norm2_;
};

inline void normalize_sign(std::vector<std::int64_t>& c) {
  for (auto x : c) {
    if (x == 0) continue;
    if (x < 0) {
      for (auto& y : c) y = -y;
    }
    return;
  }
}

}  // namespace detail

// Simultaneous integer relation: c != 0 with max|c_i| <= height and
// sum_j c_j rows[f][j] ~ 0 for every row f. A candidate is accepted when
// |sum c_j v_j| <= precision * sum_j |c_j| * max|v|, the error a genuine
// relation can pick up from values known to relative accuracy `precision`.
template <class Real>
RelationSearch simultaneous_integer_relation(const std::vector<std::vector<Real>>& rows,
                                             std::int64_t height,
                                             RelationOptions options = {}) {
  using std::abs;
  using std::sqrt;
  if (rows.empty() || rows.front().empty()) throw_input("integer_relation: no values");
  const std::size_t dim = rows.front().size();
  for (const auto& row : rows) {
    if (row.size() != dim) throw_input("integer_relation: ragged value rows");
  }
  if (height < 2) throw_input("integer_relation: height must be >= 2");
  if (height > kMaxRelationHeight) {
    throw_domain("integer_relation: height " + std::to_string(height) +
                 " overflows the integer coefficient type");
  }
  const double precision = options.precision > 0.0
                               ? options.precision
                               : 64.0 * double(std::numeric_limits<Real>::epsilon());

  Real max_abs = 0;
  for (const auto& row : rows) {
    for (const auto& v : row) {
      if (!(abs(v) < Real(std::numeric_limits<double>::max()))) {
        throw_input("integer_relation: values must be finite");
      }
      if (abs(v) > max_abs) max_abs = abs(v);
    }
  }

  RelationSearch result;
  result.requested_height = height;
  auto accept = [&](std::vector<std::int64_t> c, const std::vector<Real>& forms) {
    detail::normalize_sign(c);
    IntegerRelation rel;
    rel.coefficients = c;
    for (const auto& v : rows.front()) rel.target_values.push_back(static_cast<double>(v));
    Real worst = 0;
    for (const auto& f : forms) {
      if (abs(f) > worst) worst = abs(f);
    }
    rel.residual = static_cast<double>(worst);
    result.relation = rel;
  };

  if (max_abs == Real(0)) {
    std::vector<std::int64_t> c(dim, 0);
    c[0] = 1;
    accept(c, std::vector<Real>(rows.size(), Real(0)));
    return result;
  }

  // Non-relations reduce to norm ~ weight^(F/N) for F value rows; capping that
  // near 1e3 * height keeps the reduced coefficients small without hiding any
  // relation of the requested height.
  using std::pow;
  const Real cap = pow(Real(1e3) * Real(double(height)), Real(double(dim) / double(rows.size()))) /
                   max_abs;
  Real weight = Real(options.margin) / (Real(precision) * max_abs);
  if (cap < weight) weight = cap;
  detail::RelationLattice<Real> lattice(rows, weight);
  lattice.reduce(options.lll_delta);

  for (std::size_t i = 0; i < lattice.dim(); ++i) {
    const auto& c = lattice.coefficients(i);
    Real top = 0;
    Real l1 = 0;
    for (const auto& x : c) {
      if (abs(x) > top) top = abs(x);
      l1 += abs(x);
    }
    if (top == Real(0) || top > Real(double(height))) continue;
    const auto forms = lattice.forms(c);
    const Real bound = Real(precision) * l1 * max_abs;
    bool ok = true;
    for (const auto& f : forms) {
      if (abs(f) > bound) ok = false;
    }
    if (ok) {
      std::vector<std::int64_t> ints;
      for (const auto& x : c) ints.push_back(static_cast<std::int64_t>(x));
      accept(ints, forms);
      break;
    }
  }

  // A genuine relation c embeds with norm <= ||c||_2 * sqrt(1 + margin^2 n).
  const double inflation = std::sqrt(1.0 + options.margin * options.margin * double(dim));
  const double lower = static_cast<double>(lattice.min_gram_schmidt_norm());
  result.certified_height = lower / (inflation * std::sqrt(double(dim)));
  return result;
}

template <class Real>
RelationSearch integer_relation(std::span<const Real> values, std::int64_t height,
                                RelationOptions options = {}) {
  return simultaneous_integer_relation<Real>(
      {std::vector<Real>(values.begin(), values.end())}, height, options);
}

inline RelationSearch integer_relation(const std::vector<double>& values,
                                       std::int64_t height, RelationOptions options = {}) {
  return integer_relation<double>(std::span<const double>(values), height, options);
}

}  // namespace hyperorbit
