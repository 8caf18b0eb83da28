#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <set>
#include <vector>

#include "hyperorbit/hyperorbit.hpp"

namespace testing_support {

using namespace hyperorbit;

// Every (T sizes, B sizes) pair with sum(T) + 2 sum(B) = n, each list
// non-increasing.
inline std::vector<BlockPartition> partitions_of(int n) {
  auto integer_partitions = [](int total) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    auto rec = [&](auto&& self, int left, int max_part) -> void {
      if (left == 0) {
        out.push_back(cur);
        return;
      }
      for (int k = std::min(left, max_part); k >= 1; --k) {
        cur.push_back(k);
        self(self, left - k, k);
        cur.pop_back();
      }
    };
    rec(rec, total, total);
    return out;
  };
  std::vector<BlockPartition> out;
  for (int b_total = 0; 2 * b_total <= n; ++b_total) {
    const int t_total = n - 2 * b_total;
    for (const auto& t : integer_partitions(t_total)) {
      for (const auto& b : integer_partitions(b_total)) out.push_back(BlockPartition{t, b});
    }
  }
  return out;
}

inline RealMatrix random_orthogonal(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  RealMatrix m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = g(rng);
  }
  Eigen::HouseholderQR<RealMatrix> qr(m);
  return qr.householderQ();
}

// Q = U diag(sigma) V^T with singular values log-spaced in [1, cond].
inline RealMatrix random_conditioned(int n, double cond, std::mt19937_64& rng) {
  const RealMatrix u = random_orthogonal(n, rng);
  const RealMatrix v = random_orthogonal(n, rng);
  RealVector sigma(n);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < n; ++i) sigma(i) = std::pow(cond, unit(rng));
  if (n > 1) {
    sigma(0) = 1.0;
    sigma(n - 1) = cond;
  }
  return u * sigma.asDiagonal() * v.transpose();
}

// Strictly lower-triangular nilpotent with nonzero subdiagonal, so a single
// Jordan block.
template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> regular_nilpotent(int m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(0.5, 1.5);
  std::uniform_real_distribution<double> s(-1.0, 1.0);
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> n =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(m, m);
  for (int i = 1; i < m; ++i) {
    for (int j = 0; j < i; ++j) {
      if constexpr (std::is_same_v<Scalar, Complex>) {
        n(i, j) = i == j + 1 ? Complex(d(rng), s(rng)) : Complex(s(rng), s(rng));
      } else {
        n(i, j) = i == j + 1 ? d(rng) : s(rng);
      }
    }
  }
  return n;
}

template <class Matrix, class Scalar>
Matrix polynomial(const Matrix& nil, Scalar mu, const std::vector<Scalar>& coeffs) {
  const auto m = nil.rows();
  Matrix out = Matrix::Identity(m, m) * mu;
  Matrix power = Matrix::Identity(m, m);
  for (const auto& c : coeffs) {
    power = power * nil;
    out += c * power;
  }
  return out;
}

struct FamilyOptions {
  double mu_low = 0.5;
  double mu_high = 2.0;
  bool random_signs = true;
};

// p commuting generators in K-form: on each block a polynomial in one fixed
// regular nilpotent, with random block eigenvalues.
inline MatrixFamily random_k_family(const BlockPartition& part, int p, std::mt19937_64& rng,
                                    const FamilyOptions& opts = {}) {
  const int n = part.dim();
  std::uniform_real_distribution<double> mag(opts.mu_low, opts.mu_high);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::uniform_real_distribution<double> angle(0.3, std::numbers::pi - 0.3);
  std::bernoulli_distribution flip(0.5);

  std::vector<RealMatrix> t_nil;
  for (int size : part.t_blocks) t_nil.push_back(regular_nilpotent<double>(size, rng));
  std::vector<ComplexMatrix> b_nil;
  for (int size : part.b_blocks) b_nil.push_back(regular_nilpotent<Complex>(size, rng));

  MatrixFamily family;
  family.n = n;
  for (int g = 0; g < p; ++g) {
    RealMatrix a = RealMatrix::Zero(n, n);
    for (int k = 0; k < part.r(); ++k) {
      const int size = part.t_blocks[k];
      double mu = mag(rng);
      if (opts.random_signs && flip(rng)) mu = -mu;
      std::vector<double> c;
      for (int i = 1; i < size; ++i) c.push_back(i == 1 ? 0.5 + std::abs(coef(rng)) : coef(rng));
      a.block(part.t_offset(k), part.t_offset(k), size, size) = polynomial(t_nil[k], mu, c);
    }
    for (int l = 0; l < part.s(); ++l) {
      const int m = part.b_blocks[l];
      double theta = angle(rng);
      if (flip(rng)) theta = -theta;
      const Complex z = std::polar(mag(rng), theta);
      std::vector<Complex> c;
      for (int i = 1; i < m; ++i) c.push_back(Complex(0.5 + std::abs(coef(rng)), coef(rng)));
      const int o = part.b_offset(l);
      a.block(o, o, 2 * m, 2 * m) = complex_to_bblock(polynomial(b_nil[l], z, c));
    }
    family.generators.push_back(a);
  }
  return family;
}

inline MatrixFamily conjugate(const MatrixFamily& f, const RealMatrix& q) {
  MatrixFamily out = f;
  const RealMatrix q_inv = q.inverse();
  for (auto& a : out.generators) a = q * a * q_inv;
  return out;
}

// Random B in K with B-block angles in (-pi, pi].
inline RealMatrix random_k_log(const BlockPartition& part, std::mt19937_64& rng) {
  const int n = part.dim();
  std::uniform_real_distribution<double> real(-2.0, 2.0);
  std::uniform_real_distribution<double> ang(-std::numbers::pi, std::numbers::pi);
  RealMatrix b = RealMatrix::Zero(n, n);
  for (int k = 0; k < part.r(); ++k) {
    const int o = part.t_offset(k);
    const int size = part.t_blocks[k];
    const double mu = real(rng);
    for (int i = 0; i < size; ++i) {
      b(o + i, o + i) = mu;
      for (int j = 0; j < i; ++j) b(o + i, o + j) = real(rng);
    }
  }
  for (int l = 0; l < part.s(); ++l) {
    const int o = part.b_offset(l);
    const int m = part.b_blocks[l];
    double theta = ang(rng);
    if (theta == -std::numbers::pi) theta = std::numbers::pi;
    ComplexMatrix c = ComplexMatrix::Zero(m, m);
    const Complex diag(real(rng), theta);
    for (int i = 0; i < m; ++i) {
      c(i, i) = diag;
      for (int j = 0; j < i; ++j) c(i, j) = Complex(real(rng), real(rng));
    }
    b.block(o, o, 2 * m, 2 * m) = complex_to_bblock(c);
  }
  return b;
}

// Patterns reachable as products of 1..max_len generator sign vectors,
// by explicit word extension.
inline std::set<std::vector<int>> brute_force_patterns(const std::vector<std::vector<int>>& gens,
                                                       int max_len) {
  std::set<std::vector<int>> reached;
  std::set<std::vector<int>> frontier(gens.begin(), gens.end());
  reached = frontier;
  for (int len = 2; len <= max_len; ++len) {
    std::set<std::vector<int>> next;
    for (const auto& w : frontier) {
      for (const auto& g : gens) {
        std::vector<int> prod(w.size());
        for (std::size_t i = 0; i < w.size(); ++i) prod[i] = w[i] * g[i];
        next.insert(prod);
      }
    }
    reached.insert(next.begin(), next.end());
    frontier = std::move(next);
  }
  return reached;
}

inline int brute_force_index(const std::vector<std::vector<int>>& gens, int r, int max_len = 8) {
  const auto reached = brute_force_patterns(gens, max_len);
  int index = 0;
  for (int k = 0; k < r; ++k) {
    std::vector<int> target(r, 1);
    target[k] = -1;
    if (reached.count(target)) ++index;
  }
  return index;
}

}  // namespace testing_support
