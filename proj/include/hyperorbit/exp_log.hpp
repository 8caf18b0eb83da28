#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "hyperorbit/matrix_core.hpp"

namespace hyperorbit {

// Principal logarithm of a K+ matrix plus the directions of its branch
// ambiguity: every other logarithm inside K is B + sum_l 2*pi*k_l*L_l.
struct KLogResult {
  RealMatrix B;
  std::vector<RealMatrix> branch_generators;  // L_1..L_s, unscaled
};

namespace detail {

// c*I + N with N strictly lower triangular and nilpotent: the series for
// exp(N) stops after size-1 terms.
template <class Matrix, class Scalar>
Matrix exp_scalar_plus_nilpotent(const Scalar& c, const Matrix& nilpotent) {
  const auto size = nilpotent.rows();
  Matrix sum = Matrix::Identity(size, size);
  Matrix term = Matrix::Identity(size, size);
  for (Eigen::Index j = 1; j < size; ++j) {
    term = (term * nilpotent) / static_cast<double>(j);
    sum += term;
  }
  return std::exp(c) * sum;
}

// log(c*(I + M)) = log(c) I + sum_j (-1)^(j+1) M^j / j for M nilpotent.
template <class Matrix, class Scalar>
Matrix log_scalar_plus_nilpotent(const Scalar& c, const Matrix& nilpotent) {
  const auto size = nilpotent.rows();
  const Matrix scaled = nilpotent / c;
  Matrix sum = Matrix::Identity(size, size) * std::log(c);
  Matrix power = Matrix::Identity(size, size);
  for (Eigen::Index j = 1; j < size; ++j) {
    power = power * scaled;
    sum += ((j % 2 == 1) ? 1.0 : -1.0) / static_cast<double>(j) * power;
  }
  return sum;
}

template <class Matrix>
Matrix strictly_lower(const Matrix& a) {
  return a.template triangularView<Eigen::StrictlyLower>();
}

inline void require_structure(const RealMatrix& a, const BlockPartition& part,
                              const ToleranceConfig& tol, const char* what) {
  part.validate();
  require_square(a, what);
  const auto scan = scan_structure(a, part, tol.structural_tol * max_norm(a));
  if (scan.first_offender) {
    const auto [i, j] = *scan.first_offender;
    throw_domain(std::string(what) + ": input is not in K" + to_string(part) +
                 " (entry (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                 "))");
  }
}

}  // namespace detail

// L_l: J = [[0,-1],[1,0]] repeated along the diagonal of B-block l, zero
// elsewhere.
inline RealMatrix branch_generator(const BlockPartition& part, int l) {
  const int n = part.dim();
  RealMatrix out = RealMatrix::Zero(n, n);
  const int o = part.b_offset(l);
  for (int i = 0; i < part.b_blocks[l]; ++i) {
    out(o + 2 * i, o + 2 * i + 1) = -1.0;
    out(o + 2 * i + 1, o + 2 * i) = 1.0;
  }
  return out;
}

inline RealMatrix exp_K(const RealMatrix& b, const BlockPartition& part,
                        const ToleranceConfig& tol = {}) {
  detail::require_structure(b, part, tol, "exp_K");
  RealMatrix out = RealMatrix::Zero(b.rows(), b.cols());
  for (int k = 0; k < part.r(); ++k) {
    const int o = part.t_offset(k);
    const int size = part.t_blocks[k];
    const RealMatrix block = b.block(o, o, size, size);
    const double mu = block.diagonal().mean();
    out.block(o, o, size, size) =
        detail::exp_scalar_plus_nilpotent(mu, RealMatrix(detail::strictly_lower(block)));
  }
  for (int l = 0; l < part.s(); ++l) {
    const int o = part.b_offset(l);
    const int m = part.b_blocks[l];
    const ComplexMatrix c = bblock_to_complex(b.block(o, o, 2 * m, 2 * m));
    const Complex diag = c.diagonal().mean();
    out.block(o, o, 2 * m, 2 * m) = complex_to_bblock(
        detail::exp_scalar_plus_nilpotent(diag, ComplexMatrix(detail::strictly_lower(c))));
  }
  return out;
}

// Principal logarithm inside K: real log on T-blocks (requires mu > 0),
// complex principal branch (argument in (-pi, pi]) on B-blocks.
inline KLogResult principal_log_K(const RealMatrix& a, const BlockPartition& part,
                                  const ToleranceConfig& tol = {}) {
  detail::require_structure(a, part, tol, "principal_log_K");
  KLogResult result;
  result.B = RealMatrix::Zero(a.rows(), a.cols());
  for (int k = 0; k < part.r(); ++k) {
    const int o = part.t_offset(k);
    const int size = part.t_blocks[k];
    const RealMatrix block = a.block(o, o, size, size);
    const double mu = block.diagonal().mean();
    if (!(mu > tol.det_tol)) {
      throw_domain("principal_log_K: not in image of exp: T-block " +
                   std::to_string(k) + " has eigenvalue " + std::to_string(mu) +
                   " <= 0");
    }
    result.B.block(o, o, size, size) = detail::log_scalar_plus_nilpotent(
        mu, RealMatrix(detail::strictly_lower(block)));
  }
  for (int l = 0; l < part.s(); ++l) {
    const int o = part.b_offset(l);
    const int m = part.b_blocks[l];
    const ComplexMatrix c = bblock_to_complex(a.block(o, o, 2 * m, 2 * m));
    const Complex diag = c.diagonal().mean();
    if (!(std::abs(diag) > tol.det_tol)) {
      throw_domain("principal_log_K: not in image of exp: B-block " +
                   std::to_string(l) + " has a singular diagonal SBlock");
    }
    ComplexMatrix log_block =
        detail::log_scalar_plus_nilpotent(diag, ComplexMatrix(detail::strictly_lower(c)));
    // std::log returns arg in [-pi, pi]; fold -pi onto pi.
    for (int i = 0; i < m; ++i) {
      if (log_block(i, i).imag() == -std::numbers::pi) {
        log_block(i, i) = Complex(log_block(i, i).real(), std::numbers::pi);
      }
    }
    result.B.block(o, o, 2 * m, 2 * m) = complex_to_bblock(log_block);
    result.branch_generators.push_back(branch_generator(part, l));
  }
  return result;
}

inline RealMatrix log_branch(const KLogResult& res,
                             std::span<const std::int64_t> k) {
  if (k.size() != res.branch_generators.size()) {
    throw_input("log_branch: expected " +
                std::to_string(res.branch_generators.size()) +
                " branch indices, got " + std::to_string(k.size()));
  }
  RealMatrix out = res.B;
  for (std::size_t l = 0; l < k.size(); ++l) {
    out += (2.0 * std::numbers::pi * static_cast<double>(k[l])) *
           res.branch_generators[l];
  }
  return out;
}

}  // namespace hyperorbit
