#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "hyperorbit/exp_log.hpp"
#include "hyperorbit/integer_relation.hpp"
#include "hyperorbit/matrix_core.hpp"
#include "hyperorbit/pipeline.hpp"
#include "hyperorbit/semigroup.hpp"

namespace hyperorbit {

using HighPrecision = boost::multiprecision::cpp_bin_float_100;

struct AlphaChoice {
  RealVector alpha;
  std::vector<int> radicands;
  double certified_height = 0.0;
};

struct ConstructionChecks {
  double commute_ratio = 0.0;
  std::vector<double> exp_residuals;  // ||A_j^2 - exp(B_j)||_max / ||A_j^2||_max
  int index = 0;
  DensityStatus verdict = DensityStatus::Unknown;
  Tribool hypercyclic = Tribool::Unknown;
};

struct ConstructionRecipe {
  BlockPartition partition;
  RealVector alpha;
  std::vector<int> radicands;
  double alpha_certified_height = 0.0;
  RealMatrix S;
  std::vector<RealVector> u;
  std::vector<RealMatrix> B;
  std::vector<RealMatrix> A;
  ConstructionChecks checks;

  MatrixFamily family() const {
    MatrixFamily f;
    f.n = partition.dim();
    f.generators = A;
    for (std::size_t j = 0; j < A.size(); ++j) f.labels.push_back("A" + std::to_string(j + 1));
    return f;
  }
};

namespace detail {

inline std::vector<int> primes(int count) {
  std::vector<int> out;
  for (int c = 2; int(out.size()) < count; ++c) {
    bool prime = true;
    for (int p : out) {
      if (p * p > c) break;
      if (c % p == 0) {
        prime = false;
        break;
      }
    }
    if (prime) out.push_back(c);
  }
  return out;
}

}  // namespace detail

// alpha_i = -sqrt(p_i) over consecutive primes, checked for integer
// relations with 1 in 100-digit arithmetic.
inline AlphaChoice choose_alpha_certified(int n, std::int64_t height) {
  if (n < 1 || n > kMaxDimension) throw_input("choose_alpha: n must be in [1, 32]");
  const auto pool = detail::primes(3 * n);
  for (int shift = 0; shift < 2 * n; ++shift) {
    std::vector<HighPrecision> values{HighPrecision(1)};
    AlphaChoice choice;
    choice.alpha = RealVector(n);
    for (int i = 0; i < n; ++i) {
      const int p = pool[shift + i];
      choice.radicands.push_back(p);
      const HighPrecision root = -boost::multiprecision::sqrt(HighPrecision(p));
      values.push_back(root);
      choice.alpha(i) = root.convert_to<double>();
    }
    const auto search =
        integer_relation<HighPrecision>(std::span<const HighPrecision>(values), height);
    if (search.found()) continue;
    choice.certified_height = search.certified_height;
    return choice;
  }
  throw_domain("choose_alpha: every candidate exhibited an integer relation");
}

inline RealVector choose_alpha(int n, std::int64_t height) {
  return choose_alpha_certified(n, height).alpha;
}

struct DenseVectors {
  RealMatrix S;
  std::vector<RealVector> u;
};

inline DenseVectors build_dense_vectors(int n, int s, const BlockPartition& part,
                                        const RealVector& alpha) {
  part.validate();
  if (part.dim() != n || part.s() != s) {
    throw_input("build_dense_vectors: (n, s) = (" + std::to_string(n) + ", " +
                std::to_string(s) + ") does not match partition " + to_string(part));
  }
  if (alpha.size() != n) throw_input("build_dense_vectors: alpha must have n entries");
  DenseVectors out;
  out.S = RealMatrix::Zero(n, n);
  std::vector<bool> taken(n, false);
  for (int l = 0; l < s; ++l) {
    const int t = part.b_offset(l) + 1;
    out.S(t, l) = 2.0 * std::numbers::pi;
    taken[t] = true;
  }
  int col = s;
  for (int i = 0; i < n; ++i) {
    if (!taken[i]) out.S(i, col++) = 1.0;
  }
  for (int k = 0; k < n - s; ++k) out.u.push_back(out.S.col(s + k));
  out.u.push_back(out.S * alpha);
  return out;
}

// B with B u0 = u: T-blocks x I + (first column), B-blocks lower block
// triangular with SBlock (y, -y') in every slot of block-row i - j.
inline RealMatrix log_generator_from_vector(const BlockPartition& part, const RealVector& u) {
  const int n = part.dim();
  RealMatrix b = RealMatrix::Zero(n, n);
  for (int k = 0; k < part.r(); ++k) {
    const int o = part.t_offset(k);
    const int size = part.t_blocks[k];
    for (int i = 0; i < size; ++i) b(o + i, o + i) = u(o);
    for (int i = 1; i < size; ++i) b(o + i, o) = u(o + i);
  }
  for (int l = 0; l < part.s(); ++l) {
    const int o = part.b_offset(l);
    const int m = part.b_blocks[l];
    for (int d = 0; d < m; ++d) {
      const SBlock c{u(o + 2 * d), -u(o + 2 * d + 1)};
      for (int j = 0; j + d < m; ++j) {
        b.block<2, 2>(o + 2 * (j + d), o + 2 * j) = c.matrix();
      }
    }
  }
  return b;
}

inline ConstructionRecipe build_generators(const BlockPartition& part,
                                           std::int64_t height = 1'000'000,
                                           bool run_pipeline = true) {
  part.validate();
  const int n = part.dim();
  const int r = part.r();
  const int s = part.s();
  if (r > n - s + 1) throw_input("build_generators: r exceeds n - s + 1");

  ConstructionRecipe recipe;
  recipe.partition = part;
  const AlphaChoice alpha = choose_alpha_certified(n, height);
  recipe.alpha = alpha.alpha;
  recipe.radicands = alpha.radicands;
  recipe.alpha_certified_height = alpha.certified_height;
  auto dense = build_dense_vectors(n, s, part, alpha.alpha);
  recipe.S = dense.S;
  recipe.u = dense.u;

  const CanonicalVectors canon = canonical_vectors(part, RealMatrix::Identity(n, n));
  for (std::size_t j = 0; j < recipe.u.size(); ++j) {
    const RealMatrix b = log_generator_from_vector(part, recipe.u[j]);
    if (max_norm(RealVector(b * canon.u0 - recipe.u[j])) != 0.0) {
      throw_domain("build_generators: B_" + std::to_string(j + 1) + " u0 != u_" +
                   std::to_string(j + 1));
    }
    RealMatrix a = exp_K(RealMatrix(0.5 * b), part);
    if (int(j) < r) {
      const int o = part.t_offset(int(j));
      const int size = part.t_blocks[j];
      a.block(o, o, size, size) *= -1.0;
    }
    recipe.B.push_back(b);
    recipe.A.push_back(a);
  }

  ToleranceConfig tol;
  tol.relation_height = height;
  const MatrixFamily family = recipe.family();
  const auto commute = commute_report(family, tol);
  recipe.checks.commute_ratio = commute.worst_ratio;
  if (commute.worst_ratio > 1e-9) {
    throw_domain("build_generators: commutator ratio " + std::to_string(commute.worst_ratio));
  }
  for (std::size_t j = 0; j < recipe.A.size(); ++j) {
    const RealMatrix& a = recipe.A[j];
    if (!is_in_K(a, part, tol) || !is_invertible(a, tol)) {
      throw_domain("build_generators: A_" + std::to_string(j + 1) + " is not in K*");
    }
    const RealMatrix square = a * a;
    const double residual = max_norm(RealMatrix(square - exp_K(recipe.B[j], part))) /
                            std::max(1.0, max_norm(square));
    recipe.checks.exp_residuals.push_back(residual);
    if (residual > 1e-9) {
      throw_domain("build_generators: A_" + std::to_string(j + 1) +
                   "^2 != exp(B) (residual " + std::to_string(residual) + ")");
    }
  }
  MatrixFamily in_k = family;
  const IndexReport index = compute_index(in_k, part, tol);
  recipe.checks.index = index.index;
  if (index.index != r) {
    throw_domain("build_generators: index " + std::to_string(index.index) + " != r");
  }
  if (run_pipeline) {
    AnalyzeOptions options;
    options.tol = tol;
    options.attach_coverage = false;
    const AnalysisReport report = analyze(family, options);
    recipe.checks.verdict = report.verdict.status;
    recipe.checks.hypercyclic = report.verdict.hypercyclic;
    if (report.verdict.status != DensityStatus::CertifiedDense) {
      throw_domain("build_generators: pipeline verdict is " +
                   std::string(to_string(report.verdict.status)) + " for " + to_string(part));
    }
  }
  return recipe;
}

struct Example71 {
  MatrixFamily corrected;
  MatrixFamily printed;
  std::vector<RealMatrix> reference_logs;  // B_1, B_2, B_3 as printed
};

inline Example71 example_7_1() {
  using std::numbers::pi;
  const double sqrt2 = std::sqrt(2.0);
  const double sqrt3 = std::sqrt(3.0);
  Example71 ex;
  RealMatrix a1 = std::exp(pi) * RealMatrix::Identity(2, 2);
  RealMatrix a2(2, 2);
  a2 << -1, 0, -pi, -1;
  RealMatrix a2_printed(2, 2);
  a2_printed << -1, 0, pi, -1;
  RealMatrix a3(2, 2);
  a3 << 1, 0, -pi * sqrt3, 1;
  a3 *= std::exp(-pi * sqrt2);

  ex.corrected.n = 2;
  ex.corrected.generators = {a1, a2, a3};
  ex.corrected.labels = {"A1", "A2", "A3"};
  ex.printed.n = 2;
  ex.printed.generators = {a1, a2_printed, a3};
  ex.printed.labels = {"A1", "A2 (printed)", "A3"};

  RealMatrix b1 = 2 * pi * RealMatrix::Identity(2, 2);
  RealMatrix b2(2, 2);
  b2 << 0, 0, 2 * pi, 0;
  RealMatrix b3(2, 2);
  b3 << -2 * pi * sqrt2, 0, -2 * pi * sqrt3, -2 * pi * sqrt2;
  ex.reference_logs = {b1, b2, b3};
  return ex;
}

}  // namespace hyperorbit
