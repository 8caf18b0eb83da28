#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hyperorbit/error.hpp"

namespace hyperorbit {

using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

inline constexpr int kMaxDimension = 32;

struct ToleranceConfig {
  double structural_tol = 1e-9;
  double det_tol = 1e-12;
  std::int64_t relation_height = 1'000'000;
  // Relative accuracy assumed for values fed to the integer-relation search
  // inside the pipeline (they come out of log/solve steps, not exact data).
  double relation_precision = 1e-12;
  std::uint64_t seed = 0;
};

// Generators of a semigroup of n x n real matrices.
struct MatrixFamily {
  int n = 0;
  std::vector<RealMatrix> generators;
  std::vector<std::string> labels;

  std::size_t size() const { return generators.size(); }
  bool empty() const { return generators.empty(); }
};

// The 2x2 matrix [[alpha, beta], [-beta, alpha]], i.e. the complex number
// alpha + i*beta acting on R^2.
struct SBlock {
  double alpha = 0.0;
  double beta = 0.0;

  static SBlock from_complex(Complex z) { return {z.real(), z.imag()}; }
  Complex as_complex() const { return {alpha, beta}; }

  Eigen::Matrix2d matrix() const {
    Eigen::Matrix2d m;
    m << alpha, beta, -beta, alpha;
    return m;
  }
};

// Sizes n_1..n_r of the triangular blocks and m_1..m_s of the 2x2-block
// triangular blocks. T-blocks come first along the diagonal.
struct BlockPartition {
  std::vector<int> t_blocks;
  std::vector<int> b_blocks;

  int r() const { return static_cast<int>(t_blocks.size()); }
  int s() const { return static_cast<int>(b_blocks.size()); }

  int dim() const {
    return std::accumulate(t_blocks.begin(), t_blocks.end(), 0) +
           2 * std::accumulate(b_blocks.begin(), b_blocks.end(), 0);
  }

  // Row offset of T-block k.
  int t_offset(int k) const {
    return std::accumulate(t_blocks.begin(), t_blocks.begin() + k, 0);
  }

  // Row offset of B-block l.
  int b_offset(int l) const {
    return std::accumulate(t_blocks.begin(), t_blocks.end(), 0) +
           2 * std::accumulate(b_blocks.begin(), b_blocks.begin() + l, 0);
  }

  void validate() const {
    for (int size : t_blocks) {
      if (size < 1) throw_input("partition: T-block sizes must be >= 1");
    }
    for (int size : b_blocks) {
      if (size < 1) throw_input("partition: B-block sizes must be >= 1");
    }
    if (dim() < 1 || dim() > kMaxDimension) {
      throw_input("partition: dimension must be in [1, 32], got " +
                  std::to_string(dim()));
    }
  }

  bool operator==(const BlockPartition&) const = default;
};

// Multiset comparison: same block sizes regardless of order.
inline bool same_block_sizes(const BlockPartition& a, const BlockPartition& b) {
  auto sorted = [](std::vector<int> v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  return sorted(a.t_blocks) == sorted(b.t_blocks) &&
         sorted(a.b_blocks) == sorted(b.b_blocks);
}

inline std::string to_string(const BlockPartition& part) {
  std::string out = "(";
  for (std::size_t i = 0; i < part.t_blocks.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(part.t_blocks[i]);
  }
  out += ";";
  for (std::size_t i = 0; i < part.b_blocks.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(part.b_blocks[i]);
  }
  return out + ")";
}

inline double max_norm(const RealMatrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

inline double max_norm(const RealVector& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

inline bool all_finite(const RealMatrix& a) { return a.allFinite(); }

inline void require_square(const RealMatrix& a, const std::string& what) {
  if (a.rows() != a.cols()) {
    throw_input(what + ": matrix is not square (" + std::to_string(a.rows()) +
                "x" + std::to_string(a.cols()) + ")");
  }
  if (!a.allFinite()) throw_input(what + ": matrix has non-finite entries");
}

inline void validate_family(const MatrixFamily& family) {
  if (family.n < 1 || family.n > kMaxDimension) {
    throw_input("family: n must be in [1, 32], got " + std::to_string(family.n));
  }
  for (std::size_t k = 0; k < family.size(); ++k) {
    const RealMatrix& a = family.generators[k];
    require_square(a, "generator " + std::to_string(k));
    if (a.rows() != family.n) {
      throw_input("generator " + std::to_string(k) + " has dimension " +
                  std::to_string(a.rows()) + ", expected " +
                  std::to_string(family.n));
    }
  }
}

struct CommuteReport {
  bool commutes = true;
  double worst_ratio = 0.0;  // ||AB - BA|| / (1 + ||A|| ||B||)
  std::optional<std::pair<std::size_t, std::size_t>> worst_pair;
};

inline CommuteReport commute_report(const MatrixFamily& family,
                                    const ToleranceConfig& tol) {
  CommuteReport report;
  const auto& g = family.generators;
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = i + 1; j < g.size(); ++j) {
      if (g[i].rows() != g[j].rows() || g[i].cols() != g[j].cols()) {
        throw_input("commute_check: dimension mismatch between generators " +
                    std::to_string(i) + " and " + std::to_string(j));
      }
      const double defect = max_norm(RealMatrix(g[i] * g[j] - g[j] * g[i]));
      const double ratio = defect / (1.0 + max_norm(g[i]) * max_norm(g[j]));
      if (!report.worst_pair || ratio > report.worst_ratio) {
        report.worst_ratio = ratio;
        report.worst_pair = {i, j};
      }
    }
  }
  report.commutes = report.worst_ratio <= tol.structural_tol;
  return report;
}

inline bool commute_check(const MatrixFamily& family,
                          const ToleranceConfig& tol = {}) {
  return commute_report(family, tol).commutes;
}

// Largest absolute deviation of `a` from the block structure of `part`
// (forms (1) and (2) on the diagonal blocks, zeros elsewhere), together with
// the first entry whose deviation exceeds `threshold`.
struct StructureScan {
  double deviation = 0.0;
  std::optional<std::pair<int, int>> first_offender;
};

namespace detail {

struct BlockSpan {
  int offset;
  int size;  // in rows
  bool is_b;
};

inline std::vector<BlockSpan> block_spans(const BlockPartition& part) {
  std::vector<BlockSpan> spans;
  int offset = 0;
  for (int size : part.t_blocks) {
    spans.push_back({offset, size, false});
    offset += size;
  }
  for (int size : part.b_blocks) {
    spans.push_back({offset, 2 * size, true});
    offset += 2 * size;
  }
  return spans;
}

}  // namespace detail

inline StructureScan scan_structure(const RealMatrix& a,
                                    const BlockPartition& part,
                                    double threshold) {
  if (a.rows() != part.dim() || a.cols() != part.dim()) {
    throw_input("matrix dimension " + std::to_string(a.rows()) +
                " does not match partition " + to_string(part));
  }
  StructureScan scan;
  auto note = [&](double dev, int i, int j) {
    scan.deviation = std::max(scan.deviation, dev);
    if (dev > threshold && !scan.first_offender) scan.first_offender = {i, j};
  };

  const auto spans = detail::block_spans(part);
  std::vector<int> owner(a.rows());
  for (std::size_t b = 0; b < spans.size(); ++b) {
    for (int i = 0; i < spans[b].size; ++i) owner[spans[b].offset + i] = int(b);
  }
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) {
      if (owner[i] != owner[j]) note(std::abs(a(i, j)), i, j);
    }
  }

  for (const auto& span : spans) {
    const int o = span.offset;
    if (!span.is_b) {
      const double mu = a.diagonal().segment(o, span.size).mean();
      for (int i = 0; i < span.size; ++i) {
        note(std::abs(a(o + i, o + i) - mu), o + i, o + i);
        for (int j = i + 1; j < span.size; ++j) {
          note(std::abs(a(o + i, o + j)), o + i, o + j);
        }
      }
      continue;
    }
    const int m = span.size / 2;
    double alpha = 0.0;
    double beta = 0.0;
    for (int i = 0; i < m; ++i) {
      const int p = o + 2 * i;
      alpha += 0.5 * (a(p, p) + a(p + 1, p + 1)) / m;
      beta += 0.5 * (a(p, p + 1) - a(p + 1, p)) / m;
    }
    for (int bi = 0; bi < m; ++bi) {
      for (int bj = 0; bj < m; ++bj) {
        const int p = o + 2 * bi;
        const int q = o + 2 * bj;
        if (bj > bi) {
          for (int x = 0; x < 2; ++x)
            for (int y = 0; y < 2; ++y) note(std::abs(a(p + x, q + y)), p + x, q + y);
          continue;
        }
        // SBlock shape: equal diagonal, opposite off-diagonal.
        note(0.5 * std::abs(a(p, q) - a(p + 1, q + 1)), p + 1, q + 1);
        note(0.5 * std::abs(a(p, q + 1) + a(p + 1, q)), p + 1, q);
        if (bi == bj) {
          note(std::abs(0.5 * (a(p, q) + a(p + 1, q + 1)) - alpha), p, q);
          note(std::abs(0.5 * (a(p, q + 1) - a(p + 1, q)) - beta), p, q + 1);
        }
      }
    }
  }
  return scan;
}

// Absolute deviation from K-structure.
inline double k_deviation(const RealMatrix& a, const BlockPartition& part) {
  return scan_structure(a, part, std::numeric_limits<double>::infinity())
      .deviation;
}

// Deviation relative to ||a||_max (0 for the zero matrix).
inline double k_relative_deviation(const RealMatrix& a,
                                   const BlockPartition& part) {
  const double norm = max_norm(a);
  const double dev = k_deviation(a, part);
  return norm > 0.0 ? dev / norm : dev;
}

inline bool is_in_K(const RealMatrix& a, const BlockPartition& part,
                    const ToleranceConfig& tol = {}) {
  if (a.rows() != a.cols() || a.rows() != part.dim()) return false;
  return k_deviation(a, part) <= tol.structural_tol * max_norm(a);
}

struct TBlock {
  RealMatrix matrix;
  double mu = 0.0;  // the common diagonal entry
};

struct BBlock {
  RealMatrix matrix;  // 2m x 2m
  SBlock diagonal;    // eigenvalues alpha +- i beta
};

struct SplitBlocks {
  std::vector<TBlock> t;
  std::vector<BBlock> b;
};

inline SplitBlocks block_split(const RealMatrix& a, const BlockPartition& part,
                               const ToleranceConfig& tol = {}) {
  part.validate();
  const auto scan = scan_structure(a, part, tol.structural_tol * max_norm(a));
  if (scan.first_offender) {
    const auto [i, j] = *scan.first_offender;
    throw_domain("block_split: matrix violates K" + to_string(part) +
                 " structure at entry (" + std::to_string(i + 1) + "," +
                 std::to_string(j + 1) + ")");
  }
  SplitBlocks out;
  for (int k = 0; k < part.r(); ++k) {
    const int o = part.t_offset(k);
    const int size = part.t_blocks[k];
    TBlock block;
    block.matrix = a.block(o, o, size, size);
    block.mu = block.matrix.diagonal().mean();
    out.t.push_back(std::move(block));
  }
  for (int l = 0; l < part.s(); ++l) {
    const int o = part.b_offset(l);
    const int m = part.b_blocks[l];
    BBlock block;
    block.matrix = a.block(o, o, 2 * m, 2 * m);
    double alpha = 0.0;
    double beta = 0.0;
    for (int i = 0; i < m; ++i) {
      alpha += 0.5 * (block.matrix(2 * i, 2 * i) + block.matrix(2 * i + 1, 2 * i + 1));
      beta += 0.5 * (block.matrix(2 * i, 2 * i + 1) - block.matrix(2 * i + 1, 2 * i));
    }
    block.diagonal = {alpha / m, beta / m};
    out.b.push_back(std::move(block));
  }
  return out;
}

inline RealMatrix block_join(const SplitBlocks& blocks) {
  int n = 0;
  for (const auto& t : blocks.t) n += int(t.matrix.rows());
  for (const auto& b : blocks.b) n += int(b.matrix.rows());
  RealMatrix a = RealMatrix::Zero(n, n);
  int o = 0;
  for (const auto& t : blocks.t) {
    a.block(o, o, t.matrix.rows(), t.matrix.cols()) = t.matrix;
    o += int(t.matrix.rows());
  }
  for (const auto& b : blocks.b) {
    a.block(o, o, b.matrix.rows(), b.matrix.cols()) = b.matrix;
    o += int(b.matrix.rows());
  }
  return a;
}

// Complex m x m matrix whose (i, j) entry is the SBlock at block position
// (i, j) of a 2m x 2m B-block. Entries are read through the SBlock projection.
inline ComplexMatrix bblock_to_complex(const RealMatrix& block) {
  const int m = int(block.rows()) / 2;
  ComplexMatrix c(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const int p = 2 * i;
      const int q = 2 * j;
      c(i, j) = Complex(0.5 * (block(p, q) + block(p + 1, q + 1)),
                        0.5 * (block(p, q + 1) - block(p + 1, q)));
    }
  }
  return c;
}

inline RealMatrix complex_to_bblock(const ComplexMatrix& c) {
  const int m = int(c.rows());
  RealMatrix block(2 * m, 2 * m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      block.block<2, 2>(2 * i, 2 * j) = SBlock::from_complex(c(i, j)).matrix();
    }
  }
  return block;
}

// log|det a| via partial-pivot LU; -inf for a singular matrix.
inline double log_abs_det(const RealMatrix& a) {
  if (a.rows() == 0) return 0.0;
  Eigen::PartialPivLU<RealMatrix> lu(a);
  const RealMatrix& packed = lu.matrixLU();
  double sum = 0.0;
  for (int i = 0; i < packed.rows(); ++i) {
    const double d = std::abs(packed(i, i));
    if (d == 0.0 || !std::isfinite(d)) return -std::numeric_limits<double>::infinity();
    sum += std::log(d);
  }
  return sum;
}

inline double condition_number(const RealMatrix& a) {
  Eigen::JacobiSVD<RealMatrix> svd(a);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return 1.0;
  const double smallest = sv(sv.size() - 1);
  return smallest > 0.0 ? sv(0) / smallest : std::numeric_limits<double>::infinity();
}

}  // namespace hyperorbit
