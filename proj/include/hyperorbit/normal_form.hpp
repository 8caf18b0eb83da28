#pragma once

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hyperorbit/matrix_core.hpp"

namespace hyperorbit {

// P^{-1} A_k P lies in K_{eta,r,s} for every generator A_k.
struct NormalForm {
  RealMatrix P;
  RealMatrix P_inv;
  BlockPartition partition;
  MatrixFamily transformed;
  double residual = 0.0;   // max_k relative deviation of P^{-1}A_kP from K
  double condition = 1.0;  // cond_2(P)
  bool certified = true;
  std::uint64_t seed_used = 0;
  int collisions = 0;  // subspaces that needed splitting beyond the generic element
};

namespace detail {

inline constexpr double kClusterGapStart = 1e-6;
inline constexpr double kClusterGapLimit = 1e-2;
inline constexpr double kInvarianceTol = 1e-6;
inline constexpr double kOverlapTol = 1e-7;
inline constexpr double kFlagRankTol = 1e-8;

struct EigenCluster {
  Complex center;
  int size = 0;
};

inline std::vector<EigenCluster> cluster_eigenvalues(const ComplexVector& ev,
                                                     double gap) {
  const int count = int(ev.size());
  std::vector<int> parent(count);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (int i = 0; i < count; ++i) {
    for (int j = i + 1; j < count; ++j) {
      if (std::abs(ev(i) - ev(j)) < gap) parent[find(i)] = find(j);
    }
  }
  std::vector<EigenCluster> clusters;
  std::vector<int> slot(count, -1);
  for (int i = 0; i < count; ++i) {
    const int root = find(i);
    if (slot[root] < 0) {
      slot[root] = int(clusters.size());
      clusters.push_back({Complex(0.0, 0.0), 0});
    }
    auto& c = clusters[slot[root]];
    c.center += ev(i);
    ++c.size;
  }
  for (auto& c : clusters) c.center /= double(c.size);
  std::sort(clusters.begin(), clusters.end(), [](const auto& a, const auto& b) {
    if (a.center.real() != b.center.real()) return a.center.real() < b.center.real();
    return a.center.imag() < b.center.imag();
  });
  return clusters;
}

// An invariant subspace found while splitting a restricted operator. `basis`
// holds orthonormal columns in the coordinates of that operator. A complex
// piece of a real operator stands for the real span of Re/Im of its columns.
struct Piece {
  bool complex_type = false;
  ComplexMatrix basis;
};

template <class Matrix>
Matrix smallest_right_singular_vectors(const Matrix& a, int count) {
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullV);
  return svd.matrixV().rightCols(count);
}

template <class Matrix>
Matrix scaled_power(const Matrix& shifted, double norm, int power) {
  const Matrix base = shifted / norm;
  Matrix out = Matrix::Identity(base.rows(), base.cols());
  for (int i = 0; i < power; ++i) out = out * base;
  return out;
}

inline double min_singular_value(const ComplexMatrix& a) {
  if (a.cols() == 0) return 1.0;
  Eigen::JacobiSVD<ComplexMatrix> svd(a);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

inline double min_singular_value(const RealMatrix& a) {
  if (a.cols() == 0) return 1.0;
  Eigen::JacobiSVD<RealMatrix> svd(a);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

// Splits the operator `m` into generalized eigenspaces. For a real operator
// (`real_ambient`), real clusters give real pieces and each conjugate pair
// gives one complex piece (the member with positive imaginary part).
// Returns an empty vector when `m` has a single cluster (nothing to split).
inline std::vector<Piece> split_generalized_eigenspaces(const ComplexMatrix& m,
                                                        bool real_ambient,
                                                        double gap_start = kClusterGapStart) {
  const int d = int(m.rows());
  const double norm = m.norm();
  if (d <= 1 || norm == 0.0) return {};

  ComplexVector ev;
  if (real_ambient) {
    Eigen::EigenSolver<RealMatrix> solver(m.real(), false);
    if (solver.info() != Eigen::Success) throw_domain("normal form: eigensolver failed");
    ev = solver.eigenvalues();
  } else {
    Eigen::ComplexEigenSolver<ComplexMatrix> solver(m, false);
    if (solver.info() != Eigen::Success) throw_domain("normal form: eigensolver failed");
    ev = solver.eigenvalues();
  }

  for (double rel = gap_start; rel <= kClusterGapLimit * 1.0001; rel *= 10.0) {
    const double gap = rel * norm;
    const auto clusters = cluster_eigenvalues(ev, gap);

    std::vector<Piece> pieces;
    bool consistent = true;
    if (real_ambient) {
      std::vector<int> upper;
      std::vector<int> lower;
      for (const auto& c : clusters) {
        if (std::abs(c.center.imag()) <= gap) continue;
        (c.center.imag() > 0 ? upper : lower).push_back(c.size);
      }
      std::sort(upper.begin(), upper.end());
      std::sort(lower.begin(), lower.end());
      consistent = upper == lower;
    }
    if (!consistent) continue;

    int real_clusters = 0;
    for (const auto& c : clusters) {
      if (!real_ambient || std::abs(c.center.imag()) <= gap) ++real_clusters;
    }
    if (clusters.size() == 1 || (real_ambient && real_clusters == int(clusters.size()) &&
                                 clusters.size() == 1)) {
      return {};
    }

    for (const auto& c : clusters) {
      if (real_ambient && std::abs(c.center.imag()) <= gap) {
        const RealMatrix shifted =
            m.real() - c.center.real() * RealMatrix::Identity(d, d);
        const RealMatrix basis = smallest_right_singular_vectors(
            scaled_power(shifted, norm, c.size), c.size);
        pieces.push_back({false, basis.cast<Complex>()});
      } else if (!real_ambient || c.center.imag() > 0) {
        const ComplexMatrix shifted = m - c.center * ComplexMatrix::Identity(d, d);
        pieces.push_back({true, smallest_right_singular_vectors(
                                    scaled_power(shifted, norm, c.size), c.size)});
      }
    }

    // Validate: each piece invariant, pieces jointly independent.
    bool valid = true;
    for (const auto& piece : pieces) {
      const ComplexMatrix& v = piece.basis;
      const ComplexMatrix image = m * v;
      const double leak = (image - v * (v.adjoint() * image)).norm();
      if (leak > kInvarianceTol * norm * std::sqrt(double(v.cols()))) valid = false;
    }
    if (valid) {
      if (real_ambient) {
        RealMatrix combined(d, d);
        int col = 0;
        for (const auto& piece : pieces) {
          for (int j = 0; j < piece.basis.cols() && col < d; ++j) {
            combined.col(col++) = piece.basis.col(j).real();
            if (piece.complex_type && col < d) combined.col(col++) = piece.basis.col(j).imag();
          }
        }
        valid = col == d && min_singular_value(combined) > kOverlapTol;
      } else {
        ComplexMatrix combined(d, d);
        int col = 0;
        for (const auto& piece : pieces) {
          combined.middleCols(col, piece.basis.cols()) = piece.basis;
          col += int(piece.basis.cols());
        }
        valid = min_singular_value(combined) > kOverlapTol;
      }
    }
    if (valid) return pieces;
  }
  throw_domain(
      "normal form: could not separate clustered eigenvalues up to relative gap " +
      std::to_string(kClusterGapLimit) +
      "; try a larger structural tolerance or rescale the family");
}

// Orthonormal basis in which every (scalar + nilpotent) operator in
// `restricted` is lower triangular: levels of the flag of iterated common
// kernels, the deepest level placed last.
template <class Matrix>
Matrix flag_basis(const std::vector<Matrix>& restricted, int d) {
  std::vector<Matrix> nilpotents;
  double scale = 0.0;
  for (const auto& r : restricted) {
    const auto mu = r.trace() / double(d);
    nilpotents.push_back(r - mu * Matrix::Identity(d, d));
    scale = std::max(scale, double(r.norm()));
  }
  if (scale == 0.0) scale = 1.0;

  std::vector<Matrix> levels;
  Matrix found(d, 0);
  while (found.cols() < d) {
    const int f = int(found.cols());
    const int p = int(nilpotents.size());
    Matrix stack(p * d + f, d);
    for (int k = 0; k < p; ++k) {
      const Matrix& nk = nilpotents[k];
      stack.block(k * d, 0, d, d) = nk - found * (found.adjoint() * nk);
    }
    if (f > 0) stack.bottomRows(f) = scale * found.adjoint();

    Eigen::JacobiSVD<Matrix> svd(stack, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i) {
      if (sv(i) > kFlagRankTol * scale) ++rank;
    }
    int nullity = std::max(1, d - rank);
    nullity = std::min(nullity, d - f);
    Matrix fresh = svd.matrixV().rightCols(nullity);
    // Re-orthogonalize against what we already have.
    fresh -= found * (found.adjoint() * fresh);
    Eigen::HouseholderQR<Matrix> qr(fresh);
    fresh = qr.householderQ() * Matrix::Identity(d, nullity);
    levels.push_back(fresh);
    Matrix grown(d, f + nullity);
    grown << found, fresh;
    found = grown;
  }

  Matrix basis(d, d);
  int col = 0;
  for (auto it = levels.rbegin(); it != levels.rend(); ++it) {
    basis.middleCols(col, it->cols()) = *it;
    col += int(it->cols());
  }
  return basis;
}

inline int dominant_index(const ComplexVector& v) {
  const double top = v.cwiseAbs().maxCoeff();
  for (int i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) >= (1.0 - 1e-8) * top) return i;
  }
  return 0;
}

struct Leaf {
  bool is_b = false;
  ComplexMatrix basis;  // n x d, orthonormal columns (real when !is_b)
  Complex z_eigenvalue;
};

struct Decomposer {
  const std::vector<RealMatrix>& generators;
  const RealMatrix& generic;
  double gap_start = kClusterGapStart;
  std::vector<Leaf> leaves;
  int collisions = 0;

  std::vector<ComplexMatrix> restrict_all(const ComplexMatrix& basis) const {
    std::vector<ComplexMatrix> out;
    out.reserve(generators.size() + 1);
    out.push_back(basis.adjoint() * generic.cast<Complex>() * basis);
    for (const auto& a : generators) {
      out.push_back(basis.adjoint() * a.cast<Complex>() * basis);
    }
    return out;
  }

  void process(const ComplexMatrix& basis, bool is_complex) {
    const auto restricted = restrict_all(basis);
    for (std::size_t idx = 0; idx < restricted.size(); ++idx) {
      const auto pieces = split_generalized_eigenspaces(restricted[idx], !is_complex, gap_start);
      if (pieces.empty()) continue;
      if (idx > 0) ++collisions;
      for (const auto& piece : pieces) {
        ComplexMatrix child = basis * piece.basis;
        if (!is_complex && !piece.complex_type) child = child.real().cast<Complex>();
        process(child, is_complex || piece.complex_type);
      }
      return;
    }
    const int d = int(basis.cols());
    ComplexMatrix flag;
    if (is_complex) {
      std::vector<ComplexMatrix> gens(restricted.begin() + 1, restricted.end());
      flag = flag_basis(gens, d);
    } else {
      std::vector<RealMatrix> gens;
      for (std::size_t k = 1; k < restricted.size(); ++k) gens.push_back(restricted[k].real());
      flag = flag_basis(gens, d).cast<Complex>();
    }
    ComplexMatrix leaf_basis = basis * flag;
    for (int j = 0; j < leaf_basis.cols(); ++j) {
      const ComplexVector col = leaf_basis.col(j);
      const Complex pivot = col(dominant_index(col));
      const Complex phase = std::abs(pivot) > 0 ? std::conj(pivot) / std::abs(pivot) : 1.0;
      leaf_basis.col(j) = col * phase;
      if (!is_complex) leaf_basis.col(j) = leaf_basis.col(j).real().cast<Complex>();
    }
    const Complex z = restricted[0].trace() / double(d);
    leaves.push_back({is_complex, leaf_basis, z});
  }
};

inline RealMatrix generic_element(const std::vector<RealMatrix>& generators, int n,
                                  std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  RealMatrix z = RealMatrix::Zero(n, n);
  for (const auto& a : generators) {
    std::uniform_int_distribution<int> numerator_dist(1, 97);
    const int numerator = numerator_dist(rng);
    std::uniform_int_distribution<int> denominator_dist(1, numerator);
    const double coeff = double(numerator) / double(denominator_dist(rng));
    z += coeff * a;
  }
  return z;
}

inline double family_residual(const MatrixFamily& transformed,
                              const BlockPartition& part) {
  double residual = 0.0;
  for (const auto& a : transformed.generators) {
    residual = std::max(residual, k_relative_deviation(a, part));
  }
  return residual;
}

inline NormalForm normal_form_with_seed(const MatrixFamily& family,
                                        const std::vector<RealMatrix>& working,
                                        const ToleranceConfig& tol,
                                        std::uint64_t seed,
                                        double gap_start = kClusterGapStart) {
  const int n = family.n;
  const RealMatrix z = generic_element(working, n, seed);
  Decomposer decomposer{working, z, gap_start, {}, 0};
  decomposer.process(ComplexMatrix::Identity(n, n), false);

  auto leaves = decomposer.leaves;
  std::stable_sort(leaves.begin(), leaves.end(), [](const Leaf& a, const Leaf& b) {
    if (a.is_b != b.is_b) return !a.is_b;
    if (a.basis.cols() != b.basis.cols()) return a.basis.cols() > b.basis.cols();
    if (a.z_eigenvalue.real() != b.z_eigenvalue.real())
      return a.z_eigenvalue.real() < b.z_eigenvalue.real();
    return a.z_eigenvalue.imag() < b.z_eigenvalue.imag();
  });

  NormalForm nf;
  nf.P = RealMatrix(n, n);
  int col = 0;
  for (const auto& leaf : leaves) {
    const int d = int(leaf.basis.cols());
    if (!leaf.is_b) {
      nf.partition.t_blocks.push_back(d);
      nf.P.middleCols(col, d) = leaf.basis.real();
      col += d;
    } else {
      nf.partition.b_blocks.push_back(d);
      for (int j = 0; j < d; ++j) {
        nf.P.col(col++) = leaf.basis.col(j).real();
        nf.P.col(col++) = leaf.basis.col(j).imag();
      }
    }
  }
  if (col != n) throw_domain("normal form: invariant subspaces do not fill R^n");

  nf.P_inv = nf.P.inverse();
  nf.transformed.n = n;
  nf.transformed.labels = family.labels;
  for (const auto& a : family.generators) {
    nf.transformed.generators.push_back(nf.P_inv * a * nf.P);
  }
  nf.residual = family_residual(nf.transformed, nf.partition);
  nf.condition = condition_number(nf.P);
  nf.certified = nf.residual <= tol.structural_tol * std::max(1.0, nf.condition * nf.condition);
  nf.seed_used = seed;
  nf.collisions = decomposer.collisions;
  return nf;
}

}  // namespace detail

inline constexpr int kNormalFormSeedAttempts = 5;
inline constexpr double kRoundoffResidual = 1e-12;

inline NormalForm compute_normal_form(const MatrixFamily& family,
                                      const ToleranceConfig& tol = {}) {
  validate_family(family);
  const auto commute = commute_report(family, tol);
  if (!commute.commutes) {
    throw_domain("normal form: generators " + std::to_string(commute.worst_pair->first) +
                 " and " + std::to_string(commute.worst_pair->second) +
                 " do not commute");
  }
  // Singular generators are shifted off their spectrum; shifts leave every
  // invariant subspace unchanged.
  std::vector<RealMatrix> working;
  for (const auto& a : family.generators) {
    if (log_abs_det(a) <= std::log(tol.det_tol) + family.n * std::log(std::max(max_norm(a), 1e-300))) {
      const double shift = max_norm(a) + 1.0;
      working.push_back(a - shift * RealMatrix::Identity(family.n, family.n));
    } else {
      working.push_back(a);
    }
  }

  std::optional<NormalForm> best;
  for (int attempt = 0; attempt < kNormalFormSeedAttempts; ++attempt) {
    NormalForm nf = detail::normal_form_with_seed(family, working, tol, tol.seed + attempt);
    const bool clean = nf.collisions == 0;
    if (!best || (nf.collisions < best->collisions) ||
        (nf.collisions == best->collisions && nf.residual < best->residual)) {
      best = std::move(nf);
    }
    if (clean) break;
  }
  // A defective eigenvalue split by roundoff into nearby simple ones leaves a
  // large residual and an ill-conditioned P; widen the starting gap and keep
  // the smallest residual.
  const bool suspicious = best->residual > kRoundoffResidual;
  for (double gap = detail::kClusterGapStart * 10.0;
       suspicious && gap <= detail::kClusterGapLimit * 1.0001; gap *= 10.0) {
    try {
      NormalForm nf = detail::normal_form_with_seed(family, working, tol, best->seed_used, gap);
      if (nf.residual < best->residual) best = std::move(nf);
    } catch (const Error&) {
    }
  }
  return *best;
}

inline double verify_normal_form(const MatrixFamily& family, const NormalForm& nf,
                                 const ToleranceConfig& tol = {}) {
  validate_family(family);
  if (nf.P.rows() != family.n || nf.P.cols() != family.n ||
      nf.partition.dim() != family.n) {
    throw_input("verify_normal_form: dimensions do not match the family");
  }
  if (log_abs_det(nf.P) <= std::log(tol.det_tol) + family.n * std::log(std::max(max_norm(nf.P), 1e-300))) {
    throw_domain("verify_normal_form: P is singular");
  }
  const RealMatrix p_inv = nf.P.inverse();
  MatrixFamily transformed;
  transformed.n = family.n;
  for (const auto& a : family.generators) transformed.generators.push_back(p_inv * a * nf.P);
  return detail::family_residual(transformed, nf.partition);
}

}  // namespace hyperorbit
