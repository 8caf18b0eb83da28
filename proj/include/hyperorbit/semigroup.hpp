#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "hyperorbit/exp_log.hpp"
#include "hyperorbit/matrix_core.hpp"
#include "hyperorbit/normal_form.hpp"

namespace hyperorbit {

struct CanonicalVectors {
  RealVector u0;
  RealVector v0;
  std::vector<RealVector> f;  // f^(l) = e_{t_l}
  std::vector<int> t;         // t_l, 1-based as in the usual notation
};

// H = sum N*nat + sum Z*lattice. Lattice generators already carry the 2*pi.
struct AdditiveSemigroup {
  int n = 0;
  std::vector<RealVector> nat_generators;
  std::vector<RealVector> lattice_generators;

  std::size_t generator_count() const {
    return nat_generators.size() + lattice_generators.size();
  }
};

struct IndexReport {
  int r = 0;
  std::vector<std::vector<int>> sign_vectors;  // entries +1 / -1, one per generator
  std::vector<std::vector<int>> achievable;    // the generated subgroup of {+1,-1}^r
  int index = 0;
};

inline CanonicalVectors canonical_vectors(const BlockPartition& part, const RealMatrix& p,
                                          const ToleranceConfig& tol = {}) {
  part.validate();
  const int n = part.dim();
  if (p.rows() != n || p.cols() != n) {
    throw_input("canonical_vectors: P has the wrong dimension");
  }
  if (log_abs_det(p) <= std::log(tol.det_tol) + n * std::log(std::max(max_norm(p), 1e-300))) {
    throw_domain("canonical_vectors: P is singular");
  }
  CanonicalVectors out;
  out.u0 = RealVector::Zero(n);
  for (int k = 0; k < part.r(); ++k) out.u0(part.t_offset(k)) = 1.0;
  for (int l = 0; l < part.s(); ++l) {
    const int offset = part.b_offset(l);
    out.u0(offset) = 1.0;
    out.t.push_back(offset + 2);
    RealVector f = RealVector::Zero(n);
    f(offset + 1) = 1.0;
    out.f.push_back(f);
  }
  out.v0 = p * out.u0;
  return out;
}

struct InvertiblePart {
  MatrixFamily family;
  std::vector<std::size_t> kept;
  std::vector<std::size_t> dropped;
  std::vector<std::string> warnings;
};

inline bool is_invertible(const RealMatrix& a, const ToleranceConfig& tol) {
  const double scale = max_norm(a);
  if (scale == 0.0) return false;
  return log_abs_det(a) > std::log(tol.det_tol) + double(a.rows()) * std::log(scale);
}

// Products involving a singular generator are singular, so G* is generated by
// the invertible generators.
inline InvertiblePart invertible_part(const MatrixFamily& family,
                                      const ToleranceConfig& tol = {}) {
  InvertiblePart out;
  out.family.n = family.n;
  for (std::size_t k = 0; k < family.size(); ++k) {
    if (is_invertible(family.generators[k], tol)) {
      out.kept.push_back(k);
      out.family.generators.push_back(family.generators[k]);
      if (k < family.labels.size()) out.family.labels.push_back(family.labels[k]);
    } else {
      out.dropped.push_back(k);
      out.warnings.push_back("generator " + std::to_string(k) +
                             " is singular and was dropped from G*");
    }
  }
  if (out.family.empty()) {
    out.warnings.push_back("G* = {I}: no invertible generators, G is not hypercyclic");
  }
  return out;
}

namespace detail {

inline std::vector<int> unpack_signs(std::uint64_t mask, int r) {
  std::vector<int> signs(r);
  for (int k = 0; k < r; ++k) signs[k] = (mask >> k) & 1u ? -1 : 1;
  return signs;
}

}  // namespace detail

// Sign patterns of the T-block eigenvalues; a sub-semigroup of the finite
// group {+1,-1}^r is a subgroup, so closing under products yields every
// pattern that some element of G* realizes.
inline IndexReport compute_index(const MatrixFamily& transformed,
                                 const BlockPartition& part,
                                 const ToleranceConfig& tol = {}) {
  part.validate();
  if (part.r() > 62) throw_input("compute_index: too many T-blocks");
  IndexReport report;
  report.r = part.r();

  std::set<std::uint64_t> generators;
  for (std::size_t g = 0; g < transformed.size(); ++g) {
    const RealMatrix& a = transformed.generators[g];
    const double scale = std::max(max_norm(a), 1e-300);
    std::uint64_t mask = 0;
    std::vector<int> signs;
    for (int k = 0; k < part.r(); ++k) {
      const int o = part.t_offset(k);
      const double mu = a(o, o);
      if (std::abs(mu) <= tol.det_tol * scale) {
        throw_domain("compute_index: generator " + std::to_string(g) +
                     " has a zero eigenvalue in T-block " + std::to_string(k) +
                     "; filter with invertible_part first");
      }
      signs.push_back(mu < 0 ? -1 : 1);
      if (mu < 0) mask |= std::uint64_t{1} << k;
    }
    report.sign_vectors.push_back(signs);
    generators.insert(mask);
  }

  std::set<std::uint64_t> closure(generators.begin(), generators.end());
  bool grew = !closure.empty();
  while (grew) {
    grew = false;
    const std::vector<std::uint64_t> current(closure.begin(), closure.end());
    for (auto a : current) {
      for (auto g : generators) {
        if (closure.insert(a ^ g).second) grew = true;
      }
    }
  }
  for (auto mask : closure) report.achievable.push_back(detail::unpack_signs(mask, report.r));
  for (int k = 0; k < report.r; ++k) {
    if (closure.count(std::uint64_t{1} << k)) ++report.index;
  }
  return report;
}

struct G2Analysis {
  AdditiveSemigroup semigroup;
  CanonicalVectors canonical;
  std::vector<std::size_t> generator_indices;  // which family generators contributed
  std::vector<RealMatrix> logs;                // B_k in original coordinates, A_k^2 = exp(B_k)
  std::vector<double> exp_residuals;           // ||exp(B~_k) - A~_k^2|| / ||A~_k^2||
};

// Logs of the squared invertible generators, evaluated in normal-form
// coordinates and mapped back: B_k = P B~_k P^{-1}, B_k v0 = P B~_k u0.
inline G2Analysis compute_g2_v0(const MatrixFamily& family, const NormalForm& nf,
                                const ToleranceConfig& tol = {}) {
  validate_family(family);
  G2Analysis out;
  out.canonical = canonical_vectors(nf.partition, nf.P, tol);
  out.semigroup.n = family.n;
  const double residual_limit = std::max(1e-6, 1e3 * nf.residual);

  for (std::size_t k = 0; k < family.size(); ++k) {
    const RealMatrix& a = family.generators[k];
    if (!is_invertible(a, tol)) continue;
    const RealMatrix a_tilde = nf.P_inv * a * nf.P;
    const RealMatrix square = a_tilde * a_tilde;
    ToleranceConfig loose = tol;
    loose.structural_tol = std::max(tol.structural_tol, residual_limit);
    KLogResult log;
    try {
      log = principal_log_K(square, nf.partition, loose);
    } catch (const Error& e) {
      throw_domain("compute_g2_v0: square of generator " + std::to_string(k) +
                   " is not in K+ after conjugation (normal-form residual " +
                   std::to_string(nf.residual) + "): " + e.what());
    }
    const double residual =
        max_norm(RealMatrix(exp_K(log.B, nf.partition, loose) - square)) /
        std::max(max_norm(square), 1e-300);
    if (residual > residual_limit) {
      throw_domain("compute_g2_v0: exp(B) misses A^2 for generator " + std::to_string(k) +
                   " (relative residual " + std::to_string(residual) + ")");
    }
    out.generator_indices.push_back(k);
    out.logs.push_back(nf.P * log.B * nf.P_inv);
    out.exp_residuals.push_back(residual);
    out.semigroup.nat_generators.push_back(nf.P * (log.B * out.canonical.u0));
  }
  for (const auto& f : out.canonical.f) {
    out.semigroup.lattice_generators.push_back(2.0 * std::numbers::pi * (nf.P * f));
  }
  return out;
}

}  // namespace hyperorbit
