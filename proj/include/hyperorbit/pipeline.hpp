#pragma once

#include <unsupported/Eigen/MatrixFunctions>

#include <optional>
#include <string>
#include <vector>

#include "hyperorbit/density.hpp"
#include "hyperorbit/matrix_core.hpp"
#include "hyperorbit/normal_form.hpp"
#include "hyperorbit/semigroup.hpp"

namespace hyperorbit {

// ||A_k^2 - exp(B_ref)||_max for a user-supplied expected logarithm.
struct ReferenceLogCheck {
  std::size_t generator = 0;
  double mismatch = 0.0;
  int row = 0;  // 0-based position of the largest deviation
  int col = 0;
};

struct Diagnostics {
  double commute_ratio = 0.0;
  double normal_form_residual = 0.0;
  double normal_form_condition = 1.0;
  bool normal_form_certified = true;
  std::uint64_t normal_form_seed = 0;
  std::vector<double> exp_residuals;
  std::vector<ReferenceLogCheck> reference_logs;
  std::vector<std::string> warnings;
};

struct AnalysisReport {
  std::string input_digest;
  int n = 0;
  std::size_t generator_count = 0;
  std::vector<std::size_t> invertible_generators;
  std::optional<NormalForm> normal_form;
  std::optional<IndexReport> index;
  std::optional<G2Analysis> g2;
  DensityVerdict verdict;
  Diagnostics diagnostics;
};

struct AnalyzeOptions {
  ToleranceConfig tol;
  // Expected logs B_k (original coordinates) of A_k^2; entries may be empty.
  std::vector<std::optional<RealMatrix>> reference_logs;
  bool attach_coverage = true;
};

inline ReferenceLogCheck reference_log_check(const RealMatrix& a, const RealMatrix& b_ref,
                                             std::size_t k) {
  if (b_ref.rows() != a.rows() || b_ref.cols() != a.cols()) {
    throw_input("reference log " + std::to_string(k) + " has the wrong dimension");
  }
  const RealMatrix diff = a * a - RealMatrix(b_ref.exp());
  ReferenceLogCheck check;
  check.generator = k;
  Eigen::Index i = 0, j = 0;
  check.mismatch = diff.cwiseAbs().maxCoeff(&i, &j);
  check.row = int(i);
  check.col = int(j);
  return check;
}

// Coverage defaults for an Unknown verdict: grids only for n <= 3 and about
// a million enumerated points.
inline std::optional<CoverageOptions> default_coverage(const AdditiveSemigroup& h) {
  if (h.n > 3 || h.generator_count() == 0) return std::nullopt;
  CoverageOptions opts;
  const double per_axis = std::pow(1e6, 1.0 / double(h.generator_count()));
  opts.coeff_bound = std::max(1, int(per_axis) - 1);
  opts.cells_per_axis = h.n == 3 ? 20 : 50;
  return opts;
}

inline AnalysisReport analyze(const MatrixFamily& family, const AnalyzeOptions& options = {}) {
  validate_family(family);
  const ToleranceConfig& tol = options.tol;
  AnalysisReport report;
  report.n = family.n;
  report.generator_count = family.size();

  const auto commute = commute_report(family, tol);
  report.diagnostics.commute_ratio = commute.worst_ratio;
  if (!commute.commutes) {
    throw_domain("generators " + std::to_string(commute.worst_pair->first) + " and " +
                 std::to_string(commute.worst_pair->second) +
                 " do not commute (relative commutator " +
                 std::to_string(commute.worst_ratio) + ")");
  }

  for (std::size_t k = 0; k < options.reference_logs.size() && k < family.size(); ++k) {
    if (!options.reference_logs[k]) continue;
    const auto check = reference_log_check(family.generators[k], *options.reference_logs[k], k);
    if (check.mismatch > 1e-10 * std::max(1.0, max_norm(RealMatrix(family.generators[k] *
                                                                    family.generators[k])))) {
      report.diagnostics.warnings.push_back(
          "generator " + std::to_string(k) + ": A^2 differs from exp(reference log) by " +
          std::to_string(check.mismatch) + " at entry (" + std::to_string(check.row + 1) + "," +
          std::to_string(check.col + 1) + ")");
    }
    report.diagnostics.reference_logs.push_back(check);
  }

  const InvertiblePart inv = invertible_part(family, tol);
  report.invertible_generators = inv.kept;
  for (const auto& w : inv.warnings) report.diagnostics.warnings.push_back(w);
  if (inv.family.empty()) {
    AdditiveSemigroup empty;
    empty.n = family.n;
    report.verdict = density_verdict(empty, IndexReport{}, BlockPartition{}, tol);
    return report;
  }

  NormalForm nf = compute_normal_form(inv.family, tol);
  report.diagnostics.normal_form_residual = nf.residual;
  report.diagnostics.normal_form_condition = nf.condition;
  report.diagnostics.normal_form_certified = nf.certified;
  report.diagnostics.normal_form_seed = nf.seed_used;
  if (!nf.certified) {
    report.diagnostics.warnings.push_back("normal form residual " + std::to_string(nf.residual) +
                                          " exceeds the certification bound");
  }

  IndexReport index = compute_index(nf.transformed, nf.partition, tol);
  G2Analysis g2 = compute_g2_v0(inv.family, nf, tol);
  for (auto& k : g2.generator_indices) k = inv.kept[k];
  report.diagnostics.exp_residuals = g2.exp_residuals;

  std::optional<CoverageOptions> coverage;
  if (options.attach_coverage) coverage = default_coverage(g2.semigroup);
  report.verdict = density_verdict(g2.semigroup, index, nf.partition, tol, coverage);

  report.normal_form = std::move(nf);
  report.index = std::move(index);
  report.g2 = std::move(g2);
  return report;
}

}  // namespace hyperorbit
