#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "hyperorbit/coverage.hpp"
#include "hyperorbit/integer_relation.hpp"
#include "hyperorbit/matrix_core.hpp"
#include "hyperorbit/semigroup.hpp"

namespace hyperorbit {

enum class DensityStatus { CertifiedDense, CertifiedNotDense, Unknown };

enum class ObstructionKind {
  CountBound,
  RankDeficient,
  LatticeConfined,
  EmptyInvertiblePart,
  IndexDeficit,
};

enum class Tribool { False, True, Unknown };

inline const char* to_string(DensityStatus s) {
  switch (s) {
    case DensityStatus::CertifiedDense: return "CertifiedDense";
    case DensityStatus::CertifiedNotDense: return "CertifiedNotDense";
    case DensityStatus::Unknown: return "Unknown";
  }
  return "?";
}

inline const char* to_string(ObstructionKind k) {
  switch (k) {
    case ObstructionKind::CountBound: return "CountBound";
    case ObstructionKind::RankDeficient: return "RankDeficient";
    case ObstructionKind::LatticeConfined: return "LatticeConfined";
    case ObstructionKind::EmptyInvertiblePart: return "EmptyInvertiblePart";
    case ObstructionKind::IndexDeficit: return "IndexDeficit";
  }
  return "?";
}

inline const char* to_string(Tribool t) {
  switch (t) {
    case Tribool::False: return "false";
    case Tribool::True: return "true";
    case Tribool::Unknown: return "unknown";
  }
  return "?";
}

struct Obstruction {
  ObstructionKind kind = ObstructionKind::CountBound;
  std::string detail;
  // CountBound
  int p = 0;
  int s = 0;
  int n = 0;
  // RankDeficient
  int rank = 0;
  // LatticeConfined: covector . g lies in period * Z for every generator g,
  // with covector . g_j = period * integer_values[j].
  RealVector covector;
  double period = 1.0;
  std::vector<std::int64_t> integer_values;
};

// In the coordinates x = S^{-1} y, H contains N^n + N*alpha + Z e_i for the
// lattice columns, with every alpha_i < 0 and no integer relation among
// (1, alpha_1, ..., alpha_n) found up to the requested height.
struct KroneckerCertificate {
  RealMatrix S;
  RealVector alpha;
  std::vector<int> columns;      // indices into nat ++ lattice generators
  std::vector<bool> negated;     // lattice columns used with a flipped sign
  int alpha_generator = -1;      // nat generator supplying alpha
  std::int64_t requested_height = 0;
  double certified_height = 0.0;
};

struct CoverageOptions {
  int coeff_bound = 20;
  double box_halfwidth = 0.0;  // 0: derive from the generators
  int cells_per_axis = 20;
  std::int64_t budget = 100'000'000;
  bool collect_points = false;
};

struct CoverageResult {
  CoverageStats stats;
  std::int64_t enumerated = 0;
  std::vector<RealVector> points;  // in-box points, when collected
};

struct DensityVerdict {
  DensityStatus status = DensityStatus::Unknown;           // the hypercyclicity question
  DensityStatus additive_status = DensityStatus::Unknown;  // density of H itself
  std::optional<Obstruction> obstruction;
  std::optional<KroneckerCertificate> certificate;
  std::optional<CoverageStats> coverage;
  Tribool locally_hypercyclic = Tribool::Unknown;
  Tribool hypercyclic = Tribool::Unknown;
};

inline std::optional<Obstruction> count_bound_check(int p, int s, int n) {
  if (p + s > n) return std::nullopt;
  Obstruction ob;
  ob.kind = ObstructionKind::CountBound;
  ob.p = p;
  ob.s = s;
  ob.n = n;
  ob.detail = "p + s = " + std::to_string(p + s) + " <= n = " + std::to_string(n) +
              ": the generated additive group is a nowhere dense lattice image";
  return ob;
}

namespace detail {

inline RealMatrix generator_matrix(const AdditiveSemigroup& h) {
  RealMatrix m(h.n, Eigen::Index(h.generator_count()));
  int col = 0;
  for (const auto& u : h.nat_generators) m.col(col++) = u;
  for (const auto& w : h.lattice_generators) m.col(col++) = w;
  return m;
}

inline void validate_semigroup(const AdditiveSemigroup& h) {
  if (h.n < 1 || h.n > kMaxDimension) throw_input("additive semigroup: n must be in [1, 32]");
  for (const auto& v : h.nat_generators) {
    if (v.size() != h.n || !v.allFinite()) throw_input("additive semigroup: bad nat generator");
  }
  for (const auto& v : h.lattice_generators) {
    if (v.size() != h.n || !v.allFinite()) throw_input("additive semigroup: bad lattice generator");
  }
}

}  // namespace detail

inline std::optional<Obstruction> rank_and_lattice_check(const AdditiveSemigroup& h,
                                                         const ToleranceConfig& tol = {}) {
  detail::validate_semigroup(h);
  const int n = h.n;
  const int count = int(h.generator_count());
  Obstruction ob;
  if (count == 0) {
    ob.kind = ObstructionKind::RankDeficient;
    ob.rank = 0;
    ob.detail = "no generators";
    return ob;
  }
  const RealMatrix m = detail::generator_matrix(h);
  Eigen::JacobiSVD<RealMatrix> svd(m, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol.structural_tol * sv(0)) ++rank;
  }
  if (sv(0) == 0.0) rank = 0;
  if (rank < n) {
    ob.kind = ObstructionKind::RankDeficient;
    ob.rank = rank;
    ob.detail = "generators span a " + std::to_string(rank) + "-dimensional subspace";
    return ob;
  }

  // phi . g in Z for all generators  <=>  (phi M) is an integer vector in the
  // row space of M  <=>  z in Z^count \ {0} with K^T z = 0, K = ker M.
  Eigen::VectorXd z;
  if (count == n) {
    z = Eigen::VectorXd::Unit(count, 0);
  } else {
    const RealMatrix kernel = svd.matrixV().rightCols(count - n);
    std::vector<std::vector<double>> rows(kernel.cols(), std::vector<double>(count));
    for (int f = 0; f < kernel.cols(); ++f) {
      for (int j = 0; j < count; ++j) rows[f][j] = kernel(j, f);
    }
    RelationOptions opts;
    opts.precision = tol.relation_precision;
    const auto search = simultaneous_integer_relation<double>(rows, tol.relation_height, opts);
    if (!search.found()) return std::nullopt;
    z = Eigen::VectorXd(count);
    for (int j = 0; j < count; ++j) z(j) = double(search.relation->coefficients[j]);
  }
  const RealVector phi = m.transpose().colPivHouseholderQr().solve(z);
  ob.kind = ObstructionKind::LatticeConfined;
  ob.covector = phi;
  ob.period = 1.0;
  for (int j = 0; j < count; ++j) ob.integer_values.push_back(std::llround(z(j)));
  ob.detail = "every generator has integer pairing with a fixed covector";
  return ob;
}

inline std::optional<KroneckerCertificate> kronecker_certify(const AdditiveSemigroup& h,
                                                             const ToleranceConfig& tol = {}) {
  detail::validate_semigroup(h);
  const int n = h.n;
  const int p = int(h.nat_generators.size());
  const int count = int(h.generator_count());
  if (p == 0 || count < n + 1) return std::nullopt;

  const RealMatrix m = detail::generator_matrix(h);
  constexpr std::int64_t kMaxSubsets = 200'000;
  std::int64_t tried = 0;

  std::vector<int> pick(n);
  for (int i = 0; i < n; ++i) pick[i] = i;
  while (true) {
    if (++tried > kMaxSubsets) return std::nullopt;
    std::vector<bool> used(count, false);
    for (int i : pick) used[i] = true;

    RealMatrix s(n, n);
    for (int i = 0; i < n; ++i) s.col(i) = m.col(pick[i]);
    Eigen::JacobiSVD<RealMatrix> svd(s);
    const auto& sv = svd.singularValues();
    const bool invertible = sv(0) > 0.0 && sv(n - 1) > 1e-10 * sv(0);

    for (int j = 0; invertible && j < p; ++j) {
      if (used[j]) continue;
      const auto lu = s.fullPivLu();
      RealVector alpha = lu.solve(m.col(j));
      std::vector<bool> negated(n, false);
      bool negative = true;
      for (int i = 0; i < n; ++i) {
        if (pick[i] >= p && alpha(i) > 0.0) {
          alpha(i) = -alpha(i);
          negated[i] = true;
        }
        if (!(alpha(i) < -tol.structural_tol)) negative = false;
      }
      if (!negative) continue;
      std::vector<double> values{1.0};
      for (int i = 0; i < n; ++i) values.push_back(alpha(i));
      RelationOptions opts;
      opts.precision = tol.relation_precision;
      const auto search = integer_relation(values, tol.relation_height, opts);
      if (search.found()) continue;

      KroneckerCertificate cert;
      cert.S = s;
      for (int i = 0; i < n; ++i) {
        if (negated[i]) cert.S.col(i) = -cert.S.col(i);
      }
      cert.alpha = alpha;
      cert.columns = pick;
      cert.negated = negated;
      cert.alpha_generator = j;
      cert.requested_height = tol.relation_height;
      cert.certified_height = search.certified_height;
      return cert;
    }

    int i = n - 1;
    while (i >= 0 && pick[i] == count - n + i) --i;
    if (i < 0) break;
    ++pick[i];
    for (int k = i + 1; k < n; ++k) pick[k] = pick[k - 1] + 1;
  }
  return std::nullopt;
}

namespace detail {

// Enumerates sum a_k u_k + sum b_l w_l with a_k in [0, B], b_l in [-B, B],
// cutting partial sums that can no longer come back into the box.
class SemigroupEnumerator {
 public:
  SemigroupEnumerator(const AdditiveSemigroup& h, int bound, double box)
      : n_(h.n), box_(box) {
    for (const auto& u : h.nat_generators) {
      gens_.push_back(u);
      lo_.push_back(0);
      hi_.push_back(bound);
    }
    for (const auto& w : h.lattice_generators) {
      gens_.push_back(w);
      lo_.push_back(-bound);
      hi_.push_back(bound);
    }
    const int g = int(gens_.size());
    lo_rem_.assign(g + 1, RealVector::Zero(n_));
    hi_rem_.assign(g + 1, RealVector::Zero(n_));
    for (int k = g - 1; k >= 0; --k) {
      lo_rem_[k] = lo_rem_[k + 1];
      hi_rem_[k] = hi_rem_[k + 1];
      for (int i = 0; i < n_; ++i) {
        const double a = lo_[k] * gens_[k](i);
        const double b = hi_[k] * gens_[k](i);
        lo_rem_[k](i) += std::min(a, b);
        hi_rem_[k](i) += std::max(a, b);
      }
    }
  }

  int generator_count() const { return int(gens_.size()); }
  int lo(int k) const { return lo_[k]; }
  int hi(int k) const { return hi_[k]; }

  double combinations() const {
    double total = 1.0;
    for (std::size_t k = 0; k < gens_.size(); ++k) total *= double(hi_[k] - lo_[k] + 1);
    return total;
  }

  // Visits every surviving full assignment with the first coefficient
  // restricted to [first_lo, first_hi]. Returns false once `stop` is true.
  bool run(int first_lo, int first_hi, const std::function<bool(const RealVector&)>& visit) const {
    RealVector x = RealVector::Zero(n_);
    if (gens_.empty()) return visit(x);
    return descend(0, x, first_lo, first_hi, visit);
  }

 private:
  // 0: keep, 1: skip this value, 2: skip this and every larger value.
  int prune(int k, const RealVector& y) const {
    int verdict = 0;
    for (int i = 0; i < n_; ++i) {
      if (y(i) + hi_rem_[k + 1](i) < -box_) {
        if (gens_[k](i) <= 0.0) return 2;
        verdict = 1;
      } else if (y(i) + lo_rem_[k + 1](i) > box_) {
        if (gens_[k](i) >= 0.0) return 2;
        verdict = 1;
      }
    }
    return verdict;
  }

  bool descend(int k, const RealVector& x, int a_lo, int a_hi,
               const std::function<bool(const RealVector&)>& visit) const {
    const int g = int(gens_.size());
    for (int a = a_lo; a <= a_hi; ++a) {
      const RealVector y = x + double(a) * gens_[k];
      const int cut = prune(k, y);
      if (cut == 2) break;
      if (cut == 1) continue;
      if (k + 1 == g) {
        if (!visit(y)) return false;
      } else if (!descend(k + 1, y, lo_[k + 1], hi_[k + 1], visit)) {
        return false;
      }
    }
    return true;
  }

  int n_;
  double box_;
  std::vector<RealVector> gens_;
  std::vector<int> lo_;
  std::vector<int> hi_;
  std::vector<RealVector> lo_rem_;
  std::vector<RealVector> hi_rem_;
};

}  // namespace detail

inline CoverageResult empirical_coverage(const AdditiveSemigroup& h, const CoverageOptions& options) {
  detail::validate_semigroup(h);
  if (options.coeff_bound < 0) throw_input("empirical_coverage: coefficient bound must be >= 0");
  double box = options.box_halfwidth;
  if (!(box > 0.0)) {
    double scale = 1.0;
    for (const auto& u : h.nat_generators) scale = std::max(scale, max_norm(u));
    for (const auto& w : h.lattice_generators) scale = std::max(scale, max_norm(w));
    box = 5.0 * scale;
  }
  const detail::SemigroupEnumerator enumerator(h, options.coeff_bound, box);

  CoverageGrid grid(h.n, options.cells_per_axis, box);
  CoverageResult result;
  const bool fits = enumerator.combinations() <= double(options.budget);
  const int workers = fits && enumerator.generator_count() > 0
                          ? std::min(worker_count(), enumerator.hi(0) - enumerator.lo(0) + 1)
                          : 1;

  if (workers <= 1) {
    bool partial = false;
    const auto visit = [&](const RealVector& y) {
      if (++result.enumerated > options.budget) {
        partial = true;
        return false;
      }
      if (grid.add(y) && options.collect_points) result.points.push_back(y);
      return true;
    };
    const int first_lo = enumerator.generator_count() ? enumerator.lo(0) : 0;
    const int first_hi = enumerator.generator_count() ? enumerator.hi(0) : 0;
    enumerator.run(first_lo, first_hi, visit);
    if (partial) result.enumerated = options.budget;
    result.stats = grid.stats();
    result.stats.partial = partial;
    return result;
  }

  // Split the first coefficient range; merge in chunk order.
  const int lo = enumerator.lo(0);
  const int span = enumerator.hi(0) - lo + 1;
  std::vector<CoverageGrid> grids(workers, CoverageGrid(h.n, options.cells_per_axis, box));
  std::vector<std::vector<RealVector>> points(workers);
  std::vector<std::int64_t> counts(workers, 0);
  std::vector<std::thread> threads;
  for (int w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      const int a_lo = lo + int(std::int64_t(span) * w / workers);
      const int a_hi = lo + int(std::int64_t(span) * (w + 1) / workers) - 1;
      enumerator.run(a_lo, a_hi, [&](const RealVector& y) {
        ++counts[w];
        if (grids[w].add(y) && options.collect_points) points[w].push_back(y);
        return true;
      });
    });
  }
  for (auto& t : threads) t.join();
  for (int w = 0; w < workers; ++w) {
    grid.merge(grids[w]);
    result.enumerated += counts[w];
    for (auto& p : points[w]) result.points.push_back(std::move(p));
  }
  result.stats = grid.stats();
  return result;
}

// Additive-level verdict for H alone.
inline DensityVerdict additive_density(const AdditiveSemigroup& h, const ToleranceConfig& tol,
                                       const std::optional<CoverageOptions>& coverage = std::nullopt) {
  detail::validate_semigroup(h);
  DensityVerdict verdict;
  const int p = int(h.nat_generators.size());
  const int s = int(h.lattice_generators.size());

  auto not_dense = [&](Obstruction ob) {
    verdict.status = DensityStatus::CertifiedNotDense;
    verdict.additive_status = DensityStatus::CertifiedNotDense;
    verdict.obstruction = std::move(ob);
    verdict.locally_hypercyclic = Tribool::False;
    verdict.hypercyclic = Tribool::False;
    return verdict;
  };

  if (auto ob = count_bound_check(p, s, h.n)) return not_dense(*ob);
  if (auto ob = rank_and_lattice_check(h, tol)) return not_dense(*ob);
  if (auto cert = kronecker_certify(h, tol)) {
    verdict.status = DensityStatus::CertifiedDense;
    verdict.additive_status = DensityStatus::CertifiedDense;
    verdict.certificate = std::move(cert);
    verdict.locally_hypercyclic = Tribool::True;
    verdict.hypercyclic = Tribool::True;
    return verdict;
  }
  verdict.status = DensityStatus::Unknown;
  verdict.additive_status = DensityStatus::Unknown;
  if (coverage) {
    try {
      verdict.coverage = empirical_coverage(h, *coverage).stats;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Budget) throw;
    }
  }
  return verdict;
}

// Hypercyclicity verdict: H = g^2_{v0} must be dense and ind(G) = r.
inline DensityVerdict density_verdict(const AdditiveSemigroup& h, const IndexReport& index,
                                      const BlockPartition& part, const ToleranceConfig& tol,
                                      const std::optional<CoverageOptions>& coverage = std::nullopt) {
  if (h.nat_generators.empty()) {
    DensityVerdict verdict;
    Obstruction ob;
    ob.kind = ObstructionKind::EmptyInvertiblePart;
    ob.detail = "G* has no invertible generators";
    verdict.status = DensityStatus::CertifiedNotDense;
    verdict.additive_status = DensityStatus::CertifiedNotDense;
    verdict.obstruction = ob;
    verdict.locally_hypercyclic = Tribool::False;
    verdict.hypercyclic = Tribool::False;
    return verdict;
  }
  DensityVerdict verdict = additive_density(h, tol, coverage);
  if (verdict.additive_status == DensityStatus::CertifiedNotDense) return verdict;
  if (index.index < part.r()) {
    Obstruction ob;
    ob.kind = ObstructionKind::IndexDeficit;
    ob.detail = "ind(G) = " + std::to_string(index.index) + " < r = " + std::to_string(part.r());
    verdict.status = DensityStatus::CertifiedNotDense;
    verdict.obstruction = ob;
    verdict.hypercyclic = Tribool::False;
  }
  return verdict;
}

}  // namespace hyperorbit
