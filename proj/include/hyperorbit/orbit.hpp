#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "hyperorbit/coverage.hpp"
#include "hyperorbit/matrix_core.hpp"
#include "hyperorbit/normal_form.hpp"

namespace hyperorbit {

struct OrbitSample {
  int n = 0;
  int max_exponent = 0;
  double box_halfwidth = 0.0;
  std::vector<RealVector> points;  // distinct in-box points, by exponent tuple
  std::int64_t words_tried = 0;
  std::int64_t pruned = 0;           // subtrees cut by the growth bound
  std::int64_t overflow_pruned = 0;  // non-finite vectors discarded
};

struct OrbitOptions {
  bool include_identity = true;
};

namespace detail {

inline std::vector<std::int64_t> rounded_key(const RealVector& x, double quantum) {
  std::vector<std::int64_t> key(x.size());
  for (int i = 0; i < x.size(); ++i) key[i] = std::llround(x(i) / quantum);
  return key;
}

// DFS over exponent tuples. In normal-form coordinates the leading
// coordinate (pair, for B-blocks) of every block is scaled exactly by the
// block eigenvalue modulus, which gives a lower bound for all descendants.
class OrbitWalker {
 public:
  OrbitWalker(const MatrixFamily& family, const NormalForm& nf, int max_exponent, double box,
              bool include_identity)
      : family_(family), nf_(nf), max_exp_(max_exponent), box_(box),
        include_identity_(include_identity) {
    const int p = int(family.size());
    const auto& part = nf.partition;
    for (int k = 0; k < part.r(); ++k) leads_.push_back({part.t_offset(k), false});
    for (int l = 0; l < part.s(); ++l) leads_.push_back({part.b_offset(l), true});
    rho_.assign(p, std::vector<double>(leads_.size(), 0.0));
    for (int j = 0; j < p; ++j) {
      const RealMatrix& t = nf.transformed.generators[j];
      for (std::size_t b = 0; b < leads_.size(); ++b) {
        const int o = leads_[b].offset;
        rho_[j][b] = leads_[b].pair ? std::hypot(t(o, o), t(o, o + 1)) : std::abs(t(o, o));
      }
    }
    // tail_[k][b] = prod_{j >= k} min(1, rho_{j,b})^max_exp
    tail_.assign(p + 1, std::vector<double>(leads_.size(), 1.0));
    for (int k = p - 1; k >= 0; --k) {
      for (std::size_t b = 0; b < leads_.size(); ++b) {
        tail_[k][b] = tail_[k + 1][b] * std::pow(std::min(1.0, rho_[k][b]), double(max_exp_));
      }
    }
    double inv_norm = 0.0;
    for (int i = 0; i < nf.P_inv.rows(); ++i) {
      inv_norm = std::max(inv_norm, nf.P_inv.row(i).cwiseAbs().sum());
    }
    limit_ = 1e3 * inv_norm * box_;
  }

  void run(int first_lo, int first_hi, OrbitSample& out) const {
    const RealVector& v0 = v0_;
    std::vector<int> exps(family_.size(), 0);
    if (family_.empty()) {
      visit(v0, exps, out);
      return;
    }
    RealVector x = v0;
    for (int a = 0; a < first_lo; ++a) x = family_.generators[0] * x;
    descend(0, x, first_lo, first_hi, exps, out);
  }

  void set_v0(const RealVector& v0) { v0_ = v0; }

 private:
  struct Lead {
    int offset;
    bool pair;
  };

  // 0: keep, 1: skip this exponent, 2: skip this and every larger one.
  // Descendants below level k keep each block lead at least
  // lead * tail_[k + 1]; once that exceeds the limit they are all outside.
  int escape(int k, const RealVector& x) const {
    const RealVector y = nf_.P_inv * x;
    int verdict = 0;
    for (std::size_t b = 0; b < leads_.size(); ++b) {
      const int o = leads_[b].offset;
      const double lead = leads_[b].pair ? std::hypot(y(o), y(o + 1)) : std::abs(y(o));
      if (lead * tail_[k + 1][b] > limit_) {
        if (rho_[k][b] >= 1.0) return 2;
        verdict = 1;
      }
    }
    return verdict;
  }

  void visit(const RealVector& x, const std::vector<int>& exps, OrbitSample& out) const {
    ++out.words_tried;
    if (!include_identity_ &&
        std::all_of(exps.begin(), exps.end(), [](int e) { return e == 0; })) {
      return;
    }
    bool inside = true;
    for (int i = 0; i < x.size(); ++i) {
      if (!(std::abs(x(i)) <= box_)) inside = false;
    }
    if (inside) out.points.push_back(x);
  }

  void descend(int k, RealVector x, int a_lo, int a_hi, std::vector<int>& exps,
               OrbitSample& out) const {
    const int p = int(family_.size());
    for (int a = a_lo; a <= a_hi; ++a) {
      if (a > a_lo) x = family_.generators[k] * x;
      exps[k] = a;
      if (!x.allFinite()) {
        ++out.overflow_pruned;
        break;
      }
      if (const int cut = escape(k, x)) {
        ++out.pruned;
        if (cut == 2) break;
        continue;
      }
      if (k + 1 == p) {
        visit(x, exps, out);
      } else {
        descend(k + 1, x, 0, max_exp_, exps, out);
      }
    }
    exps[k] = 0;
  }

  const MatrixFamily& family_;
  const NormalForm& nf_;
  int max_exp_;
  double box_;
  bool include_identity_;
  RealVector v0_;
  std::vector<Lead> leads_;
  std::vector<std::vector<double>> rho_;
  std::vector<std::vector<double>> tail_;
  double limit_ = 0.0;
};

}  // namespace detail

inline OrbitSample enumerate_orbit(const MatrixFamily& family, const RealVector& v0,
                                   int max_exponent, double box_halfwidth,
                                   const OrbitOptions& options = {},
                                   const ToleranceConfig& tol = {}) {
  validate_family(family);
  if (v0.size() != family.n || !v0.allFinite()) throw_input("enumerate_orbit: bad v0");
  if (max_exponent < 0) throw_input("enumerate_orbit: max exponent must be >= 0");
  if (!(box_halfwidth > 0.0)) throw_input("enumerate_orbit: box half-width must be > 0");
  if (family.empty()) throw_input("enumerate_orbit: empty family");

  const NormalForm nf = compute_normal_form(family, tol);
  detail::OrbitWalker walker(family, nf, max_exponent, box_halfwidth, options.include_identity);
  walker.set_v0(v0);

  OrbitSample sample;
  sample.n = family.n;
  sample.max_exponent = max_exponent;
  sample.box_halfwidth = box_halfwidth;

  const int span = max_exponent + 1;
  const int workers = std::min(worker_count(), span);
  std::vector<OrbitSample> parts(workers);
  if (workers <= 1) {
    walker.run(0, max_exponent, parts[0]);
  } else {
    std::vector<std::thread> threads;
    for (int w = 0; w < workers; ++w) {
      threads.emplace_back([&, w] {
        const int lo = int(std::int64_t(span) * w / workers);
        const int hi = int(std::int64_t(span) * (w + 1) / workers) - 1;
        walker.run(lo, hi, parts[w]);
      });
    }
    for (auto& t : threads) t.join();
  }

  const double quantum = box_halfwidth * 1e-12;
  std::set<std::vector<std::int64_t>> seen;
  for (auto& part : parts) {
    sample.words_tried += part.words_tried;
    sample.pruned += part.pruned;
    sample.overflow_pruned += part.overflow_pruned;
    for (auto& x : part.points) {
      if (seen.insert(detail::rounded_key(x, quantum)).second) sample.points.push_back(std::move(x));
    }
  }
  return sample;
}

inline CoverageStats coverage_report(const OrbitSample& sample, int cells_per_axis) {
  if (sample.n > 3) {
    throw_input("coverage_report: grid statistics are limited to n <= 3");
  }
  CoverageGrid grid(sample.n, cells_per_axis, sample.box_halfwidth);
  for (const auto& x : sample.points) grid.add(x);
  return grid.stats();
}

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline void write_points_csv(const std::vector<RealVector>& points, int n,
                             const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_input("cannot open " + path + " for writing");
  for (int i = 0; i < n; ++i) out << (i ? "," : "") << "x" << (i + 1);
  out << "\n";
  for (const auto& x : points) {
    for (int i = 0; i < n; ++i) out << (i ? "," : "") << format_double(x(i));
    out << "\n";
  }
  if (!out) throw_input("write failed: " + path);
}

inline void emit_points(const OrbitSample& sample, const std::string& path) {
  write_points_csv(sample.points, sample.n, path);
}

}  // namespace hyperorbit
