// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <unsupported/Eigen/MatrixFunctions>

#include "support.hpp"

using namespace hyperorbit;
using std::numbers::pi;
namespace ts = testing_support;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  if (!o.pass) ++failures;
  std::ostringstream line;
  line << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << name << "): " << o.detail
       << " [" << std::fixed;
  line.precision(2);
  line << seconds_since(t0) << " s]";
  std::cout << line.str() << std::endl;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

RealVector vec(std::initializer_list<double> xs) {
  RealVector v(Eigen::Index(xs.size()));
  int i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

Outcome example_end_to_end() {
  const auto ex = example_7_1();
  AnalyzeOptions opts;
  opts.reference_logs.assign(ex.reference_logs.begin(), ex.reference_logs.end());
  const auto t0 = Clock::now();
  const auto rep = analyze(ex.corrected, opts);
  const double elapsed = seconds_since(t0);

  std::vector<std::string> problems;
  const auto& part = rep.normal_form->partition;
  if (part.t_blocks != std::vector<int>{2} || part.s() != 0) problems.push_back("partition");
  if (rep.index->index != 1) problems.push_back("index");
  const double s2 = std::sqrt(2.0), s3 = std::sqrt(3.0);
  const std::vector<RealVector> expected{vec({2 * pi, 0}), vec({0, 2 * pi}),
                                         vec({-2 * pi * s2, -2 * pi * s3})};
  const auto& nat = rep.g2->semigroup.nat_generators;
  double worst = 0.0;
  if (nat.size() != 3 || !rep.g2->semigroup.lattice_generators.empty()) {
    problems.push_back("generator count");
  } else {
    for (int k = 0; k < 3; ++k) worst = std::max(worst, max_norm(RealVector(nat[k] - expected[k])));
  }
  if (worst > 1e-10) problems.push_back("g2 generators off by " + fmt(worst));
  if (max_norm(RealVector(rep.g2->canonical.v0 - vec({1, 0}))) > 1e-12) problems.push_back("v0 != e1");
  if (rep.verdict.status != DensityStatus::CertifiedDense) problems.push_back("verdict");
  if (rep.verdict.hypercyclic != Tribool::True) problems.push_back("hypercyclic");
  if (elapsed >= 1.0) problems.push_back("runtime " + fmt(elapsed) + " s");

  Outcome o;
  o.pass = problems.empty();
  o.detail = "eta=(2), index " + std::to_string(rep.index->index) + ", generator error " +
             fmt(worst) + ", " + to_string(rep.verdict.status) + ", analyze " + fmt(elapsed) + " s";
  for (const auto& p : problems) o.detail += "; " + p;
  return o;
}

Outcome erratum() {
  const auto ex = example_7_1();
  // Oracle: square by direct multiplication, exp of the printed log by Eigen.
  auto mismatch = [&](const MatrixFamily& f, Eigen::Index& i, Eigen::Index& j) {
    const RealMatrix a = f.generators[1];
    const RealMatrix diff = a * a - RealMatrix(ex.reference_logs[1].exp());
    return diff.cwiseAbs().maxCoeff(&i, &j);
  };
  Eigen::Index pi_row = 0, pi_col = 0, ci = 0, cj = 0;
  const double printed = mismatch(ex.printed, pi_row, pi_col);
  const double corrected = mismatch(ex.corrected, ci, cj);

  AnalyzeOptions opts;
  opts.reference_logs.assign(ex.reference_logs.begin(), ex.reference_logs.end());
  opts.attach_coverage = false;
  const auto rep = analyze(ex.printed, opts);
  bool reported = false;
  for (const auto& w : rep.diagnostics.warnings) {
    if (w.find("generator 1") != std::string::npos && w.find("(2,1)") != std::string::npos) {
      reported = true;
    }
  }
  const auto& check = rep.diagnostics.reference_logs.at(1);
  const auto rep_ok = analyze(ex.corrected, opts);
  const double corrected_lib = rep_ok.diagnostics.reference_logs.at(1).mismatch;

  Outcome o;
  o.pass = std::abs(printed - 4 * pi) <= 1e-10 && pi_row == 1 && pi_col == 0 &&
           std::abs(check.mismatch - printed) <= 1e-12 && check.row == 1 && check.col == 0 &&
           reported && corrected <= 1e-10 && corrected_lib <= 1e-10;
  o.detail = "printed mismatch " + fmt(check.mismatch) + " at (" + std::to_string(check.row + 1) +
             "," + std::to_string(check.col + 1) + "), 4pi = " + fmt(4 * pi) +
             (reported ? ", warning emitted" : ", no warning") + "; corrected mismatch " +
             fmt(corrected_lib);
  return o;
}

Outcome roundtrip() {
  std::mt19937_64 rng(20240601);
  std::vector<BlockPartition> parts;
  for (int n = 2; n <= 4; ++n) {
    for (const auto& p : ts::partitions_of(n)) parts.push_back(p);
  }
  int ok = 0;
  double worst = 0.0;
  const int total = 1000;
  for (int i = 0; i < total; ++i) {
    const auto& part = parts[i % parts.size()];
    const RealMatrix b = ts::random_k_log(part, rng);
    const RealMatrix a = exp_K(b, part);
    const RealMatrix back = principal_log_K(a, part).B;
    const double rel = max_norm(RealMatrix(back - b)) / (1.0 + max_norm(b));
    worst = std::max(worst, rel);
    if (rel <= 1e-9) ++ok;
  }
  Outcome o;
  o.pass = ok == total;
  o.detail = std::to_string(ok) + "/" + std::to_string(total) + " within 1e-9 (1+|B|), worst " +
             fmt(worst) + " over " + std::to_string(parts.size()) + " partitions";
  return o;
}

Outcome normal_form_recovery() {
  std::mt19937_64 rng(777);
  std::vector<BlockPartition> parts;
  for (int n = 2; n <= 5; ++n) {
    for (const auto& p : ts::partitions_of(n)) parts.push_back(p);
  }
  std::uniform_int_distribution<std::size_t> pick(0, parts.size() - 1);
  std::uniform_int_distribution<int> gens(1, 3);
  std::uniform_real_distribution<double> log_cond(0.0, 3.0);
  const int total = 200;
  int matched = 0;
  int residual_ok = 0;
  double worst_ratio = 0.0;
  for (int i = 0; i < total; ++i) {
    const auto& part = parts[pick(rng)];
    const auto base = ts::random_k_family(part, gens(rng), rng);
    const RealMatrix q = ts::random_conditioned(part.dim(), std::pow(10.0, log_cond(rng)), rng);
    const double cond = condition_number(q);
    const auto fam = ts::conjugate(base, q);
    NormalForm nf;
    try {
      nf = compute_normal_form(fam);
    } catch (const Error&) {
      continue;
    }
    if (!same_block_sizes(nf.partition, part)) continue;
    ++matched;
    const double residual = verify_normal_form(fam, nf);
    const double bound = 1e-8 * cond * cond;
    worst_ratio = std::max(worst_ratio, residual / bound);
    if (residual <= bound) ++residual_ok;
  }
  Outcome o;
  o.pass = matched >= 195 && residual_ok == matched;
  o.detail = std::to_string(matched) + "/" + std::to_string(total) + " partitions matched, " +
             std::to_string(residual_ok) + " within 1e-8 cond^2 (worst residual/bound " +
             fmt(worst_ratio) + ")";
  return o;
}

Outcome index_oracle() {
  std::mt19937_64 rng(4242);
  std::uniform_int_distribution<int> r_dist(1, 5);
  std::uniform_int_distribution<int> p_dist(1, 4);
  std::uniform_int_distribution<int> size_dist(1, 2);
  std::uniform_real_distribution<double> mag(0.5, 2.0);
  std::uniform_real_distribution<double> off(-1.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  const int total = 500;
  int agree = 0;
  for (int trial = 0; trial < total; ++trial) {
    const int r = r_dist(rng);
    const int p = p_dist(rng);
    BlockPartition part;
    for (int k = 0; k < r; ++k) part.t_blocks.push_back(size_dist(rng));
    if (coin(rng)) part.b_blocks.push_back(1);
    const int n = part.dim();
    std::vector<std::vector<int>> signs(p, std::vector<int>(r));
    MatrixFamily fam;
    fam.n = n;
    for (int g = 0; g < p; ++g) {
      RealMatrix a = RealMatrix::Zero(n, n);
      for (int k = 0; k < r; ++k) {
        signs[g][k] = coin(rng) ? -1 : 1;
        const int o = part.t_offset(k);
        const double mu = signs[g][k] * mag(rng);
        for (int i = 0; i < part.t_blocks[k]; ++i) {
          a(o + i, o + i) = mu;
          for (int j = 0; j < i; ++j) a(o + i, o + j) = off(rng);
        }
      }
      for (int l = 0; l < part.s(); ++l) {
        const int o = part.b_offset(l);
        a.block<2, 2>(o, o) = SBlock::from_complex(std::polar(mag(rng), off(rng) * pi)).matrix();
      }
      fam.generators.push_back(a);
    }
    const int fast = compute_index(fam, part).index;
    const int brute = ts::brute_force_index(signs, r, 8);
    if (fast == brute) ++agree;
  }
  Outcome o;
  o.pass = agree == total;
  o.detail = std::to_string(agree) + "/" + std::to_string(total) +
             " index values agree with word enumeration up to length 8";
  return o;
}

Outcome count_bound() {
  std::mt19937_64 rng(99);
  int cases = 0;
  int ok = 0;
  std::string first_failure;
  for (int n = 1; n <= 4; ++n) {
    for (const auto& part : ts::partitions_of(n)) {
      for (int p = 1; p + part.s() <= n; ++p) {
        for (int rep_i = 0; rep_i < 2; ++rep_i) {
          const auto fam = ts::random_k_family(part, p, rng);
          AnalyzeOptions opts;
          opts.attach_coverage = false;
          const auto rep = analyze(fam, opts);
          ++cases;
          const bool good = rep.verdict.status == DensityStatus::CertifiedNotDense &&
                            rep.verdict.obstruction &&
                            rep.verdict.obstruction->kind == ObstructionKind::CountBound;
          if (good) {
            ++ok;
          } else if (first_failure.empty()) {
            first_failure = "; first failure " + to_string(part) + " p=" + std::to_string(p);
          }
        }
      }
    }
  }
  Outcome o;
  o.pass = ok == cases;
  o.detail = std::to_string(ok) + "/" + std::to_string(cases) +
             " families with p + s <= n (n <= 4) got CertifiedNotDense(CountBound)" + first_failure;
  return o;
}

Outcome constructor_totality() {
  int cases = 0;
  int ok = 0;
  std::string failures_seen;
  for (int n = 1; n <= 5; ++n) {
    for (const auto& part : ts::partitions_of(n)) {
      ++cases;
      try {
        const auto recipe = build_generators(part);
        const auto fam = recipe.family();
        bool good = int(fam.size()) == n - part.s() + 1;
        good = good && commute_report(fam, {}).worst_ratio <= 1e-9;
        for (std::size_t j = 0; j < fam.size(); ++j) {
          const RealMatrix& a = fam.generators[j];
          good = good && is_in_K(a, part) && is_invertible(a, ToleranceConfig{});
          const RealMatrix sq = a * a;
          const double res =
              max_norm(RealMatrix(sq - RealMatrix(recipe.B[j].exp()))) / std::max(1.0, max_norm(sq));
          good = good && res <= 1e-9;
        }
        good = good && compute_index(fam, part).index == part.r();
        good = good && recipe.checks.verdict == DensityStatus::CertifiedDense;
        if (good) {
          ++ok;
        } else {
          failures_seen += " " + to_string(part);
        }
      } catch (const Error& e) {
        failures_seen += " " + to_string(part) + " (" + e.what() + ")";
      }
    }
  }
  Outcome o;
  o.pass = ok == cases;
  o.detail = std::to_string(ok) + "/" + std::to_string(cases) +
             " partitions with n <= 5 constructed and certified dense" +
             (failures_seen.empty() ? "" : "; failed:" + failures_seen);
  return o;
}

Outcome integer_relations() {
  std::vector<std::string> problems;
  const auto sqrt8 = integer_relation(std::vector<double>{1.0, std::sqrt(2.0), std::sqrt(8.0)}, 1000);
  if (!sqrt8.found() || sqrt8.relation->coefficients != std::vector<std::int64_t>{0, 2, -1}) {
    problems.push_back("sqrt8 relation not (0,2,-1)");
  }

  using High = boost::multiprecision::cpp_bin_float_100;
  const std::vector<High> surds{High(1), boost::multiprecision::sqrt(High(2)),
                                boost::multiprecision::sqrt(High(3))};
  const auto high = integer_relation<High>(std::span<const High>(surds), 1'000'000);
  if (high.found() || !high.certifies_height()) problems.push_back("100-digit independence");
  const auto dbl =
      integer_relation(std::vector<double>{1.0, std::sqrt(2.0), std::sqrt(3.0)}, 1'000'000);
  if (dbl.found()) problems.push_back("double search reported a relation");

  std::mt19937_64 rng(8128);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> c(-20, 20);
  int recovered = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::int64_t> planted(4);
    do {
      for (auto& x : planted) x = c(rng);
    } while (planted[3] == 0);
    std::int64_t g = 0;
    for (auto x : planted) g = std::gcd(g, std::abs(x));
    for (auto& x : planted) x /= g;
    std::vector<double> v(4);
    double acc = 0.0;
    for (int i = 0; i < 3; ++i) {
      v[i] = u(rng);
      acc += double(planted[i]) * v[i];
    }
    v[3] = -acc / double(planted[3]);
    const auto res = integer_relation(v, 200);
    if (!res.found()) continue;
    auto got = res.relation->coefficients;
    auto neg = got;
    for (auto& x : neg) x = -x;
    if (got == planted || neg == planted) ++recovered;
  }
  if (recovered != 100) problems.push_back(std::to_string(recovered) + "/100 planted recovered");

  Outcome o;
  o.pass = problems.empty();
  o.detail = "(1,sqrt2,sqrt8) -> (0,2,-1); (1,sqrt2,sqrt3) none at 1e6 (100-digit certified height " +
             fmt(high.certified_height) + ", double certified height " + fmt(dbl.certified_height) +
             "); planted " + std::to_string(recovered) + "/100";
  for (const auto& p : problems) o.detail += "; " + p;
  return o;
}

Outcome coverage_monotone() {
  const double s2 = std::sqrt(2.0), s3 = std::sqrt(3.0);
  AdditiveSemigroup h;
  h.n = 2;
  h.nat_generators = {vec({2 * pi, 0}), vec({0, 2 * pi}), vec({-2 * pi * s2, -2 * pi * s3})};
  AdditiveSemigroup lattice;
  lattice.n = 2;
  lattice.nat_generators = {vec({1, 0}), vec({0, 1})};
  auto coverage = [](const AdditiveSemigroup& s, int bound) {
    CoverageOptions opts;
    opts.coeff_bound = bound;
    opts.box_halfwidth = 10 * pi;
    opts.cells_per_axis = 50;
    return empirical_coverage(s, opts).stats.coverage;
  };
  const double c50 = coverage(h, 50), c100 = coverage(h, 100), c200 = coverage(h, 200);
  const double l100 = coverage(lattice, 100), l200 = coverage(lattice, 200);
  Outcome o;
  o.pass = c200 > c100 && c100 > c50 && l200 - l100 < 0.01;
  o.detail = "H coverage " + fmt(c50) + " < " + fmt(c100) + " < " + fmt(c200) +
             "; N e1 + N e2 coverage " + fmt(l100) + " -> " + fmt(l200) + " (diff " +
             fmt(l200 - l100) + ")";
  return o;
}

std::string run_cli(const std::string& args, int& code) {
  const auto out = std::filesystem::temp_directory_path() /
                   ("hyperorbit_accept_" + std::to_string(::getpid()) + ".out");
  const std::string cmd =
      std::string("\"") + HYPERORBIT_EXE + "\" " + args + " > \"" + out.string() + "\" 2>/dev/null";
  const int status = std::system(cmd.c_str());
  code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(out, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  std::filesystem::remove(out);
  return ss.str();
}

Outcome determinism() {
  const auto ex = example_7_1();
  std::vector<std::string> problems;
  for (const auto* fam : {&ex.corrected, &ex.printed}) {
    AnalyzeOptions opts;
    opts.reference_logs.assign(ex.reference_logs.begin(), ex.reference_logs.end());
    const std::string a = dump(to_json(analyze(*fam, opts)));
    const std::string b = dump(to_json(analyze(*fam, opts)));
    if (a != b) problems.push_back("library output differs");
  }
  const auto path = std::filesystem::temp_directory_path() /
                    ("hyperorbit_accept_family_" + std::to_string(::getpid()) + ".json");
  std::ofstream(path, std::ios::binary) << dump(family_to_json(ex.printed, ex.reference_logs));
  int c1 = 0, c2 = 0;
  const std::string r1 = run_cli("analyze \"" + path.string() + "\"", c1);
  const std::string r2 = run_cli("analyze \"" + path.string() + "\"", c2);
  std::filesystem::remove(path);
  if (c1 != 0 || c2 != 0) problems.push_back("CLI exit codes " + std::to_string(c1) + "/" +
                                             std::to_string(c2));
  if (r1 != r2 || r1.empty()) problems.push_back("CLI reports differ");
  Outcome o;
  o.pass = problems.empty();
  o.detail = "library and CLI analyze reports byte-identical across runs (" +
             std::to_string(r1.size()) + " bytes, coverage attached)";
  for (const auto& p : problems) o.detail += "; " + p;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"worked example end-to-end", example_end_to_end},
      {"erratum regression", erratum},
      {"exp/log roundtrip", roundtrip},
      {"normal-form recovery", normal_form_recovery},
      {"index oracle equivalence", index_oracle},
      {"minimality lower bounds", count_bound},
      {"constructor totality", constructor_totality},
      {"integer-relation sanity", integer_relations},
      {"coverage monotonicity", coverage_monotone},
      {"determinism", determinism},
  };
  // With an argument, run only that criterion (1-based).
  int only = 0;
  if (argc > 1) {
    only = std::atoi(argv[1]);
    if (only < 1 || only > int(criteria.size())) {
      std::cerr << "usage: acceptance [criterion 1.." << criteria.size() << "]\n";
      return 2;
    }
  }
  const auto t0 = Clock::now();
  for (int id = 1; id <= int(criteria.size()); ++id) {
    if (only == 0 || only == id) report(id, criteria[id - 1].first, criteria[id - 1].second);
  }
  const double total = seconds_since(t0);
  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED")
            << " in " << fmt(total) << " s" << std::endl;
  return failures == 0 ? 0 : 1;
}
