#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "hyperorbit/hyperorbit.hpp"

namespace {

using namespace hyperorbit;

struct CommonFlags {
  double tol = ToleranceConfig{}.structural_tol;
  std::uint64_t seed = 0;
  std::int64_t height = ToleranceConfig{}.relation_height;
  std::string output;

  ToleranceConfig config() const {
    ToleranceConfig t;
    t.structural_tol = tol;
    t.seed = seed;
    t.relation_height = height;
    return t;
  }
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--tol", flags.tol, "structural tolerance")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", flags.seed, "seed for the generic element");
  cmd->add_option("--height", flags.height, "integer-relation height bound")
      ->check(CLI::Range(std::int64_t{2}, kMaxRelationHeight));
  cmd->add_option("-o,--output", flags.output, "output path (default stdout)");
}

void write_output(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_input("cannot open " + path + " for writing");
  out << text;
  if (!out) throw_input("write failed: " + path);
}

std::string read_input(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  return read_file(path);
}

RealVector parse_vector_flag(const std::string& text, int n) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size() && item.find_first_not_of(" ", used) != std::string::npos) {
        throw std::invalid_argument(item);
      }
    } catch (const std::exception&) {
      throw_input("--v0: cannot parse \"" + item + "\"");
    }
  }
  if (int(values.size()) != n) {
    throw_input("--v0: expected " + std::to_string(n) + " entries, got " +
                std::to_string(values.size()));
  }
  return Eigen::Map<RealVector>(values.data(), n);
}

int cmd_analyze(const std::string& path, const CommonFlags& flags, bool coverage) {
  const std::string bytes = read_input(path);
  const FamilyInput in = family_from_json(parse_json_text(bytes, path));
  AnalyzeOptions options;
  options.tol = flags.config();
  options.reference_logs = in.reference_logs;
  options.attach_coverage = coverage;
  AnalysisReport report = analyze(in.family, options);
  report.input_digest = content_digest(bytes);
  write_output(dump(to_json(report)), flags.output);
  return 0;
}

int cmd_construct(const std::vector<int>& t_blocks, const std::vector<int>& b_blocks,
                  const CommonFlags& flags) {
  BlockPartition part{t_blocks, b_blocks};
  const ConstructionRecipe recipe = build_generators(part, flags.height);
  Json out = family_to_json(recipe.family(), recipe.B);
  out["partition"] = to_json(part);
  out["recipe"] = to_json(recipe);
  write_output(dump(out), flags.output);
  return 0;
}

int cmd_density(const std::string& path, const CommonFlags& flags, int bound, double box,
                int grid, const std::string& points_path) {
  const std::string bytes = read_input(path);
  const AdditiveSemigroup h = semigroup_from_json(parse_json_text(bytes, path));
  CoverageOptions cov;
  cov.coeff_bound = bound;
  cov.box_halfwidth = box;
  cov.cells_per_axis = grid;
  cov.collect_points = !points_path.empty();
  std::optional<CoverageOptions> maybe;
  if (h.n <= 3) maybe = cov;
  const DensityVerdict verdict = additive_density(h, flags.config(), maybe);
  Json out;
  out["schema_version"] = kSchemaVersion;
  out["kind"] = "density";
  out["input_digest"] = content_digest(bytes);
  out["semigroup"] = to_json(h);
  out["verdict"] = to_json(verdict);
  if (!points_path.empty()) {
    const CoverageResult result = empirical_coverage(h, cov);
    write_points_csv(result.points, h.n, points_path);
    if (!verdict.coverage) out["verdict"]["coverage"] = to_json(result.stats);
  }
  write_output(dump(out), flags.output);
  return 0;
}

int cmd_simulate(const std::string& path, const CommonFlags& flags, const std::string& v0_text,
                 int max_exp, double box, int grid, const std::string& points_path,
                 bool no_identity) {
  const std::string bytes = read_input(path);
  const FamilyInput in = family_from_json(parse_json_text(bytes, path));
  RealVector v0;
  if (v0_text == "auto") {
    const NormalForm nf = compute_normal_form(in.family, flags.config());
    v0 = canonical_vectors(nf.partition, nf.P, flags.config()).v0;
  } else {
    v0 = parse_vector_flag(v0_text, in.family.n);
  }
  OrbitOptions options;
  options.include_identity = !no_identity;
  const OrbitSample sample = enumerate_orbit(in.family, v0, max_exp, box, options, flags.config());
  std::optional<CoverageStats> coverage;
  if (sample.n <= 3) coverage = coverage_report(sample, grid);
  Json out = to_json(sample, coverage);
  out["input_digest"] = content_digest(bytes);
  out["v0"] = to_json(v0);
  if (!points_path.empty()) emit_points(sample, points_path);
  write_output(dump(out), flags.output);
  return 0;
}

std::vector<std::int64_t> parse_branch_flag(const std::string& text) {
  std::vector<std::int64_t> k;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      k.push_back(std::stoll(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw_input("--branch: cannot parse \"" + item + "\"");
    }
  }
  return k;
}

// --partition takes inline JSON or a path to a JSON file.
BlockPartition parse_partition_flag(const std::string& text) {
  const bool inline_json = !text.empty() && text.front() == '{';
  const std::string source = inline_json ? text : read_file(text);
  return partition_from_json(parse_json_text(source, "--partition"));
}

int cmd_log(const std::string& matrix_path, const std::string& partition_text,
            const std::string& branch_text, const CommonFlags& flags) {
  const std::string bytes = read_input(matrix_path);
  const Json j = parse_json_text(bytes, matrix_path);
  const Json& m = j.is_object() && j.contains("matrix") ? j.at("matrix") : j;
  const RealMatrix a = matrix_from_json(m, "matrix");
  BlockPartition part;
  if (!partition_text.empty()) {
    part = parse_partition_flag(partition_text);
  } else if (j.is_object() && j.contains("partition")) {
    part = partition_from_json(j.at("partition"));
  } else {
    throw_input("log: no partition given (--partition or a \"partition\" field)");
  }
  const KLogResult res = principal_log_K(a, part, flags.config());
  Json out = to_json(res, part);
  out["input_digest"] = content_digest(bytes);
  if (!branch_text.empty()) {
    const auto k = parse_branch_flag(branch_text);
    out["branch"] = k;
    out["B_branch"] = to_json(log_branch(res, k));
  }
  out["exp_residual"] = max_norm(RealMatrix(exp_K(res.B, part, flags.config()) - a)) /
                        std::max(1.0, max_norm(a));
  write_output(dump(out), flags.output);
  return 0;
}

int cmd_example(const std::string& variant, const CommonFlags& flags) {
  const Example71 ex = example_7_1();
  Json out;
  if (variant == "corrected") {
    out = family_to_json(ex.corrected, ex.reference_logs);
  } else if (variant == "printed") {
    out = family_to_json(ex.printed, ex.reference_logs);
  } else {
    out["schema_version"] = kSchemaVersion;
    out["kind"] = "example";
    out["corrected"] = family_to_json(ex.corrected, ex.reference_logs);
    out["printed"] = family_to_json(ex.printed, ex.reference_logs);
  }
  write_output(dump(out), flags.output);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hyperorbit: hypercyclicity analysis for abelian matrix semigroups"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string input;
  bool no_coverage = false;

  auto* analyze_cmd = app.add_subcommand("analyze", "full hypercyclicity analysis of a family");
  analyze_cmd->add_option("family", input, "family JSON (- for stdin)")->required();
  analyze_cmd->add_flag("--no-coverage", no_coverage, "skip empirical coverage on Unknown");
  add_common(analyze_cmd, flags);

  std::vector<int> t_blocks;
  std::vector<int> b_blocks;
  auto* construct_cmd = app.add_subcommand("construct", "build a hypercyclic family for a partition");
  construct_cmd->add_option("--t-blocks", t_blocks, "T-block size (repeatable)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
      ->check(CLI::PositiveNumber);
  construct_cmd->add_option("--b-blocks", b_blocks, "B-block size (repeatable)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
      ->check(CLI::PositiveNumber);
  add_common(construct_cmd, flags);

  int bound = 50;
  double box = 0.0;
  int grid = 50;
  std::string points_path;
  auto* density_cmd = app.add_subcommand("density", "density verdict for an additive semigroup");
  density_cmd->add_option("semigroup", input, "semigroup or analysis JSON")->required();
  density_cmd->add_option("--coeff-bound", bound, "coefficient bound for coverage")
      ->check(CLI::NonNegativeNumber);
  density_cmd->add_option("--box", box, "box half-width (0: automatic)");
  density_cmd->add_option("--grid", grid, "cells per axis")->check(CLI::PositiveNumber);
  density_cmd->add_option("--emit-points", points_path, "CSV of enumerated in-box points");
  add_common(density_cmd, flags);

  std::string v0_text = "auto";
  int max_exp = 60;
  double sim_box = 5.0;
  int sim_grid = 50;
  bool no_identity = false;
  auto* simulate_cmd = app.add_subcommand("simulate", "sample the orbit G(v0)");
  simulate_cmd->add_option("family", input, "family JSON")->required();
  simulate_cmd->add_option("--v0", v0_text, "auto or comma-separated vector");
  simulate_cmd->add_option("--max-exp", max_exp, "largest exponent per generator")
      ->check(CLI::NonNegativeNumber);
  simulate_cmd->add_option("--box", sim_box, "box half-width")->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--grid", sim_grid, "cells per axis")->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--emit-points", points_path, "CSV of orbit points");
  simulate_cmd->add_flag("--no-identity", no_identity, "exclude v0 itself");
  add_common(simulate_cmd, flags);

  std::string partition_text;
  std::string branch_text;
  auto* log_cmd = app.add_subcommand("log", "principal logarithm inside K");
  log_cmd->add_option("--matrix", input, "matrix JSON (array of rows, or {\"matrix\", \"partition\"})")
      ->required();
  log_cmd->add_option("--partition", partition_text, "partition JSON, inline or file");
  log_cmd->add_option("--branch", branch_text, "branch integers k1,...,ks");
  add_common(log_cmd, flags);

  std::string variant = "both";
  auto* example_cmd = app.add_subcommand("example", "the worked 2x2 example family");
  example_cmd->add_option("--variant", variant, "corrected, printed or both")
      ->check(CLI::IsMember({"corrected", "printed", "both"}));
  add_common(example_cmd, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : int(ErrorKind::Input);
  }

  try {
    if (*analyze_cmd) return cmd_analyze(input, flags, !no_coverage);
    if (*construct_cmd) return cmd_construct(t_blocks, b_blocks, flags);
    if (*density_cmd) return cmd_density(input, flags, bound, box, grid, points_path);
    if (*simulate_cmd) {
      return cmd_simulate(input, flags, v0_text, max_exp, sim_box, sim_grid, points_path,
                          no_identity);
    }
    if (*log_cmd) return cmd_log(input, partition_text, branch_text, flags);
    if (*example_cmd) return cmd_example(variant, flags);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
