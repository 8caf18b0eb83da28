#pragma once

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hyperorbit/constructor.hpp"
#include "hyperorbit/density.hpp"
#include "hyperorbit/exp_log.hpp"
#include "hyperorbit/orbit.hpp"
#include "hyperorbit/pipeline.hpp"

namespace hyperorbit {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

// ---- primitives ----

inline Json to_json(const RealVector& v) {
  Json out = Json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

inline Json to_json(const RealMatrix& m) {
  Json out = Json::array();
  for (int i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(row);
  }
  return out;
}

inline double number_from_json(const Json& j, const std::string& what) {
  if (!j.is_number()) throw_input(what + ": expected a number");
  return j.get<double>();
}

inline RealVector vector_from_json(const Json& j, const std::string& what) {
  if (!j.is_array()) throw_input(what + ": expected an array");
  RealVector v(Eigen::Index(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(Eigen::Index(i)) = number_from_json(j[i], what);
  return v;
}

inline RealMatrix matrix_from_json(const Json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw_input(what + ": expected a non-empty array of rows");
  const std::size_t rows = j.size();
  if (!j[0].is_array()) throw_input(what + ": rows must be arrays");
  const std::size_t cols = j[0].size();
  RealMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols) throw_input(what + ": ragged rows");
    for (std::size_t k = 0; k < cols; ++k) {
      m(Eigen::Index(i), Eigen::Index(k)) = number_from_json(j[i][k], what);
    }
  }
  return m;
}

inline Json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw_input(source + ": malformed JSON: " + e.what());
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_input("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// FNV-1a 64-bit, hex.
inline std::string content_digest(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static const char* hex = "0123456789abcdef";
  std::string out = "fnv1a64:";
  for (int i = 15; i >= 0; --i) out.push_back(hex[(h >> (4 * i)) & 0xF]);
  return out;
}

// ---- partition / family ----

inline Json to_json(const BlockPartition& part) {
  return Json{{"t_blocks", part.t_blocks}, {"b_blocks", part.b_blocks}, {"n", part.dim()}};
}

inline BlockPartition partition_from_json(const Json& j) {
  if (!j.is_object()) throw_input("partition: expected an object");
  BlockPartition part;
  try {
    if (j.contains("t_blocks")) part.t_blocks = j.at("t_blocks").get<std::vector<int>>();
    if (j.contains("b_blocks")) part.b_blocks = j.at("b_blocks").get<std::vector<int>>();
  } catch (const nlohmann::json::exception& e) {
    throw_input(std::string("partition: ") + e.what());
  }
  part.validate();
  return part;
}

struct FamilyInput {
  MatrixFamily family;
  std::vector<std::optional<RealMatrix>> reference_logs;
  std::optional<BlockPartition> partition;
};

inline Json family_to_json(const MatrixFamily& family,
                           const std::vector<RealMatrix>& reference_logs = {}) {
  Json out;
  out["schema_version"] = kSchemaVersion;
  out["kind"] = "family";
  out["n"] = family.n;
  Json gens = Json::array();
  for (const auto& g : family.generators) gens.push_back(to_json(g));
  out["generators"] = gens;
  if (!family.labels.empty()) out["labels"] = family.labels;
  if (!reference_logs.empty()) {
    Json refs = Json::array();
    for (const auto& b : reference_logs) refs.push_back(to_json(b));
    out["reference_logs"] = refs;
  }
  return out;
}

inline FamilyInput family_from_json(const Json& j) {
  if (!j.is_object()) throw_input("family: expected a JSON object");
  if (!j.contains("generators")) throw_input("family: missing \"generators\"");
  const Json& gens = j.at("generators");
  if (!gens.is_array()) throw_input("family: \"generators\" must be an array");
  FamilyInput in;
  for (std::size_t k = 0; k < gens.size(); ++k) {
    in.family.generators.push_back(matrix_from_json(gens[k], "generator " + std::to_string(k)));
  }
  if (j.contains("n")) {
    if (!j.at("n").is_number_integer()) throw_input("family: \"n\" must be an integer");
    in.family.n = j.at("n").get<int>();
  } else if (!in.family.generators.empty()) {
    in.family.n = int(in.family.generators.front().rows());
  }
  if (j.contains("labels")) {
    try {
      in.family.labels = j.at("labels").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
      throw_input(std::string("family labels: ") + e.what());
    }
  }
  if (j.contains("reference_logs")) {
    const Json& refs = j.at("reference_logs");
    if (!refs.is_array()) throw_input("family: \"reference_logs\" must be an array");
    for (std::size_t k = 0; k < refs.size(); ++k) {
      if (refs[k].is_null()) {
        in.reference_logs.emplace_back();
      } else {
        in.reference_logs.emplace_back(
            matrix_from_json(refs[k], "reference log " + std::to_string(k)));
      }
    }
  }
  if (j.contains("partition")) in.partition = partition_from_json(j.at("partition"));
  validate_family(in.family);
  return in;
}

// ---- analysis pieces ----

inline Json to_json(const NormalForm& nf) {
  return Json{{"partition", to_json(nf.partition)},
              {"P", to_json(nf.P)},
              {"residual", nf.residual},
              {"condition", nf.condition},
              {"certified", nf.certified},
              {"seed_used", nf.seed_used},
              {"collisions", nf.collisions}};
}

inline Json to_json(const IndexReport& index) {
  return Json{{"r", index.r},
              {"index", index.index},
              {"sign_vectors", index.sign_vectors},
              {"achievable", index.achievable}};
}

inline Json to_json(const AdditiveSemigroup& h) {
  Json nat = Json::array();
  for (const auto& u : h.nat_generators) nat.push_back(to_json(u));
  Json lattice = Json::array();
  for (const auto& w : h.lattice_generators) lattice.push_back(to_json(w));
  return Json{{"n", h.n}, {"nat_generators", nat}, {"lattice_generators", lattice}};
}

inline AdditiveSemigroup semigroup_from_json(const Json& j) {
  if (!j.is_object()) throw_input("semigroup: expected a JSON object");
  const Json& src = j.contains("g2_v0") ? j.at("g2_v0") : j;
  AdditiveSemigroup h;
  if (src.contains("nat_generators")) {
    const Json& nat = src.at("nat_generators");
    if (!nat.is_array()) throw_input("semigroup: \"nat_generators\" must be an array");
    for (std::size_t k = 0; k < nat.size(); ++k) {
      h.nat_generators.push_back(vector_from_json(nat[k], "nat generator " + std::to_string(k)));
    }
  }
  if (src.contains("lattice_generators")) {
    const Json& lat = src.at("lattice_generators");
    if (!lat.is_array()) throw_input("semigroup: \"lattice_generators\" must be an array");
    for (std::size_t k = 0; k < lat.size(); ++k) {
      h.lattice_generators.push_back(
          vector_from_json(lat[k], "lattice generator " + std::to_string(k)));
    }
  }
  if (src.contains("n")) {
    if (!src.at("n").is_number_integer()) throw_input("semigroup: \"n\" must be an integer");
    h.n = src.at("n").get<int>();
  } else if (!h.nat_generators.empty()) {
    h.n = int(h.nat_generators.front().size());
  } else if (!h.lattice_generators.empty()) {
    h.n = int(h.lattice_generators.front().size());
  } else {
    throw_input("semigroup: cannot infer n from an empty generator list");
  }
  detail::validate_semigroup(h);
  return h;
}

inline Json to_json(const CoverageStats& s) {
  Json hist = Json::array();
  for (const auto& [count, cells] : s.histogram) hist.push_back(Json::array({count, cells}));
  return Json{{"dimension", s.dimension},
              {"cells_per_axis", s.cells_per_axis},
              {"box_halfwidth", s.box_halfwidth},
              {"total_cells", s.total_cells},
              {"cells_hit", s.cells_hit},
              {"coverage", s.coverage},
              {"points", s.points},
              {"histogram", hist},
              {"largest_empty_radius", s.largest_empty_radius},
              {"largest_empty_cluster", s.largest_empty_cluster},
              {"partial", s.partial}};
}

inline Json to_json(const Obstruction& ob) {
  Json out{{"kind", to_string(ob.kind)}, {"detail", ob.detail}};
  switch (ob.kind) {
    case ObstructionKind::CountBound:
      out["p"] = ob.p;
      out["s"] = ob.s;
      out["n"] = ob.n;
      break;
    case ObstructionKind::RankDeficient:
      out["rank"] = ob.rank;
      break;
    case ObstructionKind::LatticeConfined:
      out["covector"] = to_json(ob.covector);
      out["period"] = ob.period;
      out["integer_values"] = ob.integer_values;
      break;
    default:
      break;
  }
  return out;
}

inline Json to_json(const KroneckerCertificate& c) {
  std::vector<int> negated;
  for (bool b : c.negated) negated.push_back(b ? 1 : 0);
  return Json{{"S", to_json(c.S)},
              {"alpha", to_json(c.alpha)},
              {"columns", c.columns},
              {"negated", negated},
              {"alpha_generator", c.alpha_generator},
              {"requested_height", c.requested_height},
              {"certified_height", c.certified_height}};
}

inline Json to_json(const DensityVerdict& v) {
  Json out{{"status", to_string(v.status)},
           {"additive_status", to_string(v.additive_status)},
           {"locally_hypercyclic", to_string(v.locally_hypercyclic)},
           {"hypercyclic", to_string(v.hypercyclic)}};
  out["obstruction"] = v.obstruction ? to_json(*v.obstruction) : Json(nullptr);
  out["certificate"] = v.certificate ? to_json(*v.certificate) : Json(nullptr);
  out["coverage"] = v.coverage ? to_json(*v.coverage) : Json(nullptr);
  return out;
}

inline Json tribool_json(Tribool t) {
  if (t == Tribool::True) return true;
  if (t == Tribool::False) return false;
  return "unknown";
}

inline Json to_json(const AnalysisReport& r) {
  Json out;
  out["schema_version"] = kSchemaVersion;
  out["kind"] = "analysis";
  out["input_digest"] = r.input_digest;
  out["n"] = r.n;
  out["generator_count"] = r.generator_count;
  out["invertible_generators"] = r.invertible_generators;
  out["partition"] = r.normal_form ? to_json(r.normal_form->partition) : Json(nullptr);
  out["index"] = r.index ? Json(r.index->index) : Json(nullptr);
  out["r"] = r.normal_form ? Json(r.normal_form->partition.r()) : Json(nullptr);
  out["s"] = r.normal_form ? Json(r.normal_form->partition.s()) : Json(nullptr);
  out["locally_hypercyclic"] = tribool_json(r.verdict.locally_hypercyclic);
  out["hypercyclic"] = tribool_json(r.verdict.hypercyclic);
  out["verdict"] = to_json(r.verdict);
  out["normal_form"] = r.normal_form ? to_json(*r.normal_form) : Json(nullptr);
  out["index_report"] = r.index ? to_json(*r.index) : Json(nullptr);
  if (r.g2) {
    Json g2 = to_json(r.g2->semigroup);
    g2["v0"] = to_json(r.g2->canonical.v0);
    g2["generator_indices"] = r.g2->generator_indices;
    Json logs = Json::array();
    for (const auto& b : r.g2->logs) logs.push_back(to_json(b));
    g2["logs"] = logs;
    out["g2_v0"] = g2;
  } else {
    out["g2_v0"] = nullptr;
  }
  Json diag;
  diag["commute_ratio"] = r.diagnostics.commute_ratio;
  diag["normal_form_residual"] = r.diagnostics.normal_form_residual;
  diag["normal_form_condition"] = r.diagnostics.normal_form_condition;
  diag["normal_form_certified"] = r.diagnostics.normal_form_certified;
  diag["normal_form_seed"] = r.diagnostics.normal_form_seed;
  diag["exp_residuals"] = r.diagnostics.exp_residuals;
  Json refs = Json::array();
  for (const auto& c : r.diagnostics.reference_logs) {
    refs.push_back(Json{{"generator", c.generator},
                        {"mismatch_max", c.mismatch},
                        {"entry", Json::array({c.row + 1, c.col + 1})}});
  }
  diag["reference_logs"] = refs;
  diag["warnings"] = r.diagnostics.warnings;
  out["diagnostics"] = diag;
  return out;
}

inline Json to_json(const ConstructionRecipe& recipe) {
  Json out;
  out["partition"] = to_json(recipe.partition);
  out["alpha"] = to_json(recipe.alpha);
  out["radicands"] = recipe.radicands;
  out["alpha_certified_height"] = recipe.alpha_certified_height;
  out["S"] = to_json(recipe.S);
  Json u = Json::array();
  for (const auto& v : recipe.u) u.push_back(to_json(v));
  out["u"] = u;
  Json b = Json::array();
  for (const auto& m : recipe.B) b.push_back(to_json(m));
  out["B"] = b;
  out["checks"] = Json{{"commute_ratio", recipe.checks.commute_ratio},
                       {"exp_residuals", recipe.checks.exp_residuals},
                       {"index", recipe.checks.index},
                       {"verdict", to_string(recipe.checks.verdict)},
                       {"hypercyclic", to_string(recipe.checks.hypercyclic)}};
  return out;
}

inline Json to_json(const OrbitSample& s, const std::optional<CoverageStats>& coverage) {
  Json out;
  out["schema_version"] = kSchemaVersion;
  out["kind"] = "orbit_sample";
  out["n"] = s.n;
  out["max_exponent"] = s.max_exponent;
  out["box_halfwidth"] = s.box_halfwidth;
  out["points"] = s.points.size();
  out["words_tried"] = s.words_tried;
  out["pruned"] = s.pruned;
  out["overflow_pruned"] = s.overflow_pruned;
  out["coverage"] = coverage ? to_json(*coverage) : Json(nullptr);
  return out;
}

inline Json to_json(const KLogResult& res, const BlockPartition& part) {
  Json out;
  out["schema_version"] = kSchemaVersion;
  out["kind"] = "log";
  out["partition"] = to_json(part);
  out["B"] = to_json(res.B);
  Json gens = Json::array();
  for (const auto& l : res.branch_generators) gens.push_back(to_json(l));
  out["branch_generators"] = gens;
  return out;
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace hyperorbit
