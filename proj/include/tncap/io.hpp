#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tncap/bounds.hpp"
#include "tncap/contract.hpp"
#include "tncap/error.hpp"
#include "tncap/learn.hpp"
#include "tncap/shattering.hpp"
#include "tncap/structure.hpp"
#include "tncap/tensor.hpp"

// JSON and CSV interchange formats.

namespace tncap::io {

using nlohmann::json;

namespace detail {

[[noreturn]] inline void schema(const std::string& path, const std::string& why) {
  throw Error(ErrorKind::schema_violation, path.empty() ? "/" : path, why);
}

inline const json& field(const json& j, const std::string& path, const char* key) {
  if (!j.is_object()) schema(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) schema(path + "/" + key, "missing field");
  return *it;
}

inline std::int64_t as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) schema(path, "expected an integer");
  return j.get<std::int64_t>();
}

inline std::size_t as_size(const json& j, const std::string& path) {
  const auto v = as_int(j, path);
  if (v < 0) schema(path, "expected a non-negative integer");
  return static_cast<std::size_t>(v);
}

inline double as_real(const json& j, const std::string& path) {
  if (!j.is_number()) schema(path, "expected a number");
  return j.get<double>();
}

inline const json& as_array(const json& j, const std::string& path) {
  if (!j.is_array()) schema(path, "expected an array");
  return j;
}

/// Finite numbers as-is, non-finite as null.
inline json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace detail

// ---------------------------------------------------------------------------
// Structures

inline json to_json(const TensorNetworkStructure& g) {
  json edges = json::array();
  for (const auto& e : g.edges()) edges.push_back({{"endpoints", e.endpoints}, {"dim", e.dim}});
  return {{"vertices", g.vertices()}, {"edges", edges}};
}

/// Parses and validates a structure. Schema problems are reported with a
/// JSON-pointer style path; structural problems keep their own error kinds.
inline TensorNetworkStructure structure_from_json(const json& j) {
  using namespace detail;
  std::vector<VertexId> vertices;
  const auto& jv = as_array(field(j, "", "vertices"), "/vertices");
  for (std::size_t i = 0; i < jv.size(); ++i) {
    if (!jv[i].is_string()) schema("/vertices/" + std::to_string(i), "expected a string");
    vertices.push_back(jv[i].get<std::string>());
  }
  std::vector<Edge> edges;
  const auto& je = as_array(field(j, "", "edges"), "/edges");
  for (std::size_t i = 0; i < je.size(); ++i) {
    const std::string path = "/edges/" + std::to_string(i);
    Edge e;
    const auto& ends = as_array(field(je[i], path, "endpoints"), path + "/endpoints");
    for (std::size_t k = 0; k < ends.size(); ++k) {
      if (!ends[k].is_string()) schema(path + "/endpoints/" + std::to_string(k), "expected a string");
      e.endpoints.push_back(ends[k].get<std::string>());
    }
    e.dim = as_int(field(je[i], path, "dim"), path + "/dim");
    edges.push_back(std::move(e));
  }
  TensorNetworkStructure g(std::move(vertices), std::move(edges));
  validate(g);
  return g;
}

// ---------------------------------------------------------------------------
// Tensor literals

inline json to_json(const DenseTensor& t) {
  return {{"shape", t.shape()}, {"data", std::vector<double>(t.data().begin(), t.data().end())}};
}

inline DenseTensor tensor_from_json(const json& j, const std::string& path = "") {
  using namespace detail;
  Shape shape;
  const auto& js = as_array(field(j, path, "shape"), path + "/shape");
  for (std::size_t i = 0; i < js.size(); ++i) {
    const auto d = as_int(js[i], path + "/shape/" + std::to_string(i));
    if (d < 1) schema(path + "/shape/" + std::to_string(i), "dims must be positive");
    shape.push_back(static_cast<std::size_t>(d));
  }
  std::vector<double> data;
  const auto& jd = as_array(field(j, path, "data"), path + "/data");
  for (std::size_t i = 0; i < jd.size(); ++i) data.push_back(as_real(jd[i], path + "/data/" + std::to_string(i)));
  if (data.size() != shape_size(shape)) schema(path + "/data", "length does not match shape");
  return DenseTensor(std::move(shape), std::move(data));
}

inline json to_json(const CoreAssignment& cores) {
  json j = json::object();
  for (const auto& [v, c] : cores) j[v] = to_json(c);
  return j;
}

inline CoreAssignment cores_from_json(const json& j, const std::string& path = "") {
  if (!j.is_object()) detail::schema(path, "expected an object of tensor literals");
  CoreAssignment cores;
  for (const auto& [k, v] : j.items()) cores.emplace(k, tensor_from_json(v, path + "/" + k));
  return cores;
}

// ---------------------------------------------------------------------------
// Certificates

inline json to_json(const ShatteringCertificate& c) {
  json passthrough = json::array();
  for (const auto& s : c.passthrough) passthrough.push_back({{"vertex", s.vertex}, {"offset", s.offset}});
  return {{"construction", c.construction},
          {"claimed_bound", c.claimed_bound},
          {"structure", to_json(c.structure)},
          {"free_vertices", c.free_vertices},
          {"fixed_cores", to_json(c.fixed_cores())},
          {"free_core_templates",
           [&] {
             json t = json::object();
             for (const auto& v : c.free_vertices) t[v] = to_json(c.cores.at(v));
             return t;
           }()},
          {"index_base", 0},
          {"index_set", c.index_set},
          {"passthrough", passthrough}};
}

inline ShatteringCertificate certificate_from_json(const json& j) {
  using namespace detail;
  ShatteringCertificate c;
  const auto& name = field(j, "", "construction");
  if (!name.is_string()) schema("/construction", "expected a string");
  c.construction = name.get<std::string>();
  c.claimed_bound = as_real(field(j, "", "claimed_bound"), "/claimed_bound");
  c.structure = structure_from_json(field(j, "", "structure"));
  for (const auto& v : as_array(field(j, "", "free_vertices"), "/free_vertices")) {
    if (!v.is_string()) schema("/free_vertices", "expected strings");
    c.free_vertices.push_back(v.get<std::string>());
  }
  c.cores = cores_from_json(field(j, "", "fixed_cores"), "/fixed_cores");
  for (auto& [v, t] : cores_from_json(field(j, "", "free_core_templates"), "/free_core_templates"))
    c.cores.insert_or_assign(v, std::move(t));
  const auto& idx = as_array(field(j, "", "index_set"), "/index_set");
  for (std::size_t i = 0; i < idx.size(); ++i) {
    MultiIndex m;
    for (const auto& x : as_array(idx[i], "/index_set/" + std::to_string(i)))
      m.push_back(as_size(x, "/index_set/" + std::to_string(i)));
    c.index_set.push_back(std::move(m));
  }
  const auto& pt = as_array(field(j, "", "passthrough"), "/passthrough");
  for (std::size_t i = 0; i < pt.size(); ++i) {
    const std::string path = "/passthrough/" + std::to_string(i);
    const auto& v = field(pt[i], path, "vertex");
    if (!v.is_string()) schema(path + "/vertex", "expected a string");
    c.passthrough.push_back({v.get<std::string>(), as_size(field(pt[i], path, "offset"), path + "/offset")});
  }
  return c;
}

inline json to_json(const VerificationRecord& r) {
  return {{"mode", r.mode == VerifyMode::exhaustive ? "exhaustive" : "passthrough"},
          {"index_set_size", r.index_set_size},
          {"claimed_bound", r.claimed_bound},
          {"passthrough_probes", r.passthrough_probes},
          {"enumerated_all", r.enumerated_all},
          {"patterns_checked", r.patterns_checked},
          {"patterns_realized", r.patterns_realized},
          {"elapsed_seconds", r.elapsed_seconds}};
}

// ---------------------------------------------------------------------------
// Bound reports

inline json to_json(const StructureSummary& s) {
  return {{"vertex_count", s.vertex_count},
          {"param_count", s.param_count},
          {"output_shape", s.output_shape},
          {"dangling_count", s.dangling_count}};
}

inline json to_json(const LowerBoundRecord& r) {
  return {{"family", std::string(to_string(r.family))},
          {"formula", r.formula_name},
          {"value", r.value ? json(*r.value) : json("n/a")},
          {"condition_met", r.condition_met},
          {"condition", r.condition_text}};
}

inline json to_json(const BoundReport& rep) {
  json growth = json::array(), gen = json::array(), lower = json::array(), grid = json::array();
  for (const auto& g : rep.growth) {
    growth.push_back({{"n", g.n}, {"log2_value", detail::number(g.bound.log2_value)}, {"value", detail::number(g.bound.value)}});
    grid.push_back(g.n);
  }
  for (const auto& g : rep.generalization)
    gen.push_back({{"n", g.n}, {"delta", rep.delta}, {"epsilon", detail::number(g.epsilon)}});
  for (const auto& l : rep.lower) lower.push_back(to_json(l));
  json family = nullptr;
  if (rep.family)
    family = {{"family", std::string(to_string(rep.family->family))},
              {"p", rep.family->p},
              {"d", rep.family->d},
              {"r", rep.family->r}};
  return {{"structure_summary", to_json(rep.summary)},
          {"inputs",
           {{"N_G", rep.summary.param_count}, {"V", rep.summary.vertex_count}, {"n_grid", grid}, {"delta", rep.delta}}},
          {"log_bases",
           {{"upper_bound_pdim", kPdimLogBase},
            {"growth_function_bound_log2_value", "2"},
            {"generalization_bound", kGeneralizationLogBase}}},
          {"upper_bound_pdim", rep.upper_bound_pdim},
          {"growth_function_bound", growth},
          {"generalization_bound", gen},
          {"family", family},
          {"lower_bounds", lower},
          {"upper_dominates_lower", rep.upper_dominates_lower}};
}

// ---------------------------------------------------------------------------
// Experiment configuration and results

inline json to_json(const ExperimentConfig& c) {
  return {{"target_shape", c.target_shape}, {"target_rank", c.target_rank}, {"model_rank", c.model_rank},
          {"train_size", c.train_size},     {"test_size", c.test_size},     {"learning_rate", c.learning_rate},
          {"epochs", c.epochs},             {"batch_size", c.batch_size},   {"runs", c.runs},
          {"seed", c.seed},                 {"delta", c.delta}};
}

inline json to_json(const SweepConfig& s) {
  json j = to_json(s.base);
  j["train_sizes"] = s.train_sizes;
  j["model_ranks"] = s.model_ranks;
  return j;
}

/// Reads an experiment config; every field is optional and defaults to the
/// ExperimentConfig defaults. `train_sizes` / `model_ranks` make it a sweep.
inline SweepConfig sweep_from_json(const json& j) {
  using namespace detail;
  if (!j.is_object()) schema("", "expected an object");
  static const std::vector<std::string> known{"target_shape", "target_rank", "model_rank", "train_size",
                                              "test_size",    "learning_rate", "epochs",   "batch_size",
                                              "runs",         "seed",        "delta",      "train_sizes",
                                              "model_ranks"};
  for (const auto& [k, v] : j.items())
    if (std::find(known.begin(), known.end(), k) == known.end()) schema("/" + k, "unknown field");
  SweepConfig s;
  ExperimentConfig& c = s.base;
  if (j.contains("target_shape")) {
    c.target_shape.clear();
    const auto& a = as_array(j["target_shape"], "/target_shape");
    for (std::size_t i = 0; i < a.size(); ++i) c.target_shape.push_back(as_int(a[i], "/target_shape/" + std::to_string(i)));
  }
  if (j.contains("target_rank")) c.target_rank = as_int(j["target_rank"], "/target_rank");
  if (j.contains("model_rank")) c.model_rank = as_int(j["model_rank"], "/model_rank");
  if (j.contains("train_size")) c.train_size = as_size(j["train_size"], "/train_size");
  if (j.contains("test_size")) c.test_size = as_size(j["test_size"], "/test_size");
  if (j.contains("learning_rate")) c.learning_rate = as_real(j["learning_rate"], "/learning_rate");
  if (j.contains("epochs")) c.epochs = as_size(j["epochs"], "/epochs");
  if (j.contains("batch_size")) c.batch_size = as_size(j["batch_size"], "/batch_size");
  if (j.contains("runs")) c.runs = as_size(j["runs"], "/runs");
  if (j.contains("seed")) c.seed = static_cast<std::uint64_t>(as_size(j["seed"], "/seed"));
  if (j.contains("delta")) c.delta = as_real(j["delta"], "/delta");
  if (j.contains("train_sizes"))
    for (const auto& x : as_array(j["train_sizes"], "/train_sizes")) s.train_sizes.push_back(as_size(x, "/train_sizes"));
  if (j.contains("model_ranks"))
    for (const auto& x : as_array(j["model_ranks"], "/model_ranks")) s.model_ranks.push_back(as_int(x, "/model_ranks"));
  c.check();
  return s;
}

/// Fixed 12-significant-digit rendering used by every CSV; non-finite values
/// are written as "nan".
inline std::string fmt(double v) {
  if (!std::isfinite(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string runs_csv(const std::vector<ExperimentRecord>& recs) {
  std::ostringstream out;
  out << "run_id,n,model_rank,train_risk,test_risk,gap,log2_gap,theoretical_bound,seed\n";
  for (const auto& r : recs)
    out << r.run_id << ',' << r.n << ',' << r.model_rank << ',' << fmt(r.train_risk) << ',' << fmt(r.test_risk) << ','
        << fmt(r.gap) << ',' << (r.gap > 0 ? fmt(std::log2(r.gap)) : std::string("nan")) << ','
        << fmt(r.theoretical_bound) << ',' << r.seed << '\n';
  return out.str();
}

inline std::string aggregate_csv(const std::vector<CellSummary>& cells) {
  std::ostringstream out;
  out << "n,model_rank,runs,mean_train_risk,mean_test_risk,mean_gap,std_gap,log2_mean_gap,positive_gap_runs,"
         "mean_log2_gap,std_log2_gap,theoretical_bound,log2_theoretical_bound\n";
  for (const auto& c : cells)
    out << c.n << ',' << c.model_rank << ',' << c.runs << ',' << fmt(c.mean_train_risk) << ',' << fmt(c.mean_test_risk)
        << ',' << fmt(c.mean_gap) << ',' << fmt(c.std_gap) << ','
        << (c.mean_gap > 0 ? fmt(std::log2(c.mean_gap)) : std::string("nan")) << ',' << c.positive_gap_runs << ','
        << fmt(c.mean_log2_gap) << ',' << fmt(c.std_log2_gap) << ',' << fmt(c.theoretical_bound) << ','
        << fmt(std::log2(c.theoretical_bound)) << '\n';
  return out.str();
}

/// Theoretical bound for every (n, rank) on the sweep grid.
inline std::string bound_curve_csv(const SweepConfig& s, const std::vector<CellSummary>& cells) {
  std::ostringstream out;
  out << "n,model_rank,param_count,vertex_count,delta,theoretical_bound,log2_theoretical_bound\n";
  for (const auto& c : cells) {
    const auto g = tt_structure(s.base.target_shape, c.model_rank);
    const double b = generalization_bound(g, static_cast<double>(c.n), s.base.delta);
    out << c.n << ',' << c.model_rank << ',' << param_count(g) << ',' << g.vertex_count() << ',' << fmt(s.base.delta)
        << ',' << fmt(b) << ',' << fmt(std::log2(b)) << '\n';
  }
  return out.str();
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::schema_violation, path, "cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::schema_violation, path, std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace tncap::io
