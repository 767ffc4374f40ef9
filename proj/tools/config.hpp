// Copyright 2026 The lrsim Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Experiment configuration files: YAML parsing and validation. The grammar
// is documented in README.md. Parsing never throws; every problem becomes a
// Diagnostic naming the field and, where known, the line.

#ifndef LRSIM_TOOLS_CONFIG_HPP
#define LRSIM_TOOLS_CONFIG_HPP

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <sstream>
#include <vector>

#include "lrsim/lrsim.hpp"

namespace lrsim::cli {

struct Diagnostic {
  ErrorKind kind = ErrorKind::ConfigParse;
  std::string field;
  int line = 0;  // 1-based, 0 when unknown
  std::string message;

  std::string str() const {
    std::string out = std::string(lrsim::to_string(kind));
    if (!field.empty()) out += " at " + field;
    if (line > 0) out += " (line " + std::to_string(line) + ")";
    return out + ": " + message;
  }
};

inline const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds = {
      "leakage_vs_distance", "truncation_vs_buffer", "covariance_cone",  "trotter_order",
      "picture_duality",     "cptp_audit",           "jw_identity_suite", "fermionic_leakage",
      "graph_metrics",       "composition_adjoint"};
  return kinds;
}

/// Pauli string, or the staggered sum of (-1)^v P_v over all sites.
struct SpinObservable {
  std::vector<std::pair<Site, char>> factors;
  std::optional<char> staggered;
};

struct BoundsSpec {
  std::optional<double> v;
  std::optional<double> c;
  std::optional<int> mu;
  std::optional<double> m;
};

struct ExperimentConfig {
  std::string name;
  std::uint64_t seed = 1;
  double tolerance = kDefaultTol;
  std::string kind;

  // Spin model.
  std::optional<InteractionGraph> graph;
  std::vector<LindbladTerm> terms;
  bool strict = false;

  // Fermionic model.
  std::optional<int> fermion_sites;
  std::vector<FermionTerm> fermion_terms;

  // Experiment grid.
  double s = 0.0;
  std::optional<double> t;
  std::optional<double> bt;  // b (t - s)
  std::optional<SpinObservable> observable_a, observable_b;
  std::vector<SpinObservable> observables_b;
  std::optional<FermionObservable> fermion_a;
  std::vector<FermionObservable> fermion_b;
  bool allow_odd = false;
  std::vector<VertexSet> regions;
  std::vector<double> times;
  std::optional<double> vt_max;  // v (t - s) upper end for generated times
  std::size_t time_count = 5;
  std::vector<std::size_t> steps;
  std::vector<double> intermediate;  // r values for composition
  std::size_t pairs = 20;
  std::size_t random_liouvillians = 0;
  int max_n = 5;
  std::vector<std::string> state_labels;  // product state, or {"random"}
  double fit_from = -std::numeric_limits<double>::infinity();
  std::map<std::string, double> criteria;

  BoundsSpec bounds;
  std::string csv;
  std::string json;
};

namespace detail {

// Missing keys of a const node are "zombie" nodes whose type queries throw.
inline bool is_map(const YAML::Node& n) { return n.IsDefined() && n.IsMap(); }
inline bool is_sequence(const YAML::Node& n) { return n.IsDefined() && n.IsSequence(); }
inline bool is_scalar(const YAML::Node& n) { return n.IsDefined() && n.IsScalar(); }

/// Error message without its "Kind: " prefix.
inline std::string bare(const Error& e) {
  const std::string what = e.what();
  const std::string prefix = std::string(lrsim::to_string(e.kind())) + ": ";
  return what.rfind(prefix, 0) == 0 ? what.substr(prefix.size()) : what;
}

class Reader {
 public:
  std::vector<Diagnostic> diags;

  void add(ErrorKind kind, const std::string& field, const YAML::Node& node,
           const std::string& msg) {
    diags.push_back(Diagnostic{kind, field, line_of(node), msg});
  }

  static int line_of(const YAML::Node& node) {
    if (!node.IsDefined()) return 0;
    const auto mark = node.Mark();
    return mark.is_null() ? 0 : mark.line + 1;
  }

  void allow_keys(const YAML::Node& map, const std::string& path,
                  const std::set<std::string>& allowed) {
    if (!is_map(map)) return;
    for (const auto& kv : map) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) {
        add(ErrorKind::ConfigParse, join(path, key), kv.first, "unknown key");
      }
    }
  }

  template <class T>
  std::optional<T> scalar(const YAML::Node& node, const std::string& path) {
    if (!node.IsDefined() || node.IsNull()) return std::nullopt;
    if (!detail::is_scalar(node)) {
      add(ErrorKind::ConfigParse, path, node, "expected a scalar");
      return std::nullopt;
    }
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      add(ErrorKind::ConfigParse, path, node, "cannot read '" + node.Scalar() + "'");
      return std::nullopt;
    }
  }

  template <class T>
  std::optional<T> required(const YAML::Node& map, const std::string& key,
                            const std::string& path) {
    const YAML::Node node = map[key];
    if (!node.IsDefined() || node.IsNull()) {
      add(ErrorKind::ConfigParse, join(path, key), map, "missing required field");
      return std::nullopt;
    }
    return scalar<T>(node, join(path, key));
  }

  template <class T>
  std::vector<T> list(const YAML::Node& node, const std::string& path) {
    std::vector<T> out;
    if (!node.IsDefined() || node.IsNull()) return out;
    if (!is_sequence(node)) {
      add(ErrorKind::ConfigParse, path, node, "expected a list");
      return out;
    }
    for (std::size_t i = 0; i < node.size(); ++i) {
      if (auto v = scalar<T>(node[i], path + "[" + std::to_string(i) + "]")) out.push_back(*v);
    }
    return out;
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }
};

inline std::optional<TimeSchedule> read_schedule(Reader& r, const YAML::Node& node,
                                                 const std::string& path) {
  if (!node.IsDefined() || node.IsNull()) return TimeSchedule::constant(1.0);
  if (is_scalar(node)) {
    if (auto c = r.scalar<double>(node, path)) return TimeSchedule::constant(*c);
    return std::nullopt;
  }
  r.allow_keys(node, path, {"constant", "pieces"});
  if (node["constant"]) {
    if (auto c = r.scalar<double>(node["constant"], path + ".constant")) {
      return TimeSchedule::constant(*c);
    }
    return std::nullopt;
  }
  const YAML::Node pieces = node["pieces"];
  if (!is_sequence(pieces) || pieces.size() == 0) {
    r.add(ErrorKind::ConfigParse, path, node, "schedule needs 'constant' or a 'pieces' list");
    return std::nullopt;
  }
  std::vector<SchedulePiece> out;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const std::string p = path + ".pieces[" + std::to_string(i) + "]";
    r.allow_keys(pieces[i], p, {"start", "end", "poly"});
    auto start = r.required<double>(pieces[i], "start", p);
    auto end = r.required<double>(pieces[i], "end", p);
    auto poly = r.list<double>(pieces[i]["poly"], p + ".poly");
    if (!start || !end) return std::nullopt;
    if (poly.empty()) poly = {1.0};
    out.push_back(SchedulePiece{*start, *end, poly});
  }
  try {
    return TimeSchedule::piecewise(std::move(out));
  } catch (const Error& e) {
    r.add(ErrorKind::ConfigParse, path, node, bare(e));
    return std::nullopt;
  }
}

/// Site list from "all", or an explicit list of ints.
inline std::vector<Site> read_site_targets(Reader& r, const YAML::Node& node,
                                           const std::string& path,
                                           const std::vector<Site>& vertices) {
  if (is_scalar(node) && node.Scalar() == "all") return vertices;
  return r.list<Site>(node, path);
}

/// Pairs from "chain" (consecutive declared vertices) or a list of pairs.
inline std::vector<std::vector<Site>> read_edge_targets(Reader& r, const YAML::Node& node,
                                                        const std::string& path,
                                                        const std::vector<Site>& vertices) {
  std::vector<std::vector<Site>> out;
  if (is_scalar(node) && node.Scalar() == "chain") {
    for (std::size_t i = 0; i + 1 < vertices.size(); ++i) {
      out.push_back({vertices[i], vertices[i + 1]});
    }
    return out;
  }
  if (!is_sequence(node)) {
    r.add(ErrorKind::ConfigParse, path, node, "expected 'chain' or a list of site lists");
    return out;
  }
  for (std::size_t i = 0; i < node.size(); ++i) {
    auto sites = r.list<Site>(node[i], path + "[" + std::to_string(i) + "]");
    if (!sites.empty()) out.push_back(sites);
  }
  return out;
}

inline std::vector<Site> read_vertices(Reader& r, const YAML::Node& node,
                                       const std::string& path) {
  std::vector<Site> out;
  if (is_scalar(node)) {
    if (auto n = r.scalar<int>(node, path)) {
      if (*n < 1) {
        r.add(ErrorKind::ModelInvalid, path, node, "need at least one site");
      } else {
        for (int v = 1; v <= *n; ++v) out.push_back(v);
      }
    }
    return out;
  }
  return r.list<Site>(node, path);
}

inline std::optional<cplx> read_complex(Reader& r, const YAML::Node& node,
                                        const std::string& path) {
  if (is_sequence(node)) {
    const auto parts = r.list<double>(node, path);
    if (parts.size() != 2) {
      r.add(ErrorKind::ConfigParse, path, node, "complex entry is [re, im]");
      return std::nullopt;
    }
    return cplx(parts[0], parts[1]);
  }
  if (auto x = r.scalar<double>(node, path)) return cplx(*x, 0.0);
  return std::nullopt;
}

/// Square matrix given as a list of rows; entries are reals or [re, im].
inline std::optional<Matrix> read_matrix(Reader& r, const YAML::Node& node,
                                         const std::string& path) {
  if (!is_sequence(node) || node.size() == 0) {
    r.add(ErrorKind::ConfigParse, path, node, "expected a list of matrix rows");
    return std::nullopt;
  }
  const auto n = static_cast<Eigen::Index>(node.size());
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const YAML::Node row = node[static_cast<std::size_t>(i)];
    const std::string rp = path + "[" + std::to_string(i) + "]";
    if (!is_sequence(row) || static_cast<Eigen::Index>(row.size()) != n) {
      r.add(ErrorKind::ConfigParse, rp, row, "matrix must be square");
      return std::nullopt;
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      auto z = read_complex(r, row[static_cast<std::size_t>(j)], rp + "[" + std::to_string(j) + "]");
      if (!z) return std::nullopt;
      m(i, j) = *z;
    }
  }
  return m;
}

inline Matrix spin_builder(const std::string& builder, double strength) {
  if (builder == "heisenberg_edge") return models::heisenberg_edge(strength);
  if (builder == "xy_edge") return models::xy_edge(strength);
  if (builder == "zz_edge") return models::zz_edge(strength);
  if (builder == "hopping_edge") return jw_map(hopping(1, 2, strength), 2).matrix;
  if (builder == "tfim_site" || builder == "transverse_field_site") {
    return models::transverse_field_site(strength);
  }
  return Matrix();
}

inline bool is_edge_builder(const std::string& b) {
  return b == "heisenberg_edge" || b == "xy_edge" || b == "zz_edge" || b == "hopping_edge";
}
inline bool is_site_builder(const std::string& b) {
  return b == "tfim_site" || b == "transverse_field_site" || b == "dephasing_site" ||
         b == "amplitude_damping_site";
}

/// A term given by its support and explicit local matrices.
inline void read_explicit_term(Reader& r, const YAML::Node& t, const std::string& p,
                               const TimeSchedule& schedule, ExperimentConfig& cfg) {
  if (!t["support"].IsDefined()) {
    r.add(ErrorKind::ConfigParse, p, t, "term needs 'builder' or 'support' with matrices");
    return;
  }
  const auto sites = r.list<Site>(t["support"], p + ".support");
  if (sites.empty()) return;
  Matrix h;
  if (t["hamiltonian"].IsDefined()) {
    auto m = read_matrix(r, t["hamiltonian"], p + ".hamiltonian");
    if (!m) return;
    h = *m;
  }
  std::vector<Matrix> jumps;
  const YAML::Node js = t["jumps"];
  if (js.IsDefined() && !js.IsNull()) {
    if (!is_sequence(js)) {
      r.add(ErrorKind::ConfigParse, p + ".jumps", js, "expected a list of matrices");
      return;
    }
    for (std::size_t k = 0; k < js.size(); ++k) {
      auto m = read_matrix(r, js[k], p + ".jumps[" + std::to_string(k) + "]");
      if (!m) return;
      jumps.push_back(*m);
    }
  }
  const std::string label = r.scalar<std::string>(t["label"], p + ".label").value_or("explicit");
  try {
    for (Site v : sites) {
      if (!cfg.graph->has_vertex(v)) {
        throw Error(ErrorKind::UnknownVertex, "site " + std::to_string(v) + " is not in the model");
      }
    }
    cfg.terms.push_back(make_term(sites, h, jumps, *cfg.graph, schedule, label));
    if (cfg.strict && !cfg.graph->edge_index(cfg.terms.back().support())) {
      throw Error(ErrorKind::SupportNotInGraph,
                  to_string(cfg.terms.back().support()) + " is not a declared hyperedge");
    }
  } catch (const Error& e) {
    r.add(e.kind(), p + ".support", t["support"], bare(e));
  }
}

inline void read_spin_model(Reader& r, const YAML::Node& node, ExperimentConfig& cfg) {
  const std::string path = "model";
  r.allow_keys(node, path, {"sites", "local_dim", "hyperedges", "strict", "terms"});
  const auto vertices = read_vertices(r, node["sites"], path + ".sites");
  if (!node["sites"]) r.add(ErrorKind::ConfigParse, path + ".sites", node, "missing required field");
  std::vector<int> local_dims;
  if (is_sequence(node["local_dim"])) {
    local_dims = r.list<int>(node["local_dim"], path + ".local_dim");
    if (local_dims.size() != vertices.size() && !vertices.empty()) {
      r.add(ErrorKind::ModelInvalid, path + ".local_dim", node["local_dim"],
            "need one local dimension per site");
      return;
    }
  } else {
    local_dims.assign(vertices.size(),
                      r.scalar<int>(node["local_dim"], path + ".local_dim").value_or(2));
  }
  cfg.strict = r.scalar<bool>(node["strict"], path + ".strict").value_or(false);
  if (vertices.empty()) return;
  std::vector<VertexSet> edges;
  const YAML::Node he = node["hyperedges"];
  if (he.IsDefined() && !he.IsNull()) {
    for (const auto& e : read_edge_targets(r, he, path + ".hyperedges", vertices)) {
      edges.emplace_back(e.begin(), e.end());
    }
  }
  std::map<Site, int> dims;
  for (std::size_t i = 0; i < vertices.size(); ++i) dims[vertices[i]] = local_dims[i];
  try {
    cfg.graph = InteractionGraph(vertices, edges, dims);
  } catch (const Error& e) {
    r.add(e.kind(), path + ".hyperedges", he.IsDefined() ? he : node, bare(e));
    return;
  }
  const YAML::Node terms = node["terms"];
  if (!terms.IsDefined() || terms.IsNull()) return;
  if (!is_sequence(terms)) {
    r.add(ErrorKind::ConfigParse, path + ".terms", terms, "expected a list");
    return;
  }
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const std::string p = path + ".terms[" + std::to_string(i) + "]";
    const YAML::Node t = terms[i];
    r.allow_keys(t, p, {"builder", "on", "strength", "schedule", "label", "support",
                        "hamiltonian", "jumps"});
    const auto schedule = read_schedule(r, t["schedule"], p + ".schedule");
    if (!schedule) continue;
    if (!t["builder"].IsDefined()) {
      read_explicit_term(r, t, p, *schedule, cfg);
      continue;
    }
    const auto builder = r.required<std::string>(t, "builder", p);
    if (!builder) continue;
    const double strength = r.scalar<double>(t["strength"], p + ".strength").value_or(1.0);
    const std::string label = r.scalar<std::string>(t["label"], p + ".label").value_or(*builder);
    std::vector<std::vector<Site>> targets;
    if (is_edge_builder(*builder)) {
      targets = read_edge_targets(r, t["on"].IsDefined() ? t["on"] : YAML::Node("chain"),
                                  p + ".on", vertices);
    } else if (is_site_builder(*builder)) {
      const YAML::Node on = t["on"].IsDefined() ? t["on"] : YAML::Node("all");
      for (Site v : read_site_targets(r, on, p + ".on", vertices)) targets.push_back({v});
    } else {
      r.add(ErrorKind::ConfigParse, p + ".builder", t["builder"],
            "unknown builder '" + *builder + "'");
      continue;
    }
    for (const auto& sites : targets) {
      try {
        for (Site v : sites) {
          if (!cfg.graph->has_vertex(v)) {
            throw Error(ErrorKind::UnknownVertex, "site " + std::to_string(v) + " is not in the model");
          }
        }
        if (is_edge_builder(*builder) && sites.size() != 2) {
          throw Error(ErrorKind::ModelInvalid, *builder + " needs exactly two sites");
        }
        for (Site v : sites) {
          if (cfg.graph->local_dim(v) != 2) {
            throw Error(ErrorKind::ModelInvalid, "built-in models are for qubits");
          }
        }
        Matrix h = spin_builder(*builder, strength);
        std::vector<Matrix> jumps;
        if (*builder == "dephasing_site") jumps.push_back(models::dephasing_jump(strength));
        if (*builder == "amplitude_damping_site") {
          jumps.push_back(models::amplitude_damping_jump(strength));
        }
        if ((*builder == "dephasing_site" || *builder == "amplitude_damping_site") && strength < 0) {
          throw Error(ErrorKind::ModelInvalid, "rates must be non-negative");
        }
        cfg.terms.push_back(make_term(sites, h, jumps, *cfg.graph, *schedule, label));
        if (cfg.strict && !cfg.graph->edge_index(cfg.terms.back().support())) {
          throw Error(ErrorKind::SupportNotInGraph,
                      to_string(cfg.terms.back().support()) + " is not a declared hyperedge");
        }
      } catch (const Error& e) {
        r.add(e.kind(), p + ".on", t["on"].IsDefined() ? t["on"] : t, bare(e));
      }
    }
  }
}

inline std::optional<FermionPolynomial> read_monomials(Reader& r, const YAML::Node& node,
                                                       const std::string& path) {
  if (!is_sequence(node) || node.size() == 0) {
    r.add(ErrorKind::ConfigParse, path, node, "expected a non-empty list of monomials");
    return std::nullopt;
  }
  FermionPolynomial poly;
  for (std::size_t i = 0; i < node.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    r.allow_keys(node[i], p, {"factors", "coefficient"});
    FermionMonomial m;
    m.factors = r.list<int>(node[i]["factors"], p + ".factors");
    const YAML::Node c = node[i]["coefficient"];
    if (is_sequence(c)) {
      const auto parts = r.list<double>(c, p + ".coefficient");
      if (parts.size() != 2) {
        r.add(ErrorKind::ConfigParse, p + ".coefficient", c, "complex coefficient is [re, im]");
        return std::nullopt;
      }
      m.coefficient = cplx(parts[0], parts[1]);
    } else {
      m.coefficient = r.scalar<double>(c, p + ".coefficient").value_or(1.0);
    }
    poly.monomials.push_back(std::move(m));
  }
  return poly;
}

inline void check_fermion_sites(const FermionPolynomial& poly, const VertexSet& support, int n) {
  for (Site v : support) {
    if (v < 1 || v > n) throw Error(ErrorKind::UnknownVertex, "site " + std::to_string(v));
  }
  for (const auto& m : poly.monomials) {
    for (int f : m.factors) {
      if (f == 0 || std::abs(f) > n) {
        throw Error(ErrorKind::UnknownVertex, "factor " + std::to_string(f));
      }
      if (!support.count(std::abs(f))) {
        throw Error(ErrorKind::ModelInvalid,
                    "factor " + std::to_string(f) + " outside declared support");
      }
    }
  }
}

inline void read_fermion_model(Reader& r, const YAML::Node& node, ExperimentConfig& cfg) {
  const std::string path = "fermion_model";
  r.allow_keys(node, path, {"sites", "terms"});
  const auto n = r.required<int>(node, "sites", path);
  if (!n) return;
  if (*n < 1 || *n > 12) {
    r.add(ErrorKind::ModelInvalid, path + ".sites", node["sites"], "need 1..12 sites");
    return;
  }
  cfg.fermion_sites = *n;
  std::vector<Site> vertices;
  for (int v = 1; v <= *n; ++v) vertices.push_back(v);
  const YAML::Node terms = node["terms"];
  if (!is_sequence(terms)) {
    r.add(ErrorKind::ConfigParse, path + ".terms", node, "expected a list of terms");
    return;
  }
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const std::string p = path + ".terms[" + std::to_string(i) + "]";
    const YAML::Node t = terms[i];
    r.allow_keys(t, p, {"builder", "on", "strength", "schedule", "support", "monomials"});
    const auto schedule = read_schedule(r, t["schedule"], p + ".schedule");
    if (!schedule) continue;
    const double strength = r.scalar<double>(t["strength"], p + ".strength").value_or(1.0);
    std::vector<FermionTerm> built;
    if (t["builder"]) {
      const auto builder = r.scalar<std::string>(t["builder"], p + ".builder");
      if (!builder) continue;
      if (*builder == "hopping_edge") {
        const YAML::Node on = t["on"].IsDefined() ? t["on"] : YAML::Node("chain");
        for (const auto& e : read_edge_targets(r, on, p + ".on", vertices)) {
          if (e.size() != 2) {
            r.add(ErrorKind::ModelInvalid, p + ".on", on, "hopping needs two sites");
            continue;
          }
          built.push_back(FermionTerm{{e[0], e[1]}, hopping(e[0], e[1], strength), *schedule});
        }
      } else if (*builder == "number_site") {
        const YAML::Node on = t["on"].IsDefined() ? t["on"] : YAML::Node("all");
        for (Site v : read_site_targets(r, on, p + ".on", vertices)) {
          built.push_back(FermionTerm{{v}, cplx(strength) * number_op(v), *schedule});
        }
      } else {
        r.add(ErrorKind::ConfigParse, p + ".builder", t["builder"],
              "unknown fermionic builder '" + *builder + "'");
        continue;
      }
    } else {
      const auto support = r.list<Site>(t["support"], p + ".support");
      const auto poly = read_monomials(r, t["monomials"], p + ".monomials");
      if (support.empty() || !poly) {
        if (support.empty()) r.add(ErrorKind::ConfigParse, p + ".support", t, "missing support");
        continue;
      }
      built.push_back(FermionTerm{{support.begin(), support.end()}, *poly, *schedule});
    }
    for (auto& term : built) {
      try {
        check_fermion_sites(term.poly, term.support, *n);
        if (parity_of(term.poly) != Parity::Even) {
          throw Error(ErrorKind::OddParity, "Hamiltonian terms must be even polynomials");
        }
        cfg.fermion_terms.push_back(std::move(term));
      } catch (const Error& e) {
        r.add(e.kind(), p, t, bare(e));
      }
    }
  }
}

inline std::optional<SpinObservable> read_spin_observable(Reader& r, const YAML::Node& node,
                                                          const std::string& path) {
  if (!is_map(node)) {
    r.add(ErrorKind::ConfigParse, path, node, "expected {pauli, site} or {pauli_string}");
    return std::nullopt;
  }
  r.allow_keys(node, path, {"pauli", "site", "pauli_string", "staggered"});
  SpinObservable obs;
  if (node["staggered"]) {
    const auto pauli = r.scalar<std::string>(node["staggered"], path + ".staggered");
    if (!pauli) return std::nullopt;
    const char c = pauli->empty() ? '?' : (*pauli)[0];
    if (c != 'X' && c != 'Y' && c != 'Z') {
      r.add(ErrorKind::ConfigParse, path + ".staggered", node["staggered"], "expected X, Y or Z");
      return std::nullopt;
    }
    obs.staggered = c;
    return obs;
  }
  if (node["pauli_string"]) {
    const YAML::Node ps = node["pauli_string"];
    if (!is_sequence(ps)) {
      r.add(ErrorKind::ConfigParse, path + ".pauli_string", ps, "expected [[site, P], ...]");
      return std::nullopt;
    }
    for (std::size_t i = 0; i < ps.size(); ++i) {
      const std::string p = path + ".pauli_string[" + std::to_string(i) + "]";
      if (!is_sequence(ps[i]) || ps[i].size() != 2) {
        r.add(ErrorKind::ConfigParse, p, ps[i], "expected [site, P]");
        return std::nullopt;
      }
      const auto site = r.scalar<int>(ps[i][0], p);
      const auto pauli = r.scalar<std::string>(ps[i][1], p);
      if (!site || !pauli) return std::nullopt;
      obs.factors.emplace_back(*site, pauli->empty() ? '?' : (*pauli)[0]);
    }
  } else {
    const auto pauli = r.required<std::string>(node, "pauli", path);
    const auto site = r.required<int>(node, "site", path);
    if (!pauli || !site) return std::nullopt;
    obs.factors.emplace_back(*site, pauli->empty() ? '?' : (*pauli)[0]);
  }
  for (const auto& [site, p] : obs.factors) {
    if (p != 'I' && p != 'X' && p != 'Y' && p != 'Z') {
      r.add(ErrorKind::ConfigParse, path, node, "Pauli label must be I, X, Y or Z");
      return std::nullopt;
    }
  }
  return obs;
}

/// {pauli: Z, sites: [..]} or a list of single observables.
inline std::vector<SpinObservable> read_spin_observables(Reader& r, const YAML::Node& node,
                                                         const std::string& path) {
  std::vector<SpinObservable> out;
  if (is_map(node) && node["sites"]) {
    r.allow_keys(node, path, {"pauli", "sites"});
    const auto pauli = r.required<std::string>(node, "pauli", path);
    for (Site v : r.list<Site>(node["sites"], path + ".sites")) {
      if (!pauli) break;
      SpinObservable obs;
      obs.factors.emplace_back(v, pauli->empty() ? '?' : (*pauli)[0]);
      out.push_back(obs);
    }
    return out;
  }
  if (!is_sequence(node)) {
    r.add(ErrorKind::ConfigParse, path, node, "expected {pauli, sites} or a list");
    return out;
  }
  for (std::size_t i = 0; i < node.size(); ++i) {
    if (auto o = read_spin_observable(r, node[i], path + "[" + std::to_string(i) + "]")) {
      out.push_back(*o);
    }
  }
  return out;
}

inline std::optional<FermionObservable> read_fermion_observable(Reader& r, const YAML::Node& node,
                                                                const std::string& path) {
  if (!is_map(node)) {
    r.add(ErrorKind::ConfigParse, path, node, "expected {number} or {support, monomials}");
    return std::nullopt;
  }
  r.allow_keys(node, path, {"number", "support", "monomials"});
  if (node["number"]) {
    const auto site = r.scalar<int>(node["number"], path + ".number");
    if (!site) return std::nullopt;
    return FermionObservable{{*site}, number_op(*site)};
  }
  const auto support = r.list<Site>(node["support"], path + ".support");
  const auto poly = read_monomials(r, node["monomials"], path + ".monomials");
  if (support.empty() || !poly) {
    if (support.empty()) r.add(ErrorKind::ConfigParse, path + ".support", node, "missing support");
    return std::nullopt;
  }
  return FermionObservable{{support.begin(), support.end()}, *poly};
}

inline std::vector<FermionObservable> read_fermion_observables(Reader& r, const YAML::Node& node,
                                                               const std::string& path) {
  std::vector<FermionObservable> out;
  if (is_map(node) && node["number"] && is_sequence(node["number"])) {
    r.allow_keys(node, path, {"number"});
    for (Site v : r.list<Site>(node["number"], path + ".number")) {
      out.push_back(FermionObservable{{v}, number_op(v)});
    }
    return out;
  }
  if (!is_sequence(node)) {
    r.add(ErrorKind::ConfigParse, path, node, "expected {number: [..]} or a list");
    return out;
  }
  for (std::size_t i = 0; i < node.size(); ++i) {
    if (auto o = read_fermion_observable(r, node[i], path + "[" + std::to_string(i) + "]")) {
      out.push_back(*o);
    }
  }
  return out;
}

inline void check_spin_observable(Reader& r, const ExperimentConfig& cfg, const SpinObservable& o,
                                  const std::string& path, const YAML::Node& node) {
  if (!cfg.graph) return;
  if (o.staggered) {
    for (Site v : cfg.graph->vertices()) {
      if (cfg.graph->local_dim(v) != 2) {
        r.add(ErrorKind::ModelInvalid, path, node, "Pauli observables need qubit sites");
        return;
      }
    }
  }
  for (const auto& [site, p] : o.factors) {
    if (!cfg.graph->has_vertex(site)) {
      r.add(ErrorKind::UnknownVertex, path, node, "site " + std::to_string(site) + " is not in the model");
    } else if (cfg.graph->local_dim(site) != 2) {
      r.add(ErrorKind::ModelInvalid, path, node, "Pauli observables need qubit sites");
    }
  }
}

inline void check_fermion_observable(Reader& r, const ExperimentConfig& cfg,
                                     const FermionObservable& o, const std::string& path,
                                     const YAML::Node& node) {
  if (!cfg.fermion_sites) return;
  try {
    check_fermion_sites(o.poly, o.support, *cfg.fermion_sites);
  } catch (const Error& e) {
    r.add(e.kind(), path, node, bare(e));
  }
  if (!cfg.allow_odd && parity_of(o.poly) != Parity::Even) {
    r.add(ErrorKind::OddParity, path, node,
          "observable has " + std::string(to_string(parity_of(o.poly))) +
              " parity; set allow_odd for the anticommutator variant");
  }
}

inline void read_experiment(Reader& r, const YAML::Node& node, ExperimentConfig& cfg) {
  const std::string path = "experiment";
  if (!is_map(node)) {
    r.add(ErrorKind::ConfigParse, path, node, "missing experiment section");
    return;
  }
  r.allow_keys(node, path,
               {"kind", "s", "t", "bt", "observable_a", "observable_b", "observables_b",
                "allow_odd", "regions", "times", "vt_max", "time_count", "steps",
                "intermediate", "pairs", "random_liouvillians", "max_n", "state", "fit_from",
                "criteria"});
  const auto kind = r.required<std::string>(node, "kind", path);
  if (kind) {
    const auto& kinds = experiment_kinds();
    if (std::find(kinds.begin(), kinds.end(), *kind) == kinds.end()) {
      r.add(ErrorKind::ConfigParse, path + ".kind", node["kind"], "unknown experiment '" + *kind + "'");
    } else {
      cfg.kind = *kind;
    }
  }
  cfg.s = r.scalar<double>(node["s"], path + ".s").value_or(0.0);
  cfg.t = r.scalar<double>(node["t"], path + ".t");
  cfg.bt = r.scalar<double>(node["bt"], path + ".bt");
  if (cfg.t && *cfg.t < cfg.s) {
    r.add(ErrorKind::ConfigParse, path + ".t", node["t"], "t must not precede s");
  }
  if (cfg.bt && *cfg.bt < 0) {
    r.add(ErrorKind::ConfigParse, path + ".bt", node["bt"], "b(t - s) must be non-negative");
  }
  if (cfg.t && cfg.bt) {
    r.add(ErrorKind::ConfigParse, path + ".bt", node["bt"], "give either t or bt, not both");
  }
  cfg.allow_odd = r.scalar<bool>(node["allow_odd"], path + ".allow_odd").value_or(false);
  cfg.fit_from = r.scalar<double>(node["fit_from"], path + ".fit_from")
                     .value_or(-std::numeric_limits<double>::infinity());

  const bool fermionic = cfg.kind == "fermionic_leakage";
  if (node["observable_a"]) {
    if (fermionic) {
      cfg.fermion_a = read_fermion_observable(r, node["observable_a"], path + ".observable_a");
      if (cfg.fermion_a) check_fermion_observable(r, cfg, *cfg.fermion_a, path + ".observable_a", node["observable_a"]);
    } else {
      cfg.observable_a = read_spin_observable(r, node["observable_a"], path + ".observable_a");
      if (cfg.observable_a) check_spin_observable(r, cfg, *cfg.observable_a, path + ".observable_a", node["observable_a"]);
    }
  }
  if (node["observable_b"]) {
    cfg.observable_b = read_spin_observable(r, node["observable_b"], path + ".observable_b");
    if (cfg.observable_b) check_spin_observable(r, cfg, *cfg.observable_b, path + ".observable_b", node["observable_b"]);
  }
  if (node["observables_b"]) {
    if (fermionic) {
      cfg.fermion_b = read_fermion_observables(r, node["observables_b"], path + ".observables_b");
      for (const auto& o : cfg.fermion_b) check_fermion_observable(r, cfg, o, path + ".observables_b", node["observables_b"]);
    } else {
      cfg.observables_b = read_spin_observables(r, node["observables_b"], path + ".observables_b");
      for (const auto& o : cfg.observables_b) check_spin_observable(r, cfg, o, path + ".observables_b", node["observables_b"]);
    }
  }
  const YAML::Node regions = node["regions"];
  if (regions.IsDefined()) {
    if (is_map(regions)) {
      // Symmetric intervals {center, radii, include_full}.
      r.allow_keys(regions, path + ".regions", {"center", "radii", "include_full"});
      const auto center = r.required<int>(regions, "center", path + ".regions");
      const auto radii = r.list<int>(regions["radii"], path + ".regions.radii");
      if (center && cfg.graph) {
        for (int k : radii) {
          VertexSet reg;
          for (int v = *center - k; v <= *center + k; ++v) {
            if (cfg.graph->has_vertex(v)) reg.insert(v);
          }
          cfg.regions.push_back(reg);
        }
        if (r.scalar<bool>(regions["include_full"], path + ".regions.include_full").value_or(false)) {
          cfg.regions.push_back(cfg.graph->all_vertices());
        }
      }
    } else if (is_sequence(regions)) {
      for (std::size_t i = 0; i < regions.size(); ++i) {
        const auto sites = r.list<Site>(regions[i], path + ".regions[" + std::to_string(i) + "]");
        for (Site v : sites) {
          if (cfg.graph && !cfg.graph->has_vertex(v)) {
            r.add(ErrorKind::UnknownVertex, path + ".regions[" + std::to_string(i) + "]",
                  regions[i], "site " + std::to_string(v) + " is not in the model");
          }
        }
        cfg.regions.emplace_back(sites.begin(), sites.end());
      }
    } else {
      r.add(ErrorKind::ConfigParse, path + ".regions", regions, "expected a list or {center, radii}");
    }
  }
  cfg.times = r.list<double>(node["times"], path + ".times");
  for (double t : cfg.times) {
    if (t < cfg.s) r.add(ErrorKind::ConfigParse, path + ".times", node["times"], "time precedes s");
  }
  cfg.vt_max = r.scalar<double>(node["vt_max"], path + ".vt_max");
  cfg.time_count = r.scalar<std::size_t>(node["time_count"], path + ".time_count").value_or(5);
  cfg.steps = r.list<std::size_t>(node["steps"], path + ".steps");
  cfg.intermediate = r.list<double>(node["intermediate"], path + ".intermediate");
  cfg.pairs = r.scalar<std::size_t>(node["pairs"], path + ".pairs").value_or(20);
  cfg.random_liouvillians =
      r.scalar<std::size_t>(node["random_liouvillians"], path + ".random_liouvillians").value_or(0);
  cfg.max_n = r.scalar<int>(node["max_n"], path + ".max_n").value_or(5);
  const YAML::Node state = node["state"];
  if (state.IsDefined()) {
    if (is_scalar(state)) {
      cfg.state_labels = {state.Scalar()};
    } else {
      cfg.state_labels = r.list<std::string>(state, path + ".state");
    }
    static const std::set<std::string> labels = {"random", "z+", "z-", "x+", "x-", "y+", "y-"};
    for (const auto& l : cfg.state_labels) {
      if (!labels.count(l)) r.add(ErrorKind::ConfigParse, path + ".state", state, "unknown state label '" + l + "'");
    }
  }
  const YAML::Node criteria = node["criteria"];
  if (criteria.IsDefined()) {
    r.allow_keys(criteria, path + ".criteria",
                 {"max_slope", "min_slope", "min_r_squared", "below_envelope", "max_defect",
                  "max_abs", "max_at_start", "strictly_decreasing", "max_full_error",
                  "min_choi_eigenvalue", "max_trace_defect", "expect_z", "expect_m",
                  "expect_mu", "max_control"});
    if (is_map(criteria)) {
      for (const auto& kv : criteria) {
        const auto key = kv.first.as<std::string>();
        if (is_scalar(kv.second) && (kv.second.Scalar() == "true" || kv.second.Scalar() == "false")) {
          cfg.criteria[key] = kv.second.Scalar() == "true" ? 1.0 : 0.0;
        } else if (auto v = r.scalar<double>(kv.second, path + ".criteria." + key)) {
          cfg.criteria[key] = *v;
        }
      }
    }
  }
}

inline void check_requirements(Reader& r, const YAML::Node& root, ExperimentConfig& cfg) {
  const YAML::Node exp = root["experiment"];
  auto need = [&](bool ok, const std::string& field, const std::string& msg) {
    if (!ok) r.add(ErrorKind::ConfigParse, "experiment." + field, exp, msg);
  };
  const std::string& k = cfg.kind;
  if (k.empty()) return;
  const bool spin = k != "fermionic_leakage" && k != "jw_identity_suite";
  if (spin && k != "graph_metrics" && !cfg.graph) {
    r.add(ErrorKind::ConfigParse, "model", root, "experiment needs a spin model");
  }
  if (k == "graph_metrics" && !cfg.graph) r.add(ErrorKind::ConfigParse, "model", root, "missing model");
  if (k == "fermionic_leakage" && !cfg.fermion_sites) {
    r.add(ErrorKind::ConfigParse, "fermion_model", root, "experiment needs a fermion_model");
  }
  const bool timed = k == "leakage_vs_distance" || k == "truncation_vs_buffer" ||
                     k == "trotter_order" || k == "picture_duality" || k == "cptp_audit" ||
                     k == "fermionic_leakage" || k == "composition_adjoint";
  if (timed) need(cfg.t || cfg.bt, "t", "give t or bt");
  if (k == "leakage_vs_distance") {
    need(cfg.observable_a.has_value(), "observable_a", "missing");
    need(!cfg.observables_b.empty(), "observables_b", "missing");
  }
  if (k == "truncation_vs_buffer") {
    need(cfg.observable_a.has_value(), "observable_a", "missing");
    need(!cfg.regions.empty(), "regions", "missing");
  }
  if (k == "covariance_cone") {
    need(cfg.observable_a && cfg.observable_b, "observable_b", "needs observable_a and observable_b");
    need(!cfg.times.empty() || cfg.vt_max, "times", "give times or vt_max");
  }
  if (k == "trotter_order") {
    need(cfg.observable_a.has_value(), "observable_a", "missing");
    need(cfg.steps.size() >= 2, "steps", "need at least two step counts");
    for (std::size_t i = 1; i < cfg.steps.size(); ++i) {
      need(cfg.steps[i] > cfg.steps[i - 1], "steps", "step counts must increase");
    }
    for (std::size_t n : cfg.steps) need(n >= 1, "steps", "step counts start at 1");
  }
  if (k == "fermionic_leakage") {
    need(cfg.fermion_a.has_value(), "observable_a", "missing");
    need(!cfg.fermion_b.empty(), "observables_b", "missing");
  }
  if (k == "covariance_cone" && cfg.state_labels.empty()) cfg.state_labels = {"random"};
  if (cfg.graph && !cfg.state_labels.empty() && cfg.state_labels.size() != 1 &&
      cfg.state_labels.size() != cfg.graph->num_vertices()) {
    need(false, "state", "give one label, or one per site");
  }
  if (k != "graph_metrics" && cfg.graph && (cfg.graph->num_vertices() > 12 || cfg.graph->hilbert_dim() > kMaxObservableDim)) {
    r.add(ErrorKind::TooLarge, "model.sites", root["model"], "Hilbert space too large");
  }
  const bool materialises = k == "cptp_audit" || k == "composition_adjoint";
  if (materialises && cfg.graph && cfg.graph->hilbert_dim() > kMaxSuperopHilbertDim) {
    r.add(ErrorKind::TooLarge, "model.sites", root["model"],
          "propagator matrices are capped at Hilbert dimension 128");
  }
  for (double r_value : cfg.intermediate) {
    if (r_value < cfg.s || (cfg.t && r_value > *cfg.t)) {
      need(false, "intermediate", "intermediate times must lie in [s, t]");
    }
  }
}

}  // namespace detail

struct LoadResult {
  ExperimentConfig config;
  std::vector<Diagnostic> diagnostics;
};

inline LoadResult parse_config(const std::string& text, const std::string& default_name = "experiment") {
  LoadResult out;
  detail::Reader r;
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    out.diagnostics.push_back(Diagnostic{ErrorKind::ConfigParse, "", e.mark.is_null() ? 0 : e.mark.line + 1, e.msg});
    return out;
  }
  if (!detail::is_map(root)) {
    out.diagnostics.push_back(Diagnostic{ErrorKind::ConfigParse, "", 1, "top level must be a mapping"});
    return out;
  }
  auto& cfg = out.config;
  try {
    r.allow_keys(root, "", {"name", "seed", "tolerance", "model", "fermion_model", "experiment", "bounds", "output"});
    cfg.name = r.scalar<std::string>(root["name"], "name").value_or(default_name);
    cfg.seed = r.scalar<std::uint64_t>(root["seed"], "seed").value_or(1);
    cfg.tolerance = r.scalar<double>(root["tolerance"], "tolerance").value_or(kDefaultTol);
    if (!(cfg.tolerance > 0)) r.add(ErrorKind::ConfigParse, "tolerance", root["tolerance"], "must be positive");
    if (root["model"] && root["fermion_model"]) {
      r.add(ErrorKind::ConfigParse, "fermion_model", root["fermion_model"], "give model or fermion_model, not both");
    }
    if (root["model"]) detail::read_spin_model(r, root["model"], cfg);
    if (root["fermion_model"]) detail::read_fermion_model(r, root["fermion_model"], cfg);
    detail::read_experiment(r, root["experiment"], cfg);
    const YAML::Node bounds = root["bounds"];
    if (detail::is_scalar(bounds) && bounds.Scalar() != "auto") {
      r.add(ErrorKind::ConfigParse, "bounds", bounds, "expected 'auto' or a mapping");
    } else if (detail::is_map(bounds)) {
      r.allow_keys(bounds, "bounds", {"v", "C", "mu", "M"});
      auto num = [&](const char* key) -> std::optional<double> {
        const YAML::Node n = bounds[key];
        if (!n.IsDefined() || (detail::is_scalar(n) && n.Scalar() == "auto")) return std::nullopt;
        auto v = r.scalar<double>(n, std::string("bounds.") + key);
        if (v && !(*v > 0)) r.add(ErrorKind::ConfigParse, std::string("bounds.") + key, n, "must be positive");
        return v;
      };
      cfg.bounds.v = num("v");
      cfg.bounds.c = num("C");
      cfg.bounds.m = num("M");
      if (auto mu = num("mu")) cfg.bounds.mu = static_cast<int>(std::lround(*mu));
    }
    const YAML::Node output = root["output"];
    r.allow_keys(output, "output", {"csv", "json"});
    cfg.csv = r.scalar<std::string>(output["csv"], "output.csv").value_or(cfg.name + ".csv");
    cfg.json = r.scalar<std::string>(output["json"], "output.json").value_or(cfg.name + ".json");
    detail::check_requirements(r, root, cfg);
  } catch (const YAML::Exception& e) {
    r.diags.push_back(Diagnostic{ErrorKind::ConfigParse, "", e.mark.is_null() ? 0 : e.mark.line + 1, e.msg});
  }
  out.diagnostics = std::move(r.diags);
  return out;
}

inline LoadResult load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    LoadResult out;
    out.diagnostics.push_back(Diagnostic{ErrorKind::Io, path.string(), 0, "cannot open config file"});
    return out;
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.stem().string());
}

/// Full validation without running anything; empty iff runnable.
inline std::vector<Diagnostic> validate(const std::filesystem::path& path) {
  return load_config(path).diagnostics;
}

}  // namespace lrsim::cli

#endif  // LRSIM_TOOLS_CONFIG_HPP
