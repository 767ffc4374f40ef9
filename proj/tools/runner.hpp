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

// Runs a parsed ExperimentConfig and writes its CSV table and JSON report.

#ifndef LRSIM_TOOLS_RUNNER_HPP
#define LRSIM_TOOLS_RUNNER_HPP

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "config.hpp"
#include "lrsim/lrsim.hpp"

namespace lrsim::cli {

using json = nlohmann::ordered_json;

struct RunOptions {
  std::size_t jobs = 1;
  std::optional<std::uint64_t> seed;
  double tolerance_scale = 1.0;  // multiplies the integration tolerance
};

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct RunResult {
  Table table;
  json report;
  std::vector<Verdict> verdicts;

  bool passed() const {
    for (const auto& v : verdicts) {
      if (!v.pass) return false;
    }
    return true;
  }
};

namespace detail {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

inline std::string sci(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4e", x);
  return buf;
}

inline json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

class Checks {
 public:
  Checks(const std::map<std::string, double>& criteria, std::vector<Verdict>& out)
      : criteria_(criteria), out_(out) {}

  std::optional<double> get(const std::string& key) const {
    auto it = criteria_.find(key);
    if (it == criteria_.end()) return std::nullopt;
    return it->second;
  }

  void at_most(const std::string& key, const std::string& what, double value) {
    if (auto lim = get(key)) {
      out_.push_back({key, value <= *lim, what + " = " + sci(value) + " (<= " + sci(*lim) + ")"});
    }
  }
  void at_least(const std::string& key, const std::string& what, double value) {
    if (auto lim = get(key)) {
      out_.push_back({key, value >= *lim, what + " = " + sci(value) + " (>= " + sci(*lim) + ")"});
    }
  }
  void equals(const std::string& key, const std::string& what, double value) {
    if (auto want = get(key)) {
      out_.push_back({key, std::abs(value - *want) <= 1e-12 * std::max(1.0, std::abs(*want)),
                      what + " = " + sci(value) + " (== " + sci(*want) + ")"});
    }
  }
  void flag(const std::string& key, const std::string& what, bool value) {
    if (auto want = get(key); want && *want != 0.0) {
      out_.push_back({key, value, what + ": " + (value ? "yes" : "no")});
    }
  }

 private:
  const std::map<std::string, double>& criteria_;
  std::vector<Verdict>& out_;
};

inline GlobalOperator build_spin_observable(const SpinObservable& o, const LatticePtr& g) {
  if (!o.staggered) return pauli_string(o.factors, g);
  const auto dim = static_cast<Eigen::Index>(g->hilbert_dim());
  Matrix m = Matrix::Zero(dim, dim);
  for (Site v : g->vertices()) {
    m += (v % 2 == 0 ? 1.0 : -1.0) * pauli_string({{v, *o.staggered}}, g).matrix;
  }
  return GlobalOperator{g, std::move(m), std::nullopt};
}

inline Matrix site_state(const std::string& label, std::mt19937_64& rng) {
  Eigen::VectorXcd psi(2);
  const double r = 1.0 / std::sqrt(2.0);
  if (label == "z+") {
    psi << 1.0, 0.0;
  } else if (label == "z-") {
    psi << 0.0, 1.0;
  } else if (label == "x+") {
    psi << r, r;
  } else if (label == "x-") {
    psi << r, -r;
  } else if (label == "y+") {
    psi << r, cplx(0.0, r);
  } else if (label == "y-") {
    psi << r, cplx(0.0, -r);
  } else {
    std::normal_distribution<double> normal;
    for (Eigen::Index i = 0; i < 2; ++i) psi(i) = cplx(normal(rng), normal(rng));
    psi.normalize();
  }
  return psi * psi.adjoint();
}

inline GlobalOperator build_product_state(const std::vector<std::string>& labels,
                                          const LatticePtr& g, std::mt19937_64& rng) {
  std::vector<Matrix> sites;
  for (std::size_t i = 0; i < g->num_vertices(); ++i) {
    if (g->dims()[i] != 2) throw Error(ErrorKind::ModelInvalid, "product states need qubit sites");
    sites.push_back(site_state(labels.size() == 1 ? labels[0] : labels[i], rng));
  }
  return product_state(sites, g);
}

inline BoundParameters resolve_bounds(const BoundsSpec& given, const LocalLiouvillian& l) {
  BoundParameters p = default_bound_parameters(l);
  if (given.v) p.v = *given.v;
  if (given.c) p.c = *given.c;
  if (given.v && given.c) {
    p.source = "configured";
  } else if (given.v || given.c) {
    p.source = "mixed";
  }
  p.validate();
  return p;
}

inline double end_time(const ExperimentConfig& cfg, double b) {
  if (cfg.t) return *cfg.t;
  if (!(b > 0.0)) throw Error(ErrorKind::ModelInvalid, "bt needs a model with b > 0");
  return cfg.s + *cfg.bt / b;
}

inline json bounds_json(const BoundParameters& p) {
  return json{{"v", p.v}, {"C", p.c}, {"source", p.source}};
}

inline json model_json(const LocalLiouvillian& l) {
  json edges = json::array();
  for (const auto& e : l.interaction_edges()) edges.push_back(std::vector<Site>(e.begin(), e.end()));
  return json{{"sites", l.lattice()->vertices()},
              {"hilbert_dim", l.hilbert_dim()},
              {"terms", l.terms().size()},
              {"b", l.b()},
              {"Z", l.z()},
              {"interaction_edges", edges}};
}

inline Table grid_table(const BoundReport& r, bool with_hypothesis = false) {
  Table t;
  t.columns = {r.abscissa_name, "measured", "envelope"};
  if (with_hypothesis) t.columns.push_back("hypothesis_met");
  for (const auto& p : r.grid) {
    std::vector<double> row = {p.abscissa, p.measured, p.envelope.value_or(kNaN)};
    if (with_hypothesis) row.push_back(p.hypothesis_met ? 1.0 : 0.0);
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline json fit_json(const LinearFit& f) {
  return json{{"slope", f.slope}, {"intercept", f.intercept}, {"r_squared", f.r_squared},
              {"points", f.points}};
}

inline LocalLiouvillian spin_liouvillian(const ExperimentConfig& cfg) {
  return assemble(*cfg.graph, cfg.terms, cfg.strict);
}

/// Leakage-style checks shared by the spin and fermionic cones.
inline void cone_checks(const ExperimentConfig& cfg, const BoundReport& report, RunResult& out) {
  Checks c(cfg.criteria, out.verdicts);
  if (c.get("max_slope") || c.get("min_r_squared")) {
    bool positive = true;
    for (const auto& p : report.grid) {
      if (p.abscissa >= cfg.fit_from) positive = positive && p.measured > 0.0;
    }
    out.verdicts.push_back({"positive", positive, "fitted points all positive"});
    if (positive) {
      const LinearFit fit = report.fit_measured(cfg.fit_from, false);
      out.report["fit"] = fit_json(fit);
      c.at_most("max_slope", "slope of ln(leakage) vs distance", fit.slope);
      c.at_least("min_r_squared", "R^2", fit.r_squared);
    }
  }
  c.flag("below_envelope", "every point below its envelope", report.all_below_envelope());
}

inline void run_leakage(const ExperimentConfig& cfg, double tol, const RunOptions& opt,
                        RunResult& out) {
  const auto l = spin_liouvillian(cfg);
  const auto params = resolve_bounds(cfg.bounds, l);
  const double t = end_time(cfg, l.b());
  const auto a = build_spin_observable(*cfg.observable_a, l.lattice());
  std::vector<GlobalOperator> bs;
  for (const auto& o : cfg.observables_b) bs.push_back(build_spin_observable(o, l.lattice()));
  const auto report = leakage_vs_distance(l, a, bs, cfg.s, t, params, tol, opt.jobs);
  out.table = grid_table(report);
  out.report["model"] = model_json(l);
  out.report["bounds"] = bounds_json(params);
  out.report["interval"] = json{{"s", cfg.s}, {"t", t}};
  cone_checks(cfg, report, out);
}

inline void run_truncation(const ExperimentConfig& cfg, double tol, const RunOptions& opt,
                           RunResult& out) {
  const auto l = spin_liouvillian(cfg);
  const auto params = resolve_bounds(cfg.bounds, l);
  const double t = end_time(cfg, l.b());
  const int mu = cfg.bounds.mu.value_or(estimate_spatial_dimension(*l.lattice()));
  const double m = cfg.bounds.m.value_or(spatial_dimension_constant(*l.lattice(), mu));
  const auto a = build_spin_observable(*cfg.observable_a, l.lattice());
  const auto report = truncation_error_series(l, a, cfg.regions, cfg.s, t, params, mu, m, tol, opt.jobs);
  out.table = grid_table(report, true);
  out.report["model"] = model_json(l);
  json b = bounds_json(params);
  b["mu"] = mu;
  b["M"] = m;
  b["mu_source"] = cfg.bounds.mu ? "configured" : "estimated";
  b["M_source"] = cfg.bounds.m ? "configured" : "computed";
  out.report["bounds"] = b;
  out.report["interval"] = json{{"s", cfg.s}, {"t", t}};

  Checks c(cfg.criteria, out.verdicts);
  std::vector<const BoundPoint*> finite;
  for (const auto& p : report.grid) {
    if (std::isfinite(p.abscissa)) finite.push_back(&p);
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < finite.size(); ++i) {
    decreasing = decreasing && finite[i]->measured < finite[i - 1]->measured;
  }
  c.flag("strictly_decreasing", "error strictly decreasing in the buffer", decreasing);
  if (c.get("max_slope")) {
    const LinearFit fit = report.fit_measured(cfg.fit_from, false);
    out.report["fit"] = fit_json(fit);
    c.at_most("max_slope", "slope of ln(error) vs buffer", fit.slope);
  }
  double full = 0.0;
  bool has_full = false;
  bool envelope_ok = true;
  for (const auto& p : report.grid) {
    if (!std::isfinite(p.abscissa)) {
      full = std::max(full, p.measured);
      has_full = true;
    }
    if (p.hypothesis_met && p.envelope && p.measured > *p.envelope) envelope_ok = false;
  }
  if (has_full) c.at_most("max_full_error", "error with the whole lattice kept", full);
  c.flag("below_envelope", "below envelope wherever the buffer hypothesis holds", envelope_ok);
}

inline void run_covariance(const ExperimentConfig& cfg, double tol, std::mt19937_64& rng,
                           RunResult& out) {
  const auto l = spin_liouvillian(cfg);
  const auto params = resolve_bounds(cfg.bounds, l);
  const auto a = build_spin_observable(*cfg.observable_a, l.lattice());
  const auto b = build_spin_observable(*cfg.observable_b, l.lattice());
  const auto rho = build_product_state(cfg.state_labels, l.lattice(), rng);
  std::vector<double> times = cfg.times;
  if (times.empty()) {
    const std::size_t count = std::max<std::size_t>(cfg.time_count, 2);
    for (std::size_t k = 0; k < count; ++k) {
      times.push_back(cfg.s + *cfg.vt_max / params.v * static_cast<double>(k) /
                                  static_cast<double>(count - 1));
    }
  }
  const auto report = covariance_cone_experiment(l, rho, a, b, cfg.s, times, params, tol);
  out.table.columns = {"time", "v_dt", "abs_covariance", "envelope"};
  for (const auto& p : report.grid) {
    out.table.rows.push_back({p.abscissa, params.v * (p.abscissa - cfg.s), p.measured,
                              p.envelope.value_or(kNaN)});
  }
  const Distance d = distance(*l.lattice(), lrsim::detail::support_or_declared(a), lrsim::detail::support_or_declared(b));
  out.report["model"] = model_json(l);
  out.report["bounds"] = bounds_json(params);
  out.report["distance"] = number(d.as_double());
  Checks c(cfg.criteria, out.verdicts);
  double worst = 0.0;
  for (const auto& p : report.grid) worst = std::max(worst, p.measured);
  c.at_most("max_abs", "max |cov|", worst);
  if (!report.grid.empty()) c.at_most("max_at_start", "|cov| at the first time", report.grid.front().measured);
  c.flag("below_envelope", "every point below its envelope", report.all_below_envelope());
}

inline void run_trotter(const ExperimentConfig& cfg, double tol, const RunOptions& opt,
                        RunResult& out) {
  const auto l = spin_liouvillian(cfg);
  const double t = end_time(cfg, l.b());
  const auto a = build_spin_observable(*cfg.observable_a, l.lattice());
  const auto report = trotter_error_series(l, a, cfg.s, t, cfg.steps, std::min(tol, 1e-12), opt.jobs);
  out.table.columns = {"steps", "error"};
  for (const auto& p : report.grid) out.table.rows.push_back({p.abscissa, p.measured});
  out.report["model"] = model_json(l);
  out.report["interval"] = json{{"s", cfg.s}, {"t", t}};
  Checks c(cfg.criteria, out.verdicts);
  if (report.fit) {
    out.report["fit"] = fit_json(*report.fit);
    c.at_most("max_slope", "fitted order", report.fit->slope);
    c.at_least("min_slope", "fitted order", report.fit->slope);
  } else if (c.get("max_slope") || c.get("min_slope")) {
    out.verdicts.push_back({"fit", false, "errors too small to fit an order"});
  }
  if (!report.grid.empty()) c.at_most("max_abs", "largest Trotter error", report.grid.front().measured);
}

inline void run_duality(const ExperimentConfig& cfg, double tol, std::mt19937_64& rng,
                        RunResult& out) {
  const auto l = spin_liouvillian(cfg);
  const double t = end_time(cfg, l.b());
  const auto d = static_cast<Eigen::Index>(l.hilbert_dim());
  out.table.columns = {"pair", "defect"};
  double worst = 0.0;
  for (std::size_t k = 0; k < cfg.pairs; ++k) {
    const Matrix rho = random_state(d, rng);
    const Matrix a = random_hermitian(d, rng);
    const Matrix ta = evolve_heisenberg(l, a, cfg.s, t, tol);
    const Matrix trho = evolve_schrodinger(l, rho, cfg.s, t, tol);
    const double defect = std::abs((rho * ta).trace() - (trho * a).trace());
    worst = std::max(worst, defect);
    out.table.rows.push_back({static_cast<double>(k), defect});
  }
  out.report["model"] = model_json(l);
  out.report["interval"] = json{{"s", cfg.s}, {"t", t}};
  Checks(cfg.criteria, out.verdicts).at_most("max_defect", "max |Tr(rho tau(A)) - Tr(T(rho) A)|", worst);
}

inline void run_composition(const ExperimentConfig& cfg, double tol, RunResult& out) {
  const auto l = spin_liouvillian(cfg);
  const double t = end_time(cfg, l.b());
  const auto full = propagator_matrix(l, cfg.s, t, tol);
  const auto hfull = heisenberg_propagator_matrix(l, cfg.s, t, tol);
  const double adjoint = op_norm(Matrix(hfull.matrix - full.matrix.adjoint()));
  out.table.columns = {"r", "schrodinger_defect", "heisenberg_defect"};
  double worst = adjoint;
  for (double r : cfg.intermediate) {
    const auto late = propagator_matrix(l, r, t, tol);
    const auto early = propagator_matrix(l, cfg.s, r, tol);
    const auto hearly = heisenberg_propagator_matrix(l, cfg.s, r, tol);
    const auto hlate = heisenberg_propagator_matrix(l, r, t, tol);
    const double sd = op_norm(Matrix(full.matrix - late.matrix * early.matrix));
    const double hd = op_norm(Matrix(hfull.matrix - hearly.matrix * hlate.matrix));
    worst = std::max({worst, sd, hd});
    out.table.rows.push_back({r, sd, hd});
  }
  out.report["model"] = model_json(l);
  out.report["interval"] = json{{"s", cfg.s}, {"t", t}};
  out.report["adjoint_defect"] = adjoint;
  Checks(cfg.criteria, out.verdicts).at_most("max_defect", "largest composition or adjoint defect", worst);
}

inline void run_cptp(const ExperimentConfig& cfg, double tol, std::mt19937_64& rng,
                     RunResult& out) {
  const auto l = spin_liouvillian(cfg);
  const double t = end_time(cfg, l.b());
  out.table.columns = {"trial", "min_choi_eigenvalue", "trace_defect"};
  double worst_eig = std::numeric_limits<double>::infinity(), worst_trace = 0.0;
  auto audit = [&](const LocalLiouvillian& model, double trial) {
    const auto map = propagator_matrix(model, cfg.s, t, tol);
    const Matrix choi = choi_matrix(map);
    const double eig = min_eigenvalue(choi);
    const double trace = std::max(choi_trace_defect(choi, map.hilbert_dim()),
                                  trace_preservation_defect(map));
    worst_eig = std::min(worst_eig, eig);
    worst_trace = std::max(worst_trace, trace);
    out.table.rows.push_back({trial, eig, trace});
  };
  audit(l, 0.0);
  // Random generators on the configured supports and schedules.
  for (std::size_t k = 1; k <= cfg.random_liouvillians; ++k) {
    std::vector<LindbladTerm> terms;
    for (const auto& term : cfg.terms) {
      const Eigen::Index d = term.local_dim();
      terms.push_back(make_term(term.sites, random_hermitian(d, rng), {0.4 * random_matrix(d, rng)},
                                *cfg.graph, term.schedule, term.label));
    }
    audit(assemble(*cfg.graph, terms, cfg.strict), static_cast<double>(k));
  }
  const double control = min_eigenvalue(choi_matrix(transpose_map(static_cast<Eigen::Index>(l.hilbert_dim()))));
  out.report["model"] = model_json(l);
  out.report["interval"] = json{{"s", cfg.s}, {"t", t}};
  out.report["transpose_control_min_eigenvalue"] = control;
  Checks c(cfg.criteria, out.verdicts);
  c.at_least("min_choi_eigenvalue", "smallest Choi eigenvalue", worst_eig);
  c.at_most("max_trace_defect", "largest trace defect", worst_trace);
  c.at_most("max_control", "transpose map smallest Choi eigenvalue", control);
}

inline double max_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

inline void run_jw_suite(const ExperimentConfig& cfg, RunResult& out) {
  out.table.columns = {"n", "identity_defect", "majorana_defect", "spectrum_defect"};
  double worst = 0.0;
  for (int n = 1; n <= cfg.max_n; ++n) {
    const auto chain = jw_chain(n);
    const auto dim = static_cast<Eigen::Index>(chain->hilbert_dim());
    const Matrix id = Matrix::Identity(dim, dim);
    double ident = 0.0, maj = 0.0, spectrum = 0.0;
    for (int j = 1; j <= n; ++j) {
      const Matrix f = fermion_op(j, false, chain).matrix;
      const Matrix fd = fermion_op(j, true, chain).matrix;
      const Matrix w1 = majorana(2 * j - 1, chain).matrix;
      const Matrix w2 = majorana(2 * j, chain).matrix;
      const Matrix zj = pauli_string({{j, 'Z'}}, chain).matrix;
      ident = std::max({ident, max_diff(f + fd, w1), max_diff(kI * (f - fd), w2),
                        max_diff(zj, 2.0 * fd * f - id), max_diff(zj, -kI * w1 * w2)});
      for (int k = 1; k <= n; ++k) {
        const Matrix fk = fermion_op(k, false, chain).matrix;
        ident = std::max({ident, max_diff(anticommutator(f, fermion_op(k, true, chain).matrix),
                                          (j == k ? 1.0 : 0.0) * id),
                          anticommutator(f, fk).cwiseAbs().maxCoeff()});
      }
    }
    for (int j = 1; j <= 2 * n; ++j) {
      for (int k = 1; k <= 2 * n; ++k) {
        const Matrix ac = anticommutator(majorana(j, chain).matrix, majorana(k, chain).matrix);
        maj = std::max(maj, max_diff(ac, (j == k ? 2.0 : 0.0) * id));
      }
    }
    if (n >= 2) {
      FermionPolynomial h;
      for (int j = 1; j < n; ++j) h = h + hopping(j, j + 1, 1.0);
      const Eigen::VectorXd sector = sector_spectrum(jw_map(h, chain).matrix, n, 1);
      Eigen::VectorXd exact(n);
      for (int k = 1; k <= n; ++k) exact(k - 1) = 2.0 * std::cos(std::numbers::pi * k / (n + 1));
      std::sort(exact.data(), exact.data() + n);
      spectrum = (sector - exact).cwiseAbs().maxCoeff();
    }
    worst = std::max({worst, ident, maj, spectrum});
    out.table.rows.push_back({static_cast<double>(n), ident, maj, spectrum});
  }
  Checks(cfg.criteria, out.verdicts).at_most("max_defect", "largest identity defect", worst);
}

inline void run_fermionic(const ExperimentConfig& cfg, double tol, RunResult& out) {
  const int n = *cfg.fermion_sites;
  const auto l = jw_liouvillian(n, cfg.fermion_terms);
  const auto params = resolve_bounds(cfg.bounds, l);
  const double t = end_time(cfg, l.b());
  const auto report = fermionic_lr_experiment(n, cfg.fermion_terms, *cfg.fermion_a, cfg.fermion_b,
                                              cfg.s, t, params, cfg.allow_odd, tol);
  out.table = grid_table(report);
  out.report["model"] = model_json(l);
  out.report["bounds"] = bounds_json(params);
  out.report["interval"] = json{{"s", cfg.s}, {"t", t}};
  out.report["bracket"] = cfg.allow_odd && parity_of(cfg.fermion_a->poly) != Parity::Even
                              ? "anticommutator"
                              : "commutator";
  cone_checks(cfg, report, out);
}

inline void run_graph_metrics(const ExperimentConfig& cfg, RunResult& out) {
  const auto& g = *cfg.graph;
  const std::size_t z = max_neighbors(g);
  const int mu = cfg.bounds.mu.value_or(estimate_spatial_dimension(g));
  const bool connected = edges_connected(g);
  const double m = connected ? spatial_dimension_constant(g, mu) : kNaN;
  out.table.columns = {"from", "to", "distance"};
  const auto& vs = g.vertices();
  for (Site j : vs) {
    for (Site k : vs) {
      const Distance d = distance(g, {j}, {k});
      out.table.rows.push_back({static_cast<double>(j), static_cast<double>(k), d.as_double()});
    }
  }
  json edges = json::array();
  for (const auto& e : g.hyperedges()) edges.push_back(std::vector<Site>(e.begin(), e.end()));
  out.report["graph"] = json{{"vertices", vs}, {"hyperedges", edges}, {"Z", z}, {"mu", mu},
                             {"mu_source", cfg.bounds.mu ? "configured" : "estimated"},
                             {"connected", connected}, {"M", number(m)}};
  Checks c(cfg.criteria, out.verdicts);
  c.equals("expect_z", "Z", static_cast<double>(z));
  c.equals("expect_mu", "mu", static_cast<double>(mu));
  if (connected) {
    c.equals("expect_m", "M", m);
  } else if (c.get("expect_m")) {
    out.verdicts.push_back({"expect_m", false, "M is undefined on a disconnected graph"});
  }
}

}  // namespace detail

/// Runs the experiment. Throws lrsim::Error for models that fail only at
/// run time (for instance a disconnected graph asked for M).
inline RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opt = {}) {
  RunResult out;
  const auto started = std::chrono::steady_clock::now();
  const std::uint64_t seed = opt.seed.value_or(cfg.seed);
  const double tol = cfg.tolerance * opt.tolerance_scale;
  std::mt19937_64 rng(seed);
  out.report["name"] = cfg.name;
  out.report["kind"] = cfg.kind;
  out.report["seed"] = seed;
  out.report["tolerance"] = tol;
  const std::string& k = cfg.kind;
  if (k == "leakage_vs_distance") {
    detail::run_leakage(cfg, tol, opt, out);
  } else if (k == "truncation_vs_buffer") {
    detail::run_truncation(cfg, tol, opt, out);
  } else if (k == "covariance_cone") {
    detail::run_covariance(cfg, tol, rng, out);
  } else if (k == "trotter_order") {
    detail::run_trotter(cfg, tol, opt, out);
  } else if (k == "picture_duality") {
    detail::run_duality(cfg, tol, rng, out);
  } else if (k == "composition_adjoint") {
    detail::run_composition(cfg, tol, out);
  } else if (k == "cptp_audit") {
    detail::run_cptp(cfg, tol, rng, out);
  } else if (k == "jw_identity_suite") {
    detail::run_jw_suite(cfg, out);
  } else if (k == "fermionic_leakage") {
    detail::run_fermionic(cfg, tol, out);
  } else if (k == "graph_metrics") {
    detail::run_graph_metrics(cfg, out);
  } else {
    throw Error(ErrorKind::ConfigParse, "unknown experiment kind '" + k + "'");
  }
  json rows = json::array();
  for (const auto& row : out.table.rows) {
    json obj = json::object();
    for (std::size_t i = 0; i < row.size(); ++i) obj[out.table.columns[i]] = detail::number(row[i]);
    rows.push_back(obj);
  }
  out.report["rows"] = rows;
  json verdicts = json::array();
  for (const auto& v : out.verdicts) {
    verdicts.push_back(json{{"name", v.name}, {"pass", v.pass}, {"detail", v.detail}});
  }
  out.report["verdicts"] = verdicts;
  out.report["pass"] = out.passed();
  out.report["wall_time_s"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return out;
}

inline void write_csv(const std::filesystem::path& path, const Table& table) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::Io, "cannot write " + path.string());
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    os << (i ? "," : "") << table.columns[i];
  }
  os << '\n';
  char buf[64];
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (std::isfinite(row[i])) {
        std::snprintf(buf, sizeof buf, "%.16e", row[i]);
      } else {
        std::snprintf(buf, sizeof buf, "%s", std::isnan(row[i]) ? "nan" : "inf");
      }
      os << (i ? "," : "") << buf;
    }
    os << '\n';
  }
}

inline void write_reports(const std::filesystem::path& out_dir, const ExperimentConfig& cfg,
                          const RunResult& result) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + out_dir.string());
  write_csv(out_dir / cfg.csv, result.table);
  std::ofstream os(out_dir / cfg.json);
  if (!os) throw Error(ErrorKind::Io, "cannot write " + (out_dir / cfg.json).string());
  os << result.report.dump(2) << '\n';
}

}  // namespace lrsim::cli

#endif  // LRSIM_TOOLS_RUNNER_HPP
