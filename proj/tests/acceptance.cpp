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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails. Tolerances are pinned below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lrsim/lrsim.hpp"

namespace {

using namespace lrsim;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_s;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

TimeSchedule two_piece(double split, double end) {
  return TimeSchedule::piecewise({SchedulePiece{0.0, split, {1.0, 0.8}},
                                  SchedulePiece{split, end, {0.4, -0.3, 0.5}}});
}

/// Heisenberg (J = 1) edges plus dephasing (gamma) on every site.
LocalLiouvillian heisenberg_dephasing_chain(int n, double gamma) {
  const auto g = chain_graph(n, true);
  std::vector<LindbladTerm> terms;
  for (int j = 1; j < n; ++j) terms.push_back(make_term({j, j + 1}, models::heisenberg_edge(1.0), {}, g));
  for (int j = 1; j <= n; ++j) {
    terms.push_back(make_term({j}, Matrix(), {models::dephasing_jump(gamma)}, g));
  }
  return assemble(g, terms);
}

Outcome picture_duality() {
  const int n = 5;
  const double t_end = 1.0;
  const auto g = chain_graph(n, true);
  std::vector<LindbladTerm> terms;
  for (int j = 1; j < n; ++j) {
    terms.push_back(make_term({j, j + 1}, models::xy_edge(1.0), {}, g, two_piece(0.4, t_end)));
  }
  for (int j = 1; j <= n; ++j) {
    terms.push_back(make_term({j}, Matrix(), {models::dephasing_jump(0.3)}, g,
                              TimeSchedule::piecewise({SchedulePiece{0.0, 0.4, {0.5}},
                                                       SchedulePiece{0.4, t_end, {1.5}}})));
  }
  const auto l = assemble(g, terms);
  std::mt19937_64 rng(11);
  const auto d = static_cast<Eigen::Index>(l.hilbert_dim());
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Matrix rho = random_state(d, rng);
    const Matrix a = random_hermitian(d, rng);
    const Matrix ta = evolve_heisenberg(l, a, 0.0, t_end, 1e-10);
    const Matrix trho = evolve_schrodinger(l, rho, 0.0, t_end, 1e-10);
    worst = std::max(worst, std::abs((rho * ta).trace() - (trho * a).trace()));
  }
  return {worst <= 1e-8, "max |Tr(rho tau(A)) - Tr(T(rho) A)| = " + fmt("%.3e", worst) +
                             " (tol 1e-8, 20 pairs)"};
}

Outcome composition_adjoint() {
  const int n = 3;
  const double t_end = 1.0;
  const auto g = chain_graph(n, true);
  std::vector<LindbladTerm> terms;
  for (int j = 1; j < n; ++j) {
    terms.push_back(make_term({j, j + 1}, models::heisenberg_edge(0.7), {}, g, two_piece(0.5, t_end)));
  }
  terms.push_back(make_term({1}, models::transverse_field_site(0.6),
                            {models::amplitude_damping_jump(0.4)}, g, two_piece(0.5, t_end)));
  terms.push_back(make_term({3}, Matrix(), {models::dephasing_jump(0.2)}, g));
  const auto l = assemble(g, terms);
  double comp = 0.0;
  for (double r : {0.25, 0.5, 0.8}) {
    const auto tts = propagator_matrix(l, 0.0, t_end, 1e-10);
    const auto ttr = propagator_matrix(l, r, t_end, 1e-10);
    const auto trs = propagator_matrix(l, 0.0, r, 1e-10);
    comp = std::max(comp, op_norm(Matrix(tts.matrix - ttr.matrix * trs.matrix)));
    const auto hts = heisenberg_propagator_matrix(l, 0.0, t_end, 1e-10);
    const auto hrs = heisenberg_propagator_matrix(l, 0.0, r, 1e-10);
    const auto htr = heisenberg_propagator_matrix(l, r, t_end, 1e-10);
    comp = std::max(comp, op_norm(Matrix(hts.matrix - hrs.matrix * htr.matrix)));
  }
  const double adj = adjoint_consistency_check(l, 0.0, t_end, 1e-10);
  return {comp <= 1e-8 && adj <= 1e-8,
          "composition defect " + fmt("%.3e", comp) + ", adjoint defect " + fmt("%.3e", adj) +
              " (tol 1e-8)"};
}

Outcome cptp_audit() {
  const int n = 3;
  const auto g = chain_graph(n, true);
  std::mt19937_64 rng(29);
  double worst_eig = 1.0, worst_trace = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<LindbladTerm> terms;
    for (int j = 1; j < n; ++j) {
      terms.push_back(make_term({j, j + 1}, random_hermitian(4, rng), {0.3 * random_matrix(4, rng)},
                                g, two_piece(0.5, 1.0)));
    }
    for (int j = 1; j <= n; ++j) {
      terms.push_back(make_term({j}, random_hermitian(2, rng),
                                {0.5 * random_matrix(2, rng), 0.5 * random_matrix(2, rng)}, g));
    }
    const auto l = assemble(g, terms);
    const auto map = propagator_matrix(l, 0.0, 1.0, 1e-10);
    const Matrix choi = choi_matrix(map);
    worst_eig = std::min(worst_eig, min_eigenvalue(choi));
    worst_trace = std::max(worst_trace, choi_trace_defect(choi, map.hilbert_dim()));
    worst_trace = std::max(worst_trace, trace_preservation_defect(map));
  }
  const double transpose_eig = min_eigenvalue(choi_matrix(transpose_map(8)));
  const bool pass = worst_eig >= -1e-9 && worst_trace <= 1e-9 && transpose_eig < -0.5;
  return {pass, "min Choi eigenvalue " + fmt("%.3e", worst_eig) + " (>= -1e-9), trace defect " +
                    fmt("%.3e", worst_trace) + " (<= 1e-9), transpose control " +
                    fmt("%.3f", transpose_eig) + " (< -0.5)"};
}

Outcome lieb_robinson_cone() {
  const int n = 10;
  const auto l = heisenberg_dephasing_chain(n, 0.5);
  const double dt = 0.2 / l.b();
  const auto a = pauli_string({{1, 'X'}}, l.lattice());
  std::vector<GlobalOperator> bs;
  for (int d = 2; d <= 8; ++d) bs.push_back(pauli_string({{1 + d, 'Z'}}, l.lattice()));
  const BoundParameters params = default_bound_parameters(l);
  const auto report = leakage_vs_distance(l, a, bs, 0.0, dt, params, 1e-10);
  bool positive = true;
  for (const auto& p : report.grid) positive = positive && p.measured > 0.0;
  const auto fit = report.fit_measured(2.0, false);
  const bool pass = positive && fit.slope <= -0.8 && fit.r_squared >= 0.98 &&
                    report.all_below_envelope();
  return {pass, "slope " + fmt("%.3f", fit.slope) + " (<= -0.8), R^2 " +
                    fmt("%.5f", fit.r_squared) + " (>= 0.98), leakage(d=8) " +
                    fmt("%.3e", report.grid.back().measured) + ", below envelope: " +
                    (report.all_below_envelope() ? "yes" : "no")};
}

Outcome quasi_locality() {
  const int n = 9;
  const auto l = heisenberg_dephasing_chain(n, 0.5);
  const double dt = 0.3 / l.b();
  const auto a = pauli_string({{5, 'X'}}, l.lattice());
  std::vector<VertexSet> regions;
  for (int k = 0; k <= 3; ++k) {
    VertexSet r;
    for (int v = 5 - k; v <= 5 + k; ++v) r.insert(v);
    regions.push_back(r);
  }
  regions.push_back(l.lattice()->all_vertices());
  const auto report = truncation_error_series(l, a, regions, 0.0, dt, default_bound_parameters(l),
                                              1, spatial_dimension_constant(*l.lattice(), 1), 1e-10);
  bool decreasing = true;
  for (std::size_t i = 1; i + 1 < report.grid.size(); ++i) {
    decreasing = decreasing && report.grid[i].measured < report.grid[i - 1].measured;
  }
  const auto fit = report.fit_measured(1.0, false);
  const double full_error = report.grid.back().measured;
  const bool pass = decreasing && fit.slope <= -0.8 && full_error <= 1e-9;
  return {pass, std::string("strictly decreasing: ") + (decreasing ? "yes" : "no") + ", slope " +
                    fmt("%.3f", fit.slope) + " (<= -0.8), region=V error " +
                    fmt("%.3e", full_error) + " (<= 1e-9)"};
}

Outcome covariance_suppression() {
  const int n = 10;
  const auto l = heisenberg_dephasing_chain(n, 0.5);
  const auto params = default_bound_parameters(l);
  const auto a = pauli_string({{2, 'X'}}, l.lattice());
  const auto b = pauli_string({{9, 'X'}}, l.lattice());
  const double d = distance(*l.lattice(), {2}, {9}).as_double();
  std::mt19937_64 rng(5);
  std::vector<Matrix> sites;
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXcd psi = Eigen::VectorXcd::Random(2);
    psi.normalize();
    sites.push_back(psi * psi.adjoint());
  }
  const auto rho = product_state(sites, l.lattice());
  const double t_max = d / 4.0 / params.v;
  std::vector<double> times;
  for (int k = 0; k <= 4; ++k) times.push_back(t_max * k / 4.0);
  const auto report = covariance_cone_experiment(l, rho, a, b, 0.0, times, params, 1e-10);
  double worst = 0.0;
  for (const auto& p : report.grid) worst = std::max(worst, p.measured);
  const double at_zero = report.grid.front().measured;
  const bool pass = d == 7.0 && worst <= 1e-3 && at_zero <= 1e-12;
  return {pass, "d(X,Y) = " + fmt("%.0f", d) + ", max |cov| for v(t-s) <= d/4: " +
                    fmt("%.3e", worst) + " (<= 1e-3), |cov(t=s)| " + fmt("%.3e", at_zero) +
                    " (<= 1e-12)"};
}

LocalLiouvillian heisenberg_chain(int n) {
  const auto g = chain_graph(n);
  std::vector<LindbladTerm> terms;
  for (int j = 1; j < n; ++j) terms.push_back(make_term({j, j + 1}, models::heisenberg_edge(1.0), {}, g));
  return assemble(g, terms);
}

GlobalOperator staggered_x(const LatticePtr& g) {
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(g->hilbert_dim()),
                          static_cast<Eigen::Index>(g->hilbert_dim()));
  for (Site v : g->vertices()) m += (v % 2 == 0 ? 1.0 : -1.0) * pauli_string({{v, 'X'}}, g).matrix;
  return GlobalOperator{g, m, std::nullopt};
}

Outcome trotter_order() {
  const double t_end = 0.5;
  const auto l5 = heisenberg_chain(5);
  const auto series = trotter_error_series(l5, staggered_x(l5.lattice()), 0.0, t_end,
                                           {4, 8, 16, 32, 64});
  const double order = series.fit ? series.fit->slope : 0.0;

  const auto gc = chain_graph(5, true);
  std::vector<LindbladTerm> commuting;
  for (int j = 1; j < 5; ++j) commuting.push_back(make_term({j, j + 1}, models::zz_edge(0.9), {}, gc));
  for (int j = 1; j <= 5; ++j) {
    commuting.push_back(make_term({j}, Matrix(), {models::dephasing_jump(0.4)}, gc));
  }
  const auto lc = assemble(gc, commuting);
  const auto xs = staggered_x(lc.lattice());
  const Matrix exact = evolve_heisenberg(lc, xs.matrix, 0.0, t_end, 1e-12);
  const double control = op_norm(Matrix(trotter_evolve(lc, xs, 0.0, t_end, 1, 1e-12).matrix - exact));

  std::vector<double> by_size;
  for (int n : {4, 5, 6}) {
    const auto l = heisenberg_chain(n);
    const auto r = trotter_error_series(l, staggered_x(l.lattice()), 0.0, t_end, {8});
    by_size.push_back(r.grid.front().measured);
  }
  const bool grows = by_size[0] < by_size[1] && by_size[1] < by_size[2];
  const bool pass = order >= -1.3 && order <= -0.7 && control <= 1e-9 && grows;
  return {pass, "fitted order " + fmt("%.3f", order) + " (in [-1.3, -0.7]), commuting control " +
                    fmt("%.3e", control) + " (<= 1e-9), error at n=8 for N=4,5,6: " +
                    fmt("%.3e", by_size[0]) + ", " + fmt("%.3e", by_size[1]) + ", " +
                    fmt("%.3e", by_size[2])};
}

double mat_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

Outcome jordan_wigner_suite() {
  double worst = 0.0;
  for (int n = 1; n <= 5; ++n) {
    const auto chain = jw_chain(n);
    const auto dim = static_cast<Eigen::Index>(chain->hilbert_dim());
    const Matrix id = Matrix::Identity(dim, dim);
    for (int j = 1; j <= n; ++j) {
      const Matrix f = fermion_op(j, false, chain).matrix;
      const Matrix fd = fermion_op(j, true, chain).matrix;
      const Matrix w1 = majorana(2 * j - 1, chain).matrix;
      const Matrix w2 = majorana(2 * j, chain).matrix;
      Matrix string = id;
      for (int k = 1; k < j; ++k) string = string * pauli_string({{k, 'Z'}}, chain).matrix;
      const Matrix xj = pauli_string({{j, 'X'}}, chain).matrix;
      const Matrix yj = pauli_string({{j, 'Y'}}, chain).matrix;
      const Matrix zj = pauli_string({{j, 'Z'}}, chain).matrix;
      worst = std::max(worst, mat_diff(f + fd, w1));
      worst = std::max(worst, mat_diff(kI * f - kI * fd, w2));
      worst = std::max(worst, mat_diff(w1, xj * string));
      worst = std::max(worst, mat_diff(w2, yj * string));
      worst = std::max(worst, mat_diff(f, 0.5 * (w1 - kI * w2)));
      worst = std::max(worst, mat_diff(fd * f, 0.5 * (id - kI * w1 * w2)));
      worst = std::max(worst, mat_diff(zj, -kI * w1 * w2));
      worst = std::max(worst, mat_diff(zj, 2.0 * fd * f - id));
      worst = std::max(worst, mat_diff(xj, w1 * string));
      worst = std::max(worst, mat_diff(yj, w2 * string));
      for (int k = j; k <= n; ++k) {
        const Matrix lhs = fd * fermion_op(k, false, chain).matrix;
        worst = std::max(worst, mat_diff(lhs, jw_hopping_string(j, k, chain).matrix));
      }
      for (int k = 1; k <= n; ++k) {
        const Matrix fk = fermion_op(k, false, chain).matrix;
        const Matrix fdk = fermion_op(k, true, chain).matrix;
        worst = std::max(worst, mat_diff(anticommutator(f, fdk), (j == k ? 1.0 : 0.0) * id));
        worst = std::max(worst, mat_diff(anticommutator(f, fk), 0.0 * id));
      }
    }
  }
  double majorana_worst = 0.0;
  {
    const auto chain = jw_chain(5);
    const Matrix id = Matrix::Identity(32, 32);
    for (int j = 1; j <= 10; ++j) {
      for (int k = 1; k <= 10; ++k) {
        const Matrix ac = anticommutator(majorana(j, chain).matrix, majorana(k, chain).matrix);
        majorana_worst = std::max(majorana_worst, mat_diff(ac, (j == k ? 2.0 : 0.0) * id));
      }
    }
  }
  double spectrum_worst = 0.0;
  for (int n : {4, 5, 6}) {
    FermionPolynomial h;
    for (int j = 1; j < n; ++j) h = h + hopping(j, j + 1, 1.0);
    const Matrix spin = jw_map(h, n).matrix;
    const Eigen::VectorXd sector = sector_spectrum(spin, n, 1);
    Eigen::MatrixXd single = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j + 1 < n; ++j) single(j, j + 1) = single(j + 1, j) = 1.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(single);
    spectrum_worst = std::max(spectrum_worst, (sector - es.eigenvalues()).cwiseAbs().maxCoeff());
  }
  const bool pass = worst <= 1e-12 && majorana_worst <= 1e-12 && spectrum_worst <= 1e-9;
  return {pass, "identity defect " + fmt("%.3e", worst) + " (<= 1e-12), Majorana defect " +
                    fmt("%.3e", majorana_worst) + " (<= 1e-12), one-particle spectrum defect " +
                    fmt("%.3e", spectrum_worst) + " (<= 1e-9)"};
}

Outcome fermionic_cone() {
  const int n = 8;
  std::vector<FermionTerm> terms;
  for (int j = 1; j < n; ++j) terms.push_back(FermionTerm{{j, j + 1}, hopping(j, j + 1, 1.0)});
  const auto l = jw_liouvillian(n, terms);
  const double dt = 0.2 / l.b();
  const FermionObservable a{{1}, number_op(1)};
  std::vector<FermionObservable> bs;
  for (int k = 2; k <= n; ++k) bs.push_back(FermionObservable{{k}, number_op(k)});
  const auto report = fermionic_lr_experiment(n, terms, a, bs, 0.0, dt, default_bound_parameters(l));
  bool positive = true;
  for (const auto& p : report.grid) positive = positive && p.measured > 0.0;
  const auto fit = report.fit_measured(1.0, false);
  const bool pass = positive && fit.slope <= -0.8 && fit.r_squared >= 0.98;
  return {pass, "slope " + fmt("%.3f", fit.slope) + " (<= -0.8), R^2 " + fmt("%.5f", fit.r_squared) +
                    " (>= 0.98), b = " + fmt("%.4f", l.b())};
}

Outcome graph_metrics() {
  // 5 x 4 grid of nodes n{x}{y} with id 4x + y + 1.
  auto id = [](int x, int y) { return 4 * x + y + 1; };
  std::vector<Site> vertices;
  for (int x = 0; x < 5; ++x) {
    for (int y = 0; y < 4; ++y) vertices.push_back(id(x, y));
  }
  const std::vector<VertexSet> edges = {
      {id(4, 0)},
      {id(1, 1), id(2, 2)},
      {id(1, 2), id(2, 1)},
      {id(3, 2), id(3, 3), id(4, 3)},
      {id(3, 0), id(3, 1), id(4, 1)},
      {id(0, 1), id(1, 1), id(1, 0)},
      {id(0, 2), id(0, 3), id(1, 3)},
      {id(2, 3), id(3, 3)},
      {id(1, 0), id(2, 0)},
      {id(3, 1), id(2, 2)},
      {id(3, 2), id(4, 2)},
      {id(2, 0), id(3, 0)},
      {id(4, 2), id(4, 1)},
      {id(2, 3), id(2, 2)},
  };
  const auto fig = build_graph(vertices, edges, 2);
  const std::size_t z = max_neighbors(fig);

  const auto chain = chain_graph(12);
  bool distances_ok = true;
  for (int j = 1; j <= 12; ++j) {
    for (int k = 1; k <= 12; ++k) {
      const Distance d = distance(chain, {j}, {k});
      distances_ok = distances_ok && !d.is_infinite() &&
                     d.value() == static_cast<std::size_t>(std::abs(j - k));
    }
  }
  const double m = spatial_dimension_constant(chain, 1);
  const bool pass = z == 4 && distances_ok && m == 2.0;
  return {pass, "hypergraph Z = " + std::to_string(z) + " (== 4), chain distances |j-k|: " +
                    (distances_ok ? "yes" : "no") + ", M(chain, mu=1) = " + fmt("%.1f", m) +
                    " (== 2)"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "picture duality", 10, picture_duality},
      {2, "composition and adjoint", 30, composition_adjoint},
      {3, "CPTP audit", 60, cptp_audit},
      {4, "Lieb-Robinson cone", 180, lieb_robinson_cone},
      {5, "quasi-locality", 120, quasi_locality},
      {6, "covariance suppression", 120, covariance_suppression},
      {7, "Trotter order", 180, trotter_order},
      {8, "Jordan-Wigner identities", 30, jordan_wigner_suite},
      {9, "fermionic cone", 120, fermionic_cone},
      {10, "graph metrics", 1, graph_metrics},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failures = 0;
  std::size_t ran = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    ++ran;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_budget = secs <= c.budget_s;
    const bool pass = out.pass && in_budget;
    if (!pass) ++failures;
    std::printf("[%s] criterion %2d %-26s %s; %.1f s (budget %.0f s)\n", pass ? "PASS" : "FAIL",
                c.id, c.name.c_str(), out.detail.c_str(), secs, c.budget_s);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(ran) - failures, ran);
  return failures == 0 ? 0 : 1;
}
