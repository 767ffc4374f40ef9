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

#ifndef LRSIM_LOCALITY_LAB_HPP
#define LRSIM_LOCALITY_LAB_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "lrsim/error.hpp"
#include "lrsim/lattice_graph.hpp"
#include "lrsim/liouvillian.hpp"
#include "lrsim/operator_core.hpp"
#include "lrsim/propagation.hpp"

namespace lrsim {

/// Speed v and prefactor C of the exponential envelope.
struct BoundParameters {
  double v = 1.0;
  double c = 1.0;
  std::string source = "configured";

  void validate() const {
    if (!(v > 0.0) || !(c > 0.0)) {
      throw Error(ErrorKind::InvalidArgument, "bound parameters need v > 0 and C > 0");
    }
  }
};

/// v = e Z b and C = 8.
inline BoundParameters default_bound_parameters(const LocalLiouvillian& l) {
  const double v = std::numbers::e * static_cast<double>(std::max<std::size_t>(l.z(), 1)) *
                   std::max(l.b(), 1e-300);
  return BoundParameters{v, 8.0, "default"};
}

struct BoundPoint {
  double abscissa = 0.0;
  double measured = 0.0;
  std::optional<double> envelope;
  bool hypothesis_met = true;  // only meaningful for truncation series
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
};

/// Ordinary least squares of y on x. Needs two distinct abscissae.
inline LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorKind::InvalidArgument, "fit needs at least two points");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw Error(ErrorKind::InvalidArgument, "degenerate abscissae");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  fit.points = x.size();
  return fit;
}

struct Verdict {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct BoundReport {
  std::string abscissa_name = "d";
  std::vector<BoundPoint> grid;
  std::optional<LinearFit> fit;
  std::vector<Verdict> verdicts;

  bool passed() const {
    return std::all_of(verdicts.begin(), verdicts.end(),
                       [](const Verdict& v) { return v.pass; });
  }

  bool all_below_envelope() const {
    return std::all_of(grid.begin(), grid.end(), [](const BoundPoint& p) {
      return !p.envelope || p.measured <= *p.envelope;
    });
  }

  /// Log-linear fit of measured against abscissa (log_abscissa = false) or
  /// log-log fit, over points with abscissa >= from and positive measured.
  LinearFit fit_measured(double from, bool log_abscissa) const {
    std::vector<double> x, y;
    for (const auto& p : grid) {
      if (p.abscissa < from || !(p.measured > 0.0) || !std::isfinite(p.abscissa)) continue;
      x.push_back(log_abscissa ? std::log(p.abscissa) : p.abscissa);
      y.push_back(std::log(p.measured));
    }
    return fit_line(x, y);
  }
};

namespace detail {

/// Runs body(i) for i in [0, n) on up to `jobs` threads. The first
/// exception is rethrown after all workers join.
inline void parallel_for(std::size_t n, std::size_t jobs,
                         const std::function<void(std::size_t)>& body) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (failure) std::rethrow_exception(failure);
}

inline VertexSet support_or_declared(const GlobalOperator& a) {
  return a.declared_support ? *a.declared_support : support_of(a);
}

}  // namespace detail

/// C ||A|| ||B|| exp(v dt - d); zero at infinite distance.
inline double lr_envelope(const BoundParameters& p, double norm_a, double norm_b,
                          const Distance& d, double dt) {
  if (dt < 0.0) throw Error(ErrorKind::BadInterval, "negative duration");
  if (d.is_infinite()) return 0.0;
  return p.c * norm_a * norm_b * std::exp(p.v * dt - d.as_double());
}

/// ||[B_Y, tau(s, t)(A_X)]|| in the spectral norm.
inline double commutator_leakage(const LocalLiouvillian& l, const GlobalOperator& a,
                                 const GlobalOperator& b, double s, double t,
                                 double tol = kDefaultTol) {
  detail::check_interval(s, t);
  detail::check_on_lattice(l, a);
  detail::check_on_lattice(l, b);
  if (t == s && !intersects(detail::support_or_declared(a), detail::support_or_declared(b))) {
    return 0.0;
  }
  const Matrix evolved = evolve_heisenberg(l, a.matrix, s, t, tol);
  return op_norm(Matrix(b.matrix * evolved - evolved * b.matrix));
}

/// ||K_Y(tau(s, t)(A_X))|| with K_Y's schedule read at time t.
inline double perturbation_leakage(const LocalLiouvillian& l, const GlobalOperator& a,
                                   const LindbladTerm& k, double s, double t,
                                   double tol = kDefaultTol) {
  detail::check_interval(s, t);
  detail::check_on_lattice(l, a);
  const GlobalOperator evolved = a.with_matrix(evolve_heisenberg(l, a.matrix, s, t, tol));
  return op_norm(adjoint_apply(k, t, evolved));
}

/// The term K = i[B, .] on B's support, for comparing both leakage measures.
inline LindbladTerm commutator_term(const Matrix& b_local, const std::vector<Site>& sites,
                                    const InteractionGraph& g) {
  // adjoint_apply of a Hamiltonian term H gives i[H, A].
  return make_term(sites, b_local, {}, g, TimeSchedule::constant(1.0), "i[B,.]");
}

/// Commutator leakage for a list of B observables, one grid point each, with
/// the abscissa d(X, Y) recomputed from L's interaction graph.
inline BoundReport leakage_vs_distance(const LocalLiouvillian& l, const GlobalOperator& a,
                                       const std::vector<GlobalOperator>& bs, double s,
                                       double t, const BoundParameters& params,
                                       double tol = kDefaultTol, std::size_t jobs = 1) {
  params.validate();
  detail::check_interval(s, t);
  const VertexSet x = detail::support_or_declared(a);
  const double norm_a = op_norm(a);
  BoundReport report;
  report.abscissa_name = "distance";
  report.grid.resize(bs.size());
  // A single evolution serves every B.
  const Matrix evolved = evolve_heisenberg(l, a.matrix, s, t, tol);
  detail::parallel_for(bs.size(), jobs, [&](std::size_t i) {
    const auto& b = bs[i];
    detail::check_on_lattice(l, b);
    const VertexSet y = detail::support_or_declared(b);
    const Distance d = distance(*l.lattice(), x, y);
    BoundPoint p;
    p.abscissa = d.as_double();
    p.measured = (t == s && !intersects(x, y))
                     ? 0.0
                     : op_norm(Matrix(b.matrix * evolved - evolved * b.matrix));
    p.envelope = lr_envelope(params, norm_a, op_norm(b), d, t - s);
    report.grid[i] = p;
  });
  std::stable_sort(report.grid.begin(), report.grid.end(),
                   [](const BoundPoint& p, const BoundPoint& q) { return p.abscissa < q.abscissa; });
  for (std::size_t i = 1; i < report.grid.size(); ++i) {
    if (!(report.grid[i].abscissa > report.grid[i - 1].abscissa)) {
      throw Error(ErrorKind::InvalidArgument, "two observables at the same distance");
    }
  }
  return report;
}

/// (2M / Z) D^(mu - 1) exp(v dt - D) ||A||; zero at infinite D.
inline double truncation_envelope(const BoundParameters& p, double m, int mu, std::size_t z,
                                  const Distance& d, double dt, double norm_a) {
  if (d.is_infinite()) return 0.0;
  const double dd = d.as_double();
  return 2.0 * m / static_cast<double>(std::max<std::size_t>(z, 1)) *
         std::pow(dd, mu - 1) * std::exp(p.v * dt - dd) * norm_a;
}

/// ||tau_{L|V'}(s, t)(A) - tau_L(s, t)(A)|| for nested regions V', against
/// D = d(X, V \ V').
inline BoundReport truncation_error_series(const LocalLiouvillian& l, const GlobalOperator& a,
                                           const std::vector<VertexSet>& regions, double s,
                                           double t, const BoundParameters& params, int mu,
                                           double m, double tol = kDefaultTol,
                                           std::size_t jobs = 1) {
  params.validate();
  detail::check_interval(s, t);
  detail::check_on_lattice(l, a);
  if (regions.empty()) throw Error(ErrorKind::EmptySet, "no regions");
  const VertexSet x = detail::support_or_declared(a);
  const auto& g = *l.lattice();
  for (std::size_t i = 0; i < regions.size(); ++i) {
    if (!is_subset(x, regions[i])) {
      throw Error(ErrorKind::InvalidArgument, "region " + std::to_string(i) + " misses X");
    }
    if (i > 0 && !is_subset(regions[i - 1], regions[i])) {
      throw Error(ErrorKind::InvalidArgument, "regions are not nested");
    }
    for (Site v : regions[i]) {
      if (!g.has_vertex(v)) throw Error(ErrorKind::UnknownVertex, std::to_string(v));
    }
  }
  const Matrix full = evolve_heisenberg(l, a.matrix, s, t, tol);
  const double norm_a = op_norm(a);
  BoundReport report;
  report.abscissa_name = "buffer";
  report.grid.resize(regions.size());
  detail::parallel_for(regions.size(), jobs, [&](std::size_t i) {
    const VertexSet outside = g.complement(regions[i]);
    const Distance d = outside.empty() ? Distance::infinite() : distance(g, x, outside);
    const LocalLiouvillian cut = truncate(l, regions[i]);
    const Matrix approx = evolve_heisenberg(cut, a.matrix, s, t, tol);
    BoundPoint p;
    p.abscissa = d.as_double();
    p.measured = op_norm(Matrix(approx - full));
    p.envelope = truncation_envelope(params, m, mu, l.z(), d, t - s, norm_a);
    p.hypothesis_met = d.is_infinite() || d.as_double() >= 2.0 * mu - 1.0;
    report.grid[i] = p;
  });
  return report;
}

/// cov_rho(A, B) = Tr(rho A B) - Tr(rho A) Tr(rho B), complex in general.
inline cplx covariance(const Matrix& rho, const Matrix& a, const Matrix& b) {
  check_same_dim(rho, a);
  check_same_dim(rho, b);
  // Tr(X Y) = sum_ij X_ij Y_ji
  auto trace_of_product = [](const Matrix& x, const Matrix& y) {
    return (x.array() * y.transpose().array()).sum();
  };
  const Matrix ra = rho * a;
  return trace_of_product(ra, b) - trace_of_product(rho, a) * trace_of_product(rho, b);
}

inline cplx covariance(const GlobalOperator& rho, const GlobalOperator& a,
                       const GlobalOperator& b) {
  return covariance(rho.matrix, a.matrix, b.matrix);
}

/// |cov_rho(tau(s, t)A, tau(s, t)B)| over increasing times, with envelope
/// scale * exp(v (t - s) - d(X, Y) / 2).
inline BoundReport covariance_cone_experiment(const LocalLiouvillian& l,
                                              const GlobalOperator& rho,
                                              const GlobalOperator& a,
                                              const GlobalOperator& b, double s,
                                              const std::vector<double>& times,
                                              const BoundParameters& params,
                                              double tol = kDefaultTol) {
  params.validate();
  detail::check_on_lattice(l, rho);
  detail::check_on_lattice(l, a);
  detail::check_on_lattice(l, b);
  check_state(rho.matrix, 1e-8);
  if (!is_product_state(rho, 1e-8)) {
    throw Error(ErrorKind::InvalidArgument, "covariance cone needs a product state");
  }
  for (std::size_t i = 0; i < times.size(); ++i) {
    detail::check_interval(s, times[i]);
    if (i > 0 && !(times[i] > times[i - 1])) {
      throw Error(ErrorKind::InvalidArgument, "times must be strictly increasing");
    }
  }
  const Distance d = distance(*l.lattice(), detail::support_or_declared(a),
                              detail::support_or_declared(b));
  BoundReport report;
  report.abscissa_name = "time";
  Matrix ea = a.matrix, eb = b.matrix;
  double reached = s;
  const bool stationary = l.time_independent();
  for (double t : times) {
    if (stationary) {
      // Time-independent dynamics: tau(s, t) = tau(s, s + (t - reached)) tau(s, reached).
      ea = evolve_heisenberg(l, ea, s, s + (t - reached), tol);
      eb = evolve_heisenberg(l, eb, s, s + (t - reached), tol);
      reached = t;
    } else {
      ea = evolve_heisenberg(l, a.matrix, s, t, tol);
      eb = evolve_heisenberg(l, b.matrix, s, t, tol);
    }
    BoundPoint p;
    p.abscissa = t;
    p.measured = std::abs(covariance(rho.matrix, ea, eb));
    p.envelope = d.is_infinite() ? 0.0
                                 : params.c * std::exp(params.v * (t - s) - d.as_double() / 2);
    report.grid.push_back(p);
  }
  return report;
}

namespace detail {

/// Applies a superoperator acting on the column-stacked operators of
/// `sites` to a global operator, leaving the other tensor factors alone.
inline Matrix apply_local_superop(const Matrix& superop, const std::vector<Site>& sites,
                                  const InteractionGraph& g, const Matrix& a) {
  const auto lay = layout(g, sites);
  const auto dl = static_cast<Eigen::Index>(lay.local_dim);
  std::vector<std::size_t> rests;
  for (std::size_t i = 0; i < lay.global_dim; ++i) {
    if (lay.local_index(i) == 0) rests.push_back(i);
  }
  const auto nr = static_cast<Eigen::Index>(rests.size());
  std::vector<std::size_t> offsets(lay.local_dim);
  for (std::size_t l = 0; l < lay.local_dim; ++l) offsets[l] = lay.offset(l);
  Matrix blocks(dl * dl, nr * nr);
  for (Eigen::Index r2 = 0; r2 < nr; ++r2) {
    for (Eigen::Index r1 = 0; r1 < nr; ++r1) {
      for (Eigen::Index lj = 0; lj < dl; ++lj) {
        for (Eigen::Index li = 0; li < dl; ++li) {
          blocks(li + lj * dl, r1 + r2 * nr) =
              a(static_cast<Eigen::Index>(rests[r1] + offsets[li]),
                static_cast<Eigen::Index>(rests[r2] + offsets[lj]));
        }
      }
    }
  }
  const Matrix mapped = superop * blocks;
  Matrix out(a.rows(), a.cols());
  for (Eigen::Index r2 = 0; r2 < nr; ++r2) {
    for (Eigen::Index r1 = 0; r1 < nr; ++r1) {
      for (Eigen::Index lj = 0; lj < dl; ++lj) {
        for (Eigen::Index li = 0; li < dl; ++li) {
          out(static_cast<Eigen::Index>(rests[r1] + offsets[li]),
              static_cast<Eigen::Index>(rests[r2] + offsets[lj])) =
              mapped(li + lj * dl, r1 + r2 * nr);
        }
      }
    }
  }
  return out;
}

/// Terms of L grouped by support, in lexicographic order of sorted support.
inline std::vector<std::pair<VertexSet, std::vector<LindbladTerm>>> trotter_groups(
    const LocalLiouvillian& l) {
  std::map<VertexSet, std::vector<LindbladTerm>> groups;
  for (const auto& term : l.terms()) {
    if (!term.is_identically_zero()) groups[term.support()].push_back(term);
  }
  return {groups.begin(), groups.end()};
}

}  // namespace detail

/// First-order product formula for tau(s, t)(A): n equal slices, and in each
/// slice the strictly local propagators tau_{L_X} of every support X applied
/// to the observable in lexicographic order of X. Slices are applied from
/// the latest to the earliest, as the backward evolution requires.
inline GlobalOperator trotter_evolve(const LocalLiouvillian& l, const GlobalOperator& a,
                                     double s, double t, std::size_t n_steps,
                                     double tol = kDefaultTol) {
  if (n_steps < 1) throw Error(ErrorKind::InvalidArgument, "n_steps must be at least 1");
  detail::check_interval(s, t);
  detail::check_on_lattice(l, a);
  if (t == s || l.empty()) return a.with_matrix(a.matrix);
  const auto& g = *l.lattice();
  struct LocalPiece {
    std::vector<Site> sites;
    LocalLiouvillian generator;
  };
  std::vector<LocalPiece> pieces;
  for (auto& [support, group] : detail::trotter_groups(l)) {
    const auto sites = detail::ordered(g, support);
    std::map<Site, int> dims;
    for (Site v : sites) dims[v] = g.local_dim(v);
    const InteractionGraph local(sites, {support}, dims);
    pieces.push_back(LocalPiece{sites, assemble(local, group)});
  }
  const double h = (t - s) / static_cast<double>(n_steps);
  const bool stationary = l.time_independent();
  std::vector<Matrix> cached(pieces.size());
  Matrix y = a.matrix;
  for (std::size_t k = n_steps; k-- > 0;) {
    const double lo = s + h * static_cast<double>(k);
    const double hi = k + 1 == n_steps ? t : lo + h;
    for (std::size_t p = 0; p < pieces.size(); ++p) {
      Matrix step;
      if (stationary && cached[p].size() > 0) {
        step = cached[p];
      } else {
        step = heisenberg_propagator_matrix(pieces[p].generator, lo, hi, tol).matrix;
        if (stationary) cached[p] = step;
      }
      y = detail::apply_local_superop(step, pieces[p].sites, g, y);
    }
  }
  return a.with_matrix(std::move(y));
}

/// ||trotter_evolve(n) - tau(s, t)(A)|| for each n, with the reference
/// integrated at tolerance 1e-12, and the log-log slope as fitted order.
inline BoundReport trotter_error_series(const LocalLiouvillian& l, const GlobalOperator& a,
                                        double s, double t, const std::vector<std::size_t>& steps,
                                        double tol = 1e-12, std::size_t jobs = 1) {
  detail::check_interval(s, t);
  for (std::size_t i = 1; i < steps.size(); ++i) {
    if (steps[i] <= steps[i - 1]) {
      throw Error(ErrorKind::InvalidArgument, "step counts must be increasing");
    }
  }
  const Matrix reference = evolve_heisenberg(l, a.matrix, s, t, 1e-12);
  BoundReport report;
  report.abscissa_name = "steps";
  report.grid.resize(steps.size());
  detail::parallel_for(steps.size(), jobs, [&](std::size_t i) {
    const GlobalOperator approx = trotter_evolve(l, a, s, t, steps[i], tol);
    BoundPoint p;
    p.abscissa = static_cast<double>(steps[i]);
    p.measured = op_norm(Matrix(approx.matrix - reference));
    report.grid[i] = p;
  });
  if (steps.size() >= 2) {
    try {
      report.fit = report.fit_measured(0.0, /*log_abscissa=*/true);
    } catch (const Error&) {
      // Errors at the floor leave nothing to fit.
    }
  }
  return report;
}

}  // namespace lrsim

#endif  // LRSIM_LOCALITY_LAB_HPP
