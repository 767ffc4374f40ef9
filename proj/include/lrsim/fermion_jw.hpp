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

#ifndef LRSIM_FERMION_JW_HPP
#define LRSIM_FERMION_JW_HPP

#include <algorithm>
#include <cstdlib>
#include <string>
#include <utility>
#include <vector>

#include "lrsim/error.hpp"
#include "lrsim/lattice_graph.hpp"
#include "lrsim/liouvillian.hpp"
#include "lrsim/locality_lab.hpp"
#include "lrsim/operator_core.hpp"
#include "lrsim/propagation.hpp"

namespace lrsim {

// Jordan-Wigner conventions on the chain 1..N:
//   w_{2j-1} = X_j prod_{j'<j} Z_{j'},  w_{2j} = Y_j prod_{j'<j} Z_{j'},
//   f_j = (w_{2j-1} - i w_{2j}) / 2.
// With Z = diag(1, -1) this makes f_j = |1><0| on site j, so the occupied
// state is Z = +1 and f_j^dag f_j = (1 + Z_j) / 2.

namespace detail {

inline void check_chain(const LatticePtr& chain) {
  check_lattice(chain);
  const auto& v = chain->vertices();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] != static_cast<Site>(i + 1) || chain->dims()[i] != 2) {
      throw Error(ErrorKind::InvalidArgument,
                  "Jordan-Wigner needs a qubit chain with vertices 1..N in order");
    }
  }
}

inline void check_site(int j, int n) {
  if (j < 1 || j > n) {
    throw Error(ErrorKind::IndexOutOfRange,
                "site " + std::to_string(j) + " outside 1.." + std::to_string(n));
  }
}

/// P (x) prod_{j'<j} Z_{j'} as a Pauli string.
inline GlobalOperator string_operator(char p, int j, const LatticePtr& chain) {
  std::vector<std::pair<Site, char>> factors;
  for (int k = 1; k < j; ++k) factors.emplace_back(k, 'Z');
  factors.emplace_back(j, p);
  return pauli_string(factors, chain);
}

}  // namespace detail

/// Qubit chain 1..N without edges, the home of Jordan-Wigner operators.
inline LatticePtr jw_chain(int n) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "chain length must be positive");
  return share(chain_graph(n));
}

/// Majorana operator w_k, k = 1..2N.
inline GlobalOperator majorana(int k, const LatticePtr& chain) {
  detail::check_chain(chain);
  const int n = static_cast<int>(chain->num_vertices());
  if (k < 1 || k > 2 * n) {
    throw Error(ErrorKind::IndexOutOfRange,
                "Majorana index " + std::to_string(k) + " outside 1.." + std::to_string(2 * n));
  }
  const int j = (k + 1) / 2;
  return detail::string_operator(k % 2 == 1 ? 'X' : 'Y', j, chain);
}

inline GlobalOperator majorana(int k, int n) { return majorana(k, jw_chain(n)); }

/// f_j, or f_j^dag when `dagger` is set.
inline GlobalOperator fermion_op(int j, bool dagger, const LatticePtr& chain) {
  detail::check_chain(chain);
  detail::check_site(j, static_cast<int>(chain->num_vertices()));
  const Matrix w1 = majorana(2 * j - 1, chain).matrix;
  const Matrix w2 = majorana(2 * j, chain).matrix;
  Matrix f = 0.5 * (dagger ? Matrix(w1 + kI * w2) : Matrix(w1 - kI * w2));
  GlobalOperator out{chain, std::move(f), std::nullopt};
  VertexSet support;
  for (int k = 1; k <= j; ++k) support.insert(k);
  out.declared_support = support;
  return out;
}

inline GlobalOperator fermion_op(int j, bool dagger, int n) {
  return fermion_op(j, dagger, jw_chain(n));
}

enum class Parity { Even, Odd, Mixed };

inline std::string_view to_string(Parity p) {
  switch (p) {
    case Parity::Even: return "even";
    case Parity::Odd: return "odd";
    case Parity::Mixed: return "mixed";
  }
  return "mixed";
}

/// Product of creation/annihilation operators times a coefficient. Factors
/// are signed sites: +j is f_j^dag, -j is f_j. They multiply left to right.
struct FermionMonomial {
  std::vector<int> factors;
  cplx coefficient{1.0, 0.0};

  FermionMonomial adjoint() const {
    FermionMonomial out{{factors.rbegin(), factors.rend()}, std::conj(coefficient)};
    for (int& f : out.factors) f = -f;
    return out;
  }
};

struct FermionPolynomial {
  std::vector<FermionMonomial> monomials;

  FermionPolynomial() = default;
  FermionPolynomial(std::initializer_list<FermionMonomial> m) : monomials(m) {}
  explicit FermionPolynomial(std::vector<FermionMonomial> m) : monomials(std::move(m)) {}

  FermionPolynomial adjoint() const {
    FermionPolynomial out;
    for (const auto& m : monomials) out.monomials.push_back(m.adjoint());
    return out;
  }

  /// Sites touched by any factor.
  VertexSet sites() const {
    VertexSet out;
    for (const auto& m : monomials) {
      for (int f : m.factors) out.insert(std::abs(f));
    }
    return out;
  }

  friend FermionPolynomial operator+(FermionPolynomial a, const FermionPolynomial& b) {
    a.monomials.insert(a.monomials.end(), b.monomials.begin(), b.monomials.end());
    return a;
  }

  friend FermionPolynomial operator*(const FermionPolynomial& a, const FermionPolynomial& b) {
    FermionPolynomial out;
    for (const auto& x : a.monomials) {
      for (const auto& y : b.monomials) {
        FermionMonomial m{x.factors, x.coefficient * y.coefficient};
        m.factors.insert(m.factors.end(), y.factors.begin(), y.factors.end());
        out.monomials.push_back(std::move(m));
      }
    }
    return out;
  }

  friend FermionPolynomial operator*(cplx c, FermionPolynomial p) {
    for (auto& m : p.monomials) m.coefficient *= c;
    return p;
  }
};

/// Even iff every monomial has an even number of factors. The empty
/// polynomial counts as even.
inline Parity parity_of(const FermionPolynomial& poly) {
  bool even = false, odd = false;
  for (const auto& m : poly.monomials) {
    (m.factors.size() % 2 == 0 ? even : odd) = true;
  }
  if (even && odd) return Parity::Mixed;
  return odd ? Parity::Odd : Parity::Even;
}

/// n_j = f_j^dag f_j.
inline FermionPolynomial number_op(int j) { return {FermionMonomial{{j, -j}, 1.0}}; }

/// t (f_j^dag f_k + f_k^dag f_j).
inline FermionPolynomial hopping(int j, int k, double t = 1.0) {
  return {FermionMonomial{{j, -k}, t}, FermionMonomial{{k, -j}, t}};
}

/// Spin-chain matrix of a polynomial, mapped factor by factor in the given
/// order. Non-even polynomials throw OddParity unless `allow_odd` is set.
inline GlobalOperator jw_map(const FermionPolynomial& poly, const LatticePtr& chain,
                             bool allow_odd = false) {
  detail::check_chain(chain);
  const int n = static_cast<int>(chain->num_vertices());
  if (!allow_odd && parity_of(poly) != Parity::Even) {
    throw Error(ErrorKind::OddParity,
                std::string("polynomial has ") + std::string(to_string(parity_of(poly))) +
                    " parity");
  }
  std::vector<Matrix> creation(static_cast<std::size_t>(n) + 1),
      annihilation(static_cast<std::size_t>(n) + 1);
  const auto dim = static_cast<Eigen::Index>(chain->hilbert_dim());
  Matrix out = Matrix::Zero(dim, dim);
  for (const auto& m : poly.monomials) {
    Matrix term = Matrix::Identity(dim, dim);
    for (int f : m.factors) {
      const int j = std::abs(f);
      if (f == 0) throw Error(ErrorKind::IndexOutOfRange, "site 0 in a monomial");
      detail::check_site(j, n);
      auto& cache = f > 0 ? creation : annihilation;
      if (cache[j].size() == 0) cache[j] = fermion_op(j, f > 0, chain).matrix;
      term = term * cache[j];
    }
    out += m.coefficient * term;
  }
  return GlobalOperator{chain, std::move(out), std::nullopt};
}

inline GlobalOperator jw_map(const FermionPolynomial& poly, int n, bool allow_odd = false) {
  return jw_map(poly, jw_chain(n), allow_odd);
}

/// (1/4) S+_j (prod_{j<=j'<k} Z_{j'}) S-_k with S+- = X +- iY, operators
/// multiplied in the order written.
inline GlobalOperator jw_hopping_string(int j, int k, const LatticePtr& chain) {
  detail::check_chain(chain);
  const int n = static_cast<int>(chain->num_vertices());
  detail::check_site(j, n);
  detail::check_site(k, n);
  if (j > k) throw Error(ErrorKind::InvalidArgument, "needs j <= k");
  const auto dim = static_cast<Eigen::Index>(chain->hilbert_dim());
  auto site = [&](const Matrix& local, int v) { return embed(local, std::vector<Site>{v}, chain).matrix; };
  const Matrix sp = pauli::X() + kI * pauli::Y();
  const Matrix sm = pauli::X() - kI * pauli::Y();
  Matrix out = site(sp, j);
  Matrix string = Matrix::Identity(dim, dim);
  for (int v = j; v < k; ++v) string = string * site(pauli::Z(), v);
  out = 0.25 * (out * string * site(sm, k));
  return GlobalOperator{chain, std::move(out), std::nullopt};
}

/// A Hamiltonian term of a fermionic model: an even, Hermitian polynomial
/// on a declared support of the fermionic interaction graph.
struct FermionTerm {
  VertexSet support;
  FermionPolynomial poly;
  TimeSchedule schedule = TimeSchedule::constant(1.0);
};

/// A fermionic observable with its declared support.
struct FermionObservable {
  VertexSet support;
  FermionPolynomial poly;
};

/// Interaction graph whose hyperedges are the declared term supports.
inline InteractionGraph fermionic_graph(int n, const std::vector<FermionTerm>& terms) {
  std::vector<VertexSet> edges;
  for (const auto& t : terms) edges.push_back(t.support);
  return chain_graph(n).with_edges(edges);
}

/// Hamiltonian-only Liouvillian on the spin chain obtained by mapping every
/// term. Each term becomes a spin term on the interval spanned by its
/// support; terms whose image is not confined to that interval are rejected.
inline LocalLiouvillian jw_liouvillian(int n, const std::vector<FermionTerm>& terms) {
  const auto chain = jw_chain(n);
  std::vector<LindbladTerm> mapped;
  for (const auto& term : terms) {
    if (term.support.empty()) throw Error(ErrorKind::EmptyEdge, "fermionic term support");
    for (int v : term.poly.sites()) {
      if (!term.support.count(v)) {
        throw Error(ErrorKind::ModelInvalid,
                    "polynomial acts on site " + std::to_string(v) + " outside its support");
      }
    }
    const GlobalOperator global = jw_map(term.poly, chain);
    VertexSet interval;
    for (int v = *term.support.begin(); v <= *term.support.rbegin(); ++v) interval.insert(v);
    const Matrix local = partial_trace_keep(global.matrix, interval, *chain) /
                         static_cast<double>(chain->hilbert_dim() / chain->dimension_of(interval));
    const Matrix back = embed(local, interval, chain).matrix;
    if ((back - global.matrix).norm() > 1e-10 * std::max(1.0, global.matrix.norm())) {
      throw Error(ErrorKind::ModelInvalid,
                  "mapped term leaves the interval of " + to_string(term.support));
    }
    mapped.push_back(make_term(std::vector<Site>(interval.begin(), interval.end()), local, {},
                               *chain, term.schedule));
  }
  return assemble(*chain, std::move(mapped));
}

/// Leakage ||[B_Y, tau(s, t)(A_X)]|| for each B, or the anticommutator when
/// the observables are odd and `allow_odd` is set. The abscissa is the
/// distance in the fermionic interaction graph.
inline BoundReport fermionic_lr_experiment(int n, const std::vector<FermionTerm>& terms,
                                           const FermionObservable& a,
                                           const std::vector<FermionObservable>& bs, double s,
                                           double t, const BoundParameters& params,
                                           bool allow_odd = false, double tol = kDefaultTol) {
  params.validate();
  detail::check_interval(s, t);
  for (const auto& term : terms) {
    if (parity_of(term.poly) != Parity::Even) {
      throw Error(ErrorKind::OddParity, "Hamiltonian term on " + to_string(term.support));
    }
  }
  const InteractionGraph fgraph = fermionic_graph(n, terms);
  const LocalLiouvillian l = jw_liouvillian(n, terms);
  const auto& chain = l.lattice();
  const bool odd = allow_odd && parity_of(a.poly) != Parity::Even;
  const GlobalOperator am = jw_map(a.poly, chain, allow_odd);
  const Matrix evolved = evolve_heisenberg(l, am.matrix, s, t, tol);
  const double norm_a = op_norm(am);
  BoundReport report;
  report.abscissa_name = "distance";
  for (const auto& b : bs) {
    const GlobalOperator bm = jw_map(b.poly, chain, allow_odd);
    const Distance d = distance(fgraph, a.support, b.support);
    BoundPoint p;
    p.abscissa = d.as_double();
    if (t == s && !odd && !intersects(a.support, b.support)) {
      p.measured = 0.0;
    } else {
      const Matrix prod = bm.matrix * evolved;
      const Matrix rev = evolved * bm.matrix;
      p.measured = op_norm(Matrix(odd ? Matrix(prod + rev) : Matrix(prod - rev)));
    }
    p.envelope = lr_envelope(params, norm_a, op_norm(bm), d, t - s);
    report.grid.push_back(p);
  }
  std::stable_sort(report.grid.begin(), report.grid.end(),
                   [](const BoundPoint& p, const BoundPoint& q) { return p.abscissa < q.abscissa; });
  return report;
}

/// Eigenvalues of a Hermitian operator restricted to the subspace with
/// exactly `particles` occupied sites (Z = +1), ascending.
inline Eigen::VectorXd sector_spectrum(const Matrix& h, int n, int particles) {
  std::vector<Eigen::Index> basis;
  for (Eigen::Index i = 0; i < (Eigen::Index{1} << n); ++i) {
    // Bit value 0 on a site is the Z = +1 (occupied) state.
    const int empty = __builtin_popcountll(static_cast<unsigned long long>(i));
    if (n - empty == particles) basis.push_back(i);
  }
  const auto m = static_cast<Eigen::Index>(basis.size());
  Matrix block(m, m);
  for (Eigen::Index r = 0; r < m; ++r) {
    for (Eigen::Index c = 0; c < m; ++c) block(r, c) = h(basis[r], basis[c]);
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(block, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace lrsim

#endif  // LRSIM_FERMION_JW_HPP
