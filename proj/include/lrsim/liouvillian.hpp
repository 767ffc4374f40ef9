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

#ifndef LRSIM_LIOUVILLIAN_HPP
#define LRSIM_LIOUVILLIAN_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "lrsim/error.hpp"
#include "lrsim/lattice_graph.hpp"
#include "lrsim/operator_core.hpp"

namespace lrsim {

// ---------------------------------------------------------------------------
// Time schedules
// ---------------------------------------------------------------------------

/// One polynomial piece on [start, end). Coefficients are in the local time
/// (t - start); pieces with an infinite start must be constant.
struct SchedulePiece {
  double start = -std::numeric_limits<double>::infinity();
  double end = std::numeric_limits<double>::infinity();
  std::vector<double> poly{1.0};

  double eval(double t) const {
    if (poly.size() == 1) return poly[0];
    const double x = t - start;
    double value = 0.0;
    for (auto it = poly.rbegin(); it != poly.rend(); ++it) value = value * x + *it;
    return value;
  }

  /// Integral over [a, b] inside the piece.
  double integrate(double a, double b) const {
    if (poly.size() == 1) return poly[0] * (b - a);
    auto antideriv = [this](double t) {
      const double x = t - start;
      double value = 0.0;
      for (std::size_t k = poly.size(); k-- > 0;) {
        value = value * x + poly[k] / static_cast<double>(k + 1);
      }
      return value * x;
    };
    return antideriv(b) - antideriv(a);
  }
};

/// Piecewise-polynomial scalar schedule, right-continuous at breakpoints.
class TimeSchedule {
 public:
  TimeSchedule() : pieces_{SchedulePiece{}} {}

  static TimeSchedule constant(double value) {
    TimeSchedule s;
    s.pieces_[0].poly = {value};
    return s;
  }

  static TimeSchedule piecewise(std::vector<SchedulePiece> pieces) {
    if (pieces.empty()) throw Error(ErrorKind::InvalidArgument, "schedule has no pieces");
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      const auto& p = pieces[i];
      if (!(p.start < p.end)) {
        throw Error(ErrorKind::InvalidArgument, "schedule piece has empty interval");
      }
      if (p.poly.empty()) throw Error(ErrorKind::InvalidArgument, "empty polynomial");
      if (p.poly.size() > 1 && (!std::isfinite(p.start) || !std::isfinite(p.end))) {
        throw Error(ErrorKind::InvalidArgument,
                    "non-constant schedule pieces need finite intervals");
      }
      if (i > 0 && pieces[i - 1].end > p.start) {
        throw Error(ErrorKind::InvalidArgument, "schedule pieces overlap or are unordered");
      }
    }
    TimeSchedule s;
    s.pieces_ = std::move(pieces);
    return s;
  }

  const std::vector<SchedulePiece>& pieces() const { return pieces_; }

  bool is_constant() const {
    return pieces_.size() == 1 && pieces_[0].poly.size() == 1 &&
           !std::isfinite(pieces_[0].start) && !std::isfinite(pieces_[0].end);
  }

  bool is_identically_zero() const {
    for (const auto& p : pieces_) {
      for (double c : p.poly) {
        if (c != 0.0) return false;
      }
    }
    return true;
  }

  std::size_t piece_index(double t) const {
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
      if (t >= pieces_[i].start && t < pieces_[i].end) return i;
    }
    // The final finite endpoint resolves to the last piece so that closed
    // intervals ending at a schedule's last breakpoint remain integrable.
    if (t == pieces_.back().end) return pieces_.size() - 1;
    throw Error(ErrorKind::TimeOutsideSchedule,
                "time " + std::to_string(t) + " outside schedule");
  }

  double operator()(double t) const { return pieces_[piece_index(t)].eval(t); }

  /// Evaluates the polynomial of the piece containing `probe` at time t.
  double eval_on_piece_of(double probe, double t) const {
    return pieces_[piece_index(probe)].eval(t);
  }

  /// True when the piece containing `probe` is a constant polynomial.
  bool constant_on_piece_of(double probe) const {
    return pieces_[piece_index(probe)].poly.size() == 1;
  }

  std::vector<double> breakpoints() const {
    std::vector<double> out;
    for (const auto& p : pieces_) {
      if (std::isfinite(p.start)) out.push_back(p.start);
      if (std::isfinite(p.end)) out.push_back(p.end);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  /// `per_piece` evenly spaced points in every finite piece plus all
  /// breakpoints; a single point for constant pieces.
  std::vector<double> sample_grid(std::size_t per_piece = 64) const {
    std::vector<double> out;
    for (const auto& p : pieces_) {
      if (!std::isfinite(p.start) || !std::isfinite(p.end)) {
        out.push_back(std::isfinite(p.start) ? p.start : (std::isfinite(p.end) ? p.end - 1.0 : 0.0));
        continue;
      }
      for (std::size_t k = 0; k < per_piece; ++k) {
        out.push_back(p.start + (p.end - p.start) * static_cast<double>(k) /
                                    static_cast<double>(per_piece));
      }
    }
    for (double b : breakpoints()) out.push_back(b);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  /// Integral of the schedule over [a, b], a <= b.
  double integral(double a, double b) const {
    double total = 0.0;
    for (const auto& p : pieces_) {
      const double lo = std::max(a, p.start);
      const double hi = std::min(b, p.end);
      if (lo < hi) total += p.integrate(lo, hi);
    }
    // Coverage check: every point of [a, b) must sit in some piece.
    piece_index(a);
    if (b > a) piece_index(b);
    return total;
  }

 private:
  std::vector<SchedulePiece> pieces_;
};

// ---------------------------------------------------------------------------
// Lindblad terms
// ---------------------------------------------------------------------------

/// c(t) * ( -i[H, .] + sum_mu 2 L . L^dag - {L^dag L, .} ) acting on sites.
/// Local matrices are ordered as `sites` lists them.
struct LindbladTerm {
  std::vector<Site> sites;
  std::vector<int> dims;  // local dimension per entry of `sites`
  Matrix hamiltonian;
  std::vector<Matrix> jumps;
  TimeSchedule schedule;
  std::string label;

  VertexSet support() const { return {sites.begin(), sites.end()}; }
  Eigen::Index local_dim() const { return hamiltonian.rows(); }

  /// Lattice made of this term's sites only, in the term's tensor order.
  LatticePtr local_lattice() const {
    std::map<Site, int> d;
    for (std::size_t k = 0; k < sites.size(); ++k) d[sites[k]] = dims[k];
    return share(InteractionGraph(sites, {}, d));
  }

  bool has_zero_generator() const {
    if (hamiltonian.size() > 0 && hamiltonian.cwiseAbs().maxCoeff() != 0.0) return false;
    for (const auto& l : jumps) {
      if (l.cwiseAbs().maxCoeff() != 0.0) return false;
    }
    return true;
  }

  bool is_identically_zero() const {
    return has_zero_generator() || schedule.is_identically_zero();
  }
};

/// Validated term constructor. An empty Hamiltonian means H = 0.
inline LindbladTerm make_term(std::vector<Site> sites, Matrix hamiltonian,
                              std::vector<Matrix> jumps, const InteractionGraph& g,
                              TimeSchedule schedule = TimeSchedule::constant(1.0),
                              std::string label = {}) {
  if (sites.empty()) throw Error(ErrorKind::EmptyEdge, "term with empty support");
  std::size_t dim = 1;
  std::vector<int> dims;
  VertexSet seen;
  for (Site s : sites) {
    if (!seen.insert(s).second) throw Error(ErrorKind::InvalidArgument, "repeated site");
    dims.push_back(g.local_dim(s));
    dim *= static_cast<std::size_t>(dims.back());
  }
  const auto d = static_cast<Eigen::Index>(dim);
  if (hamiltonian.size() == 0) hamiltonian = Matrix::Zero(d, d);
  if (hamiltonian.rows() != d || hamiltonian.cols() != d) {
    throw Error(ErrorKind::DimensionMismatch, "Hamiltonian does not match support");
  }
  if (!is_hermitian(hamiltonian)) {
    throw Error(ErrorKind::NotHermitian, "term Hamiltonian is not Hermitian");
  }
  for (const auto& l : jumps) {
    if (l.rows() != d || l.cols() != d) {
      throw Error(ErrorKind::DimensionMismatch, "jump operator does not match support");
    }
  }
  return LindbladTerm{std::move(sites), std::move(dims), std::move(hamiltonian),
                      std::move(jumps), std::move(schedule), std::move(label)};
}

namespace detail {

inline Matrix jump_weight(const LindbladTerm& term) {
  const auto d = term.local_dim();
  Matrix k = Matrix::Zero(d, d);
  for (const auto& l : term.jumps) k += l.adjoint() * l;
  return k;
}

inline void check_operand(const LindbladTerm& term, const GlobalOperator& a) {
  if (!a.lattice) throw Error(ErrorKind::InvalidArgument, "operator without lattice");
  for (Site s : term.sites) {
    if (!a.lattice->has_vertex(s)) {
      throw Error(ErrorKind::UnknownVertex, "term site " + std::to_string(s));
    }
  }
  if (static_cast<std::size_t>(a.matrix.rows()) != a.lattice->hilbert_dim() ||
      a.matrix.rows() != a.matrix.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "operator does not match its lattice");
  }
}

}  // namespace detail

/// Schrodinger-picture action of one term at time t.
inline GlobalOperator lindblad_apply(const LindbladTerm& term, double t,
                                     const GlobalOperator& rho) {
  detail::check_operand(term, rho);
  const double c = term.schedule(t);
  const auto& g = *rho.lattice;
  const SparseMatrix h = embed_sparse(term.hamiltonian, term.sites, g);
  const SparseMatrix k = embed_sparse(detail::jump_weight(term), term.sites, g);
  Matrix out = -kI * (h * rho.matrix - rho.matrix * h) - k * rho.matrix - rho.matrix * k;
  for (const auto& l : term.jumps) {
    const SparseMatrix ls = embed_sparse(l, term.sites, g);
    const SparseMatrix ld = ls.adjoint();
    out += 2.0 * (ls * (rho.matrix * ld));
  }
  return rho.with_matrix(c * out);
}

/// Heisenberg-picture (Hilbert-Schmidt adjoint) action of one term at time t.
inline GlobalOperator adjoint_apply(const LindbladTerm& term, double t,
                                    const GlobalOperator& a) {
  detail::check_operand(term, a);
  const double c = term.schedule(t);
  const auto& g = *a.lattice;
  const SparseMatrix h = embed_sparse(term.hamiltonian, term.sites, g);
  const SparseMatrix k = embed_sparse(detail::jump_weight(term), term.sites, g);
  Matrix out = kI * (h * a.matrix - a.matrix * h) - k * a.matrix - a.matrix * k;
  for (const auto& l : term.jumps) {
    const SparseMatrix ls = embed_sparse(l, term.sites, g);
    const SparseMatrix ld = ls.adjoint();
    out += 2.0 * (ld * (a.matrix * ls));
  }
  return a.with_matrix(c * out);
}

/// Heisenberg generator of a term (schedule excluded) as a matrix on the
/// column-stacked local operator space: vec(X A Y) = (Y^T (x) X) vec(A).
inline Matrix heisenberg_superop(const LindbladTerm& term) {
  const auto d = term.local_dim();
  const Matrix id = Matrix::Identity(d, d);
  const Matrix k = detail::jump_weight(term);
  const Matrix& h = term.hamiltonian;
  Matrix s = kI * (kron(id, h) - kron(h.transpose(), id)) - kron(id, k) -
             kron(k.transpose(), id);
  for (const auto& l : term.jumps) s += 2.0 * kron(l.transpose(), l.adjoint());
  return s;
}

/// Schrodinger generator of a term (schedule excluded), same convention.
inline Matrix schrodinger_superop(const LindbladTerm& term) {
  const auto d = term.local_dim();
  const Matrix id = Matrix::Identity(d, d);
  const Matrix k = detail::jump_weight(term);
  const Matrix& h = term.hamiltonian;
  Matrix s = -kI * (kron(id, h) - kron(h.transpose(), id)) - kron(id, k) -
             kron(k.transpose(), id);
  for (const auto& l : term.jumps) s += 2.0 * kron(l.conjugate(), l);
  return s;
}

/// Norm of a superoperator S (column-stacked, acting on d x d matrices)
/// induced by the spectral norm: max ||S(A)|| over ||A|| <= 1.
///
/// The maximum of a convex function over the operator-norm ball is attained
/// on unitaries, and ||M|| = max Re <phi|M|psi>. The search alternates the
/// two exact partial maximisations: top singular pair of S(U) for fixed U,
/// and the polar factor of S^dag(|phi><psi|) for fixed (phi, psi). Several
/// seeded starts guard against local maxima.
inline double induced_superop_norm(const Matrix& superop, Eigen::Index d,
                                   int starts = 24, std::uint64_t seed = 0x5eed) {
  if (superop.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  const Matrix adj = superop.adjoint();
  double best = 0.0;
  for (int start = 0; start < starts; ++start) {
    Eigen::VectorXcd phi(d), psi(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      phi(i) = cplx(gauss(rng), gauss(rng));
      psi(i) = cplx(gauss(rng), gauss(rng));
    }
    phi.normalize();
    psi.normalize();
    double value = 0.0;
    for (int iter = 0; iter < 500; ++iter) {
      const Matrix rank_one = phi * psi.adjoint();
      const Matrix w = unvec(adj * vec(rank_one), d);
      Eigen::JacobiSVD<Matrix> polar(w, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const Matrix u = polar.matrixU() * polar.matrixV().adjoint();
      const Matrix image = unvec(superop * vec(u), d);
      Eigen::JacobiSVD<Matrix> top(image, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const double next = top.singularValues()(0);
      phi = top.matrixU().col(0);
      psi = top.matrixV().col(0);
      const bool converged = next - value <= 1e-13 * std::max(1.0, next);
      value = std::max(value, next);
      if (converged && iter > 2) break;
    }
    best = std::max(best, value);
  }
  return best;
}

/// ||c(t) L_X|| with the spectral-norm-induced superoperator norm, evaluated
/// on the term's own support.
inline double term_norm(const LindbladTerm& term, double t) {
  const double c = term.schedule(t);
  if (c == 0.0 || term.has_zero_generator()) return 0.0;
  return std::abs(c) * induced_superop_norm(heisenberg_superop(term), term.local_dim());
}

/// Smallest subset X of the term's sites such that every observable acting
/// only on the remaining sites is annihilated by the Heisenberg generator.
/// Sites are tested for removal in the order the term lists them.
inline VertexSet liouvillian_support(const LindbladTerm& term, double tol = kDefaultTol) {
  if (tol <= 0) throw Error(ErrorKind::InvalidArgument, "tol must be positive");
  if (term.is_identically_zero()) return {};
  const auto local = term.local_lattice();
  const Matrix s = heisenberg_superop(term);
  const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());

  auto annihilates_outside = [&](const VertexSet& keep) {
    VertexSet outside;
    for (Site v : term.sites) {
      if (!keep.count(v)) outside.insert(v);
    }
    if (outside.empty()) return true;
    const auto ordered_out = detail::ordered(*local, outside);
    const auto od = static_cast<Eigen::Index>(local->dimension_of(outside));
    for (Eigen::Index i = 0; i < od; ++i) {
      for (Eigen::Index j = 0; j < od; ++j) {
        Matrix unit = Matrix::Zero(od, od);
        unit(i, j) = 1.0;
        const Matrix op = embed(unit, ordered_out, local).matrix;
        const Matrix image = unvec(s * vec(op), op.rows());
        if (image.cwiseAbs().maxCoeff() > tol * scale) return false;
      }
    }
    return true;
  };

  VertexSet current = term.support();
  for (Site v : term.sites) {
    VertexSet candidate = current;
    candidate.erase(v);
    if (annihilates_outside(candidate)) current = std::move(candidate);
  }
  return current;
}

// ---------------------------------------------------------------------------
// Built-in local models
// ---------------------------------------------------------------------------

namespace models {

inline Matrix two_site(char a, char b) { return kron(pauli::from_char(a), pauli::from_char(b)); }

/// J (XX + YY + ZZ)
inline Matrix heisenberg_edge(double j) {
  return j * (two_site('X', 'X') + two_site('Y', 'Y') + two_site('Z', 'Z'));
}
/// J (XX + YY)
inline Matrix xy_edge(double j) { return j * (two_site('X', 'X') + two_site('Y', 'Y')); }
/// J ZZ
inline Matrix zz_edge(double j) { return j * two_site('Z', 'Z'); }
/// h X
inline Matrix transverse_field_site(double h) { return h * pauli::X(); }
/// sqrt(gamma) Z
inline Matrix dephasing_jump(double gamma) { return std::sqrt(gamma) * pauli::Z(); }
/// sqrt(gamma) sigma^-
inline Matrix amplitude_damping_jump(double gamma) {
  return std::sqrt(gamma) * pauli::lower();
}

}  // namespace models

// ---------------------------------------------------------------------------
// Local Liouvillians
// ---------------------------------------------------------------------------

/// Sum of strictly local Lindblad terms together with the derived
/// interaction graph E, the term-norm bound b and the neighbour count Z.
///
/// Also carries a sparse "compiled" form of every term for fast application
/// of the global generator inside the integrators.
class LocalLiouvillian {
 public:
  LocalLiouvillian() = default;

  const LatticePtr& lattice() const { return lattice_; }
  const std::vector<LindbladTerm>& terms() const { return terms_; }
  /// Supports of the terms that are not identically zero.
  const std::vector<VertexSet>& interaction_edges() const { return lattice_->hyperedges(); }
  double b() const { return b_; }
  std::size_t z() const { return z_; }
  bool empty() const { return compiled_.empty(); }
  std::size_t hilbert_dim() const { return lattice_->hilbert_dim(); }

  /// Sorted, de-duplicated schedule breakpoints of all terms.
  std::vector<double> breakpoints() const {
    std::vector<double> out;
    for (const auto& c : compiled_) {
      for (double b : terms_[c.term].schedule.breakpoints()) out.push_back(b);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  /// True when every term has a constant schedule.
  bool time_independent() const {
    for (const auto& t : terms_) {
      if (!t.schedule.is_constant()) return false;
    }
    return true;
  }

  /// Heisenberg generator L_t(A). Schedule pieces are selected by `probe`,
  /// so integrators can evaluate a piece's polynomial at its closing
  /// breakpoint.
  Matrix apply_heisenberg(double t, const Matrix& a, double probe) const {
    return apply(t, a, probe, /*heisenberg=*/true);
  }
  Matrix apply_heisenberg(double t, const Matrix& a) const {
    return apply(t, a, t, true);
  }

  /// Schrodinger generator L^dag_t(rho).
  Matrix apply_schrodinger(double t, const Matrix& rho, double probe) const {
    return apply(t, rho, probe, /*heisenberg=*/false);
  }
  Matrix apply_schrodinger(double t, const Matrix& rho) const {
    return apply(t, rho, t, false);
  }

  /// The generator with its schedule coefficients fixed at time t. It points
  /// into this Liouvillian and must not outlive it.
  class Frozen {
   public:
    Matrix apply(const Matrix& a) const {
      const auto d = a.rows();
      Matrix out(d, d);
      out.noalias() = drift_ * a;
      out.noalias() += a * drift_adj_;
      for (std::size_t m = 0; m < left_.size(); ++m) {
        out.noalias() += weights_[m] * (*left_[m] * (a * *right_[m]));
      }
      if (diagonal_weight_.size() > 0) out += diagonal_weight_.cwiseProduct(a);
      return out;
    }

   private:
    friend class LocalLiouvillian;
    SparseMatrix drift_;
    SparseMatrix drift_adj_;
    std::vector<const SparseMatrix*> left_, right_;
    std::vector<double> weights_;
    Matrix diagonal_weight_;
  };

  Frozen freeze(double t, double probe, bool heisenberg) const {
    Frozen f;
    const auto d = static_cast<Eigen::Index>(hilbert_dim());
    f.drift_ = SparseMatrix(d, d);
    if (compiled_.empty()) {
      f.drift_adj_ = f.drift_;
      return f;
    }
    std::vector<double> coeffs(compiled_.size());
    Eigen::Index n_diag = 0;
    for (std::size_t i = 0; i < compiled_.size(); ++i) {
      const auto& c = compiled_[i];
      coeffs[i] = terms_[c.term].schedule.eval_on_piece_of(probe, t);
      if (coeffs[i] == 0.0) continue;
      f.drift_ += coeffs[i] * (heisenberg ? c.drift_h : c.drift_s);
      n_diag += static_cast<Eigen::Index>(c.diagonal_jumps.size());
    }
    f.drift_adj_ = f.drift_.adjoint();
    Matrix left_diag(d, n_diag), right_diag(d, n_diag);
    Eigen::Index col = 0;
    for (std::size_t i = 0; i < compiled_.size(); ++i) {
      if (coeffs[i] == 0.0) continue;
      const auto& c = compiled_[i];
      const double w = 2.0 * coeffs[i];
      for (std::size_t m = 0; m < c.jumps.size(); ++m) {
        f.left_.push_back(heisenberg ? &c.jumps_adj[m] : &c.jumps[m]);
        f.right_.push_back(heisenberg ? &c.jumps[m] : &c.jumps_adj[m]);
        f.weights_.push_back(w);
      }
      for (const auto& l : c.diagonal_jumps) {
        left_diag.col(col) = heisenberg ? Eigen::VectorXcd(w * l.conjugate()) : Eigen::VectorXcd(w * l);
        right_diag.col(col) = heisenberg ? Eigen::VectorXcd(l) : Eigen::VectorXcd(l.conjugate());
        ++col;
      }
    }
    if (n_diag > 0) f.diagonal_weight_ = left_diag * right_diag.transpose();
    return f;
  }

  /// True when every term's schedule is constant on the piece containing `probe`.
  bool constant_on_piece_of(double probe) const {
    for (const auto& c : compiled_) {
      if (!terms_[c.term].schedule.constant_on_piece_of(probe)) return false;
    }
    return true;
  }

  /// Full generator as a (dim^2 x dim^2) superoperator at time t.
  Matrix superop(double t, bool heisenberg) const {
    const auto d = static_cast<Eigen::Index>(hilbert_dim());
    Matrix out = Matrix::Zero(d * d, d * d);
    for (Eigen::Index col = 0; col < d * d; ++col) {
      Eigen::VectorXcd e = Eigen::VectorXcd::Zero(d * d);
      e(col) = 1.0;
      const Matrix image = apply(t, unvec(e, d), t, heisenberg);
      out.col(col) = vec(image);
    }
    return out;
  }

  friend LocalLiouvillian assemble(const InteractionGraph& graph,
                                   std::vector<LindbladTerm> terms, bool strict);
  friend LocalLiouvillian truncate(const LocalLiouvillian& l, const VertexSet& region);

 private:
  struct Compiled {
    std::size_t term = 0;
    SparseMatrix drift_h;   // i H - K     (Heisenberg left factor)
    SparseMatrix drift_s;   // -i H - K    (Schrodinger left factor)
    std::vector<SparseMatrix> jumps;
    std::vector<SparseMatrix> jumps_adj;
    std::vector<Eigen::VectorXcd> diagonal_jumps;
  };

  Matrix apply(double t, const Matrix& a, double probe, bool heisenberg) const {
    return freeze(t, probe, heisenberg).apply(a);
  }

  void compile() {
    compiled_.clear();
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      const auto& term = terms_[i];
      if (term.is_identically_zero()) continue;
      Compiled c;
      c.term = i;
      const Matrix k = detail::jump_weight(term);
      c.drift_h = embed_sparse(kI * term.hamiltonian - k, term.sites, *lattice_);
      c.drift_s = embed_sparse(-kI * term.hamiltonian - k, term.sites, *lattice_);
      for (const auto& l : term.jumps) {
        if (l.cwiseAbs().maxCoeff() == 0.0) continue;
        if (Matrix(l.diagonal().asDiagonal()) == l) {
          const SparseMatrix global = embed_sparse(l, term.sites, *lattice_);
          c.diagonal_jumps.push_back(Eigen::VectorXcd(global.diagonal()));
          continue;
        }
        c.jumps.push_back(embed_sparse(l, term.sites, *lattice_));
        c.jumps_adj.push_back(SparseMatrix(c.jumps.back().adjoint()));
      }
      compiled_.push_back(std::move(c));
    }
  }

  LatticePtr lattice_;
  std::vector<LindbladTerm> terms_;
  std::vector<Compiled> compiled_;
  double b_ = 0.0;
  std::size_t z_ = 0;
};

/// Safety factor applied to the sampled supremum defining b.
inline constexpr double kTermNormSafety = 1.0 + 1e-6;

/// Builds a LocalLiouvillian. E is the set of supports of terms that are not
/// identically zero; terms sharing a support are summed before taking norms
/// for b. In strict mode every support must already be a hyperedge of the
/// input graph, otherwise supports are added.
inline LocalLiouvillian assemble(const InteractionGraph& graph,
                                 std::vector<LindbladTerm> terms, bool strict = false) {
  std::map<VertexSet, std::vector<std::size_t>> by_support;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const auto& term = terms[i];
    std::size_t dim = 1;
    for (Site s : term.sites) {
      if (!graph.has_vertex(s)) {
        throw Error(ErrorKind::UnknownVertex, "term site " + std::to_string(s));
      }
      dim *= static_cast<std::size_t>(graph.local_dim(s));
    }
    if (static_cast<std::size_t>(term.local_dim()) != dim) {
      throw Error(ErrorKind::DimensionMismatch, "term matrices do not match its support");
    }
    if (strict && !graph.edge_index(term.support())) {
      throw Error(ErrorKind::SupportNotInGraph, to_string(term.support()));
    }
    if (!term.is_identically_zero()) by_support[term.support()].push_back(i);
  }

  std::vector<VertexSet> edges;
  for (const auto& [support, idx] : by_support) edges.push_back(support);

  LocalLiouvillian l;
  l.lattice_ = share(graph.with_edges(edges));
  l.z_ = edges.empty() ? 0 : max_neighbors(*l.lattice_);

  // Many groups carry identical generators (uniform couplings).
  std::vector<std::pair<Matrix, double>> norm_cache;
  auto norms = [&norm_cache](const Matrix& superop, Eigen::Index dim) {
    for (const auto& [m, v] : norm_cache) {
      if (m.rows() == superop.rows() && m == superop) return v;
    }
    const double v = induced_superop_norm(superop, dim);
    norm_cache.emplace_back(superop, v);
    return v;
  };
  double b = 0.0;
  for (const auto& [support, idx] : by_support) {
    std::vector<double> grid;
    for (std::size_t i : idx) {
      for (double t : terms[i].schedule.sample_grid()) grid.push_back(t);
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    // Sites of the first term fix the local tensor order for the group.
    const auto& ref_sites = terms[idx.front()].sites;
    std::vector<Matrix> superops;
    for (std::size_t i : idx) {
      LindbladTerm aligned = terms[i];
      if (aligned.sites != ref_sites) {
        // Re-express the term in the reference tensor order.
        const auto local = terms[idx.front()].local_lattice();
        aligned.hamiltonian = embed(aligned.hamiltonian, aligned.sites, local).matrix;
        for (auto& j : aligned.jumps) j = embed(j, aligned.sites, local).matrix;
        aligned.sites = ref_sites;
        aligned.dims = terms[idx.front()].dims;
      }
      superops.push_back(heisenberg_superop(aligned));
    }
    const auto d = terms[idx.front()].local_dim();
    const bool all_constant = std::all_of(idx.begin(), idx.end(), [&](std::size_t i) {
      return terms[i].schedule.is_constant();
    });
    if (idx.size() == 1) {
      // ||c(t) S|| = |c(t)| ||S||: one norm evaluation suffices.
      double peak = 0.0;
      for (double t : grid) peak = std::max(peak, std::abs(terms[idx.front()].schedule(t)));
      if (peak > 0.0) b = std::max(b, peak * norms(superops.front(), d));
      continue;
    }
    for (double t : grid) {
      Matrix total = Matrix::Zero(d * d, d * d);
      for (std::size_t k = 0; k < idx.size(); ++k) {
        double c = 0.0;
        try {
          c = terms[idx[k]].schedule(t);
        } catch (const Error&) {
          // Grid point lies outside this term's schedule: it contributes 0.
        }
        total += c * superops[k];
      }
      b = std::max(b, norms(total, d));
      if (all_constant) break;
    }
  }
  l.b_ = b * kTermNormSafety;
  l.terms_ = std::move(terms);
  l.compile();
  return l;
}

/// L restricted to the terms supported inside `region`; the Hilbert space is
/// left untouched.
inline LocalLiouvillian truncate(const LocalLiouvillian& l, const VertexSet& region) {
  std::vector<LindbladTerm> kept;
  for (const auto& term : l.terms()) {
    if (is_subset(term.support(), region)) kept.push_back(term);
  }
  return assemble(*l.lattice_, std::move(kept), false);
}

/// Random Hermitian matrix with entries of order one.
inline Matrix random_hermitian(Eigen::Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Matrix m(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = cplx(gauss(rng), gauss(rng));
  }
  return 0.5 * (m + m.adjoint());
}

inline Matrix random_matrix(Eigen::Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Matrix m(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = cplx(gauss(rng), gauss(rng));
  }
  return m;
}

/// Random density matrix of full rank.
inline Matrix random_state(Eigen::Index d, std::mt19937_64& rng) {
  const Matrix g = random_matrix(d, rng);
  Matrix rho = g * g.adjoint();
  return rho / rho.trace();
}

}  // namespace lrsim

#endif  // LRSIM_LIOUVILLIAN_HPP
