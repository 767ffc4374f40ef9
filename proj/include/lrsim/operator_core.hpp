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

#ifndef LRSIM_OPERATOR_CORE_HPP
#define LRSIM_OPERATOR_CORE_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "lrsim/error.hpp"
#include "lrsim/lattice_graph.hpp"

namespace lrsim {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using SparseMatrix = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;
using LatticePtr = std::shared_ptr<const InteractionGraph>;

inline constexpr cplx kI{0.0, 1.0};

/// Default tolerance for Hermiticity, trace and support checks.
inline constexpr double kDefaultTol = 1e-10;

/// Dense observables are capped at 12 qubits worth of Hilbert space.
inline constexpr std::size_t kMaxObservableDim = 4096;

inline LatticePtr share(InteractionGraph g) {
  return std::make_shared<const InteractionGraph>(std::move(g));
}

namespace pauli {

inline Matrix I() { return Matrix::Identity(2, 2); }
inline Matrix X() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}
inline Matrix Y() {
  Matrix m(2, 2);
  m << 0, -kI, kI, 0;
  return m;
}
inline Matrix Z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}
/// sigma^- = |0><1| in the Z eigenbasis (|0> has Z = +1).
inline Matrix lower() {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = 1;
  return m;
}

inline Matrix from_char(char c) {
  switch (c) {
    case 'I': return I();
    case 'X': return X();
    case 'Y': return Y();
    case 'Z': return Z();
    default:
      throw Error(ErrorKind::InvalidArgument, std::string("unknown Pauli '") + c + "'");
  }
}

}  // namespace pauli

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

inline Matrix commutator(const Matrix& a, const Matrix& b) { return a * b - b * a; }
inline Matrix anticommutator(const Matrix& a, const Matrix& b) { return a * b + b * a; }

inline bool is_hermitian(const Matrix& a, double tol = kDefaultTol) {
  if (a.rows() != a.cols()) return false;
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  return (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

/// Spectral norm (largest singular value). Hermitian and anti-Hermitian
/// inputs go through a symmetric eigensolve, large general inputs through
/// the Gram matrix.
inline double op_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  const double amax = a.cwiseAbs().maxCoeff();
  if (amax == 0.0) return 0.0;
  const double herm_tol = 1e-14 * amax;
  if (a.rows() == a.cols()) {
    if ((a - a.adjoint()).cwiseAbs().maxCoeff() <= herm_tol) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
      return es.eigenvalues().cwiseAbs().maxCoeff();
    }
    if ((a + a.adjoint()).cwiseAbs().maxCoeff() <= herm_tol) {
      Matrix h = kI * a;
      Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
      return es.eigenvalues().cwiseAbs().maxCoeff();
    }
  }
  if (a.rows() <= 32 && a.cols() <= 32) {
    Eigen::JacobiSVD<Matrix> svd(a);
    return svd.singularValues()(0);
  }
  // Largest eigenvalue of A^dag A: relative accuracy of the top singular
  // value is still at the rounding level, and far cheaper than a full SVD.
  const Matrix gram = a.adjoint() * a;
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

/// Column-stacking vectorisation: vec(A)[i + j*d] = A(i, j).
inline Eigen::VectorXcd vec(const Matrix& a) {
  return Eigen::Map<const Eigen::VectorXcd>(a.data(), a.size());
}

inline Matrix unvec(const Eigen::VectorXcd& v, Eigen::Index dim) {
  return Eigen::Map<const Matrix>(v.data(), dim, dim);
}

/// Dense operator on the full tensor-product space of a lattice.
struct GlobalOperator {
  LatticePtr lattice;
  Matrix matrix;
  std::optional<VertexSet> declared_support;

  Eigen::Index dim() const { return matrix.rows(); }
  GlobalOperator with_matrix(Matrix m) const {
    return GlobalOperator{lattice, std::move(m), std::nullopt};
  }
};

namespace detail {

inline void check_lattice(const LatticePtr& g) {
  if (!g) throw Error(ErrorKind::InvalidArgument, "null lattice");
  if (g->hilbert_dim() > kMaxObservableDim) {
    throw Error(ErrorKind::TooLarge,
                "Hilbert dimension " + std::to_string(g->hilbert_dim()) +
                    " exceeds the dense cap " + std::to_string(kMaxObservableDim));
  }
}

/// Mixed-radix layout of the global basis relative to an ordered support.
struct SupportLayout {
  std::vector<std::size_t> strides;        // global stride per support site
  std::vector<std::size_t> local_dims;     // local dim per support site
  std::vector<std::size_t> local_strides;  // stride inside the local matrix
  std::size_t local_dim = 1;
  std::size_t global_dim = 1;

  /// Global offset of local index `l`.
  std::size_t offset(std::size_t l) const {
    std::size_t off = 0;
    for (std::size_t k = 0; k < strides.size(); ++k) {
      off += ((l / local_strides[k]) % local_dims[k]) * strides[k];
    }
    return off;
  }
  /// Local index of global index `g`.
  std::size_t local_index(std::size_t g) const {
    std::size_t l = 0;
    for (std::size_t k = 0; k < strides.size(); ++k) {
      l += ((g / strides[k]) % local_dims[k]) * local_strides[k];
    }
    return l;
  }
  /// Global index with the support digits zeroed.
  std::size_t rest(std::size_t g) const { return g - offset(local_index(g)); }
};

inline SupportLayout layout(const InteractionGraph& g, const std::vector<Site>& support) {
  SupportLayout lay;
  const auto& dims = g.dims();
  std::vector<std::size_t> global_strides(dims.size());
  std::size_t stride = 1;
  for (std::size_t i = dims.size(); i-- > 0;) {
    global_strides[i] = stride;
    stride *= static_cast<std::size_t>(dims[i]);
  }
  lay.global_dim = stride;
  VertexSet seen;
  for (Site s : support) {
    if (!seen.insert(s).second) {
      throw Error(ErrorKind::InvalidArgument, "repeated site in support");
    }
    const std::size_t p = g.position(s);
    lay.strides.push_back(global_strides[p]);
    lay.local_dims.push_back(static_cast<std::size_t>(dims[p]));
  }
  lay.local_strides.resize(support.size());
  std::size_t ls = 1;
  for (std::size_t k = support.size(); k-- > 0;) {
    lay.local_strides[k] = ls;
    ls *= lay.local_dims[k];
  }
  lay.local_dim = ls;
  return lay;
}

inline std::vector<Site> ordered(const InteractionGraph& g, const VertexSet& set) {
  std::vector<Site> out(set.begin(), set.end());
  std::sort(out.begin(), out.end(),
            [&g](Site a, Site b) { return g.position(a) < g.position(b); });
  return out;
}

}  // namespace detail

/// A (x) 1 on the full space. The order of `support` fixes the tensor order
/// of `local`; the global order is the lattice's declared vertex order.
inline GlobalOperator embed(const Matrix& local, const std::vector<Site>& support,
                            const LatticePtr& g) {
  detail::check_lattice(g);
  for (Site s : support) {
    if (!g->has_vertex(s)) {
      throw Error(ErrorKind::UnknownVertex, "vertex " + std::to_string(s));
    }
  }
  const auto lay = detail::layout(*g, support);
  if (local.rows() != static_cast<Eigen::Index>(lay.local_dim) ||
      local.cols() != static_cast<Eigen::Index>(lay.local_dim)) {
    throw Error(ErrorKind::DimensionMismatch,
                "local matrix is " + std::to_string(local.rows()) + "x" +
                    std::to_string(local.cols()) + ", support needs " +
                    std::to_string(lay.local_dim));
  }
  const auto dim = static_cast<Eigen::Index>(lay.global_dim);
  Matrix out = Matrix::Zero(dim, dim);
  for (std::size_t col = 0; col < lay.global_dim; ++col) {
    const std::size_t lc = lay.local_index(col);
    const std::size_t rest = col - lay.offset(lc);
    for (std::size_t lr = 0; lr < lay.local_dim; ++lr) {
      const cplx v = local(static_cast<Eigen::Index>(lr), static_cast<Eigen::Index>(lc));
      if (v != cplx(0)) {
        out(static_cast<Eigen::Index>(rest + lay.offset(lr)),
            static_cast<Eigen::Index>(col)) = v;
      }
    }
  }
  return GlobalOperator{g, std::move(out), VertexSet(support.begin(), support.end())};
}

inline GlobalOperator embed(const Matrix& local, const VertexSet& support,
                            const LatticePtr& g) {
  return embed(local, detail::ordered(*g, support), g);
}

/// Sparse version of embed, used on the integration hot path.
inline SparseMatrix embed_sparse(const Matrix& local, const std::vector<Site>& support,
                                 const InteractionGraph& g, double drop_tol = 0.0) {
  const auto lay = detail::layout(g, support);
  if (local.rows() != static_cast<Eigen::Index>(lay.local_dim)) {
    throw Error(ErrorKind::DimensionMismatch, "local matrix does not match support");
  }
  std::vector<Eigen::Triplet<cplx>> triplets;
  for (std::size_t col = 0; col < lay.global_dim; ++col) {
    const std::size_t lc = lay.local_index(col);
    const std::size_t rest = col - lay.offset(lc);
    for (std::size_t lr = 0; lr < lay.local_dim; ++lr) {
      const cplx v = local(static_cast<Eigen::Index>(lr), static_cast<Eigen::Index>(lc));
      if (std::abs(v) > drop_tol) {
        triplets.emplace_back(static_cast<int>(rest + lay.offset(lr)),
                              static_cast<int>(col), v);
      }
    }
  }
  const auto dim = static_cast<Eigen::Index>(lay.global_dim);
  SparseMatrix out(dim, dim);
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

inline GlobalOperator identity_operator(const LatticePtr& g) {
  detail::check_lattice(g);
  const auto dim = static_cast<Eigen::Index>(g->hilbert_dim());
  return GlobalOperator{g, Matrix::Identity(dim, dim), VertexSet{}};
}

/// Pauli string from (site, 'X'|'Y'|'Z') factors on a qubit lattice.
inline GlobalOperator pauli_string(const std::vector<std::pair<Site, char>>& factors,
                                   const LatticePtr& g) {
  std::vector<Site> support;
  Matrix local = Matrix::Identity(1, 1);
  for (const auto& [site, c] : factors) {
    support.push_back(site);
    local = kron(local, pauli::from_char(c));
  }
  return embed(local, support, g);
}

inline double op_norm(const GlobalOperator& a) { return op_norm(a.matrix); }

/// Hilbert-Schmidt inner product Tr(A^dagger B).
inline cplx hs_inner(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "hs_inner operands differ in shape");
  }
  return (a.array().conjugate() * b.array()).sum();
}

inline cplx hs_inner(const GlobalOperator& a, const GlobalOperator& b) {
  return hs_inner(a.matrix, b.matrix);
}

/// Partial trace over everything outside `keep`; the result is ordered by the
/// lattice's vertex order restricted to `keep`.
inline Matrix partial_trace_keep(const Matrix& a, const VertexSet& keep,
                                 const InteractionGraph& g) {
  const auto lay = detail::layout(g, detail::ordered(g, keep));
  const auto dl = static_cast<Eigen::Index>(lay.local_dim);
  Matrix out = Matrix::Zero(dl, dl);
  const std::size_t dim = lay.global_dim;
  if (static_cast<std::size_t>(a.rows()) != dim) {
    throw Error(ErrorKind::DimensionMismatch, "operator does not live on this lattice");
  }
  // Enumerate the complement configurations as the global indices whose
  // support digits are zero.
  for (std::size_t base = 0; base < dim; ++base) {
    if (lay.local_index(base) != 0) continue;
    for (std::size_t lc = 0; lc < lay.local_dim; ++lc) {
      const auto gc = static_cast<Eigen::Index>(base + lay.offset(lc));
      for (std::size_t lr = 0; lr < lay.local_dim; ++lr) {
        out(static_cast<Eigen::Index>(lr), static_cast<Eigen::Index>(lc)) +=
            a(static_cast<Eigen::Index>(base + lay.offset(lr)), gc);
      }
    }
  }
  return out;
}

/// Normalised restriction (1/d_rest) Tr_rest(A) followed by re-embedding.
inline Matrix restrict_and_embed(const Matrix& a, const VertexSet& keep,
                                 const LatticePtr& g) {
  const double rest_dim =
      static_cast<double>(g->hilbert_dim()) / static_cast<double>(g->dimension_of(keep));
  const Matrix local = partial_trace_keep(a, keep, *g) / rest_dim;
  return embed(local, detail::ordered(*g, keep), g).matrix;
}

/// Smallest support found by testing sites for removability in declared
/// vertex order: a site is dropped when re-embedding the normalised partial
/// trace over it reproduces A to within tol * ||A||.
inline VertexSet support_of(const GlobalOperator& a, double tol = kDefaultTol) {
  if (tol <= 0) throw Error(ErrorKind::InvalidArgument, "tol must be positive");
  const double norm = op_norm(a.matrix);
  if (norm == 0.0) return {};
  VertexSet current = a.lattice->all_vertices();
  for (Site v : a.lattice->vertices()) {
    VertexSet candidate = current;
    candidate.erase(v);
    const Matrix approx = restrict_and_embed(a.matrix, candidate, a.lattice);
    if (op_norm(Matrix(a.matrix - approx)) <= tol * norm) current = std::move(candidate);
  }
  return current;
}

inline void check_same_dim(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorKind::DimensionMismatch,
                std::to_string(a.rows()) + " vs " + std::to_string(b.rows()));
  }
}

/// Checks the density-operator invariants; throws InvalidArgument naming the
/// first violated one.
inline void check_state(const Matrix& rho, double tol = kDefaultTol) {
  if (!is_hermitian(rho, tol)) throw Error(ErrorKind::NotHermitian, "state is not Hermitian");
  if (std::abs(rho.trace() - cplx(1.0)) > tol) {
    throw Error(ErrorKind::InvalidArgument, "state does not have unit trace");
  }
  // A successful Cholesky factorization of rho + tol proves the bound.
  const Matrix shifted = rho + tol * Matrix::Identity(rho.rows(), rho.cols());
  if (Eigen::LLT<Matrix>(shifted).info() == Eigen::Success) return;
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -tol) {
    throw Error(ErrorKind::InvalidArgument, "state is not positive semidefinite");
  }
}

/// Tr(rho A) for Hermitian A.
inline double expectation(const Matrix& rho, const Matrix& a, double tol = kDefaultTol) {
  check_same_dim(rho, a);
  if (!is_hermitian(a, tol)) {
    throw Error(ErrorKind::NotHermitian, "expectation requires a Hermitian observable");
  }
  // Tr(rho A) = sum_ij rho_ij A_ji
  const cplx value = (rho.array() * a.transpose().array()).sum();
  const double scale = std::max(1.0, std::abs(value));
  if (std::abs(value.imag()) > tol * scale * 10) {
    throw Error(ErrorKind::NotHermitian, "expectation has an imaginary part");
  }
  return value.real();
}

inline double expectation(const GlobalOperator& rho, const GlobalOperator& a,
                          double tol = kDefaultTol) {
  return expectation(rho.matrix, a.matrix, tol);
}

/// Tensor product of single-site states in declared vertex order.
inline GlobalOperator product_state(const std::vector<Matrix>& site_states,
                                    const LatticePtr& g) {
  detail::check_lattice(g);
  if (site_states.size() != g->num_vertices()) {
    throw Error(ErrorKind::DimensionMismatch, "one state per site required");
  }
  Matrix rho = Matrix::Identity(1, 1);
  for (std::size_t i = 0; i < site_states.size(); ++i) {
    if (site_states[i].rows() != g->dims()[i]) {
      throw Error(ErrorKind::DimensionMismatch, "site state dimension");
    }
    rho = kron(rho, site_states[i]);
  }
  return GlobalOperator{g, std::move(rho), std::nullopt};
}

/// ||rho - (x)_j rho_j|| <= tol with rho_j the single-site marginals.
inline bool is_product_state(const GlobalOperator& rho, double tol = 1e-10) {
  std::vector<Matrix> marginals;
  for (Site v : rho.lattice->vertices()) {
    marginals.push_back(partial_trace_keep(rho.matrix, {v}, *rho.lattice));
  }
  const Matrix delta = rho.matrix - product_state(marginals, rho.lattice).matrix;
  // ||D||_F / sqrt(d) <= ||D|| <= ||D||_F settles most cases without a norm solve.
  const double frob = delta.norm();
  if (frob <= tol) return true;
  if (frob > tol * std::sqrt(static_cast<double>(delta.rows()))) return false;
  return op_norm(delta) <= tol;
}

// Matrix interchange formats: row-major complex entries as (re, im) pairs.
// Binary layout: uint64 rows, uint64 cols, then rows*cols*2 little-endian
// doubles.

inline void write_matrix_binary(std::ostream& os, const Matrix& m) {
  const std::uint64_t rows = static_cast<std::uint64_t>(m.rows());
  const std::uint64_t cols = static_cast<std::uint64_t>(m.cols());
  os.write(reinterpret_cast<const char*>(&rows), sizeof rows);
  os.write(reinterpret_cast<const char*>(&cols), sizeof cols);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double parts[2] = {m(i, j).real(), m(i, j).imag()};
      os.write(reinterpret_cast<const char*>(parts), sizeof parts);
    }
  }
  if (!os) throw Error(ErrorKind::Io, "failed writing matrix");
}

inline Matrix read_matrix_binary(std::istream& is) {
  std::uint64_t rows = 0, cols = 0;
  is.read(reinterpret_cast<char*>(&rows), sizeof rows);
  is.read(reinterpret_cast<char*>(&cols), sizeof cols);
  if (!is) throw Error(ErrorKind::Io, "truncated matrix header");
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      double parts[2];
      is.read(reinterpret_cast<char*>(parts), sizeof parts);
      m(i, j) = cplx(parts[0], parts[1]);
    }
  }
  if (!is) throw Error(ErrorKind::Io, "truncated matrix body");
  return m;
}

/// One matrix row per line: re,im,re,im,... with 17 significant digits.
inline void write_matrix_csv(std::ostream& os, const Matrix& m) {
  char buf[64];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) os << ',';
      std::snprintf(buf, sizeof buf, "%.16e,%.16e", m(i, j).real(), m(i, j).imag());
      os << buf;
    }
    os << '\n';
  }
}

inline Matrix read_matrix_csv(std::istream& is) {
  std::vector<std::vector<cplx>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> values;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) values.push_back(std::stod(cell));
    if (values.size() % 2 != 0) throw Error(ErrorKind::Io, "odd number of CSV fields");
    std::vector<cplx> row;
    for (std::size_t k = 0; k < values.size(); k += 2) row.emplace_back(values[k], values[k + 1]);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) return Matrix();
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) throw Error(ErrorKind::Io, "ragged CSV matrix");
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

}  // namespace lrsim

#endif  // LRSIM_OPERATOR_CORE_HPP
