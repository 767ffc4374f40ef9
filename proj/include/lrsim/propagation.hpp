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

#ifndef LRSIM_PROPAGATION_HPP
#define LRSIM_PROPAGATION_HPP

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <vector>

#include "lrsim/error.hpp"
#include "lrsim/liouvillian.hpp"
#include "lrsim/operator_core.hpp"

namespace lrsim {

/// Superoperators are only materialised up to this Hilbert dimension.
inline constexpr std::size_t kMaxSuperopHilbertDim = 128;
/// The scaling-and-squaring cross-check is limited further.
inline constexpr std::size_t kMaxExpmHilbertDim = 64;
/// Step-doubling gives up beyond this many steps per schedule piece.
inline constexpr std::size_t kMaxSteps = std::size_t{1} << 22;

/// Matrix on the column-stacked operator space, stamped with its interval.
struct SuperoperatorMatrix {
  Matrix matrix;
  double s = 0.0;
  double t = 0.0;

  Eigen::Index hilbert_dim() const {
    return static_cast<Eigen::Index>(std::lround(std::sqrt(static_cast<double>(matrix.rows()))));
  }
  Matrix apply(const Matrix& x) const { return unvec(matrix * vec(x), x.rows()); }
};

struct IntegrationStats {
  std::size_t steps = 0;          // accepted steps summed over pieces
  double error_estimate = 0.0;    // step-doubling estimate, Frobenius norm
};

namespace detail {

/// Classical RK4 with n equal steps of y' = f(x, y) on [x0, x1].
template <class Rhs>
Matrix rk4_fixed(const Rhs& f, Matrix y, double x0, double x1, std::size_t n) {
  const double h = (x1 - x0) / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double x = x0 + h * static_cast<double>(k);
    const Matrix k1 = f(x, y);
    const Matrix k2 = f(x + 0.5 * h, Matrix(y + (0.5 * h) * k1));
    const Matrix k3 = f(x + 0.5 * h, Matrix(y + (0.5 * h) * k2));
    const Matrix k4 = f(x + h, Matrix(y + h * k3));
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return y;
}

/// Step doubling from n0 steps until the Richardson error estimate
/// ||y_2n - y_n|| / 15 drops below `target`.
template <class Rhs>
Matrix rk4_adaptive(const Rhs& f, const Matrix& y0, double x0, double x1,
                    std::size_t n0, double target, IntegrationStats& stats) {
  std::size_t n = std::max<std::size_t>(1, n0);
  Matrix coarse = rk4_fixed(f, y0, x0, x1, n);
  while (true) {
    if (2 * n > kMaxSteps) {
      throw Error(ErrorKind::ToleranceNotMet,
                  "step size underflow after " + std::to_string(n) + " steps");
    }
    Matrix fine = rk4_fixed(f, y0, x0, x1, 2 * n);
    const double err = (fine - coarse).norm() / 15.0;
    if (err <= target) {
      stats.steps += 2 * n;
      stats.error_estimate += err;
      return fine;
    }
    // Fourth-order error model: skip doublings that cannot succeed.
    const double needed = 2.0 * static_cast<double>(n) * std::pow(err / target, 0.25);
    std::size_t next = 2 * n;
    while (2.0 * static_cast<double>(next) < needed && 2 * next <= kMaxSteps) next *= 2;
    coarse = next == 2 * n ? std::move(fine) : rk4_fixed(f, y0, x0, x1, next);
    n = next;
  }
}

/// Sub-intervals of [s, t] split at the Liouvillian's schedule breakpoints.
inline std::vector<double> split_points(const LocalLiouvillian& l, double s, double t) {
  std::vector<double> points{s};
  for (double b : l.breakpoints()) {
    if (b > s && b < t) points.push_back(b);
  }
  points.push_back(t);
  return points;
}

inline std::size_t initial_steps(const LocalLiouvillian& l, double span) {
  return static_cast<std::size_t>(std::max(1.0, std::ceil(span * l.b() * 8.0)));
}

inline double error_target(double tol, double span, double scale) {
  // Never ask for less than a few hundred ulps relative to the operator.
  return std::max(tol * span, 1e-14) * std::max(scale, 1e-300);
}

inline void check_interval(double s, double t) {
  if (!(t >= s)) {
    throw Error(ErrorKind::BadInterval,
                "t = " + std::to_string(t) + " precedes s = " + std::to_string(s));
  }
}

inline void check_on_lattice(const LocalLiouvillian& l, const GlobalOperator& a) {
  if (!a.lattice || !a.lattice->same_space(*l.lattice())) {
    throw Error(ErrorKind::DimensionMismatch, "operator and Liouvillian live on different spaces");
  }
  if (static_cast<std::size_t>(a.matrix.rows()) != l.hilbert_dim()) {
    throw Error(ErrorKind::DimensionMismatch, "operator dimension");
  }
}

}  // namespace detail

/// T(t, s) applied to a matrix: forward integration of rho' = L^dag_t(rho).
inline Matrix evolve_schrodinger(const LocalLiouvillian& l, const Matrix& rho, double s,
                                 double t, double tol, IntegrationStats* stats = nullptr) {
  detail::check_interval(s, t);
  IntegrationStats local;
  if (l.empty() || t == s) return rho;
  const auto points = detail::split_points(l, s, t);
  const double scale = rho.norm();
  Matrix y = rho;
  for (std::size_t k = 0; k + 1 < points.size(); ++k) {
    const double a = points[k], b = points[k + 1];
    const double probe = 0.5 * (a + b);
    const auto target = detail::error_target(tol, b - a, scale);
    if (l.constant_on_piece_of(probe)) {
      const auto frozen = l.freeze(probe, probe, /*heisenberg=*/false);
      auto rhs = [&frozen](double, const Matrix& m) { return frozen.apply(m); };
      y = detail::rk4_adaptive(rhs, y, a, b, detail::initial_steps(l, b - a), target, local);
    } else {
      auto rhs = [&l, probe](double x, const Matrix& m) { return l.apply_schrodinger(x, m, probe); };
      y = detail::rk4_adaptive(rhs, y, a, b, detail::initial_steps(l, b - a), target, local);
    }
  }
  if (stats) *stats = local;
  return y;
}

/// tau(s, t) applied to a matrix. Integrates dA/du = L_{t-u}(A) forward in
/// u = t - s, piece by piece from the latest schedule piece backwards.
inline Matrix evolve_heisenberg(const LocalLiouvillian& l, const Matrix& a, double s,
                                double t, double tol, IntegrationStats* stats = nullptr) {
  detail::check_interval(s, t);
  IntegrationStats local;
  if (l.empty() || t == s) return a;
  const auto points = detail::split_points(l, s, t);
  const double scale = a.norm();
  Matrix y = a;
  for (std::size_t k = points.size() - 1; k > 0; --k) {
    const double lo = points[k - 1], hi = points[k];
    const double probe = 0.5 * (lo + hi);
    const auto target = detail::error_target(tol, hi - lo, scale);
    if (l.constant_on_piece_of(probe)) {
      const auto frozen = l.freeze(probe, probe, /*heisenberg=*/true);
      auto rhs = [&frozen](double, const Matrix& m) { return frozen.apply(m); };
      y = detail::rk4_adaptive(rhs, y, 0.0, hi - lo, detail::initial_steps(l, hi - lo), target,
                               local);
    } else {
      auto rhs = [&l, hi, probe](double u, const Matrix& m) {
        return l.apply_heisenberg(hi - u, m, probe);
      };
      y = detail::rk4_adaptive(rhs, y, 0.0, hi - lo, detail::initial_steps(l, hi - lo), target,
                               local);
    }
  }
  if (stats) *stats = local;
  return y;
}

/// Fixed-step RK4 Heisenberg evolution (no error control); exposed for
/// order checks.
inline Matrix evolve_heisenberg_fixed(const LocalLiouvillian& l, const Matrix& a, double s,
                                      double t, std::size_t steps_per_piece) {
  detail::check_interval(s, t);
  if (l.empty() || t == s) return a;
  const auto points = detail::split_points(l, s, t);
  Matrix y = a;
  for (std::size_t k = points.size() - 1; k > 0; --k) {
    const double lo = points[k - 1], hi = points[k];
    const double probe = 0.5 * (lo + hi);
    auto rhs = [&l, hi, probe](double u, const Matrix& m) {
      return l.apply_heisenberg(hi - u, m, probe);
    };
    y = detail::rk4_fixed(rhs, y, 0.0, hi - lo, steps_per_piece);
  }
  return y;
}

/// rho_s(t) = T(t, s)(rho) for a density operator rho.
inline GlobalOperator propagate_state(const LocalLiouvillian& l, const GlobalOperator& rho,
                                      double s, double t, double tol = kDefaultTol) {
  detail::check_interval(s, t);
  detail::check_on_lattice(l, rho);
  check_state(rho.matrix, 1e-8);
  return rho.with_matrix(evolve_schrodinger(l, rho.matrix, s, t, tol));
}

/// A_t(s) = tau(s, t)(A), the backward-evolved observable.
inline GlobalOperator propagate_observable(const LocalLiouvillian& l, const GlobalOperator& a,
                                           double s, double t, double tol = kDefaultTol) {
  detail::check_interval(s, t);
  detail::check_on_lattice(l, a);
  return a.with_matrix(evolve_heisenberg(l, a.matrix, s, t, tol));
}

namespace detail {

inline void check_superop_size(const LocalLiouvillian& l, std::size_t cap) {
  if (l.hilbert_dim() > cap) {
    throw Error(ErrorKind::TooLarge, "Hilbert dimension " + std::to_string(l.hilbert_dim()) +
                                         " exceeds materialisation cap " + std::to_string(cap));
  }
}

template <class Evolve>
Matrix materialise(std::size_t dim, const Evolve& evolve) {
  const auto d = static_cast<Eigen::Index>(dim);
  Matrix out(d * d, d * d);
  for (Eigen::Index col = 0; col < d * d; ++col) {
    Matrix unit = Matrix::Zero(d, d);
    unit(col % d, col / d) = 1.0;
    out.col(col) = vec(evolve(unit));
  }
  return out;
}

}  // namespace detail

/// T(t, s) as a superoperator matrix, column by column from a propagated
/// matrix-unit basis.
inline SuperoperatorMatrix propagator_matrix(const LocalLiouvillian& l, double s, double t,
                                             double tol = kDefaultTol) {
  detail::check_interval(s, t);
  detail::check_superop_size(l, kMaxSuperopHilbertDim);
  Matrix m = detail::materialise(l.hilbert_dim(), [&](const Matrix& unit) {
    return evolve_schrodinger(l, unit, s, t, tol);
  });
  return SuperoperatorMatrix{std::move(m), s, t};
}

/// tau(s, t) as a superoperator matrix built from backward evolution.
inline SuperoperatorMatrix heisenberg_propagator_matrix(const LocalLiouvillian& l, double s,
                                                        double t, double tol = kDefaultTol) {
  detail::check_interval(s, t);
  detail::check_superop_size(l, kMaxSuperopHilbertDim);
  Matrix m = detail::materialise(l.hilbert_dim(), [&](const Matrix& unit) {
    return evolve_heisenberg(l, unit, s, t, tol);
  });
  return SuperoperatorMatrix{std::move(m), s, t};
}

/// Scaling-and-squaring exponential of the materialised generator, piece by
/// piece. Only for schedules that are constant on every piece crossed.
inline SuperoperatorMatrix propagator_matrix_expm(const LocalLiouvillian& l, double s,
                                                  double t) {
  detail::check_interval(s, t);
  detail::check_superop_size(l, kMaxExpmHilbertDim);
  const auto d = static_cast<Eigen::Index>(l.hilbert_dim());
  Matrix total = Matrix::Identity(d * d, d * d);
  const auto points = detail::split_points(l, s, t);
  for (std::size_t k = 0; k + 1 < points.size(); ++k) {
    const double a = points[k], b = points[k + 1];
    for (const auto& term : l.terms()) {
      const auto& piece = term.schedule.pieces()[term.schedule.piece_index(0.5 * (a + b))];
      if (piece.poly.size() > 1) {
        throw Error(ErrorKind::InvalidArgument, "expm path needs piecewise-constant schedules");
      }
    }
    const Matrix gen = l.superop(0.5 * (a + b), /*heisenberg=*/false);
    const Matrix step = (gen * (b - a)).exp();
    total = step * total;
  }
  return SuperoperatorMatrix{std::move(total), s, t};
}

/// Choi matrix sum_ij |i><j| (x) T(|i><j|); the input copy is the leading
/// tensor factor.
inline Matrix choi_matrix(const SuperoperatorMatrix& map) {
  const Eigen::Index d = map.hilbert_dim();
  if (static_cast<std::size_t>(d) > kMaxSuperopHilbertDim) {
    throw Error(ErrorKind::TooLarge, "Choi matrix beyond materialisation cap");
  }
  Matrix choi(d * d, d * d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const Matrix image = unvec(map.matrix.col(i + j * d), d);
      choi.block(i * d, j * d, d, d) = image;
    }
  }
  return choi;
}

inline double min_eigenvalue(const Matrix& hermitian) {
  const Matrix sym = 0.5 * (hermitian + hermitian.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// ||Tr_out(Choi) - 1||_max: zero iff the map is trace preserving.
inline double choi_trace_defect(const Matrix& choi, Eigen::Index d) {
  Matrix reduced = Matrix::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) reduced(i, j) = choi.block(i * d, j * d, d, d).trace();
  }
  return (reduced - Matrix::Identity(d, d)).cwiseAbs().maxCoeff();
}

/// max_j |sum_i T_(ii),j - delta|: the map's action on the trace functional.
inline double trace_preservation_defect(const SuperoperatorMatrix& map) {
  const Eigen::Index d = map.hilbert_dim();
  const Eigen::VectorXcd id = vec(Matrix::Identity(d, d));
  const Eigen::RowVectorXcd image = id.adjoint() * map.matrix;
  return (image - id.adjoint()).cwiseAbs().maxCoeff();
}

/// Transpose as a (non-CP) superoperator on d x d matrices.
inline SuperoperatorMatrix transpose_map(Eigen::Index d) {
  Matrix m = Matrix::Zero(d * d, d * d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) m(j + i * d, i + j * d) = 1.0;
  }
  return SuperoperatorMatrix{std::move(m), 0.0, 0.0};
}

/// ||tau(s, t) - T(t, s)^dag|| in the spectral norm of the superoperator
/// space, the two sides integrated independently.
inline double adjoint_consistency_check(const LocalLiouvillian& l, double s, double t,
                                        double tol = kDefaultTol) {
  const SuperoperatorMatrix forward = propagator_matrix(l, s, t, tol);
  const SuperoperatorMatrix backward = heisenberg_propagator_matrix(l, s, t, tol);
  return op_norm(Matrix(backward.matrix - forward.matrix.adjoint()));
}

}  // namespace lrsim

#endif  // LRSIM_PROPAGATION_HPP
