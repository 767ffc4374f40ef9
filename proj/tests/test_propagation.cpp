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

#include <gtest/gtest.h>

#include <random>
#include <unsupported/Eigen/MatrixFunctions>

#include "lrsim/propagation.hpp"

using namespace lrsim;

namespace {

double diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

LocalLiouvillian single_qubit(Matrix h, std::vector<Matrix> jumps,
                              TimeSchedule schedule = TimeSchedule::constant(1.0)) {
  const auto g = chain_graph(1, true);
  return assemble(g, {make_term({1}, std::move(h), std::move(jumps), g, std::move(schedule))});
}

TimeSchedule two_piece() {
  return TimeSchedule::piecewise({SchedulePiece{0.0, 0.5, {1.0, 0.8}},
                                  SchedulePiece{0.5, 1.0, {0.4, -0.3, 0.5}}});
}

LocalLiouvillian random_model(std::mt19937_64& rng, bool time_dependent) {
  const auto g = chain_graph(2, true);
  const TimeSchedule c = time_dependent ? two_piece() : TimeSchedule::constant(1.0);
  return assemble(g, {make_term({1, 2}, random_hermitian(4, rng), {0.5 * random_matrix(4, rng)}, g, c),
                      make_term({2}, random_hermitian(2, rng), {0.5 * random_matrix(2, rng)}, g)});
}

}  // namespace

TEST(Evolution, RotationUnderHalfZ) {
  const auto l = single_qubit(0.5 * pauli::Z(), {});
  const double t = 0.9;
  const Matrix want = std::cos(t) * pauli::X() - std::sin(t) * pauli::Y();
  EXPECT_LT(diff(evolve_heisenberg(l, pauli::X(), 0.0, t, 1e-12), want), 1e-10);
  EXPECT_LT(diff(evolve_schrodinger(l, pauli::X(), 0.0, t, 1e-12),
                 std::cos(t) * pauli::X() + std::sin(t) * pauli::Y()),
            1e-10);
}

TEST(Evolution, DephasingClosedForm) {
  const double gamma = 0.25, t = 1.3;
  const auto l = single_qubit(Matrix(), {models::dephasing_jump(gamma)});
  EXPECT_LT(diff(evolve_heisenberg(l, pauli::X(), 0.0, t, 1e-12),
                 std::exp(-4.0 * gamma * t) * pauli::X()),
            1e-11);
  EXPECT_LT(diff(evolve_heisenberg(l, pauli::Z(), 0.0, t, 1e-12), pauli::Z()), 1e-12);
}

TEST(Evolution, TimeDependentRateIntegratesSchedule) {
  const double gamma = 0.4;
  const auto c = two_piece();
  const auto l = single_qubit(Matrix(), {models::dephasing_jump(gamma)}, c);
  for (double s : {0.0, 0.3}) {
    const double want = std::exp(-4.0 * gamma * c.integral(s, 1.0));
    EXPECT_LT(diff(evolve_heisenberg(l, pauli::Y(), s, 1.0, 1e-12), want * pauli::Y()), 1e-10);
  }
}

TEST(Evolution, AmplitudeDampingRelaxesPopulation) {
  // rho_11(t) = e^{-2 g t} in this normalisation, with |1> the Z = -1 state.
  const double g = 0.3, t = 0.8;
  const auto l = single_qubit(Matrix(), {models::amplitude_damping_jump(g)});
  Matrix excited = Matrix::Zero(2, 2);
  excited(1, 1) = 1.0;
  const Matrix rho = evolve_schrodinger(l, excited, 0.0, t, 1e-12);
  EXPECT_NEAR(rho(1, 1).real(), std::exp(-2.0 * g * t), 1e-10);
  EXPECT_NEAR(rho.trace().real(), 1.0, 1e-12);
}

TEST(Evolution, ZeroIntervalIsIdentity) {
  std::mt19937_64 rng(1);
  const auto l = random_model(rng, true);
  const Matrix a = random_matrix(4, rng);
  EXPECT_EQ(diff(evolve_heisenberg(l, a, 0.4, 0.4, 1e-10), a), 0.0);
  EXPECT_THROW(evolve_heisenberg(l, a, 0.5, 0.4, 1e-10), Error);
}

TEST(Propagator, MatchesMatrixExponential) {
  std::mt19937_64 rng(2);
  const auto l = random_model(rng, false);
  const Matrix gen = l.superop(0.0, false);
  const Matrix want = Matrix(gen * 0.7).exp();
  EXPECT_LT(diff(propagator_matrix(l, 0.0, 0.7, 1e-12).matrix, want), 1e-9);
  EXPECT_LT(diff(propagator_matrix_expm(l, 0.0, 0.7).matrix, want), 1e-11);
}

TEST(Propagator, CompositionAndAdjoint) {
  std::mt19937_64 rng(3);
  const auto l = random_model(rng, true);
  const auto full = propagator_matrix(l, 0.1, 0.9, 1e-11);
  for (double r : {0.3, 0.5, 0.7}) {
    const auto late = propagator_matrix(l, r, 0.9, 1e-11);
    const auto early = propagator_matrix(l, 0.1, r, 1e-11);
    EXPECT_LT(op_norm(Matrix(full.matrix - late.matrix * early.matrix)), 1e-8);
  }
  EXPECT_LT(adjoint_consistency_check(l, 0.1, 0.9, 1e-11), 1e-8);
}

TEST(Propagator, CompletelyPositiveAndTracePreserving) {
  std::mt19937_64 rng(4);
  const auto l = random_model(rng, true);
  const auto map = propagator_matrix(l, 0.0, 1.0, 1e-11);
  const Matrix choi = choi_matrix(map);
  EXPECT_GE(min_eigenvalue(choi), -1e-9);
  EXPECT_LT(choi_trace_defect(choi, 4), 1e-9);
  EXPECT_LT(trace_preservation_defect(map), 1e-9);
  // Heisenberg maps are unital.
  const Matrix id = Matrix::Identity(4, 4);
  EXPECT_LT(diff(evolve_heisenberg(l, id, 0.0, 1.0, 1e-11), id), 1e-10);
}

TEST(Propagator, TransposeIsNotCompletelyPositive) {
  EXPECT_NEAR(min_eigenvalue(choi_matrix(transpose_map(2))), -1.0, 1e-12);
  EXPECT_LT(trace_preservation_defect(transpose_map(3)), 1e-14);
}

TEST(Propagator, IdentityChoiIsMaximallyEntangled) {
  const auto l = single_qubit(Matrix(), {});
  const auto map = propagator_matrix(l, 0.0, 1.0, 1e-10);
  Eigen::VectorXcd omega = Eigen::VectorXcd::Zero(4);
  omega(0) = omega(3) = 1.0;
  EXPECT_LT(diff(choi_matrix(map), omega * omega.adjoint()), 1e-14);
}

TEST(Integrator, FixedStepIsFourthOrder) {
  std::mt19937_64 rng(5);
  const auto l = random_model(rng, false);
  const Matrix a = random_matrix(4, rng);
  const Matrix exact = unvec(Matrix(l.superop(0.0, true) * 0.8).exp() * vec(a), 4);
  const double e1 = op_norm(Matrix(evolve_heisenberg_fixed(l, a, 0.0, 0.8, 8) - exact));
  const double e2 = op_norm(Matrix(evolve_heisenberg_fixed(l, a, 0.0, 0.8, 16) - exact));
  EXPECT_NEAR(std::log2(e1 / e2), 4.0, 0.3);
}

TEST(Integrator, AdaptiveMeetsTolerance) {
  std::mt19937_64 rng(6);
  const auto l = random_model(rng, false);
  const Matrix a = random_matrix(4, rng);
  const Matrix exact = unvec(Matrix(l.superop(0.0, true) * 1.5).exp() * vec(a), 4);
  IntegrationStats stats;
  const Matrix got = evolve_heisenberg(l, a, 0.0, 1.5, 1e-9, &stats);
  EXPECT_LT(op_norm(Matrix(got - exact)), 1e-8);
  EXPECT_GT(stats.steps, 0u);
}

TEST(Propagator, SizeCaps) {
  const auto g = chain_graph(8);
  std::vector<LindbladTerm> terms;
  for (int j = 1; j < 8; ++j) terms.push_back(make_term({j, j + 1}, models::zz_edge(1.0), {}, g));
  const auto l = assemble(g, terms);
  try {
    propagator_matrix(l, 0.0, 1.0, 1e-10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TooLarge);
  }
}

TEST(Observables, PropagateKeepsLattice) {
  const auto l = single_qubit(0.5 * pauli::Z(), {});
  const auto a = pauli_string({{1, 'X'}}, l.lattice());
  const auto out = propagate_observable(l, a, 0.0, 0.5);
  EXPECT_EQ(out.lattice, l.lattice());
  EXPECT_NEAR(op_norm(out), 1.0, 1e-9);
}
