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

#include "lrsim/locality_lab.hpp"

using namespace lrsim;

namespace {

LocalLiouvillian heisenberg_dephasing(int n, double gamma) {
  const auto g = chain_graph(n, true);
  std::vector<LindbladTerm> terms;
  for (int j = 1; j < n; ++j) terms.push_back(make_term({j, j + 1}, models::heisenberg_edge(1.0), {}, g));
  for (int j = 1; j <= n; ++j) terms.push_back(make_term({j}, Matrix(), {models::dephasing_jump(gamma)}, g));
  return assemble(g, terms);
}

}  // namespace

TEST(Fit, RecoversLine) {
  const auto fit = fit_line({1, 2, 3, 4}, {1.5, 3.5, 5.5, 7.5});
  EXPECT_NEAR(fit.slope, 2.0, 1e-14);
  EXPECT_NEAR(fit.intercept, -0.5, 1e-14);
  EXPECT_NEAR(fit.r_squared, 1.0, 1e-14);
  EXPECT_EQ(fit.points, 4u);
}

TEST(Envelope, Formula) {
  const BoundParameters p{2.0, 3.0};
  EXPECT_DOUBLE_EQ(lr_envelope(p, 1.0, 2.0, Distance(3), 0.5), 6.0 * std::exp(1.0 - 3.0));
  EXPECT_EQ(lr_envelope(p, 1.0, 1.0, Distance::infinite(), 10.0), 0.0);
  EXPECT_THROW(lr_envelope(p, 1.0, 1.0, Distance(1), -1.0), Error);
  EXPECT_THROW((BoundParameters{0.0, 1.0}.validate()), Error);
}

TEST(Defaults, VelocityIsEZb) {
  const auto l = heisenberg_dephasing(4, 0.5);
  const auto p = default_bound_parameters(l);
  EXPECT_NEAR(p.v, std::numbers::e * 5.0 * l.b(), 1e-12);
  EXPECT_EQ(p.c, 8.0);
}

TEST(Leakage, EqualTimesAndDisjointSupports) {
  const auto l = heisenberg_dephasing(4, 0.5);
  const auto x1 = pauli_string({{1, 'X'}}, l.lattice());
  const auto z4 = pauli_string({{4, 'Z'}}, l.lattice());
  const auto z1 = pauli_string({{1, 'Z'}}, l.lattice());
  EXPECT_EQ(commutator_leakage(l, x1, z4, 0.3, 0.3), 0.0);
  EXPECT_NEAR(commutator_leakage(l, x1, z1, 0.3, 0.3), 2.0, 1e-12);
}

TEST(Leakage, NoPathMeansNoLeakage) {
  const auto g = build_graph({1, 2, 3, 4}, {{1, 2}, {3, 4}}, 2);
  const auto l = assemble(g, {make_term({1, 2}, models::heisenberg_edge(1.0), {}, g),
                              make_term({3, 4}, models::heisenberg_edge(1.0), {}, g)});
  const auto a = pauli_string({{1, 'X'}}, l.lattice());
  const auto b = pauli_string({{4, 'Z'}}, l.lattice());
  EXPECT_LT(commutator_leakage(l, a, b, 0.0, 2.0, 1e-12), 1e-12);
  const auto r = leakage_vs_distance(l, a, {b}, 0.0, 2.0, BoundParameters{1.0, 1.0});
  EXPECT_TRUE(std::isinf(r.grid[0].abscissa));
  EXPECT_EQ(*r.grid[0].envelope, 0.0);
}

TEST(Leakage, PerturbationFormEqualsCommutator) {
  // i[B, .] as a Hamiltonian term gives ||K_Y(tau A)|| = ||[B, tau A]||.
  const auto l = heisenberg_dephasing(4, 0.3);
  const auto a = pauli_string({{1, 'X'}}, l.lattice());
  const auto b = pauli_string({{3, 'Z'}}, l.lattice());
  const auto k = commutator_term(pauli::Z(), {3}, *l.lattice());
  const double via_term = perturbation_leakage(l, a, k, 0.0, 0.2, 1e-11);
  const double direct = commutator_leakage(l, a, b, 0.0, 0.2, 1e-11);
  EXPECT_NEAR(via_term, direct, 1e-9);
  EXPECT_GT(direct, 0.0);
}

TEST(Leakage, SeriesMatchesPointwiseAndDecays) {
  const auto l = heisenberg_dephasing(6, 0.5);
  const double t = 0.2 / l.b();
  const auto a = pauli_string({{1, 'X'}}, l.lattice());
  std::vector<GlobalOperator> bs;
  for (int k = 6; k >= 2; --k) bs.push_back(pauli_string({{k, 'Z'}}, l.lattice()));
  const auto params = default_bound_parameters(l);
  const auto r = leakage_vs_distance(l, a, bs, 0.0, t, params, 1e-11, 2);
  ASSERT_EQ(r.grid.size(), 5u);
  for (std::size_t i = 0; i < r.grid.size(); ++i) {
    EXPECT_EQ(r.grid[i].abscissa, static_cast<double>(i + 1));
    const auto b = pauli_string({{static_cast<int>(i) + 2, 'Z'}}, l.lattice());
    EXPECT_NEAR(r.grid[i].measured, commutator_leakage(l, a, b, 0.0, t, 1e-11), 1e-9);
    if (i > 0) EXPECT_LT(r.grid[i].measured, r.grid[i - 1].measured);
  }
  EXPECT_TRUE(r.all_below_envelope());
  EXPECT_THROW(leakage_vs_distance(l, a, {bs[0], bs[0]}, 0.0, t, params), Error);
}

TEST(Truncation, FullRegionIsExactAndErrorsShrink) {
  const auto l = heisenberg_dephasing(7, 0.5);
  const double t = 0.3 / l.b();
  const auto a = pauli_string({{4, 'X'}}, l.lattice());
  std::vector<VertexSet> regions = {{4}, {3, 4, 5}, {2, 3, 4, 5, 6}, l.lattice()->all_vertices()};
  const auto r = truncation_error_series(l, a, regions, 0.0, t, default_bound_parameters(l), 1,
                                         spatial_dimension_constant(*l.lattice(), 1), 1e-11);
  ASSERT_EQ(r.grid.size(), 4u);
  EXPECT_EQ(r.grid[0].abscissa, 1.0);
  EXPECT_TRUE(std::isinf(r.grid[3].abscissa));
  EXPECT_EQ(r.grid[3].measured, 0.0);
  EXPECT_GT(r.grid[0].measured, r.grid[1].measured);
  EXPECT_GT(r.grid[1].measured, r.grid[2].measured);
  EXPECT_TRUE(r.grid[0].hypothesis_met);
  EXPECT_THROW(truncation_error_series(l, a, {{3, 4, 5}, {4}}, 0.0, t, default_bound_parameters(l), 1, 4.0),
               Error);
  EXPECT_THROW(truncation_error_series(l, a, {{1}}, 0.0, t, default_bound_parameters(l), 1, 4.0), Error);
}

TEST(Covariance, ProductStatesStartUncorrelated) {
  const auto l = heisenberg_dephasing(5, 0.5);
  std::mt19937_64 rng(2);
  std::vector<Matrix> sites;
  for (int j = 0; j < 5; ++j) sites.push_back(random_state(2, rng));
  const auto rho = product_state(sites, l.lattice());
  const auto a = pauli_string({{1, 'X'}}, l.lattice());
  const auto b = pauli_string({{5, 'Y'}}, l.lattice());
  EXPECT_LT(std::abs(covariance(rho, a, b)), 1e-14);
  const auto p = default_bound_parameters(l);
  const auto r = covariance_cone_experiment(l, rho, a, b, 0.0, {0.0, 0.01, 0.02}, p, 1e-11);
  EXPECT_LT(r.grid[0].measured, 1e-14);
  EXPECT_TRUE(r.all_below_envelope());

  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(32);
  psi(0) = psi(31) = 1.0 / std::sqrt(2.0);
  const GlobalOperator ghz{l.lattice(), psi * psi.adjoint(), std::nullopt};
  EXPECT_NEAR(std::abs(covariance(ghz, pauli_string({{1, 'Z'}}, l.lattice()),
                                  pauli_string({{5, 'Z'}}, l.lattice()))),
              1.0, 1e-14);
  EXPECT_THROW(covariance_cone_experiment(l, ghz, a, b, 0.0, {0.1}, p), Error);
}

TEST(Trotter, SingleGroupIsExact) {
  const auto g = chain_graph(2, true);
  std::mt19937_64 rng(3);
  const auto l = assemble(g, {make_term({1, 2}, random_hermitian(4, rng), {0.3 * random_matrix(4, rng)}, g)});
  const auto a = GlobalOperator{l.lattice(), random_matrix(4, rng), std::nullopt};
  const Matrix exact = evolve_heisenberg(l, a.matrix, 0.0, 0.6, 1e-12);
  EXPECT_LT(op_norm(Matrix(trotter_evolve(l, a, 0.0, 0.6, 1, 1e-12).matrix - exact)), 1e-10);
}

TEST(Trotter, CommutingGroupsAreExact) {
  const auto g = chain_graph(4, true);
  std::vector<LindbladTerm> terms;
  for (int j = 1; j < 4; ++j) terms.push_back(make_term({j, j + 1}, models::zz_edge(0.7), {}, g));
  for (int j = 1; j <= 4; ++j) terms.push_back(make_term({j}, Matrix(), {models::dephasing_jump(0.2)}, g));
  const auto l = assemble(g, terms);
  const auto a = pauli_string({{2, 'X'}, {3, 'Y'}}, l.lattice());
  const Matrix exact = evolve_heisenberg(l, a.matrix, 0.0, 0.5, 1e-12);
  EXPECT_LT(op_norm(Matrix(trotter_evolve(l, a, 0.0, 0.5, 1, 1e-12).matrix - exact)), 1e-9);
}

TEST(Trotter, FirstOrderConvergence) {
  const auto g = chain_graph(3);
  std::vector<LindbladTerm> terms;
  for (int j = 1; j < 3; ++j) terms.push_back(make_term({j, j + 1}, models::heisenberg_edge(1.0), {}, g));
  const auto l = assemble(g, terms);
  const auto a = pauli_string({{2, 'X'}}, l.lattice());
  const auto r = trotter_error_series(l, a, 0.0, 0.5, {8, 16, 32, 64});
  ASSERT_TRUE(r.fit.has_value());
  EXPECT_NEAR(r.fit->slope, -1.0, 0.15);
  EXPECT_THROW(trotter_error_series(l, a, 0.0, 0.5, {8, 4}), Error);
  EXPECT_THROW(trotter_evolve(l, a, 0.0, 0.5, 0), Error);
}

TEST(Trotter, TimeDependentSlicesUseTheirOwnInterval) {
  const auto g = chain_graph(1, true);
  const auto c = TimeSchedule::piecewise({SchedulePiece{0.0, 1.0, {0.2, 1.0}}});
  const auto l = assemble(g, {make_term({1}, Matrix(), {models::dephasing_jump(0.5)}, g, c)});
  const auto x = pauli_string({{1, 'X'}}, l.lattice());
  const double want = std::exp(-4.0 * 0.5 * c.integral(0.0, 1.0));
  EXPECT_NEAR(trotter_evolve(l, x, 0.0, 1.0, 3, 1e-12).matrix(0, 1).real(), want, 1e-9);
}
