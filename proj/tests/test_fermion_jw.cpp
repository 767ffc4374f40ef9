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

#include <algorithm>
#include <random>

#include "lrsim/fermion_jw.hpp"

using namespace lrsim;

namespace {

double diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

// Independent construction: Z on sites before j, |1><0| on j, identity after.
Matrix annihilator(int j, int n) {
  Matrix f = Matrix::Zero(2, 2);
  f(1, 0) = 1.0;
  Matrix out = Matrix::Identity(1, 1);
  for (int k = 1; k <= n; ++k) {
    out = kron(out, k < j ? pauli::Z() : k == j ? f : pauli::I());
  }
  return out;
}

}  // namespace

TEST(JordanWigner, AnnihilatorMatchesExplicitString) {
  for (int n = 1; n <= 4; ++n) {
    for (int j = 1; j <= n; ++j) {
      EXPECT_LT(diff(fermion_op(j, false, n).matrix, annihilator(j, n)), 1e-15);
      EXPECT_LT(diff(fermion_op(j, true, n).matrix, annihilator(j, n).adjoint()), 1e-15);
    }
  }
}

TEST(JordanWigner, CanonicalAnticommutation) {
  const int n = 4;
  const auto chain = jw_chain(n);
  const Matrix id = Matrix::Identity(16, 16);
  for (int j = 1; j <= n; ++j) {
    for (int k = 1; k <= n; ++k) {
      const Matrix fj = fermion_op(j, false, chain).matrix;
      const Matrix fk = fermion_op(k, false, chain).matrix;
      EXPECT_LT(diff(anticommutator(fj, fk.adjoint()), (j == k ? 1.0 : 0.0) * id), 1e-14);
      EXPECT_LT(anticommutator(fj, fk).cwiseAbs().maxCoeff(), 1e-14);
    }
  }
}

TEST(JordanWigner, MajoranaClifford) {
  const auto chain = jw_chain(3);
  const Matrix id = Matrix::Identity(8, 8);
  for (int j = 1; j <= 6; ++j) {
    const Matrix wj = majorana(j, chain).matrix;
    EXPECT_LT(diff(wj, wj.adjoint()), 1e-15);
    for (int k = 1; k <= 6; ++k) {
      EXPECT_LT(diff(anticommutator(wj, majorana(k, chain).matrix), (j == k ? 2.0 : 0.0) * id), 1e-14);
    }
  }
  EXPECT_THROW(majorana(0, chain), Error);
  EXPECT_THROW(majorana(7, chain), Error);
  try {
    fermion_op(4, false, chain);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::IndexOutOfRange);
  }
}

TEST(JordanWigner, NumberOperatorIsHalfOnePlusZ) {
  const auto chain = jw_chain(3);
  for (int j = 1; j <= 3; ++j) {
    const Matrix n = jw_map(number_op(j), chain).matrix;
    const Matrix want = 0.5 * (Matrix::Identity(8, 8) + pauli_string({{j, 'Z'}}, chain).matrix);
    EXPECT_LT(diff(n, want), 1e-15);
  }
}

TEST(JordanWigner, NearestNeighbourHoppingIsMinusHalfXXPlusYY) {
  const auto chain = jw_chain(3);
  const Matrix h = jw_map(hopping(1, 2), chain).matrix;
  const Matrix xx = pauli_string({{1, 'X'}, {2, 'X'}}, chain).matrix;
  const Matrix yy = pauli_string({{1, 'Y'}, {2, 'Y'}}, chain).matrix;
  EXPECT_LT(diff(h, -0.5 * (xx + yy)), 1e-15);
}

TEST(JordanWigner, LongRangeHoppingCarriesString) {
  const auto chain = jw_chain(4);
  const Matrix lhs = jw_map({FermionMonomial{{1, -4}, 1.0}}, chain).matrix;
  EXPECT_LT(diff(lhs, jw_hopping_string(1, 4, chain).matrix), 1e-15);
  // Same product from the explicit string construction.
  const Matrix direct = annihilator(1, 4).adjoint() * annihilator(4, 4);
  EXPECT_LT(diff(lhs, direct), 1e-15);
}

TEST(JordanWigner, MapIsAnAlgebraHomomorphism) {
  std::mt19937_64 rng(4);
  const auto chain = jw_chain(4);
  auto random_poly = [&] {
    FermionPolynomial p;
    for (int m = 0; m < 3; ++m) {
      FermionMonomial mono;
      const int len = 2 * (1 + static_cast<int>(rng() % 2));
      for (int k = 0; k < len; ++k) {
        const int site = 1 + static_cast<int>(rng() % 4);
        mono.factors.push_back(rng() % 2 ? site : -site);
      }
      mono.coefficient = cplx(static_cast<double>(rng() % 7) - 3.0, static_cast<double>(rng() % 5) - 2.0);
      p.monomials.push_back(mono);
    }
    return p;
  };
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = random_poly(), q = random_poly();
    const Matrix mp = jw_map(p, chain).matrix, mq = jw_map(q, chain).matrix;
    EXPECT_LT(diff(jw_map(p * q, chain).matrix, mp * mq), 1e-12);
    EXPECT_LT(diff(jw_map(p + q, chain).matrix, mp + mq), 1e-12);
    EXPECT_LT(diff(jw_map(p.adjoint(), chain).matrix, mp.adjoint()), 1e-12);
  }
}

TEST(JordanWigner, EvenMonomialsStayLocal) {
  // f_2^dag f_4 touches sites 2..4 only.
  const auto chain = jw_chain(5);
  const auto op = jw_map({FermionMonomial{{2, -4}, 1.0}}, chain);
  EXPECT_EQ(support_of(op), (VertexSet{2, 3, 4}));
  // A single creation operator drags its string to site 1.
  EXPECT_EQ(support_of(jw_map({FermionMonomial{{3}, 1.0}}, chain, true)), (VertexSet{1, 2, 3}));
}

TEST(Parity, ClassificationAndRejection) {
  EXPECT_EQ(parity_of(number_op(1)), Parity::Even);
  EXPECT_EQ(parity_of({FermionMonomial{{1}, 1.0}}), Parity::Odd);
  EXPECT_EQ(parity_of({FermionMonomial{{1}, 1.0}, FermionMonomial{{1, -2}, 1.0}}), Parity::Mixed);
  EXPECT_EQ(parity_of(FermionPolynomial{}), Parity::Even);
  try {
    jw_map({FermionMonomial{{1}, 1.0}}, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OddParity);
  }
}

TEST(Spectrum, SectorsHaveBinomialSize) {
  const int n = 5;
  FermionPolynomial h;
  for (int j = 1; j < n; ++j) h = h + hopping(j, j + 1);
  const Matrix m = jw_map(h, n).matrix;
  const int binom[] = {1, 5, 10, 10, 5, 1};
  for (int k = 0; k <= n; ++k) EXPECT_EQ(sector_spectrum(m, n, k).size(), binom[k]);
}

TEST(Spectrum, TwoParticleEnergiesArePairSums) {
  const int n = 5;
  FermionPolynomial h;
  for (int j = 1; j < n; ++j) h = h + hopping(j, j + 1, 0.8);
  h = h + cplx(0.3) * number_op(2);
  const Matrix m = jw_map(h, n).matrix;
  Eigen::MatrixXd single = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j + 1 < n; ++j) single(j, j + 1) = single(j + 1, j) = 0.8;
  single(1, 1) = 0.3;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(single);
  std::vector<double> pairs;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) pairs.push_back(es.eigenvalues()(a) + es.eigenvalues()(b));
  }
  std::sort(pairs.begin(), pairs.end());
  const Eigen::VectorXd got = sector_spectrum(m, n, 2);
  ASSERT_EQ(got.size(), static_cast<Eigen::Index>(pairs.size()));
  for (std::size_t i = 0; i < pairs.size(); ++i) EXPECT_NEAR(got(static_cast<Eigen::Index>(i)), pairs[i], 1e-12);
}

TEST(FermionicModel, HoppingChainStrength) {
  std::vector<FermionTerm> terms;
  for (int j = 1; j < 6; ++j) terms.push_back(FermionTerm{{j, j + 1}, hopping(j, j + 1)});
  const auto l = jw_liouvillian(6, terms);
  EXPECT_NEAR(l.b(), 2.0, 1e-4);
  EXPECT_EQ(l.z(), 3u);
}

TEST(FermionicModel, RejectsPolynomialsOutsideSupport) {
  try {
    jw_liouvillian(4, {FermionTerm{{1, 2}, hopping(1, 3)}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ModelInvalid);
  }
}

TEST(FermionicModel, LeakageMatchesDirectCommutator) {
  const int n = 5;
  std::vector<FermionTerm> terms;
  for (int j = 1; j < n; ++j) terms.push_back(FermionTerm{{j, j + 1}, hopping(j, j + 1)});
  const FermionObservable a{{1}, number_op(1)};
  std::vector<FermionObservable> bs;
  for (int k = 2; k <= n; ++k) bs.push_back({{k}, number_op(k)});
  const auto r = fermionic_lr_experiment(n, terms, a, bs, 0.0, 0.1, BoundParameters{10.0, 8.0});
  const auto l = jw_liouvillian(n, terms);
  const Matrix evolved = evolve_heisenberg(l, jw_map(number_op(1), n).matrix, 0.0, 0.1, 1e-11);
  for (std::size_t i = 0; i < bs.size(); ++i) {
    const Matrix b = jw_map(bs[i].poly, n).matrix;
    EXPECT_NEAR(r.grid[i].measured, op_norm(Matrix(b * evolved - evolved * b)), 1e-9);
    EXPECT_EQ(r.grid[i].abscissa, static_cast<double>(i + 1));
  }
}

TEST(FermionicModel, OddObservablesUseAnticommutator) {
  const int n = 4;
  std::vector<FermionTerm> terms;
  for (int j = 1; j < n; ++j) terms.push_back(FermionTerm{{j, j + 1}, hopping(j, j + 1)});
  const FermionObservable a{{1}, {FermionMonomial{{-1}, 1.0}}};
  const FermionObservable b{{4}, {FermionMonomial{{4}, 1.0}}};
  EXPECT_THROW(fermionic_lr_experiment(n, terms, a, {b}, 0.0, 0.0, BoundParameters{}), Error);
  const auto r = fermionic_lr_experiment(n, terms, a, {b}, 0.0, 0.0, BoundParameters{}, true);
  // {f_1, f_4^dag} = 0 at equal times despite the overlapping strings.
  EXPECT_LT(r.grid[0].measured, 1e-14);
}
