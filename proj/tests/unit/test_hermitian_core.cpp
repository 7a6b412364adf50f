// Copyright 2026 The QPF Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qpf/errors.hpp"
#include "qpf/linalg.hpp"
#include "qpf/system_model.hpp"

namespace qpf {
namespace {

using oracle::C;

const Operator kSx = pauli(Axis::kX);
const Operator kSy = pauli(Axis::kY);
const Operator kSz = pauli(Axis::kZ);

TEST(Commutator, PauliAlgebra) {
  const Operator c = commutator(kSx, kSy);
  EXPECT_LT(max_norm(c - kSz * Complex(0.0, 2.0)), 1e-15);
}

TEST(Commutator, SelfAndDiagonalVanish) {
  oracle::Rand rnd(1);
  const Operator a(rnd.matrix(3));
  EXPECT_EQ(max_norm(commutator(a, a)), 0.0);
  EXPECT_EQ(max_norm(commutator(Operator::diagonal({1, -1}), Operator::diagonal({5, 7}))), 0.0);
}

TEST(Commutator, HermitianInputsGiveAntiHermitian) {
  oracle::Rand rnd(2);
  const Operator c = commutator(rnd.hermitian(4), rnd.hermitian(4));
  EXPECT_LT(max_norm(c + c.adjoint()), 1e-14);
}

TEST(Commutator, DimensionMismatchThrows) {
  EXPECT_THROW(commutator(Operator::identity(2), Operator::identity(3)), UsageError);
}

TEST(HermEig, PauliZSpectrum) {
  const EigenSystem es = herm_eig(kSz);
  EXPECT_DOUBLE_EQ(es.eigenvalues(0), -1.0);
  EXPECT_DOUBLE_EQ(es.eigenvalues(1), 1.0);
}

TEST(HermEig, IdentityAndDiagonal) {
  const EigenSystem id = herm_eig(Operator::identity(3));
  for (Index i = 0; i < 3; ++i) EXPECT_NEAR(id.eigenvalues(i), 1.0, 1e-15);
  const EigenSystem d = herm_eig(Operator::diagonal({0.125, 0.125, 0.375, 0.375}));
  const double expected[] = {0.125, 0.125, 0.375, 0.375};
  for (Index i = 0; i < 4; ++i) EXPECT_NEAR(d.eigenvalues(i), expected[i], 1e-15);
}

TEST(HermEig, ReconstructionAndUnitarity) {
  oracle::Rand rnd(3);
  for (int k = 0; k < 20; ++k) {
    const Index n = 1 + k % 7;
    const Operator a = rnd.hermitian(n);
    const EigenSystem es = herm_eig(a);
    for (Index i = 1; i < n; ++i) EXPECT_LE(es.eigenvalues(i - 1), es.eigenvalues(i));
    const Eigen::MatrixXcd rec =
        es.eigenvectors * es.eigenvalues.cast<Complex>().asDiagonal() * es.eigenvectors.adjoint();
    EXPECT_LE((rec - a.matrix()).norm(), 1e-9 * std::max(1.0, a.matrix().norm()));
    const Eigen::MatrixXcd vv = es.eigenvectors.adjoint() * es.eigenvectors;
    EXPECT_LE((vv - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(HermEig, Deterministic) {
  oracle::Rand rnd(4);
  const Operator a = rnd.hermitian(5);
  const EigenSystem x = herm_eig(a);
  const EigenSystem y = herm_eig(a);
  EXPECT_EQ(x.eigenvalues, y.eigenvalues);
  EXPECT_EQ(x.eigenvectors, y.eigenvectors);
}

TEST(HermEig, RejectsNonHermitian) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2, 2);
  m(0, 1) = 1.0;
  EXPECT_THROW(herm_eig(Operator(m)), UsageError);
  EXPECT_THROW(herm_exp(Operator(m)), UsageError);
}

TEST(HermExp, ZeroAndDiagonal) {
  EXPECT_LT(max_norm(herm_exp(Operator::zero(3)) - Operator::identity(3)), 1e-15);
  EXPECT_LT(max_norm(herm_exp(Operator::diagonal({std::log(2.0), 0.0})) -
                     Operator::diagonal({2.0, 1.0})),
            1e-15);
}

TEST(HermExp, MatchesTaylorOracle) {
  const double theta = 0.3;
  const Operator e = herm_exp(kSz * theta);
  const oracle::Dense ref = oracle::expm(C(theta, 0.0) * oracle::pauli_z());
  EXPECT_LT(oracle::max_abs_diff(e, ref), 1e-14);
  const Operator closed = Operator::identity(2) * std::cosh(theta) + kSz * std::sinh(theta);
  EXPECT_LT(max_norm(e - closed), 1e-15);

  oracle::Rand rnd(5);
  for (int k = 0; k < 10; ++k) {
    const Operator a = rnd.hermitian(4);
    EXPECT_LT(oracle::max_abs_diff(herm_exp(a), oracle::expm(oracle::from(a), 30)), 1e-11);
  }
}

TEST(HermExp, InverseProperty) {
  oracle::Rand rnd(6);
  for (int k = 0; k < 20; ++k) {
    const Index n = 1 + k % 6;
    const Operator a = rnd.hermitian(n);
    EXPECT_LE(frobenius_norm(herm_exp(a) * herm_exp(-a) - Operator::identity(n)), 1e-8);
    EXPECT_GT(min_eigenvalue(herm_exp(a)), 0.0);
  }
}

TEST(SingularValues, SimpleCases) {
  const Eigen::VectorXd s = singular_values(kSz);
  EXPECT_NEAR(s(0), 1.0, 1e-15);
  EXPECT_NEAR(s(1), 1.0, 1e-15);
  const Eigen::VectorXd d = singular_values(Operator::diagonal({3.0, -4.0}));
  EXPECT_NEAR(d(0), 4.0, 1e-14);
  EXPECT_NEAR(d(1), 3.0, 1e-14);
}

TEST(SingularValues, HermitianGivesAbsoluteEigenvalues) {
  oracle::Rand rnd(7);
  const Operator a = rnd.hermitian(5);
  Eigen::VectorXd ev = herm_eig(a).eigenvalues.cwiseAbs();
  std::sort(ev.data(), ev.data() + ev.size(), std::greater<>());
  EXPECT_LT((singular_values(a) - ev).cwiseAbs().maxCoeff(), 1e-12);
}

// Partial sums of the singular values of AB are bounded by those of the
// products s_i(A) s_i(B).
TEST(SingularValues, ProductMajorization) {
  oracle::Rand rnd(8);
  for (int k = 0; k < 100; ++k) {
    const Index n = 1 + k % 6;
    const Operator a(rnd.matrix(n));
    const Operator b(rnd.matrix(n));
    const Eigen::VectorXd sab = singular_values(a * b);
    const Eigen::VectorXd sa = singular_values(a);
    const Eigen::VectorXd sb = singular_values(b);
    double lhs = 0.0;
    double rhs = 0.0;
    for (Index i = 0; i < n; ++i) {
      EXPECT_GE(sab(i), 0.0);
      if (i > 0) EXPECT_LE(sab(i), sab(i - 1));
      lhs += sab(i);
      rhs += sa(i) * sb(i);
      EXPECT_LE(lhs, rhs + 1e-12 * (1.0 + rhs));
    }
  }
}

TEST(TraceInequality, PsdProducts) {
  oracle::Rand rnd(9);
  for (int k = 0; k < 100; ++k) {
    const Index n = 1 + k % 6;
    const Operator a = rnd.psd(n);
    const Operator b = rnd.psd(n);
    const double ab = (a * b).trace().real();
    EXPECT_GE(ab, -1e-12);
    EXPECT_LE(ab, a.trace().real() * b.trace().real() + 1e-12);
  }
}

TEST(Kron, BlockStructure) {
  EXPECT_LT(max_norm(kron(Operator::identity(2), kSz) - Operator::diagonal({1, -1, 1, -1})), 0.0 + 1e-300);
  EXPECT_EQ(max_norm(kron(kSz, Operator::identity(2)) - Operator::diagonal({1, 1, -1, -1})), 0.0);
}

TEST(Kron, MatchesOracleAndTraceIsMultiplicative) {
  oracle::Rand rnd(10);
  for (int k = 0; k < 10; ++k) {
    const Operator a(rnd.matrix(2));
    const Operator b(rnd.matrix(3));
    const Operator ab = kron(a, b);
    EXPECT_EQ(ab.dim(), 6);
    EXPECT_LT(oracle::max_abs_diff(ab, oracle::kron(oracle::from(a), oracle::from(b))), 1e-15);
    EXPECT_LT(std::abs(ab.trace() - a.trace() * b.trace()), 1e-13);
  }
}

TEST(FrobeniusNorm, SimpleCases) {
  EXPECT_EQ(frobenius_norm(Operator::zero(3)), 0.0);
  EXPECT_DOUBLE_EQ(frobenius_norm(Operator::identity(4)), 2.0);
  EXPECT_DOUBLE_EQ(frobenius_norm(kSx), std::sqrt(2.0));
}

TEST(Vectorize, IdentityMap) {
  const Eigen::MatrixXcd m = vectorize_superoperator([](const Operator& x) { return x; }, 2);
  EXPECT_EQ(m, Eigen::MatrixXcd::Identity(4, 4));
}

TEST(Vectorize, SandwichMatchesKronIdentity) {
  const Eigen::MatrixXcd m =
      vectorize_superoperator([](const Operator& x) { return kSz * x * kSz; }, 2);
  EXPECT_LT((m - kron(kSz.matrix().transpose().eval(), kSz.matrix())).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((m - kron(kSz, kSz).matrix()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Vectorize, DephasingSpectrum) {
  const SystemModel model(ControlSignal{ControlProfile::zero(), Operator::zero(2)}, kSz);
  const Eigen::MatrixXcd m = vectorize_superoperator(
      [&](const Operator& x) { return lindblad_adjoint(model, 0.0, x); }, 2);
  Eigen::VectorXcd ev = general_eigenvalues(m);
  std::vector<double> re;
  for (Index i = 0; i < ev.size(); ++i) {
    EXPECT_LT(std::abs(ev(i).imag()), 1e-12);
    re.push_back(ev(i).real());
  }
  std::sort(re.begin(), re.end());
  EXPECT_NEAR(re[0], -2.0, 1e-12);
  EXPECT_NEAR(re[1], -2.0, 1e-12);
  EXPECT_NEAR(re[2], 0.0, 1e-12);
  EXPECT_NEAR(re[3], 0.0, 1e-12);
}

TEST(Vectorize, AgreesWithDirectApplication) {
  oracle::Rand rnd(11);
  const Index n = 3;
  const Operator a(rnd.matrix(n));
  const Operator b(rnd.matrix(n));
  const LinearMap f = [&](const Operator& x) { return a * x * b - x * a; };
  const Eigen::MatrixXcd m = vectorize_superoperator(f, n);
  for (int k = 0; k < 50; ++k) {
    const Operator x(rnd.matrix(n));
    EXPECT_LE(max_norm(unvec(m * vec(x), n) - f(x)), 1e-10);
  }
}

TEST(Vectorize, ColumnStackingConvention) {
  Eigen::MatrixXcd m(2, 2);
  m << 1.0, 2.0, 3.0, 4.0;
  const Eigen::VectorXcd v = vec(Operator(m));
  EXPECT_EQ(v(0), Complex(1.0));
  EXPECT_EQ(v(1), Complex(3.0));
  EXPECT_EQ(v(2), Complex(2.0));
  EXPECT_EQ(v(3), Complex(4.0));
}

TEST(OperatorType, HermitianHintOnlyFromConstruction) {
  EXPECT_TRUE(Operator::identity(3).hermitian_hint().value_or(false));
  EXPECT_TRUE(Operator::diagonal({1.0, 2.0}).hermitian_hint().value_or(false));
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2, 2);
  m(0, 1) = 1.0;
  const Operator op(m);
  EXPECT_FALSE(op.hermitian_hint().has_value());
  EXPECT_FALSE(op.is_hermitian());
  EXPECT_FALSE(op.hermitian_hint().has_value());
  EXPECT_TRUE(op.hermitian_part().is_hermitian());
  EXPECT_THROW(Operator::hermitian(m), UsageError);
  EXPECT_THROW(Operator(Eigen::MatrixXcd::Zero(2, 3)), UsageError);
}

}  // namespace
}  // namespace qpf
