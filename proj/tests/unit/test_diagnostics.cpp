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

#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qpf/diagnostics.hpp"
#include "qpf/errors.hpp"
#include "qpf/linalg.hpp"
#include "qpf/stability.hpp"
#include "qpf/submanifold.hpp"
#include "qpf/system_model.hpp"

namespace qpf {
namespace {

const Operator kSz = pauli(Axis::kZ);
const Operator kRho0 = Operator::diagonal({0.375, 0.375, 0.125, 0.125});

Eigen::VectorXd random_theta(oracle::Rand& rnd, Index m, double scale) {
  Eigen::VectorXd t(m);
  for (Index i = 0; i < m; ++i) t(i) = scale * rnd.symmetric();
  return t;
}

// Residuals.

TEST(Residuals, PredictionVanishesWithoutHamiltonian) {
  const SystemModel m = build_spin_model(2, 1.0, ControlProfile::zero(), Axis::kY);
  const Submanifold sub = default_submanifold(m, kRho0);
  Eigen::VectorXd theta(2);
  theta << 0.4, -1.2;
  EXPECT_EQ(frobenius_norm(prediction_residual(sub, m, 0.3, theta)), 0.0);
}

TEST(Residuals, InitialPredictionOperator) {
  const SystemModel zero = build_spin_model(2, 1.0, ControlProfile::zero(), Axis::kY);
  EXPECT_EQ(max_norm(initial_prediction_operator(zero, kRho0)), 0.0);
  const SystemModel z = build_spin_model(2, 1.0, ControlProfile::constant(1.0), Axis::kZ);
  EXPECT_EQ(max_norm(initial_prediction_operator(z, kRho0)), 0.0);
  oracle::Rand rnd(1);
  const Operator rho = rnd.density(4);
  const Operator x0 = initial_prediction_operator(z, rho);
  EXPECT_LT(max_norm(x0 - commutator(z.hamiltonian(0.0), rho) * Complex(0.0, -1.0)), 1e-15);
  EXPECT_TRUE(x0.is_hermitian());
}

TEST(Residuals, CorrectionsVanishForDefaultFamily) {
  oracle::Rand rnd(2);
  for (Axis axis : {Axis::kY, Axis::kZ}) {
    const SystemModel m = build_spin_model(2, 1.0, ControlProfile::exp_decay(5, 5), axis);
    const Submanifold sub = default_submanifold(m, rnd.density(4));
    for (int k = 0; k < 20; ++k) {
      const CorrectionResiduals c = correction_residuals(sub, m, random_theta(rnd, 2, 3.0));
      EXPECT_LE(frobenius_norm(c.c1), 1e-8);
      EXPECT_LE(frobenius_norm(c.c2), 1e-8);
    }
  }
}

TEST(Residuals, CorrectionsVanishWithoutCoupling) {
  oracle::Rand rnd(3);
  const SystemModel m(ControlSignal{ControlProfile::constant(1.0), rnd.hermitian(3)}, Operator::zero(3));
  const Submanifold sub({Operator::identity(3)}, rnd.density(3));
  const CorrectionResiduals c = correction_residuals(sub, m, Eigen::VectorXd::Constant(1, 0.3));
  EXPECT_EQ(frobenius_norm(c.c1), 0.0);
  EXPECT_EQ(frobenius_norm(c.c2), 0.0);
}

TEST(Residuals, GenericFamilyHasNonzeroCorrection) {
  const SystemModel m(ControlSignal{ControlProfile::zero(), Operator::zero(2)}, kSz);
  const Submanifold sub({Operator::identity(2)}, Operator::diagonal({0.75, 0.25}));
  const CorrectionResiduals c = correction_residuals(sub, m, Eigen::VectorXd::Zero(1));
  EXPECT_GT(frobenius_norm(c.c2), 0.1);
}

TEST(Residuals, ReportAtOriginEqualsInitialOperatorInCommutingCase) {
  const SystemModel m = build_spin_model(2, 1.0, ControlProfile::constant(1.0), Axis::kZ);
  oracle::Rand rnd(4);
  const Operator rho0 = rnd.density(4);
  const Submanifold sub = default_submanifold(m, rho0);
  const ResidualReport r = residual_report(sub, m, 0.0, Eigen::VectorXd::Zero(2));
  const Operator x0 = initial_prediction_operator(m, rho0);
  EXPECT_GT(frobenius_norm(x0), 1e-3);
  EXPECT_NEAR(r.prediction_norm, frobenius_norm(x0), 1e-14);
}

// Statistical estimators.

TEST(MeanAccumulator, MatchesTwoPassFormulas) {
  oracle::Rand rnd(5);
  std::vector<double> xs;
  MeanAccumulator acc;
  for (int i = 0; i < 1000; ++i) {
    xs.push_back(3.0 + rnd.symmetric());
    acc.add(xs.back());
  }
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(xs.size() - 1);
  EXPECT_EQ(acc.count(), 1000);
  EXPECT_NEAR(acc.mean(), mean, 1e-13);
  EXPECT_NEAR(acc.variance(), var, 1e-13);
  EXPECT_NEAR(acc.stderr_of_mean(), std::sqrt(var / 1000.0), 1e-14);
}

TEST(MeanAccumulator, MergeIsAssociative) {
  oracle::Rand rnd(6);
  MeanAccumulator all;
  MeanAccumulator parts[4];
  for (int i = 0; i < 400; ++i) {
    const double x = rnd.symmetric() * 10.0;
    all.add(x);
    parts[i % 4].add(x);
  }
  MeanAccumulator left = parts[0];
  left.merge(parts[1]);
  MeanAccumulator right = parts[2];
  right.merge(parts[3]);
  left.merge(right);
  EXPECT_EQ(left.count(), all.count());
  EXPECT_NEAR(left.mean(), all.mean(), 1e-12);
  EXPECT_NEAR(left.variance(), all.variance(), 1e-10);
  MeanAccumulator empty;
  empty.merge(all);
  EXPECT_EQ(empty.mean(), all.mean());
  all.merge(MeanAccumulator{});
  EXPECT_EQ(all.count(), 400);
}

TEST(MeanAccumulator, DegenerateCounts) {
  MeanAccumulator a;
  EXPECT_EQ(a.stderr_of_mean(), 0.0);
  a.add(2.0);
  EXPECT_EQ(a.mean(), 2.0);
  EXPECT_EQ(a.variance(), 0.0);
}

TEST(ResidualBound, ZeroInitialOperator) {
  const ResidualBoundEstimate e = residual_bound_estimate({{0.0, 0.0}, {0.0, 0.0}}, Operator::zero(2));
  EXPECT_EQ(e.bound, 0.0);
  EXPECT_TRUE(e.holds());
}

TEST(ResidualBound, DetectsViolation) {
  const Operator x0 = Operator::diagonal({0.5, -0.5});
  EXPECT_NEAR(residual_bound_estimate({{0.1}}, x0).bound, std::sqrt(0.5), 1e-15);
  EXPECT_TRUE(residual_bound_estimate({{0.1}, {0.2}}, x0).holds());
  EXPECT_FALSE(residual_bound_estimate({{2.0}, {2.0}}, x0).holds());
}

TEST(ResidualBound, RejectsEmptyOrRagged) {
  EXPECT_THROW(residual_bound_estimate({}, Operator::zero(2)), UsageError);
  EXPECT_THROW(residual_bound_estimate({{1.0}, {1.0, 2.0}}, Operator::zero(2)), UsageError);
}

// Pointer decomposition and metrics.

TEST(PointerDecompose, Examples) {
  for (Index p = 0; p < 3; ++p) {
    const PointerDecomposition d = pointer_decompose(Operator::identity(3), p);
    EXPECT_EQ(d.x_s, Complex(1.0));
    EXPECT_EQ(d.x_r, Eigen::MatrixXcd::Identity(2, 2));
    EXPECT_EQ(d.x_p.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(d.x_q.cwiseAbs().maxCoeff(), 0.0);
  }
  const PointerDecomposition d = pointer_decompose(Operator::diagonal({1, 2, 3, 4}), 0);
  EXPECT_EQ(d.x_s, Complex(1.0));
  EXPECT_EQ(Operator(d.x_r).real_diagonal(), Eigen::Vector3d(2, 3, 4));
  EXPECT_THROW(pointer_decompose(Operator::identity(2), 2), UsageError);
}

TEST(PointerDecompose, ReassembleAndProjectors) {
  oracle::Rand rnd(7);
  for (Index p = 0; p < 4; ++p) {
    const Operator x(rnd.matrix(4));
    const PointerDecomposition d = pointer_decompose(x, p);
    EXPECT_EQ(max_norm(d.reassemble() - x), 0.0);
    EXPECT_EQ(max_norm(d.p_s + d.p_r - Operator::identity(4)), 0.0);
    EXPECT_EQ(d.p_s(p, p), Complex(1.0));
    EXPECT_EQ(d.x_p(0), x(p, p == 0 ? 1 : 0));
  }
}

TEST(PointerMetrics, Examples) {
  const Operator pure = Operator::diagonal({1, 0, 0});
  EXPECT_EQ(pointer_distance(pure, 0), 0.0);
  EXPECT_EQ(off_pointer_weight(pure, 0), 0.0);
  oracle::Rand rnd(8);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(3, 3);
  m.bottomRightCorner(2, 2) = rnd.density(2).matrix();
  const Operator r(m);
  EXPECT_DOUBLE_EQ(pointer_distance(r, 0), r.matrix().cwiseAbs().maxCoeff());
  EXPECT_NEAR(off_pointer_weight(r, 0), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(off_pointer_weight(kRho0, 0), 0.625);
}

TEST(FrobeniusError, Examples) {
  oracle::Rand rnd(9);
  const Operator a = rnd.density(3);
  const Operator b = rnd.density(3);
  EXPECT_EQ(frobenius_error(a, a), 0.0);
  EXPECT_DOUBLE_EQ(frobenius_error(Operator::diagonal({1, 0}), Operator::diagonal({0, 1})), std::sqrt(2.0));
  EXPECT_EQ(frobenius_error(a, b), frobenius_error(b, a));
  EXPECT_THROW(frobenius_error(a, Operator::identity(2)), UsageError);
}

// Stability machinery.

TEST(SpectralAbscissa, QubitDephasingIsZero) {
  const SystemModel m(ControlSignal{ControlProfile::zero(), Operator::zero(2)}, kSz);
  const ReducedGenerator g = reduced_generator(m, 0);
  EXPECT_EQ(g.dim, 1);
  EXPECT_LT(g.matrix.cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(spectral_abscissa(m, 0), 0.0, 1e-15);
}

TEST(SpectralAbscissa, QutritDephasingSpectrum) {
  const SystemModel m(ControlSignal{ControlProfile::zero(), Operator::zero(3)},
                      Operator::diagonal({0, 1, -1}));
  const ReducedGenerator g = reduced_generator(m, 0);
  std::vector<double> re;
  const Eigen::VectorXcd ev = general_eigenvalues(g.matrix);
  for (Index i = 0; i < ev.size(); ++i) re.push_back(ev(i).real());
  std::sort(re.begin(), re.end());
  ASSERT_EQ(re.size(), 4u);
  EXPECT_NEAR(re[0], -2.0, 1e-12);
  EXPECT_NEAR(re[1], -2.0, 1e-12);
  EXPECT_NEAR(re[2], 0.0, 1e-12);
  EXPECT_NEAR(re[3], 0.0, 1e-12);
  EXPECT_NEAR(spectral_abscissa(g), 0.0, 1e-12);
}

TEST(SpectralAbscissa, MatchesBruteForceOracle) {
  oracle::Rand rnd(10);
  for (int k = 0; k < 20; ++k) {
    const Index n = 2 + k % 3;
    const Operator h = rnd.hermitian(n);
    const Operator l(rnd.matrix(n));
    const SystemModel m(ControlSignal{ControlProfile::constant(1.0), h}, l);
    const Index p = k % n;
    const PointerDecomposition hd = pointer_decompose(h, p);
    const PointerDecomposition ld = pointer_decompose(l, p);
    int size = 0;
    const auto om = oracle::reduced_generator(Operator(hd.x_r), Operator(ld.x_r), size);
    const ReducedGenerator g = reduced_generator(m, p);
    ASSERT_EQ(g.matrix.rows(), size);
    for (int r = 0; r < size; ++r) {
      for (int c = 0; c < size; ++c) {
        ASSERT_LT(std::abs(g.matrix(r, c) - om[static_cast<std::size_t>(r * size + c)]), 1e-13);
      }
    }
    EXPECT_NEAR(spectral_abscissa(m, p), oracle::abscissa(om, size), 1e-8);
  }
}

TEST(SpectralAbscissa, ArbitraryGeneratorsMatchOracle) {
  oracle::Rand rnd(11);
  for (int k = 0; k < 20; ++k) {
    const Index n = 1 + k % 3;
    const Eigen::MatrixXcd a = rnd.matrix(n * n);
    const ReducedGenerator g{n, a, 0};
    std::vector<oracle::C> om(static_cast<std::size_t>(n * n * n * n));
    for (Index r = 0; r < n * n; ++r) {
      for (Index c = 0; c < n * n; ++c) om[static_cast<std::size_t>(r * n * n + c)] = a(r, c);
    }
    EXPECT_NEAR(spectral_abscissa(g), oracle::abscissa(om, static_cast<int>(n * n)), 1e-8);
  }
}

TEST(SpectralAbscissa, UnitaryInvariance) {
  oracle::Rand rnd(12);
  const Operator h = rnd.hermitian(3);
  const Operator l(rnd.matrix(3));
  const double base = spectral_abscissa(reduced_generator(h, l));
  for (int k = 0; k < 10; ++k) {
    const Operator u = rnd.unitary(3);
    const Operator hu = (u * h * u.adjoint()).hermitian_part();
    const Operator lu = u * l * u.adjoint();
    EXPECT_NEAR(spectral_abscissa(reduced_generator(hu, lu)), base, 1e-9);
  }
}

TEST(ReducedGenerator, ApplyMatchesDirectFormula) {
  oracle::Rand rnd(13);
  const Operator h = rnd.hermitian(3);
  const Operator l(rnd.matrix(3));
  const ReducedGenerator g = reduced_generator(h, l);
  const Operator x(rnd.matrix(3));
  const Operator ldl = l.adjoint() * l;
  const Operator expected = commutator(h, x) * Complex(0.0, 1.0) + l.adjoint() * x * l -
                            (ldl * x + x * ldl) * 0.5;
  EXPECT_LT(max_norm(g.apply(x) - expected), 1e-13);
}

TEST(Lyapunov, InfeasibleWithoutGap) {
  const SystemModel m = build_spin_model(2, 1.0, ControlProfile::constant(1.0), Axis::kZ);
  EXPECT_THROW(lyapunov_KR(m, 0), InfeasibleCertificate);
  const ReducedGenerator g{2, -Eigen::MatrixXcd::Identity(4, 4), 0};
  EXPECT_THROW(lyapunov_KR(g, 1.0), InfeasibleCertificate);
  EXPECT_THROW(lyapunov_KR(g, 0.0), InfeasibleCertificate);
}

TEST(Lyapunov, SyntheticUniformDecay) {
  const double gamma = 3.0;
  const ReducedGenerator g{3, -gamma * Eigen::MatrixXcd::Identity(9, 9), 1};
  const StabilityCertificate c = lyapunov_KR(g);
  EXPECT_NEAR(c.delta0, gamma, 1e-12);
  EXPECT_NEAR(c.epsilon, gamma / 2, 1e-12);
  EXPECT_LT(max_norm(c.k_r - Operator::identity(3)), 1e-12);
  EXPECT_NEAR(c.c1, 3.0, 1e-12);
  EXPECT_NEAR(c.c2, 3.0 / (gamma / 2), 1e-12);
  EXPECT_LE(c.slack, 1e-8);
  EXPECT_NEAR(c.slack, -gamma / 2, 1e-12);
  EXPECT_EQ(c.pointer_index, 1);
}

TEST(Lyapunov, SyntheticNonNormalGenerator) {
  oracle::Rand rnd(14);
  int certified = 0;
  for (int k = 0; k < 10; ++k) {
    const Index n = 2 + k % 2;
    // Shift a random superoperator so that its spectral abscissa is 0.5.
    Eigen::MatrixXcd a = rnd.matrix(n * n) * 0.3;
    const double top = general_eigenvalues(a).real().maxCoeff();
    a -= (top + 0.5) * Eigen::MatrixXcd::Identity(n * n, n * n);
    // Keep the map Hermiticity-preserving: average with its conjugate action.
    const ReducedGenerator raw{n, a, 0};
    const LinearMap sym = [&](const Operator& x) {
      return ((raw.apply(x) + raw.apply(x.adjoint()).adjoint()) * 0.5);
    };
    const ReducedGenerator g{n, vectorize_superoperator(sym, n), 0};
    const double d0 = spectral_abscissa(g);
    ASSERT_GT(d0, 0.0);
    try {
      const StabilityCertificate c = lyapunov_KR(g);
      EXPECT_LE(c.slack, 1e-8);
      EXPECT_NEAR(min_eigenvalue(c.k_r), 1.0, 1e-9);
      const Operator lhs = g.apply(c.k_r) + c.k_r * (c.delta0 - c.epsilon);
      EXPECT_LE(herm_eig(lhs.hermitian_part()).eigenvalues.maxCoeff(), 1e-8);
      ++certified;
    } catch (const InfeasibleCertificate&) {
      // The resolvent solution need not be positive for a non-normal map.
    }
  }
  EXPECT_GT(certified, 0);
}

TEST(PointerWeightBound, Examples) {
  const ReducedGenerator g{3, -2.0 * Eigen::MatrixXcd::Identity(9, 9), 0};
  const StabilityCertificate c = lyapunov_KR(g);
  oracle::Rand rnd(15);
  const Operator rho0 = rnd.density(4);
  const double w = off_pointer_weight(rho0, 0);
  const Operator x0 = rnd.hermitian(4) * 0.1;
  const double s1 = singular_values(x0)(0);
  EXPECT_NEAR(pointer_weight_bound(0.0, rho0, c, x0), c.c1 * w, 1e-12);
  EXPECT_GE(pointer_weight_bound(0.0, rho0, c, x0), w);
  EXPECT_NEAR(pointer_weight_bound(0.7, rho0, c, Operator::zero(4)), c.c1 * w * std::exp(-0.7), 1e-12);
  EXPECT_NEAR(pointer_weight_bound(1e3, rho0, c, x0), c.c1 * s1 / 1.0, 1e-9);
}

}  // namespace
}  // namespace qpf
