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

#include "qpf/submanifold.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "qpf/errors.hpp"
#include "qpf/linalg.hpp"

namespace qpf {

namespace {

constexpr double kCommuteTol = 1e-9;
constexpr double kGramTol = 1e-10;

double metric_condition(const Eigen::MatrixXd& g) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (g + g.transpose()),
                                                    Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

}  // namespace

Submanifold::Submanifold(std::vector<Operator> generators, Operator anchor)
    : generators_(std::move(generators)), anchor_(std::move(anchor)) {
  const Index n = anchor_.dim();
  if (generators_.empty()) throw UsageError("submanifold needs at least one generator");
  for (std::size_t i = 0; i < generators_.size(); ++i) {
    if (generators_[i].dim() != n) throw UsageError("submanifold generator dimension mismatch");
    if (!generators_[i].is_hermitian()) {
      throw UsageError("submanifold generator " + std::to_string(i + 1) + " is not Hermitian");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (max_norm(commutator(generators_[i], generators_[j])) > kCommuteTol) {
        throw UsageError("submanifold generators " + std::to_string(j + 1) + " and " +
                         std::to_string(i + 1) + " do not commute");
      }
    }
  }
  if (!anchor_.is_hermitian()) throw UsageError("submanifold anchor is not Hermitian");
  if (std::abs(anchor_.trace() - 1.0) > 1e-9) throw UsageError("submanifold anchor trace != 1");
  if (min_eigenvalue(anchor_) < -1e-10) throw UsageError("submanifold anchor is not PSD");

  // A generic real combination of commuting Hermitian generators has the
  // joint eigenbasis as its eigenbasis.
  Operator mix = Operator::zero(n);
  for (std::size_t i = 0; i < generators_.size(); ++i) {
    const double w = 1.0 + std::numbers::sqrt2 * static_cast<double>(i + 1) +
                     std::numbers::pi * static_cast<double>((i + 1) * (i + 1)) * 1e-3;
    mix += generators_[i] * w;
  }
  basis_ = herm_eig(mix.hermitian_part()).eigenvectors;
  spectra_.resize(n, size());
  for (Index i = 0; i < size(); ++i) {
    const auto& a = generators_[static_cast<std::size_t>(i)].matrix();
    const Eigen::MatrixXcd d = basis_.adjoint() * a * basis_;
    Eigen::MatrixXcd off = d;
    off.diagonal().setZero();
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    if (off.cwiseAbs().maxCoeff() > 1e-8 * scale) {
      throw UsageError("submanifold generators could not be diagonalized simultaneously");
    }
    spectra_.col(i) = d.diagonal().real();
  }

  // Tangent vectors at theta = 0 must be linearly independent.
  const Eigen::VectorXd origin = Eigen::VectorXd::Zero(size());
  const std::vector<Operator> tangent = natural_basis(*this, origin);
  Eigen::MatrixXd gram(size(), size());
  for (Index i = 0; i < size(); ++i) {
    for (Index j = 0; j < size(); ++j) {
      gram(i, j) = (tangent[static_cast<std::size_t>(i)].matrix().adjoint() *
                    tangent[static_cast<std::size_t>(j)].matrix())
                       .trace()
                       .real();
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() <= kGramTol) {
    throw UsageError("submanifold tangent vectors are linearly dependent at theta = 0");
  }
}

Operator Submanifold::half_exponential(const Eigen::VectorXd& theta) const {
  if (theta.size() != size()) throw UsageError("theta has the wrong length");
  const Eigen::VectorXd exponent = 0.5 * (spectra_ * theta);
  const Eigen::VectorXd scale = exponent.array().exp();
  Eigen::MatrixXcd e = basis_ * scale.asDiagonal() * basis_.adjoint();
  return Operator(std::move(e)).hermitian_part();
}

Submanifold default_submanifold(const SystemModel& model, const Operator& rho0) {
  if (!model.coupling_hermitian()) {
    throw UsageError("default_submanifold: coupling operator is not Hermitian");
  }
  SpectralDecomposition sd = spectral_projectors(model.coupling());
  if (sd.size() == 0) {
    throw UsageError("default_submanifold: coupling operator has no nonzero eigenvalue");
  }
  Submanifold sub(std::move(sd.projectors), rho0);
  sub.coupling_spectrum_ =
      Eigen::Map<const Eigen::VectorXd>(sd.eigenvalues.data(), static_cast<Index>(sd.size()));
  return sub;
}

Operator manifold_state(const Submanifold& sub, const Eigen::VectorXd& theta) {
  const Operator e = sub.half_exponential(theta);
  Eigen::MatrixXcd rho = e.matrix() * sub.anchor().matrix() * e.matrix();
  return Operator(std::move(rho)).hermitian_part();
}

std::vector<Operator> natural_basis(const Submanifold& sub, const Eigen::VectorXd& theta) {
  const Operator rho = manifold_state(sub, theta);
  std::vector<Operator> out;
  out.reserve(sub.generators().size());
  for (const auto& a : sub.generators()) {
    Eigen::MatrixXcd d = 0.5 * (a.matrix() * rho.matrix() + rho.matrix() * a.matrix());
    out.push_back(Operator(std::move(d)).hermitian_part());
  }
  return out;
}

Eigen::MatrixXd fisher_matrix(const Submanifold& sub, const Eigen::VectorXd& theta) {
  const Operator rho = manifold_state(sub, theta);
  const Index m = sub.size();
  Eigen::MatrixXd g(m, m);
  for (Index i = 0; i < m; ++i) {
    const Eigen::MatrixXcd rho_a = rho.matrix() * sub.generators()[static_cast<std::size_t>(i)].matrix();
    for (Index j = 0; j < m; ++j) {
      g(i, j) = (rho_a * sub.generators()[static_cast<std::size_t>(j)].matrix()).trace().real();
    }
  }
  const double cond = metric_condition(g);
  if (cond > kMaxMetricCondition) throw NearSingularMetric(cond);
  return g;
}

Eigen::VectorXd solve_metric(const Eigen::MatrixXd& g, const Eigen::VectorXd& b) {
  const double cond = metric_condition(g);
  if (cond > kMaxMetricCondition) throw NearSingularMetric(cond);
  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (g + g.transpose()));
  if (llt.info() != Eigen::Success) throw NearSingularMetric(cond);
  return llt.solve(b);
}

Operator projection_op(const Submanifold& sub, const Eigen::VectorXd& theta, const Operator& v) {
  if (v.dim() != sub.dim()) throw UsageError("projection_op: dimension mismatch");
  if (!v.is_hermitian()) throw UsageError("projection_op: input is not Hermitian");
  const Index m = sub.size();
  Eigen::VectorXd pairing(m);
  for (Index j = 0; j < m; ++j) {
    pairing(j) = (v.matrix() * sub.generators()[static_cast<std::size_t>(j)].matrix()).trace().real();
  }
  const Eigen::VectorXd coeff = solve_metric(fisher_matrix(sub, theta), pairing);
  const std::vector<Operator> tangent = natural_basis(sub, theta);
  Operator out = Operator::zero(sub.dim());
  for (Index i = 0; i < m; ++i) out += tangent[static_cast<std::size_t>(i)] * coeff(i);
  return out;
}

XiGamma xi_gamma(const Submanifold& sub, const SystemModel& model, double t,
                 const Eigen::VectorXd& theta) {
  if (model.dim() != sub.dim()) throw UsageError("xi_gamma: dimension mismatch");
  const Operator rho = manifold_state(sub, theta);
  const Operator h_op = model.hamiltonian(t);
  const auto& h = h_op.matrix();
  const auto& l = model.coupling().matrix();
  const auto& ld = model.coupling_adjoint().matrix();
  const Eigen::MatrixXcd s = l + ld;
  const Complex i(0.0, 1.0);

  XiGamma out{Eigen::VectorXd(sub.size()), Eigen::VectorXd(sub.size())};
  for (Index j = 0; j < sub.size(); ++j) {
    const auto& a = sub.generators()[static_cast<std::size_t>(j)].matrix();
    const Eigen::MatrixXcd drift_obs =
        i * (h * a - a * h) - 0.5 * (a * s * l + ld * s * a);
    const Eigen::MatrixXcd noise_obs = a * l + ld * a;
    out.xi(j) = (rho.matrix() * drift_obs).trace().real();
    out.gamma(j) = (rho.matrix() * noise_obs).trace().real();
  }
  return out;
}

}  // namespace qpf
