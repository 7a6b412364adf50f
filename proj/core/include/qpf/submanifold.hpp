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

#pragma once

#include <vector>

#include <Eigen/Dense>

#include "qpf/operator.hpp"
#include "qpf/system_model.hpp"

namespace qpf {

/// Exponential family of unnormalized states
///   rho_bar(theta) = exp(sum_i theta_i A_i / 2) rho0 exp(sum_i theta_i A_i / 2)
/// generated by mutually commuting Hermitian operators A_1..A_m.
///
/// The shared eigenbasis U of the generators is computed once, so every
/// exponential along a trajectory reduces to a diagonal scaling in that basis.
class Submanifold {
 public:
  /// Validates commutation (1e-9), that the anchor is a density matrix and
  /// that the tangent vectors at theta = 0 are linearly independent.
  Submanifold(std::vector<Operator> generators, Operator anchor);

  Index size() const noexcept { return static_cast<Index>(generators_.size()); }
  Index dim() const noexcept { return anchor_.dim(); }
  const std::vector<Operator>& generators() const noexcept { return generators_; }
  const Operator& anchor() const noexcept { return anchor_; }

  /// Unitary whose columns diagonalize every generator.
  const Eigen::MatrixXcd& shared_basis() const noexcept { return basis_; }
  /// Column i holds the eigenvalues of A_i in the shared basis.
  const Eigen::MatrixXd& generator_spectra() const noexcept { return spectra_; }

  /// Eigenvalues lambda_i of the coupling operator when the generators are its
  /// spectral projectors (see default_submanifold); empty otherwise.
  const Eigen::VectorXd& coupling_spectrum() const noexcept { return coupling_spectrum_; }
  bool is_projector_family() const noexcept { return coupling_spectrum_.size() > 0; }

  /// exp(sum_i theta_i A_i / 2).
  Operator half_exponential(const Eigen::VectorXd& theta) const;

 private:
  friend Submanifold default_submanifold(const SystemModel& model, const Operator& rho0);

  std::vector<Operator> generators_;
  Operator anchor_;
  Eigen::MatrixXcd basis_;
  Eigen::MatrixXd spectra_;
  Eigen::VectorXd coupling_spectrum_;
};

/// Generators A_i = P_{L_i}, the spectral projectors of a Hermitian coupling
/// operator, with m equal to the number of distinct nonzero eigenvalues.
Submanifold default_submanifold(const SystemModel& model, const Operator& rho0);

/// rho_bar(theta).
Operator manifold_state(const Submanifold& sub, const Eigen::VectorXd& theta);

/// Tangent basis d rho_bar / d theta_i = (A_i rho_bar + rho_bar A_i) / 2.
std::vector<Operator> natural_basis(const Submanifold& sub, const Eigen::VectorXd& theta);

inline constexpr double kMaxMetricCondition = 1e12;

/// Quantum Fisher metric g_ij = Tr(rho_bar A_i A_j). Throws NearSingularMetric
/// when the condition number exceeds kMaxMetricCondition.
Eigen::MatrixXd fisher_matrix(const Submanifold& sub, const Eigen::VectorXd& theta);

/// Orthogonal projection onto the tangent space at theta:
///   Pi(v) = sum_ij g^{ij} Tr(v A_j) d_i
Operator projection_op(const Submanifold& sub, const Eigen::VectorXd& theta, const Operator& v);

/// Drift and noise coefficient vectors of the projected coordinate SDE.
struct XiGamma {
  Eigen::VectorXd xi;
  Eigen::VectorXd gamma;
};

XiGamma xi_gamma(const Submanifold& sub, const SystemModel& model, double t,
                 const Eigen::VectorXd& theta);

/// Solves G x = b with a Cholesky factorization, guarding the condition number.
Eigen::VectorXd solve_metric(const Eigen::MatrixXd& g, const Eigen::VectorXd& b);

}  // namespace qpf
