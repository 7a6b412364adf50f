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

#include <optional>

#include <Eigen/Dense>

#include "qpf/operator.hpp"
#include "qpf/system_model.hpp"

namespace qpf {

/// Linear map on operators of the R block, stored in vectorized
/// (column-stacking) form.
struct ReducedGenerator {
  Index dim = 0;
  Eigen::MatrixXcd matrix;
  Index pointer_index = 0;

  Operator apply(const Operator& x) const;
};

/// i[H_R, X] + L_R^dag X L_R - (L_R^dag L_R X + X L_R^dag L_R) / 2, with
/// H_R, L_R the R blocks of H(0) and L.
ReducedGenerator reduced_generator(const SystemModel& model, Index pointer_index);

/// Same map built directly from R-block operators.
ReducedGenerator reduced_generator(const Operator& h_r, const Operator& l_r,
                                   Index pointer_index = 0);

/// min{-Re(lambda) : lambda in Spec(generator)}.
double spectral_abscissa(const ReducedGenerator& generator);
double spectral_abscissa(const SystemModel& model, Index pointer_index);

struct StabilityCertificate {
  Index pointer_index = 0;
  double delta0 = 0.0;
  double epsilon = 0.0;
  Operator k_r;
  /// Tr(K_R) and Tr(K_R) / (delta0 - epsilon).
  double c1 = 0.0;
  double c2 = 0.0;
  /// lambda_max(L(K_R) + (delta0 - epsilon) K_R).
  double slack = 0.0;
};

/// Solves (L + (delta0 - eps) id)(K) = -I, symmetrizes and rescales so that
/// lambda_min(K) = 1. eps defaults to delta0 / 2. Throws
/// InfeasibleCertificate when delta0 <= eps or the resulting K is not a
/// valid certificate.
StabilityCertificate lyapunov_KR(const ReducedGenerator& generator,
                                 std::optional<double> epsilon = std::nullopt);
StabilityCertificate lyapunov_KR(const SystemModel& model, Index pointer_index,
                                 std::optional<double> epsilon = std::nullopt);

/// Upper bound on Tr(P_R rho_bar_theta(t)):
///   (c1 Tr(P_R rho0) - c2 s1(X0)) e^{-(delta0 - eps) t} + c2 s1(X0).
double pointer_weight_bound(double t, const Operator& rho0, const StabilityCertificate& cert,
                            const Operator& x0);

}  // namespace qpf
