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

#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "qpf/operator.hpp"
#include "qpf/submanifold.hpp"
#include "qpf/system_model.hpp"

namespace qpf {

/// Normalized conditional density matrix.
struct FilterState {
  Operator rho;
};

/// Unnormalized information state. The physical state is
/// exp(log_scale) * rho_bar; rescaling keeps rho_bar's trace in range.
struct UnnormalizedState {
  Operator rho_bar;
  double log_scale = 0.0;
  int rescale_events = 0;

  double log_trace() const;
};

/// Coordinates of the projection filter and the time they refer to.
struct ThetaState {
  Eigen::VectorXd theta;
  double t = 0.0;

  static ThetaState origin(Index m) { return {Eigen::VectorXd::Zero(m), 0.0}; }
};

enum class QuantumFilterScheme {
  /// Euler-Maruyama on the Ito equation, then symmetrize and renormalize.
  kEulerMaruyama,
  /// Positivity-preserving update rho' = M rho M^dag / Tr with
  /// M = I + (-iH - L^dag L / 2) dt + L dY + L^2 (dY^2 - dt) / 2.
  kKraus,
};

std::string_view scheme_name(QuantumFilterScheme scheme);
QuantumFilterScheme parse_quantum_scheme(std::string_view name);

/// Values observed before symmetrization and renormalization.
struct QuantumStepReport {
  double trace_before = 1.0;
  double min_eigenvalue_before = 0.0;
};

/// One step of the normalized filter driven by the observation increment dY.
/// Throws StepFailure when the trace falls to 1e-12 or below.
FilterState quantum_filter_step(const SystemModel& model, const FilterState& state, double t,
                                double dt, double dY,
                                QuantumFilterScheme scheme = QuantumFilterScheme::kEulerMaruyama,
                                QuantumStepReport* report = nullptr);

inline constexpr double kMinUnnormalizedTrace = 1e-12;
inline constexpr double kMaxUnnormalizedTrace = 1e12;

/// Euler-Maruyama step of the linear (Ito) unnormalized filter.
UnnormalizedState unnormalized_filter_step(const SystemModel& model,
                                           const UnnormalizedState& state, double t, double dt,
                                           double dY);

/// Heun step of the same filter written in Stratonovich form, with drift
/// -i[H, x] - S_L(x) and noise coefficient L x + x L^dag.
UnnormalizedState unnormalized_filter_step_stratonovich(const SystemModel& model,
                                                        const UnnormalizedState& state, double t,
                                                        double dt, double dY);

FilterState normalize(const Operator& x);
FilterState normalize(const UnnormalizedState& state);

enum class ProjectionScheme { kHeun, kEuler };

/// Vector fields of the coordinate SDE: G^{-1} Xi and G^{-1} Gamma.
struct ThetaVectorField {
  Eigen::VectorXd drift;
  Eigen::VectorXd diffusion;
};

ThetaVectorField projection_vector_field(const Submanifold& sub, const SystemModel& model,
                                         double t, const Eigen::VectorXd& theta);

/// General projection filter step for any commuting generator family.
/// Heun by default, as the equation is a Stratonovich SDE.
ThetaState projection_filter_step_general(const Submanifold& sub, const SystemModel& model,
                                          const ThetaState& state, double dt, double dY,
                                          ProjectionScheme scheme = ProjectionScheme::kHeun);

/// Euler step of the closed-form filter for the projector family of a
/// Hermitian coupling: dtheta_j = Tr(i rho_bar [H, A_j]) / g_jj dt
/// - 2 lambda_j^2 dt + 2 lambda_j dY.
ThetaState projection_filter_step_reduced(const Submanifold& sub, const SystemModel& model,
                                          const ThetaState& state, double dt, double dY);

/// theta += -2 lambda^2 dt + 2 lambda dY. Valid when [H(t), L] = 0.
ThetaState projection_filter_step_commuting(const Submanifold& sub, const ThetaState& state,
                                            double dt, double dY);

/// Precomputed form of projection_filter_step_reduced whose per-step cost
/// depends only on m. With E = sum_k c_k P_k (kernel included, c_0 = 1,
/// c_j = exp(theta_j / 2)), the commutator term is
///   u(t) Re(i sum_kl c_k c_l Tr(P_k rho0 P_l [H0, P_j])).
class ReducedProjectionFilter {
 public:
  ReducedProjectionFilter(const Submanifold& sub, const SystemModel& model);

  Index size() const noexcept { return lambda_.size(); }
  void step(ThetaState& state, double dt, double dY) const;

 private:
  Eigen::VectorXd lambda_;
  Eigen::VectorXd anchor_weight_;
  std::vector<Eigen::MatrixXcd> coupling_terms_;
  ControlProfile profile_;
  bool has_drive_ = false;
};

}  // namespace qpf
