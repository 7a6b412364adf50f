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
#include <string_view>
#include <vector>

#include "qpf/operator.hpp"

namespace qpf {

enum class Axis { kX, kY, kZ };

Axis parse_axis(std::string_view name);
std::string_view axis_name(Axis axis);

/// Pauli matrix for a single spin-1/2, basis (|0>, |1>) with |0> the +1
/// eigenstate of sigma_z.
Operator pauli(Axis axis);

/// Scalar time profile u(t) of the control field.
struct ControlProfile {
  enum class Kind { kZero, kConstant, kExpDecay };

  Kind kind = Kind::kZero;
  double amplitude = 0.0;  // includes any per-trajectory random factor
  double rate = 0.0;

  static ControlProfile zero() { return {}; }
  static ControlProfile constant(double amplitude) { return {Kind::kConstant, amplitude, 0.0}; }
  /// u(t) = amplitude * exp(-rate * t)
  static ControlProfile exp_decay(double amplitude, double rate) {
    return {Kind::kExpDecay, amplitude, rate};
  }

  double operator()(double t) const;
};

std::string_view control_kind_name(ControlProfile::Kind kind);
ControlProfile::Kind parse_control_kind(std::string_view name);

/// Time-dependent Hamiltonian H(t) = u(t) * base.
struct ControlSignal {
  ControlProfile profile;
  Operator base;

  Operator at(double t) const;
};

/// Open quantum system with Hamiltonian signal H(t) and one coupling operator L.
class SystemModel {
 public:
  SystemModel(ControlSignal hamiltonian, Operator coupling);

  Index dim() const noexcept { return coupling_.dim(); }
  Operator hamiltonian(double t) const { return hamiltonian_.at(t); }
  const ControlSignal& control() const noexcept { return hamiltonian_; }
  const Operator& coupling() const noexcept { return coupling_; }
  const Operator& coupling_adjoint() const noexcept { return coupling_adjoint_; }
  /// L = L^dagger within kHermitianTol. Required by the reduced projection
  /// filters and the stability diagnostics.
  bool coupling_hermitian() const noexcept { return coupling_hermitian_; }

 private:
  ControlSignal hamiltonian_;
  Operator coupling_;
  Operator coupling_adjoint_;
  bool coupling_hermitian_ = false;
};

/// Heisenberg-picture generator i[H,X] + L^dag X L - (L^dag L X + X L^dag L)/2.
Operator lindblad_generator(const SystemModel& model, double t, const Operator& x);

/// Schroedinger-picture generator -i[H,X] + L X L^dag - (L^dag L X + X L^dag L)/2.
Operator lindblad_adjoint(const SystemModel& model, double t, const Operator& x);

/// L X + X L^dag - X Tr(X (L + L^dag)).
Operator innovation_gain(const SystemModel& model, const Operator& x);

/// ((L + L^dag) L X + X L^dag (L + L^dag)) / 2, the Ito-to-Stratonovich drift
/// correction of the unnormalized filter.
Operator stratonovich_drift(const SystemModel& model, const Operator& x);

/// Nonzero part of the spectrum of a Hermitian operator, one projector per
/// distinct eigenvalue, ordered by descending eigenvalue.
struct SpectralDecomposition {
  std::vector<double> eigenvalues;
  std::vector<Operator> projectors;
  /// Projector onto the kernel, I - sum_i P_i.
  Operator kernel;

  std::size_t size() const noexcept { return eigenvalues.size(); }
};

/// Clusters eigenvalues that lie within `zero_tol` of each other and drops
/// those with |lambda| <= zero_tol. Default zero_tol is 1e-8 * max|lambda|.
SpectralDecomposition spectral_projectors(const Operator& l,
                                          std::optional<double> zero_tol = std::nullopt);

inline constexpr int kMaxAtoms = 8;

/// J_axis = sum_k sigma_axis^(k) / 2 on N spins, ordered product basis
/// |q1 q2 ... qN> with q1 the most significant bit.
Operator collective_spin(int n_atoms, Axis axis);

/// L = sqrt(mu) J_z, H(t) = u(t) J_axis with axis in {y, z}.
SystemModel build_spin_model(int n_atoms, double mu, ControlProfile control, Axis control_axis);

/// [H_base, L] == 0 within `tol`; u(t) is scalar, so this holds for all t.
bool hamiltonian_commutes_with_coupling(const SystemModel& model, double tol = 1e-9);

}  // namespace qpf
