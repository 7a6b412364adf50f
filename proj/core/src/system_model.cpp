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

#include "qpf/system_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qpf/errors.hpp"
#include "qpf/linalg.hpp"

namespace qpf {

Axis parse_axis(std::string_view name) {
  if (name == "x") return Axis::kX;
  if (name == "y") return Axis::kY;
  if (name == "z") return Axis::kZ;
  throw UsageError("unknown axis '" + std::string(name) + "' (expected x, y or z)");
}

std::string_view axis_name(Axis axis) {
  switch (axis) {
    case Axis::kX: return "x";
    case Axis::kY: return "y";
    case Axis::kZ: return "z";
  }
  return "?";
}

Operator pauli(Axis axis) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2, 2);
  const Complex i(0.0, 1.0);
  switch (axis) {
    case Axis::kX: m(0, 1) = 1.0; m(1, 0) = 1.0; break;
    case Axis::kY: m(0, 1) = -i; m(1, 0) = i; break;
    case Axis::kZ: m(0, 0) = 1.0; m(1, 1) = -1.0; break;
  }
  return Operator::hermitian(std::move(m));
}

double ControlProfile::operator()(double t) const {
  switch (kind) {
    case Kind::kZero: return 0.0;
    case Kind::kConstant: return amplitude;
    case Kind::kExpDecay: return amplitude * std::exp(-rate * t);
  }
  return 0.0;
}

std::string_view control_kind_name(ControlProfile::Kind kind) {
  switch (kind) {
    case ControlProfile::Kind::kZero: return "zero";
    case ControlProfile::Kind::kConstant: return "constant";
    case ControlProfile::Kind::kExpDecay: return "exp_decay";
  }
  return "?";
}

ControlProfile::Kind parse_control_kind(std::string_view name) {
  if (name == "zero") return ControlProfile::Kind::kZero;
  if (name == "constant") return ControlProfile::Kind::kConstant;
  if (name == "exp_decay") return ControlProfile::Kind::kExpDecay;
  throw UsageError("unknown control kind '" + std::string(name) +
                   "' (expected zero, constant or exp_decay)");
}

Operator ControlSignal::at(double t) const {
  const double u = profile(t);
  if (u == 0.0) return Operator::zero(base.dim());
  return base * u;
}

SystemModel::SystemModel(ControlSignal hamiltonian, Operator coupling)
    : hamiltonian_(std::move(hamiltonian)),
      coupling_(std::move(coupling)),
      coupling_adjoint_(coupling_.adjoint()) {
  if (coupling_.dim() < 1) throw UsageError("system model needs a positive dimension");
  if (hamiltonian_.base.dim() != coupling_.dim()) {
    throw UsageError("Hamiltonian and coupling operator have different dimensions");
  }
  if (!hamiltonian_.base.is_hermitian()) {
    throw UsageError("Hamiltonian base operator must be Hermitian");
  }
  coupling_hermitian_ = coupling_.is_hermitian();
}

namespace {

void require_dim(const SystemModel& model, const Operator& x, const char* what) {
  if (x.dim() != model.dim()) {
    throw UsageError(std::string(what) + ": operator dimension " + std::to_string(x.dim()) +
                     " does not match model dimension " + std::to_string(model.dim()));
  }
}

}  // namespace

Operator lindblad_generator(const SystemModel& model, double t, const Operator& x) {
  require_dim(model, x, "lindblad_generator");
  const Operator h_op = model.hamiltonian(t);
  const auto& h = h_op.matrix();
  const auto& l = model.coupling().matrix();
  const auto& ld = model.coupling_adjoint().matrix();
  const auto& xm = x.matrix();
  const Eigen::MatrixXcd ldl = ld * l;
  const Complex i(0.0, 1.0);
  Eigen::MatrixXcd out = i * (h * xm - xm * h) + ld * xm * l - 0.5 * (ldl * xm + xm * ldl);
  return Operator(std::move(out));
}

Operator lindblad_adjoint(const SystemModel& model, double t, const Operator& x) {
  require_dim(model, x, "lindblad_adjoint");
  const Operator h_op = model.hamiltonian(t);
  const auto& h = h_op.matrix();
  const auto& l = model.coupling().matrix();
  const auto& ld = model.coupling_adjoint().matrix();
  const auto& xm = x.matrix();
  const Eigen::MatrixXcd ldl = ld * l;
  const Complex i(0.0, 1.0);
  Eigen::MatrixXcd out = -i * (h * xm - xm * h) + l * xm * ld - 0.5 * (ldl * xm + xm * ldl);
  return Operator(std::move(out));
}

Operator innovation_gain(const SystemModel& model, const Operator& x) {
  require_dim(model, x, "innovation_gain");
  const auto& l = model.coupling().matrix();
  const auto& ld = model.coupling_adjoint().matrix();
  const auto& xm = x.matrix();
  const Complex expectation = (xm * (l + ld)).trace();
  Eigen::MatrixXcd out = l * xm + xm * ld - xm * expectation;
  return Operator(std::move(out));
}

Operator stratonovich_drift(const SystemModel& model, const Operator& x) {
  require_dim(model, x, "stratonovich_drift");
  const auto& l = model.coupling().matrix();
  const auto& ld = model.coupling_adjoint().matrix();
  const auto& xm = x.matrix();
  const Eigen::MatrixXcd s = l + ld;
  Eigen::MatrixXcd out = 0.5 * (s * l * xm + xm * ld * s);
  return Operator(std::move(out));
}

SpectralDecomposition spectral_projectors(const Operator& l, std::optional<double> zero_tol) {
  if (!l.is_hermitian()) throw UsageError("spectral_projectors: operator is not Hermitian");
  const EigenSystem es = herm_eig(l);
  const Index n = l.dim();
  const double scale = n > 0 ? es.eigenvalues.cwiseAbs().maxCoeff() : 0.0;
  const double tol = zero_tol.value_or(1e-8 * scale);

  SpectralDecomposition out;
  Eigen::MatrixXcd kernel = Eigen::MatrixXcd::Identity(n, n);
  // Ascending eigenvalues; walk from the top so projectors come out in
  // descending eigenvalue order.
  Index k = n - 1;
  while (k >= 0) {
    Index first = k;
    double sum = es.eigenvalues(k);
    while (first - 1 >= 0 && es.eigenvalues(k) - es.eigenvalues(first - 1) <= tol) {
      --first;
      sum += es.eigenvalues(first);
    }
    const double lambda = sum / static_cast<double>(k - first + 1);
    if (std::abs(lambda) > tol) {
      const auto block = es.eigenvectors.middleCols(first, k - first + 1);
      Eigen::MatrixXcd p = block * block.adjoint();
      kernel -= p;
      out.eigenvalues.push_back(lambda);
      out.projectors.push_back(Operator(std::move(p)).hermitian_part());
    }
    k = first - 1;
  }
  out.kernel = Operator(std::move(kernel)).hermitian_part();
  return out;
}

Operator collective_spin(int n_atoms, Axis axis) {
  if (n_atoms < 1 || n_atoms > kMaxAtoms) {
    throw UsageError("collective_spin: n_atoms must be in [1, " + std::to_string(kMaxAtoms) +
                     "], got " + std::to_string(n_atoms));
  }
  const Operator sigma = pauli(axis);
  const Operator id2 = Operator::identity(2);
  const Index dim = Index{1} << n_atoms;
  Operator total = Operator::zero(dim);
  for (int k = 0; k < n_atoms; ++k) {
    Operator term = k == 0 ? sigma : id2;
    for (int j = 1; j < n_atoms; ++j) term = kron(term, j == k ? sigma : id2);
    total += term;
  }
  return total * 0.5;
}

SystemModel build_spin_model(int n_atoms, double mu, ControlProfile control, Axis control_axis) {
  if (!(mu > 0.0)) throw UsageError("build_spin_model: mu must be positive");
  if (control_axis == Axis::kX) {
    throw UsageError("build_spin_model: control axis must be y or z");
  }
  Operator coupling = collective_spin(n_atoms, Axis::kZ) * std::sqrt(mu);
  ControlSignal h{control, collective_spin(n_atoms, control_axis)};
  return SystemModel(std::move(h), std::move(coupling));
}

bool hamiltonian_commutes_with_coupling(const SystemModel& model, double tol) {
  return max_norm(commutator(model.control().base, model.coupling())) <= tol;
}

}  // namespace qpf
