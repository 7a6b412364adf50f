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

#include "qpf/stability.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qpf/diagnostics.hpp"
#include "qpf/errors.hpp"
#include "qpf/linalg.hpp"

namespace qpf {

namespace {

constexpr double kCertificateTol = 1e-8;

double max_eigenvalue(const Operator& x) {
  return herm_eig(x.hermitian_part()).eigenvalues.maxCoeff();
}

}  // namespace

Operator ReducedGenerator::apply(const Operator& x) const {
  if (x.dim() != dim) throw UsageError("ReducedGenerator::apply: dimension mismatch");
  return unvec(matrix * vec(x), dim);
}

ReducedGenerator reduced_generator(const Operator& h_r, const Operator& l_r, Index pointer_index) {
  if (h_r.dim() != l_r.dim()) throw UsageError("reduced_generator: dimension mismatch");
  const Index n = h_r.dim();
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
  const auto& h = h_r.matrix();
  const auto& l = l_r.matrix();
  const Eigen::MatrixXcd ldl = l.adjoint() * l;
  const Complex i(0.0, 1.0);
  Eigen::MatrixXcd m = i * (kron(id, h) - kron(h.transpose(), id)) + kron(l.transpose(), l.adjoint()) -
                       0.5 * (kron(id, ldl) + kron(ldl.transpose(), id));
  return {n, std::move(m), pointer_index};
}

ReducedGenerator reduced_generator(const SystemModel& model, Index pointer_index) {
  if (model.dim() < 2) throw UsageError("reduced_generator: needs dimension >= 2");
  const PointerDecomposition h = pointer_decompose(model.hamiltonian(0.0), pointer_index);
  const PointerDecomposition l = pointer_decompose(model.coupling(), pointer_index);
  return reduced_generator(Operator(h.x_r), Operator(l.x_r), pointer_index);
}

double spectral_abscissa(const ReducedGenerator& generator) {
  const Eigen::VectorXcd ev = general_eigenvalues(generator.matrix);
  return -ev.real().maxCoeff();
}

double spectral_abscissa(const SystemModel& model, Index pointer_index) {
  return spectral_abscissa(reduced_generator(model, pointer_index));
}

StabilityCertificate lyapunov_KR(const ReducedGenerator& generator, std::optional<double> epsilon) {
  const double delta0 = spectral_abscissa(generator);
  const double eps = epsilon.value_or(0.5 * delta0);
  if (!(eps > 0.0) || !(delta0 > eps)) {
    throw InfeasibleCertificate("no certificate: need 0 < epsilon < delta0 (delta0=" +
                                std::to_string(delta0) + ", epsilon=" + std::to_string(eps) +
                                ")");
  }
  const double shift = delta0 - eps;
  const Index n = generator.dim;
  const Eigen::MatrixXcd a =
      generator.matrix + shift * Eigen::MatrixXcd::Identity(n * n, n * n);
  const Eigen::VectorXcd rhs = -vec(Operator::identity(n));
  const Eigen::VectorXcd sol = a.fullPivLu().solve(rhs);
  Operator k = unvec(sol, n).hermitian_part();
  const double lo = min_eigenvalue(k);
  if (!(lo > 0.0)) throw InfeasibleCertificate("no certificate: resolvent solution is not positive");
  k = (k * (1.0 / lo)).hermitian_part();

  StabilityCertificate cert;
  cert.pointer_index = generator.pointer_index;
  cert.delta0 = delta0;
  cert.epsilon = eps;
  cert.slack = max_eigenvalue(generator.apply(k) + k * shift);
  if (cert.slack > kCertificateTol) {
    throw InfeasibleCertificate("no certificate: Lyapunov inequality violated by " +
                                std::to_string(cert.slack));
  }
  cert.c1 = k.trace().real();
  cert.c2 = cert.c1 / shift;
  cert.k_r = std::move(k);
  return cert;
}

StabilityCertificate lyapunov_KR(const SystemModel& model, Index pointer_index,
                                 std::optional<double> epsilon) {
  return lyapunov_KR(reduced_generator(model, pointer_index), epsilon);
}

double pointer_weight_bound(double t, const Operator& rho0, const StabilityCertificate& cert,
                            const Operator& x0) {
  const double s1 = x0.dim() > 0 ? singular_values(x0)(0) : 0.0;
  const double weight = off_pointer_weight(rho0, cert.pointer_index);
  const double decay = std::exp(-(cert.delta0 - cert.epsilon) * t);
  return (cert.c1 * weight - cert.c2 * s1) * decay + cert.c2 * s1;
}

}  // namespace qpf
