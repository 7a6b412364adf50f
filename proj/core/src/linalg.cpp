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

#include "qpf/linalg.hpp"

#include <cmath>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

#include "qpf/errors.hpp"

namespace qpf {

Operator commutator(const Operator& a, const Operator& b) {
  if (a.dim() != b.dim()) throw UsageError("commutator: dimension mismatch");
  return Operator(Eigen::MatrixXcd(a.matrix() * b.matrix() - b.matrix() * a.matrix()));
}

EigenSystem herm_eig(const Operator& a) {
  const double err = a.hermiticity_error();
  if (err > kHermitianTol) {
    throw UsageError("herm_eig: input is not Hermitian (deviation " + std::to_string(err) + ")");
  }
  // Eigen reads only the lower triangle; symmetrize so both halves agree.
  const Eigen::MatrixXcd h = 0.5 * (a.matrix() + a.matrix().adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("herm_eig: eigensolver did not converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

Operator herm_exp(const Operator& a) {
  const EigenSystem es = herm_eig(a);
  const Eigen::VectorXd e = es.eigenvalues.array().exp();
  Eigen::MatrixXcd out = es.eigenvectors * e.asDiagonal() * es.eigenvectors.adjoint();
  return Operator(std::move(out)).hermitian_part();
}

Eigen::VectorXd singular_values(const Operator& a) {
  if (a.dim() == 0) return {};
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a.matrix());
  return svd.singularValues();
}

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  return Eigen::kroneckerProduct(a, b).eval();
}

Operator kron(const Operator& a, const Operator& b) {
  Operator out(kron(a.matrix(), b.matrix()));
  if (a.hermitian_hint().value_or(false) && b.hermitian_hint().value_or(false)) {
    return out.hermitian_part();
  }
  return out;
}

double frobenius_norm(const Operator& a) { return a.matrix().norm(); }

double max_norm(const Operator& a) {
  if (a.dim() == 0) return 0.0;
  return a.matrix().cwiseAbs().maxCoeff();
}

double min_eigenvalue(const Operator& a) {
  return herm_eig(a.hermitian_part()).eigenvalues(0);
}

Eigen::VectorXcd vec(const Operator& x) {
  return Eigen::Map<const Eigen::VectorXcd>(x.matrix().data(), x.matrix().size());
}

Operator unvec(const Eigen::VectorXcd& v, Index n) {
  if (v.size() != n * n) throw UsageError("unvec: length is not n^2");
  return Operator(Eigen::Map<const Eigen::MatrixXcd>(v.data(), n, n).eval());
}

Eigen::MatrixXcd vectorize_superoperator(const LinearMap& f, Index n) {
  Eigen::MatrixXcd m(n * n, n * n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      Eigen::MatrixXcd unit = Eigen::MatrixXcd::Zero(n, n);
      unit(i, j) = 1.0;
      const Operator image = f(Operator(std::move(unit)));
      if (image.dim() != n) throw UsageError("vectorize_superoperator: map changed dimension");
      m.col(j * n + i) = vec(image);
    }
  }
  return m;
}

Eigen::VectorXcd general_eigenvalues(const Eigen::MatrixXcd& m) {
  if (m.rows() != m.cols()) throw UsageError("general_eigenvalues: matrix not square");
  if (m.size() == 0) return {};
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(m, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("general_eigenvalues: Schur iteration did not converge");
  }
  return solver.eigenvalues();
}

}  // namespace qpf
