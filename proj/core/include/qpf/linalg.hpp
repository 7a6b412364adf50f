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

#include <functional>

#include <Eigen/Dense>

#include "qpf/operator.hpp"

namespace qpf {

/// Spectral decomposition of a Hermitian operator: eigenvalues ascending,
/// eigenvectors stored as the columns of a unitary matrix.
struct EigenSystem {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXcd eigenvectors;
};

/// AB - BA.
Operator commutator(const Operator& a, const Operator& b);

/// Eigendecomposition of a Hermitian operator. Throws UsageError if `a` is not
/// Hermitian within kHermitianTol. Repeated calls on identical input give
/// identical output.
EigenSystem herm_eig(const Operator& a);

/// V diag(exp(lambda)) V^dagger for Hermitian `a`.
Operator herm_exp(const Operator& a);

/// Singular values in descending order.
Eigen::VectorXd singular_values(const Operator& a);

Operator kron(const Operator& a, const Operator& b);
Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

/// sqrt(Tr(A^dagger A)).
double frobenius_norm(const Operator& a);

/// max_{jk} |a_jk|.
double max_norm(const Operator& a);

/// Smallest eigenvalue of the Hermitian part of `a`.
double min_eigenvalue(const Operator& a);

// Column-stacking vectorization: vec(X)[j*n + i] = X(i, j), so that
// vec(A X B) = (B^T kron A) vec(X).
Eigen::VectorXcd vec(const Operator& x);
Operator unvec(const Eigen::VectorXcd& v, Index n);

using LinearMap = std::function<Operator(const Operator&)>;

/// n^2 x n^2 matrix M with M vec(X) = vec(f(X)), assembled column by column
/// from the images of the matrix units E_ij.
Eigen::MatrixXcd vectorize_superoperator(const LinearMap& f, Index n);

/// Eigenvalues of a general (non-Hermitian) square matrix via the complex
/// Schur form. Only eigenvalues are exposed for the non-Hermitian case.
Eigen::VectorXcd general_eigenvalues(const Eigen::MatrixXcd& m);

}  // namespace qpf
