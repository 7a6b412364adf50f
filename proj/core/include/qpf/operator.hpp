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

#include <complex>
#include <initializer_list>
#include <optional>
#include <span>

#include <Eigen/Dense>

namespace qpf {

using Complex = std::complex<double>;
using Index = Eigen::Index;

/// Absolute tolerance used for every Hermiticity test in the library.
inline constexpr double kHermitianTol = 1e-10;

/// Dense square complex matrix acting on the system Hilbert space.
///
/// Holds Hamiltonians, coupling operators, density matrices, submanifold
/// generators and residuals alike. The optional Hermitian hint is set only by
/// construction paths that guarantee Hermiticity (identity, real diagonals,
/// `hermitian_part`, sums of hinted operators); it is never filled lazily, so
/// a const Operator is safe to share between threads.
class Operator {
 public:
  using Matrix = Eigen::MatrixXcd;

  Operator() = default;
  explicit Operator(Matrix m);

  static Operator zero(Index n);
  static Operator identity(Index n);
  static Operator diagonal(std::span<const double> entries);
  static Operator diagonal(std::initializer_list<double> entries);
  /// Wraps `m` after checking it is Hermitian within kHermitianTol.
  static Operator hermitian(Matrix m);

  Index dim() const noexcept { return m_.rows(); }
  const Matrix& matrix() const noexcept { return m_; }
  Complex operator()(Index row, Index col) const { return m_(row, col); }

  Complex trace() const { return m_.trace(); }
  Operator adjoint() const;

  /// max_{jk} |a_jk - conj(a_kj)|
  double hermiticity_error() const;
  bool is_hermitian(double tol = kHermitianTol) const;
  std::optional<bool> hermitian_hint() const noexcept { return hermitian_hint_; }

  /// (A + A^dagger) / 2.
  Operator hermitian_part() const;
  Eigen::VectorXd real_diagonal() const { return m_.diagonal().real(); }

  Operator& operator+=(const Operator& rhs);
  Operator& operator-=(const Operator& rhs);
  Operator& operator*=(Complex s);

  friend Operator operator+(Operator lhs, const Operator& rhs) { return lhs += rhs; }
  friend Operator operator-(Operator lhs, const Operator& rhs) { return lhs -= rhs; }
  friend Operator operator-(const Operator& a);
  friend Operator operator*(const Operator& a, const Operator& b);
  friend Operator operator*(Operator a, Complex s) { return a *= s; }
  friend Operator operator*(Complex s, Operator a) { return a *= s; }
  friend Operator operator*(Operator a, double s) { return a *= Complex(s, 0.0); }
  friend Operator operator*(double s, Operator a) { return a *= Complex(s, 0.0); }

 private:
  Operator(Matrix m, std::optional<bool> hint);

  Matrix m_;
  std::optional<bool> hermitian_hint_;
};

}  // namespace qpf
