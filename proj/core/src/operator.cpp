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

#include "qpf/operator.hpp"

#include <string>

#include "qpf/errors.hpp"

namespace qpf {

Operator::Operator(Matrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) {
    throw UsageError("operator must be square, got " + std::to_string(m_.rows()) + "x" +
                     std::to_string(m_.cols()));
  }
}

Operator::Operator(Matrix m, std::optional<bool> hint) : Operator(std::move(m)) {
  hermitian_hint_ = hint;
}

Operator Operator::zero(Index n) { return Operator(Matrix::Zero(n, n), true); }

Operator Operator::identity(Index n) { return Operator(Matrix::Identity(n, n), true); }

Operator Operator::diagonal(std::span<const double> entries) {
  const auto n = static_cast<Index>(entries.size());
  Matrix m = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) m(i, i) = entries[static_cast<std::size_t>(i)];
  return Operator(std::move(m), true);
}

Operator Operator::diagonal(std::initializer_list<double> entries) {
  return diagonal(std::span<const double>(entries.begin(), entries.size()));
}

Operator Operator::hermitian(Matrix m) {
  Operator op(std::move(m));
  const double err = op.hermiticity_error();
  if (err > kHermitianTol) {
    throw UsageError("operator is not Hermitian (deviation " + std::to_string(err) + ")");
  }
  op.hermitian_hint_ = true;
  return op;
}

Operator Operator::adjoint() const { return Operator(m_.adjoint(), hermitian_hint_); }

double Operator::hermiticity_error() const {
  if (m_.size() == 0) return 0.0;
  return (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
}

bool Operator::is_hermitian(double tol) const {
  if (hermitian_hint_.has_value() && tol >= kHermitianTol) {
    if (*hermitian_hint_) return true;
  }
  return hermiticity_error() <= tol;
}

Operator Operator::hermitian_part() const {
  return Operator(Matrix(0.5 * (m_ + m_.adjoint())), true);
}

Operator& Operator::operator+=(const Operator& rhs) {
  if (dim() != rhs.dim()) throw UsageError("operator dimension mismatch in +");
  m_ += rhs.m_;
  hermitian_hint_ = (hermitian_hint_.value_or(false) && rhs.hermitian_hint_.value_or(false))
                        ? std::optional<bool>(true)
                        : std::nullopt;
  return *this;
}

Operator& Operator::operator-=(const Operator& rhs) {
  if (dim() != rhs.dim()) throw UsageError("operator dimension mismatch in -");
  m_ -= rhs.m_;
  hermitian_hint_ = (hermitian_hint_.value_or(false) && rhs.hermitian_hint_.value_or(false))
                        ? std::optional<bool>(true)
                        : std::nullopt;
  return *this;
}

Operator& Operator::operator*=(Complex s) {
  m_ *= s;
  if (s.imag() != 0.0) hermitian_hint_.reset();
  return *this;
}

Operator operator-(const Operator& a) { return Operator(Operator::Matrix(-a.m_), a.hermitian_hint_); }

Operator operator*(const Operator& a, const Operator& b) {
  if (a.dim() != b.dim()) throw UsageError("operator dimension mismatch in *");
  return Operator(Operator::Matrix(a.m_ * b.m_));
}

}  // namespace qpf
