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

#include "qpf/diagnostics.hpp"

#include <cmath>
#include <string>

#include "qpf/errors.hpp"
#include "qpf/linalg.hpp"

namespace qpf {

namespace {

Operator residual_of(const Submanifold& sub, const Eigen::VectorXd& theta, const Operator& v) {
  const Operator field = v.hermitian_part();
  return (field - projection_op(sub, theta, field)).hermitian_part();
}

void check_pointer(Index n, Index pointer_index) {
  if (pointer_index < 0 || pointer_index >= n) {
    throw UsageError("pointer index " + std::to_string(pointer_index) + " out of range [0, " +
                     std::to_string(n) + ")");
  }
}

}  // namespace

Operator prediction_residual(const Submanifold& sub, const SystemModel& model, double t,
                             const Eigen::VectorXd& theta) {
  const Operator rho = manifold_state(sub, theta);
  const Operator h = model.hamiltonian(t);
  return residual_of(sub, theta, commutator(h, rho) * Complex(0.0, -1.0));
}

CorrectionResiduals correction_residuals(const Submanifold& sub, const SystemModel& model,
                                         const Eigen::VectorXd& theta) {
  const Operator rho = manifold_state(sub, theta);
  const auto& l = model.coupling().matrix();
  const auto& ld = model.coupling_adjoint().matrix();
  const Operator gain(l * rho.matrix() + rho.matrix() * ld);
  return {residual_of(sub, theta, -stratonovich_drift(model, rho)),
          residual_of(sub, theta, gain)};
}

ResidualReport residual_report(const Submanifold& sub, const SystemModel& model, double t,
                               const Eigen::VectorXd& theta) {
  const CorrectionResiduals c = correction_residuals(sub, model, theta);
  return {t, frobenius_norm(prediction_residual(sub, model, t, theta)), frobenius_norm(c.c1),
          frobenius_norm(c.c2)};
}

Operator initial_prediction_operator(const SystemModel& model, const Operator& rho0) {
  return (commutator(model.hamiltonian(0.0), rho0) * Complex(0.0, -1.0)).hermitian_part();
}

void MeanAccumulator::add(double x) {
  ++count_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(count_);
  m2_ += delta * (x - mean_);
}

void MeanAccumulator::merge(const MeanAccumulator& other) {
  if (other.count_ == 0) return;
  if (count_ == 0) {
    *this = other;
    return;
  }
  const auto na = static_cast<double>(count_);
  const auto nb = static_cast<double>(other.count_);
  const double n = na + nb;
  const double delta = other.mean_ - mean_;
  mean_ += delta * nb / n;
  m2_ += other.m2_ + delta * delta * na * nb / n;
  count_ += other.count_;
}

double MeanAccumulator::variance() const noexcept {
  return count_ > 1 ? m2_ / static_cast<double>(count_ - 1) : 0.0;
}

double MeanAccumulator::stderr_of_mean() const noexcept {
  return count_ > 0 ? std::sqrt(variance() / static_cast<double>(count_)) : 0.0;
}

bool ResidualBoundEstimate::holds(double k_sigma) const {
  for (std::size_t k = 0; k < mean.size(); ++k) {
    if (mean[k] > bound + k_sigma * stderr_of_mean[k]) return false;
  }
  return true;
}

ResidualBoundEstimate residual_bound_estimate(const std::vector<std::vector<double>>& norms,
                                              const Operator& x0) {
  if (norms.empty()) throw UsageError("residual_bound_estimate: empty ensemble");
  const std::size_t checkpoints = norms.front().size();
  std::vector<MeanAccumulator> acc(checkpoints);
  for (const auto& series : norms) {
    if (series.size() != checkpoints) {
      throw UsageError("residual_bound_estimate: trajectories have different checkpoint counts");
    }
    for (std::size_t k = 0; k < checkpoints; ++k) acc[k].add(series[k]);
  }
  ResidualBoundEstimate out;
  out.bound = std::sqrt(std::max(0.0, (x0.matrix() * x0.matrix()).trace().real()));
  for (const auto& a : acc) {
    out.mean.push_back(a.mean());
    out.stderr_of_mean.push_back(a.stderr_of_mean());
  }
  return out;
}

Operator PointerDecomposition::reassemble() const {
  const Index n = x_r.rows() + 1;
  Eigen::MatrixXcd out(n, n);
  const Index p = pointer_index;
  for (Index i = 0, ri = 0; i < n; ++i) {
    if (i == p) continue;
    for (Index j = 0, rj = 0; j < n; ++j) {
      if (j == p) continue;
      out(i, j) = x_r(ri, rj);
      ++rj;
    }
    out(p, i) = x_p(ri);
    out(i, p) = x_q(ri);
    ++ri;
  }
  out(p, p) = x_s;
  return Operator(std::move(out));
}

PointerDecomposition pointer_decompose(const Operator& x, Index pointer_index) {
  const Index n = x.dim();
  check_pointer(n, pointer_index);
  PointerDecomposition d;
  d.pointer_index = pointer_index;
  d.x_s = x(pointer_index, pointer_index);
  d.x_p.resize(n - 1);
  d.x_q.resize(n - 1);
  d.x_r.resize(n - 1, n - 1);
  std::vector<double> s(static_cast<std::size_t>(n), 0.0);
  s[static_cast<std::size_t>(pointer_index)] = 1.0;
  std::vector<double> r(static_cast<std::size_t>(n), 1.0);
  r[static_cast<std::size_t>(pointer_index)] = 0.0;
  d.p_s = Operator::diagonal(s);
  d.p_r = Operator::diagonal(r);
  for (Index i = 0, ri = 0; i < n; ++i) {
    if (i == pointer_index) continue;
    for (Index j = 0, rj = 0; j < n; ++j) {
      if (j == pointer_index) continue;
      d.x_r(ri, rj) = x(i, j);
      ++rj;
    }
    d.x_p(ri) = x(pointer_index, i);
    d.x_q(ri) = x(i, pointer_index);
    ++ri;
  }
  return d;
}

double pointer_distance(const Operator& rho, Index pointer_index) {
  check_pointer(rho.dim(), pointer_index);
  Eigen::MatrixXcd diff = rho.matrix();
  diff(pointer_index, pointer_index) = 0.0;
  return diff.cwiseAbs().maxCoeff();
}

double off_pointer_weight(const Operator& x, Index pointer_index) {
  check_pointer(x.dim(), pointer_index);
  return x.trace().real() - x(pointer_index, pointer_index).real();
}

double frobenius_error(const Operator& a, const Operator& b) {
  if (a.dim() != b.dim()) throw UsageError("frobenius_error: dimension mismatch");
  return frobenius_norm(a - b);
}

}  // namespace qpf
