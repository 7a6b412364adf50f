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

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "qpf/operator.hpp"
#include "qpf/submanifold.hpp"
#include "qpf/system_model.hpp"

namespace qpf {

/// Part of -i[H, rho_bar] lost by projecting onto the tangent space.
Operator prediction_residual(const Submanifold& sub, const SystemModel& model, double t,
                             const Eigen::VectorXd& theta);

struct CorrectionResiduals {
  Operator c1;  // from -S_L(rho_bar)
  Operator c2;  // from L rho_bar + rho_bar L^dag
};

CorrectionResiduals correction_residuals(const Submanifold& sub, const SystemModel& model,
                                         const Eigen::VectorXd& theta);

struct ResidualReport {
  double t = 0.0;
  double prediction_norm = 0.0;
  double correction1_norm = 0.0;
  double correction2_norm = 0.0;
};

ResidualReport residual_report(const Submanifold& sub, const SystemModel& model, double t,
                               const Eigen::VectorXd& theta);

/// X0 = -i[H(0), rho0], the prediction residual at theta = 0.
Operator initial_prediction_operator(const SystemModel& model, const Operator& rho0);

/// Running mean and variance (Welford), mergeable in any grouping.
class MeanAccumulator {
 public:
  void add(double x);
  void merge(const MeanAccumulator& other);

  std::int64_t count() const noexcept { return count_; }
  double mean() const noexcept { return mean_; }
  /// Unbiased sample variance; 0 with fewer than two samples.
  double variance() const noexcept;
  /// Standard error of the mean.
  double stderr_of_mean() const noexcept;

 private:
  std::int64_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct ResidualBoundEstimate {
  std::vector<double> mean;
  std::vector<double> stderr_of_mean;
  /// sqrt(Tr(X0^2)).
  double bound = 0.0;

  /// mean <= bound + k * stderr at every checkpoint.
  bool holds(double k_sigma = 3.0) const;
};

/// norms[i][k] is sqrt(Tr(P(t_k)^2)) on trajectory i. Throws UsageError on an
/// empty or ragged ensemble.
ResidualBoundEstimate residual_bound_estimate(const std::vector<std::vector<double>>& norms,
                                              const Operator& x0);

/// Block form of a matrix relative to the pointer basis vector e_p:
/// S = span{e_p}, R = its orthogonal complement in index order.
struct PointerDecomposition {
  Index pointer_index = 0;
  Complex x_s;
  Eigen::RowVectorXcd x_p;  // R -> S
  Eigen::VectorXcd x_q;     // S -> R
  Eigen::MatrixXcd x_r;
  Operator p_s;
  Operator p_r;

  Operator reassemble() const;
};

PointerDecomposition pointer_decompose(const Operator& x, Index pointer_index);

/// max_jk |(rho - P_S rho P_S)_jk|.
double pointer_distance(const Operator& rho, Index pointer_index);
/// Re Tr(P_R x).
double off_pointer_weight(const Operator& x, Index pointer_index);

/// sqrt(Tr((a - b)^2)) for Hermitian a, b.
double frobenius_error(const Operator& a, const Operator& b);

}  // namespace qpf
