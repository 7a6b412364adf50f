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

#include "qpf/filters.hpp"

#include <cmath>
#include <string>

#include "qpf/errors.hpp"
#include "qpf/linalg.hpp"
#include "qpf/sde.hpp"

namespace qpf {

namespace {

void require_projector_family(const Submanifold& sub, const SystemModel& model, const char* who) {
  if (!sub.is_projector_family()) {
    throw UsageError(std::string(who) + ": submanifold must come from default_submanifold");
  }
  if (!model.coupling_hermitian()) {
    throw UsageError(std::string(who) + ": coupling operator must be Hermitian");
  }
  if (model.dim() != sub.dim()) throw UsageError(std::string(who) + ": dimension mismatch");
}

double real_trace(const Eigen::MatrixXcd& m) { return m.trace().real(); }

}  // namespace

double UnnormalizedState::log_trace() const {
  return std::log(rho_bar.trace().real()) + log_scale;
}

std::string_view scheme_name(QuantumFilterScheme scheme) {
  switch (scheme) {
    case QuantumFilterScheme::kEulerMaruyama: return "euler";
    case QuantumFilterScheme::kKraus: return "kraus";
  }
  return "?";
}

QuantumFilterScheme parse_quantum_scheme(std::string_view name) {
  if (name == "euler") return QuantumFilterScheme::kEulerMaruyama;
  if (name == "kraus") return QuantumFilterScheme::kKraus;
  throw UsageError("unknown quantum filter scheme '" + std::string(name) +
                   "' (expected euler or kraus)");
}

FilterState quantum_filter_step(const SystemModel& model, const FilterState& state, double t,
                                double dt, double dY, QuantumFilterScheme scheme,
                                QuantumStepReport* report) {
  if (state.rho.dim() != model.dim()) throw UsageError("quantum_filter_step: dimension mismatch");
  const auto& rho = state.rho.matrix();
  Eigen::MatrixXcd next;
  if (scheme == QuantumFilterScheme::kEulerMaruyama) {
    const double expect = real_trace(rho * (model.coupling().matrix() +
                                            model.coupling_adjoint().matrix()));
    next = rho + lindblad_adjoint(model, t, state.rho).matrix() * dt +
           innovation_gain(model, state.rho).matrix() * (dY - expect * dt);
  } else {
    const auto& l = model.coupling().matrix();
    const auto& ld = model.coupling_adjoint().matrix();
    const Complex i(0.0, 1.0);
    const Index n = model.dim();
    const Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(n, n) +
                               (-i * model.hamiltonian(t).matrix() - 0.5 * ld * l) * dt + l * dY +
                               0.5 * l * l * (dY * dY - dt);
    next = m * rho * m.adjoint();
  }

  const double tr = real_trace(next);
  if (report != nullptr) {
    report->trace_before = tr;
    report->min_eigenvalue_before = min_eigenvalue(Operator(next));
  }
  if (!(tr > 1e-12) || !std::isfinite(tr)) {
    throw StepFailure("quantum filter trace collapsed", t);
  }
  next /= tr;
  return FilterState{Operator(std::move(next)).hermitian_part()};
}

namespace {

UnnormalizedState rescaled(Operator rho_bar, const UnnormalizedState& prev, double t) {
  UnnormalizedState out{std::move(rho_bar), prev.log_scale, prev.rescale_events};
  const double tr = out.rho_bar.trace().real();
  if (!(tr > 0.0) || !std::isfinite(tr)) {
    throw StepFailure("unnormalized filter trace is not positive", t);
  }
  if (tr < kMinUnnormalizedTrace || tr > kMaxUnnormalizedTrace) {
    out.rho_bar = out.rho_bar * (1.0 / tr);
    out.log_scale += std::log(tr);
    ++out.rescale_events;
  }
  return out;
}

}  // namespace

UnnormalizedState unnormalized_filter_step(const SystemModel& model,
                                           const UnnormalizedState& state, double t, double dt,
                                           double dY) {
  if (state.rho_bar.dim() != model.dim()) {
    throw UsageError("unnormalized_filter_step: dimension mismatch");
  }
  const auto& x = state.rho_bar.matrix();
  const auto& l = model.coupling().matrix();
  const auto& ld = model.coupling_adjoint().matrix();
  Eigen::MatrixXcd next =
      x + lindblad_adjoint(model, t, state.rho_bar).matrix() * dt + (l * x + x * ld) * dY;
  return rescaled(Operator(std::move(next)).hermitian_part(), state, t);
}

UnnormalizedState unnormalized_filter_step_stratonovich(const SystemModel& model,
                                                        const UnnormalizedState& state, double t,
                                                        double dt, double dY) {
  if (state.rho_bar.dim() != model.dim()) {
    throw UsageError("unnormalized_filter_step_stratonovich: dimension mismatch");
  }
  const auto& l = model.coupling().matrix();
  const auto& ld = model.coupling_adjoint().matrix();
  const Complex i(0.0, 1.0);
  auto drift = [&](double s, const Eigen::MatrixXcd& x) -> Eigen::MatrixXcd {
    const Operator h_op = model.hamiltonian(s);
    const auto& h = h_op.matrix();
    return -i * (h * x - x * h) - stratonovich_drift(model, Operator(x)).matrix();
  };
  auto diffusion = [&](double, const Eigen::MatrixXcd& x) -> Eigen::MatrixXcd {
    return l * x + x * ld;
  };
  Eigen::MatrixXcd next = stratonovich_heun_step(drift, diffusion, t, state.rho_bar.matrix(), dt, dY);
  return rescaled(Operator(std::move(next)).hermitian_part(), state, t);
}

FilterState normalize(const Operator& x) {
  const double tr = x.trace().real();
  if (!(tr > 1e-12)) throw UsageError("normalize: trace is not positive");
  return FilterState{(x * (1.0 / tr)).hermitian_part()};
}

FilterState normalize(const UnnormalizedState& state) { return normalize(state.rho_bar); }

ThetaVectorField projection_vector_field(const Submanifold& sub, const SystemModel& model,
                                         double t, const Eigen::VectorXd& theta) {
  const XiGamma xg = xi_gamma(sub, model, t, theta);
  const Eigen::MatrixXd g = fisher_matrix(sub, theta);
  return {solve_metric(g, xg.xi), solve_metric(g, xg.gamma)};
}

ThetaState projection_filter_step_general(const Submanifold& sub, const SystemModel& model,
                                          const ThetaState& state, double dt, double dY,
                                          ProjectionScheme scheme) {
  if (state.theta.size() != sub.size()) {
    throw UsageError("projection_filter_step_general: theta has the wrong length");
  }
  try {
    auto drift = [&](double s, const Eigen::VectorXd& th) -> Eigen::VectorXd {
      return projection_vector_field(sub, model, s, th).drift;
    };
    auto diffusion = [&](double s, const Eigen::VectorXd& th) -> Eigen::VectorXd {
      return projection_vector_field(sub, model, s, th).diffusion;
    };
    Eigen::VectorXd next;
    if (scheme == ProjectionScheme::kHeun) {
      next = stratonovich_heun_step(drift, diffusion, state.t, state.theta, dt, dY);
    } else {
      const ThetaVectorField f = projection_vector_field(sub, model, state.t, state.theta);
      next = state.theta + f.drift * dt + f.diffusion * dY;
    }
    return {std::move(next), state.t + dt};
  } catch (const NearSingularMetric& e) {
    throw StepFailure(e.what(), state.t);
  }
}

ThetaState projection_filter_step_reduced(const Submanifold& sub, const SystemModel& model,
                                          const ThetaState& state, double dt, double dY) {
  require_projector_family(sub, model, "projection_filter_step_reduced");
  if (state.theta.size() != sub.size()) {
    throw UsageError("projection_filter_step_reduced: theta has the wrong length");
  }
  const Operator rho = manifold_state(sub, state.theta);
  const Operator h_op = model.hamiltonian(state.t);
  const auto& h = h_op.matrix();
  const Eigen::VectorXd& lambda = sub.coupling_spectrum();
  const Complex i(0.0, 1.0);
  ThetaState out{state.theta, state.t + dt};
  for (Index j = 0; j < sub.size(); ++j) {
    const auto& a = sub.generators()[static_cast<std::size_t>(j)].matrix();
    const double g = real_trace(rho.matrix() * a);
    if (!(g > 0.0)) throw StepFailure("Fisher metric lost positivity", state.t);
    const double s = real_trace(rho.matrix() * (i * (h * a - a * h)));
    out.theta(j) += (s / g - 2.0 * lambda(j) * lambda(j)) * dt + 2.0 * lambda(j) * dY;
  }
  return out;
}

ThetaState projection_filter_step_commuting(const Submanifold& sub, const ThetaState& state,
                                            double dt, double dY) {
  if (!sub.is_projector_family()) {
    throw UsageError("projection_filter_step_commuting: submanifold must come from "
                     "default_submanifold");
  }
  if (state.theta.size() != sub.size()) {
    throw UsageError("projection_filter_step_commuting: theta has the wrong length");
  }
  const Eigen::VectorXd& lambda = sub.coupling_spectrum();
  ThetaState out{state.theta, state.t + dt};
  out.theta += (-2.0 * dt) * lambda.cwiseAbs2() + (2.0 * dY) * lambda;
  return out;
}

ReducedProjectionFilter::ReducedProjectionFilter(const Submanifold& sub,
                                                 const SystemModel& model)
    : lambda_(sub.coupling_spectrum()), profile_(model.control().profile) {
  require_projector_family(sub, model, "ReducedProjectionFilter");
  const Index m = sub.size();
  const Index n = sub.dim();
  // Index 0 is the kernel projector, 1..m the generators.
  std::vector<Eigen::MatrixXcd> p;
  p.reserve(static_cast<std::size_t>(m + 1));
  Eigen::MatrixXcd kernel = Eigen::MatrixXcd::Identity(n, n);
  for (const auto& a : sub.generators()) kernel -= a.matrix();
  p.push_back(std::move(kernel));
  for (const auto& a : sub.generators()) p.push_back(a.matrix());

  const auto& rho0 = sub.anchor().matrix();
  const auto& h0 = model.control().base.matrix();
  anchor_weight_.resize(m);
  coupling_terms_.assign(static_cast<std::size_t>(m), Eigen::MatrixXcd::Zero(m + 1, m + 1));
  for (Index j = 0; j < m; ++j) {
    const auto& pj = p[static_cast<std::size_t>(j + 1)];
    anchor_weight_(j) = real_trace(rho0 * pj);
    const Eigen::MatrixXcd comm = h0 * pj - pj * h0;
    for (Index k = 0; k <= m; ++k) {
      const Eigen::MatrixXcd left = p[static_cast<std::size_t>(k)] * rho0;
      for (Index l = 0; l <= m; ++l) {
        coupling_terms_[static_cast<std::size_t>(j)](k, l) =
            (left * p[static_cast<std::size_t>(l)] * comm).trace();
      }
    }
    has_drive_ = has_drive_ || coupling_terms_[static_cast<std::size_t>(j)].cwiseAbs().maxCoeff() > 0.0;
  }
}

void ReducedProjectionFilter::step(ThetaState& state, double dt, double dY) const {
  const Index m = size();
  const double u = has_drive_ ? profile_(state.t) : 0.0;
  Eigen::VectorXd c(m + 1);
  c(0) = 1.0;
  c.tail(m) = (0.5 * state.theta.array()).exp();
  const Eigen::VectorXcd cc = c.cast<Complex>();
  const Complex i(0.0, 1.0);
  for (Index j = 0; j < m; ++j) {
    double drift = -2.0 * lambda_(j) * lambda_(j);
    if (u != 0.0) {
      const Complex s = i * cc.dot(coupling_terms_[static_cast<std::size_t>(j)] * cc);
      const double g = c(j + 1) * c(j + 1) * anchor_weight_(j);
      drift += u * s.real() / g;
    }
    state.theta(j) += drift * dt + 2.0 * lambda_(j) * dY;
  }
  state.t += dt;
}

}  // namespace qpf
