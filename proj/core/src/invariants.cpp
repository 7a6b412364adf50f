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

#include "qpf/invariants.hpp"

#include <cmath>
#include <exception>
#include <functional>
#include <sstream>

#include "qpf/diagnostics.hpp"
#include "qpf/filters.hpp"
#include "qpf/linalg.hpp"
#include "qpf/sde.hpp"
#include "qpf/submanifold.hpp"
#include "qpf/system_model.hpp"

namespace qpf {

namespace {

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed, 42) {}

  double normal() { return rng_.normal(); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * rng_.uniform(); }

  Eigen::MatrixXcd matrix(Index n) {
    Eigen::MatrixXcd m(n, n);
    for (Index j = 0; j < n; ++j) {
      for (Index i = 0; i < n; ++i) m(i, j) = Complex(normal(), normal());
    }
    return m;
  }
  Operator hermitian(Index n) { return Operator(matrix(n)).hermitian_part(); }
  Operator psd(Index n) {
    const Eigen::MatrixXcd a = matrix(n);
    return Operator(a * a.adjoint()).hermitian_part();
  }
  Operator density(Index n) {
    const Operator p = psd(n);
    return (p * (1.0 / p.trace().real())).hermitian_part();
  }

 private:
  CounterRng rng_;
};

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(3);
  s << std::scientific << x;
  return s.str();
}

/// Runs `check`, which returns the worst deviation, and compares it to `tol`.
InvariantResult evaluate(const std::string& name, double tol, const std::function<double()>& check) {
  try {
    const double worst = check();
    return {name, worst <= tol, "max deviation " + fmt(worst) + " (tol " + fmt(tol) + ")"};
  } catch (const std::exception& e) {
    return {name, false, std::string("threw: ") + e.what()};
  }
}

SystemModel two_qubit_model(double amplitude, Axis axis) {
  return build_spin_model(2, 1.0, ControlProfile::constant(amplitude), axis);
}

Operator two_atom_state() {
  return kron(Operator::diagonal({0.75, 0.25}), Operator::diagonal({0.5, 0.5})).hermitian_part();
}

}  // namespace

std::vector<InvariantResult> run_invariant_suite(std::uint64_t seed) {
  Sampler rnd(seed);
  std::vector<InvariantResult> out;

  out.push_back(evaluate("exp(A) exp(-A) = I", 1e-8, [&] {
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      const Index n = 2 + k % 5;
      const Operator a = rnd.hermitian(n) * 0.5;
      worst = std::max(worst, frobenius_norm(herm_exp(a) * herm_exp(-a) - Operator::identity(n)));
    }
    return worst;
  }));

  out.push_back(evaluate("0 <= Tr(AB) <= Tr(A)Tr(B) for PSD A, B", 0.0, [&] {
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
      const Index n = 1 + k % 6;
      const Operator a = rnd.psd(n);
      const Operator b = rnd.psd(n);
      const double ab = (a * b).trace().real();
      const double scale = 1e-10 * (1.0 + a.trace().real() * b.trace().real());
      worst = std::max({worst, -ab - scale, ab - a.trace().real() * b.trace().real() - scale});
    }
    return std::max(worst, 0.0);
  }));

  out.push_back(evaluate("singular value partial sums of AB are majorized", 0.0, [&] {
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
      const Index n = 1 + k % 6;
      const Operator a(rnd.matrix(n));
      const Operator b(rnd.matrix(n));
      const Eigen::VectorXd sab = singular_values(a * b);
      const Eigen::VectorXd sa = singular_values(a);
      const Eigen::VectorXd sb = singular_values(b);
      double lhs = 0.0;
      double rhs = 0.0;
      for (Index i = 0; i < n; ++i) {
        lhs += sab(i);
        rhs += sa(i) * sb(i);
        worst = std::max(worst, lhs - rhs - 1e-10 * (1.0 + rhs));
      }
    }
    return std::max(worst, 0.0);
  }));

  out.push_back(evaluate("vectorized superoperator matches direct application", 1e-10, [&] {
    const Index n = 3;
    const Operator a(rnd.matrix(n));
    const Operator b(rnd.matrix(n));
    const LinearMap f = [&](const Operator& x) { return a * x * b + x; };
    const Eigen::MatrixXcd m = vectorize_superoperator(f, n);
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
      const Operator x(rnd.matrix(n));
      worst = std::max(worst, max_norm(unvec(m * vec(x), n) - f(x)));
    }
    return worst;
  }));

  const SystemModel driven = two_qubit_model(0.7, Axis::kY);

  out.push_back(evaluate("Lindblad adjoint is trace preserving", 1e-10, [&] {
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      worst = std::max(worst, std::abs(lindblad_adjoint(driven, 0.0, rnd.hermitian(4)).trace()));
    }
    return worst;
  }));

  out.push_back(evaluate("Lindblad generator and adjoint are dual", 1e-10, [&] {
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
      const Operator a = rnd.hermitian(4);
      const Operator b = rnd.hermitian(4);
      const Complex lhs = (lindblad_adjoint(driven, 0.0, a) * b).trace();
      const Complex rhs = (a * lindblad_generator(driven, 0.0, b)).trace();
      worst = std::max(worst, std::abs(lhs - rhs));
    }
    return worst;
  }));

  out.push_back(evaluate("spectral projectors reconstruct L and resolve I", 1e-9, [&] {
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      const Operator l = rnd.hermitian(1 + k % 5);
      const SpectralDecomposition sd = spectral_projectors(l);
      Operator sum = Operator::zero(l.dim());
      Operator ident = sd.kernel;
      for (std::size_t i = 0; i < sd.size(); ++i) {
        sum += sd.projectors[i] * sd.eigenvalues[i];
        ident += sd.projectors[i];
      }
      worst = std::max({worst, max_norm(sum - l), max_norm(ident - Operator::identity(l.dim()))});
    }
    return worst;
  }));

  out.push_back(evaluate("Stratonovich drift is L^2 X + X L^2 for Hermitian L", 1e-12, [&] {
    const Operator l = driven.coupling();
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      const Operator x = rnd.hermitian(4);
      worst = std::max(worst, max_norm(stratonovich_drift(driven, x) - (l * l * x + x * l * l)));
    }
    return worst;
  }));

  const Submanifold sub = default_submanifold(driven, two_atom_state());
  std::vector<Eigen::VectorXd> thetas;
  for (int k = 0; k < 20; ++k) {
    thetas.emplace_back(Eigen::Vector2d(rnd.uniform(-3.0, 3.0), rnd.uniform(-3.0, 3.0)));
  }

  out.push_back(evaluate("Fisher metric is symmetric and positive definite", 1e-10, [&] {
    double worst = 0.0;
    for (const auto& th : thetas) {
      const Eigen::MatrixXd g = fisher_matrix(sub, th);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
      worst = std::max(worst, (g - g.transpose()).cwiseAbs().maxCoeff());
      if (es.eigenvalues().minCoeff() <= 0.0) return 1.0;
    }
    return worst;
  }));

  out.push_back(evaluate("tangent projection is idempotent", 1e-8, [&] {
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
      const Eigen::VectorXd& th = thetas[static_cast<std::size_t>(k) % thetas.size()];
      const Operator once = projection_op(sub, th, rnd.hermitian(4));
      worst = std::max(worst, max_norm(projection_op(sub, th, once) - once));
    }
    return worst;
  }));

  out.push_back(evaluate("correction residuals vanish on the projector family", 1e-8, [&] {
    double worst = 0.0;
    for (const auto& th : thetas) {
      const CorrectionResiduals c = correction_residuals(sub, driven, th);
      worst = std::max({worst, frobenius_norm(c.c1), frobenius_norm(c.c2)});
    }
    return worst;
  }));

  out.push_back(evaluate("normalized filter keeps unit trace", 1e-10, [&] {
    const TimeGrid grid = make_grid(1.0, 512, 2);
    const NoisePath path = wiener_path(seed, grid);
    double worst = 0.0;
    for (auto scheme : {QuantumFilterScheme::kEulerMaruyama, QuantumFilterScheme::kKraus}) {
      FilterState rho{two_atom_state()};
      for (std::int64_t k = 0; k < grid.coarse_count(); ++k) {
        rho = quantum_filter_step(driven, rho, grid.coarse_time(k), grid.coarse_step(),
                                  path.coarse_increments[static_cast<std::size_t>(k)], scheme);
        worst = std::max(worst, std::abs(rho.rho.trace().real() - 1.0));
      }
    }
    return worst;
  }));

  out.push_back(evaluate("Wiener paths are reproducible", 0.0, [&] {
    const TimeGrid grid = make_grid(1.0, 1024, 4);
    const NoisePath a = wiener_path(seed, grid);
    const NoisePath b = wiener_path(seed, grid);
    return a.fine_increments == b.fine_increments && a.coarse_increments == b.coarse_increments
               ? 0.0
               : 1.0;
  }));

  return out;
}

}  // namespace qpf
