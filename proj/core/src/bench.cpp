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

#include "qpf/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <limits>

#include "qpf/errors.hpp"
#include "qpf/linalg.hpp"
#include "qpf/sde.hpp"
#include "qpf/submanifold.hpp"

namespace qpf {

namespace {

using Clock = std::chrono::steady_clock;

Operator bench_state(int n_atoms) {
  // First atom biased towards |0>, the rest maximally mixed.
  Operator rho = Operator::diagonal({0.75, 0.25});
  for (int k = 1; k < n_atoms; ++k) rho = kron(rho, Operator::diagonal({0.5, 0.5}));
  return rho.hermitian_part();
}

}  // namespace

std::vector<BenchRow> run_bench(int max_atoms, std::int64_t steps, int repeats,
                                QuantumFilterScheme scheme) {
  if (max_atoms < 1 || max_atoms > kMaxAtoms) throw UsageError("bench: max atoms out of range");
  if (steps < 1 || repeats < 1) throw UsageError("bench: steps and repeats must be positive");
  const double dt = 1.0 / static_cast<double>(steps);
  const TimeGrid grid = make_grid(1.0, steps, 1);
  const NoisePath noise = wiener_path(7, grid);

  std::vector<BenchRow> rows;
  for (int n = 1; n <= max_atoms; ++n) {
    const SystemModel model =
        build_spin_model(n, 1.0, ControlProfile::exp_decay(5.0, 5.0), Axis::kY);
    const Operator rho0 = bench_state(n);
    const Submanifold sub = default_submanifold(model, rho0);
    const ReducedProjectionFilter fast(sub, model);

    BenchRow row;
    row.n_atoms = n;
    row.dim = model.dim();
    row.projection_components = sub.size();
    row.full_components = row.dim * row.dim - 1;
    row.quantum_ns_per_step = std::numeric_limits<double>::infinity();
    row.projection_ns_per_step = std::numeric_limits<double>::infinity();

    for (int r = 0; r < repeats; ++r) {
      FilterState rho{rho0};
      auto start = Clock::now();
      for (std::int64_t k = 0; k < steps; ++k) {
        rho = quantum_filter_step(model, rho, static_cast<double>(k) * dt, dt,
                                  noise.coarse_increments[static_cast<std::size_t>(k)], scheme);
      }
      const double q = std::chrono::duration<double, std::nano>(Clock::now() - start).count();

      ThetaState theta = ThetaState::origin(sub.size());
      start = Clock::now();
      for (std::int64_t k = 0; k < steps; ++k) {
        fast.step(theta, dt, noise.coarse_increments[static_cast<std::size_t>(k)]);
      }
      const double p = std::chrono::duration<double, std::nano>(Clock::now() - start).count();
      // Keep the results observable so the loops are not elided.
      if (!rho.rho.matrix().allFinite() || !theta.theta.allFinite()) {
        throw StepFailure("bench produced a non-finite state", 1.0);
      }
      row.quantum_ns_per_step = std::min(row.quantum_ns_per_step, q / static_cast<double>(steps));
      row.projection_ns_per_step =
          std::min(row.projection_ns_per_step, p / static_cast<double>(steps));
    }
    rows.push_back(row);
  }
  return rows;
}

std::string bench_table(const std::vector<BenchRow>& rows) {
  std::string out = "atoms  dim  sde_full  sde_proj  full_ns/step  proj_ns/step   ratio\n";
  char line[160];
  for (const BenchRow& r : rows) {
    std::snprintf(line, sizeof(line), "%5d %4lld %9lld %9lld %13.1f %13.1f %7.2f\n", r.n_atoms,
                  static_cast<long long>(r.dim), static_cast<long long>(r.full_components),
                  static_cast<long long>(r.projection_components), r.quantum_ns_per_step,
                  r.projection_ns_per_step, r.ratio());
    out += line;
  }
  return out;
}

}  // namespace qpf
