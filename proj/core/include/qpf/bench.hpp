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
#include <string>
#include <vector>

#include "qpf/filters.hpp"

namespace qpf {

struct BenchRow {
  int n_atoms = 0;
  std::int64_t dim = 0;
  std::int64_t projection_components = 0;  // m
  std::int64_t full_components = 0;        // n^2 - 1
  double quantum_ns_per_step = 0.0;
  double projection_ns_per_step = 0.0;

  double ratio() const { return quantum_ns_per_step / projection_ns_per_step; }
};

/// Per-step wall time of the full quantum filter and the precomputed
/// projection filter on the spin model with N = 1..max_atoms. Each figure is
/// the best of `repeats` timed loops of `steps` steps.
std::vector<BenchRow> run_bench(int max_atoms, std::int64_t steps, int repeats = 3,
                                QuantumFilterScheme scheme = QuantumFilterScheme::kKraus);

std::string bench_table(const std::vector<BenchRow>& rows);

}  // namespace qpf
