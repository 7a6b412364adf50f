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
#include <string_view>
#include <utility>
#include <vector>

namespace qpf {

/// Two-level time discretization: a fine grid of N0 Brownian increments of
/// variance dt_fine = T / N0, and a coarse integration grid whose steps each
/// aggregate R fine increments.
struct TimeGrid {
  double horizon = 1.0;
  std::int64_t fine_count = 1;
  std::int64_t aggregation = 1;

  double fine_step() const noexcept { return horizon / static_cast<double>(fine_count); }
  double coarse_step() const noexcept {
    return fine_step() * static_cast<double>(aggregation);
  }
  std::int64_t coarse_count() const noexcept { return fine_count / aggregation; }
  /// Time at the start of coarse step k (k == coarse_count() gives T).
  double coarse_time(std::int64_t k) const noexcept {
    return static_cast<double>(k) * coarse_step();
  }
};

/// Validates T > 0, N0 >= R >= 1 and R | N0.
TimeGrid make_grid(double horizon, std::int64_t fine_count, std::int64_t aggregation);

/// Counter-based generator: the i-th draw of stream (key, stream) is a pure
/// function of (key, stream, i). Keys are derived from the SplitMix64 output
/// mix, so substreams split off one key are statistically independent.
class CounterRng {
 public:
  static constexpr std::string_view kAlgorithm = "splitmix64-counter+box-muller";

  explicit CounterRng(std::uint64_t key, std::uint64_t stream = 0);

  /// New generator on an independent substream of this one's key.
  CounterRng split(std::uint64_t stream) const { return CounterRng(key_, stream); }

  std::uint64_t next_u64();
  /// Uniform in (0, 1].
  double uniform();
  /// Standard normal via Box-Muller (cosine branch only, two draws each).
  double normal();

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t stream_key_;
  std::uint64_t counter_ = 0;
};

/// Brownian increments on the fine grid and their R-sums on the coarse grid.
struct NoisePath {
  std::uint64_t seed = 0;
  std::vector<double> fine_increments;
  std::vector<double> coarse_increments;
};

/// Gaussian increments with variance dt_fine drawn from stream 0 of `seed`.
NoisePath wiener_path(std::uint64_t seed, const TimeGrid& grid);

/// All-zero path, for deterministic debugging runs.
NoisePath zero_path(const TimeGrid& grid);

/// Re-aggregates a path's fine increments onto a grid with a different R.
NoisePath coarsen(const NoisePath& path, const TimeGrid& grid);

/// x + drift(x) dt + diffusion(x) dW
template <class State, class Drift, class Diffusion>
State ito_euler_step(Drift&& drift, Diffusion&& diffusion, const State& x, double dt, double dW) {
  return x + drift(x) * dt + diffusion(x) * dW;
}

/// Heun predictor-corrector, consistent with the Stratonovich integral:
///   xp = x + a(x) dt + b(x) dW
///   x' = x + (a(x) + a(xp)) dt / 2 + (b(x) + b(xp)) dW / 2
template <class State, class Drift, class Diffusion>
State stratonovich_heun_step(Drift&& drift, Diffusion&& diffusion, const State& x, double dt,
                             double dW) {
  const State a0 = drift(x);
  const State b0 = diffusion(x);
  const State predictor = x + a0 * dt + b0 * dW;
  const State a1 = drift(predictor);
  const State b1 = diffusion(predictor);
  return x + (a0 + a1) * (0.5 * dt) + (b0 + b1) * (0.5 * dW);
}

// Time-dependent variants: drift(t, x), diffusion(t, x). The corrector
// evaluates at t + dt.
template <class State, class Drift, class Diffusion>
State ito_euler_step(Drift&& drift, Diffusion&& diffusion, double t, const State& x, double dt,
                     double dW) {
  return x + drift(t, x) * dt + diffusion(t, x) * dW;
}

template <class State, class Drift, class Diffusion>
State stratonovich_heun_step(Drift&& drift, Diffusion&& diffusion, double t, const State& x,
                             double dt, double dW) {
  const State a0 = drift(t, x);
  const State b0 = diffusion(t, x);
  const State predictor = x + a0 * dt + b0 * dW;
  const State a1 = drift(t + dt, predictor);
  const State b1 = diffusion(t + dt, predictor);
  return x + (a0 + a1) * (0.5 * dt) + (b0 + b1) * (0.5 * dW);
}

}  // namespace qpf
