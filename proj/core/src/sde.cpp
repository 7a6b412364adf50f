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

#include "qpf/sde.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "qpf/errors.hpp"

namespace qpf {

namespace {

constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

TimeGrid make_grid(double horizon, std::int64_t fine_count, std::int64_t aggregation) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw UsageError("time grid: horizon T must be positive and finite");
  }
  if (aggregation < 1) throw UsageError("time grid: aggregation R must be >= 1");
  if (fine_count < aggregation) throw UsageError("time grid: N0 must be >= R");
  if (fine_count % aggregation != 0) {
    throw UsageError("time grid: N0 (" + std::to_string(fine_count) +
                     ") is not divisible by R (" + std::to_string(aggregation) + ")");
  }
  return TimeGrid{horizon, fine_count, aggregation};
}

CounterRng::CounterRng(std::uint64_t key, std::uint64_t stream)
    : key_(key), stream_key_(mix64(key ^ mix64(stream * kGamma + 0x632be59bd9b4e019ULL))) {}

std::uint64_t CounterRng::next_u64() {
  ++counter_;
  return mix64(stream_key_ + counter_ * kGamma);
}

double CounterRng::uniform() {
  return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

double CounterRng::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

NoisePath wiener_path(std::uint64_t seed, const TimeGrid& grid) {
  NoisePath path;
  path.seed = seed;
  CounterRng rng(seed, 0);
  const double scale = std::sqrt(grid.fine_step());
  path.fine_increments.resize(static_cast<std::size_t>(grid.fine_count));
  for (auto& dw : path.fine_increments) dw = scale * rng.normal();
  return coarsen(path, grid);
}

NoisePath zero_path(const TimeGrid& grid) {
  NoisePath path;
  path.fine_increments.assign(static_cast<std::size_t>(grid.fine_count), 0.0);
  path.coarse_increments.assign(static_cast<std::size_t>(grid.coarse_count()), 0.0);
  return path;
}

NoisePath coarsen(const NoisePath& path, const TimeGrid& grid) {
  if (static_cast<std::int64_t>(path.fine_increments.size()) != grid.fine_count) {
    throw UsageError("coarsen: path length does not match grid N0");
  }
  NoisePath out;
  out.seed = path.seed;
  out.fine_increments = path.fine_increments;
  const auto r = static_cast<std::size_t>(grid.aggregation);
  out.coarse_increments.assign(static_cast<std::size_t>(grid.coarse_count()), 0.0);
  for (std::size_t k = 0; k < out.coarse_increments.size(); ++k) {
    double sum = 0.0;
    for (std::size_t j = 0; j < r; ++j) sum += out.fine_increments[k * r + j];
    out.coarse_increments[k] = sum;
  }
  return out;
}

}  // namespace qpf
