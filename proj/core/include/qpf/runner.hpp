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
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "qpf/diagnostics.hpp"
#include "qpf/filters.hpp"
#include "qpf/sde.hpp"
#include "qpf/submanifold.hpp"
#include "qpf/system_model.hpp"

namespace qpf {

enum class ProjectionFilterKind { kReduced, kGeneralHeun, kGeneralEuler, kCommuting };
std::string_view projection_kind_name(ProjectionFilterKind kind);
ProjectionFilterKind parse_projection_kind(std::string_view name);

/// Which process drives the filters. kTruth feeds the photocurrent
/// dY = Tr(rho (L + L^dag)) dt + dW generated by the quantum filter itself;
/// kWiener feeds dY = dW directly (the reference-measure convention).
enum class DriveKind { kTruth, kWiener };
std::string_view drive_name(DriveKind kind);
DriveKind parse_drive(std::string_view name);

struct ControlConfig {
  ControlProfile::Kind kind = ControlProfile::Kind::kExpDecay;
  double amplitude = 5.0;
  double rate = 5.0;
  Axis axis = Axis::kY;
  /// Multiply the amplitude by one standard normal draw per trajectory.
  bool random_amplitude = true;
};

/// Product of single-atom states, or an explicit density matrix.
struct InitialStateConfig {
  /// Bloch vectors (x, y, z) per atom; z = +1 is |0>.
  std::vector<Eigen::Vector3d> atom_bloch;
  std::optional<Eigen::MatrixXcd> matrix;
};

struct RunConfig {
  std::string preset = "fig3";
  int n_atoms = 2;
  double mu = 1.0;
  ControlConfig control;
  InitialStateConfig initial_state;
  double horizon = 1.0;
  std::int64_t fine_count = 4096;
  std::int64_t aggregation = 2;
  QuantumFilterScheme quantum_scheme = QuantumFilterScheme::kKraus;
  ProjectionFilterKind projection = ProjectionFilterKind::kReduced;
  std::uint64_t seed_base = 1;
  std::int64_t n_trajectories = 1;
  std::int64_t checkpoint_stride = 8;
  std::string output_dir = "qpf_out";
  int workers = 1;
  Index pointer_index = 0;
  DriveKind drive = DriveKind::kTruth;
  bool zero_noise = false;
  bool write_trajectories = true;
  bool track_positivity = true;
  bool residuals = true;
};

/// Names accepted by preset_config.
std::vector<std::string> preset_names();
/// Throws ConfigError for an unknown name.
RunConfig preset_config(std::string_view name);

/// Parses a JSON document. Omitted keys take the preset's values (the
/// document's "preset", else `preset_override`, else "fig3"). Unknown keys
/// and type errors raise ConfigError with the key path.
RunConfig load_config(std::string_view document,
                      std::optional<std::string> preset_override = std::nullopt);
RunConfig load_config_file(const std::filesystem::path& path,
                           std::optional<std::string> preset_override = std::nullopt);

/// Canonical JSON form of a config, as echoed into run metadata.
std::string config_to_json(const RunConfig& cfg);

/// Initial density matrix described by the config.
Operator initial_density(const RunConfig& cfg);
TimeGrid config_grid(const RunConfig& cfg);
/// Model for trajectory `index`, including its random control amplitude.
SystemModel trajectory_model(const RunConfig& cfg, std::int64_t index);

struct Checkpoint {
  double t = 0.0;
  Eigen::VectorXd theta;
  Eigen::VectorXd rho_diag;
  Eigen::VectorXd rhotilde_diag;
  double frob_err = 0.0;
  double pred_res = 0.0;
  double corr1 = 0.0;
  double corr2 = 0.0;
  double tr_pr = 0.0;
  double log_trace = 0.0;
  double pointer_distance = 0.0;
};

struct FilterTimings {
  double quantum_ns = 0.0;
  double unnormalized_ns = 0.0;
  double projection_ns = 0.0;
  std::int64_t steps = 0;
};

struct TrajectoryRecord {
  std::int64_t index = 0;
  std::uint64_t seed = 0;
  double control_amplitude = 0.0;
  double x0_norm = 0.0;
  std::vector<Checkpoint> checkpoints;
  std::vector<double> observations;
  bool failed = false;
  std::string failure;
  bool theta_guard = false;
  double min_eig_pre = 0.0;
  double max_trace_dev = 0.0;
  FilterTimings timings;
};

inline constexpr double kThetaGuard = 50.0;

TrajectoryRecord run_trajectory(const RunConfig& cfg, std::int64_t index);

struct CheckpointSummary {
  double t = 0.0;
  std::vector<MeanAccumulator> exp_theta;
  std::vector<MeanAccumulator> rho_diag;
  MeanAccumulator frob_err;
  MeanAccumulator pred_res;
  MeanAccumulator corr1;
  MeanAccumulator corr2;
  MeanAccumulator tr_pr;
  MeanAccumulator pointer_distance;

  void add(const Checkpoint& c);
  void merge(const CheckpointSummary& other);
};

struct EnsembleSummary {
  std::int64_t n_trajectories = 0;
  std::int64_t n_failed = 0;
  std::int64_t n_theta_guard = 0;
  double x0_norm = 0.0;
  double min_eig_pre = 0.0;
  double max_trace_dev = 0.0;
  std::vector<CheckpointSummary> checkpoints;
  FilterTimings timings;

  void add(const TrajectoryRecord& record);
  void merge(const EnsembleSummary& other);
  bool too_many_failures() const;
};

struct EnsembleResult {
  std::vector<TrajectoryRecord> records;
  EnsembleSummary summary;
};

/// Runs trajectories 0..n-1 on `cfg.workers` threads. Records are merged in
/// index order, so the result does not depend on the worker count.
EnsembleResult run_ensemble(const RunConfig& cfg);

/// Writes trajectory_<i>.csv, summary.csv and metadata.json into `dir`.
void write_outputs(const EnsembleResult& result, const RunConfig& cfg,
                   const std::filesystem::path& dir);

/// CSV text of a single trajectory.
std::string trajectory_csv(const TrajectoryRecord& record);
std::string summary_csv(const EnsembleSummary& summary);

/// Decimal form with 17 significant digits, enough to round-trip a double.
std::string format_real(double x);

std::string_view build_id();

}  // namespace qpf
