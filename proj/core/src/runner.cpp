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

#include "qpf/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "qpf/errors.hpp"
#include "qpf/linalg.hpp"

namespace qpf {

using json = nlohmann::ordered_json;

std::string_view projection_kind_name(ProjectionFilterKind kind) {
  switch (kind) {
    case ProjectionFilterKind::kReduced: return "reduced";
    case ProjectionFilterKind::kGeneralHeun: return "general_heun";
    case ProjectionFilterKind::kGeneralEuler: return "general_euler";
    case ProjectionFilterKind::kCommuting: return "commuting";
  }
  return "?";
}

ProjectionFilterKind parse_projection_kind(std::string_view name) {
  if (name == "reduced") return ProjectionFilterKind::kReduced;
  if (name == "general_heun") return ProjectionFilterKind::kGeneralHeun;
  if (name == "general_euler") return ProjectionFilterKind::kGeneralEuler;
  if (name == "commuting") return ProjectionFilterKind::kCommuting;
  throw UsageError("unknown projection filter '" + std::string(name) +
                   "' (expected reduced, general_heun, general_euler or commuting)");
}

std::string_view drive_name(DriveKind kind) {
  return kind == DriveKind::kTruth ? "truth" : "wiener";
}

DriveKind parse_drive(std::string_view name) {
  if (name == "truth") return DriveKind::kTruth;
  if (name == "wiener") return DriveKind::kWiener;
  throw UsageError("unknown drive '" + std::string(name) + "' (expected truth or wiener)");
}

// ---------------------------------------------------------------------------
// Presets

std::vector<std::string> preset_names() { return {"fig3", "fig5", "hzero", "martingale"}; }

RunConfig preset_config(std::string_view name) {
  RunConfig cfg;
  cfg.preset = std::string(name);
  // First atom 0.75|0><0| + 0.25|1><1|, second atom maximally mixed.
  cfg.initial_state.atom_bloch = {Eigen::Vector3d(0.0, 0.0, 0.5), Eigen::Vector3d(0.0, 0.0, 0.0)};
  if (name == "fig3") return cfg;
  if (name == "fig5") {
    cfg.control.axis = Axis::kZ;
    return cfg;
  }
  if (name == "hzero") {
    cfg.control = ControlConfig{ControlProfile::Kind::kZero, 0.0, 0.0, Axis::kY, false};
    return cfg;
  }
  if (name == "martingale") {
    cfg.control = ControlConfig{ControlProfile::Kind::kConstant, 1.0, 0.0, Axis::kZ, false};
    // Same populations as fig3, plus coherences so that [H, rho0] != 0.
    cfg.initial_state.atom_bloch = {Eigen::Vector3d(0.6, 0.0, 0.5),
                                    Eigen::Vector3d(0.8, 0.0, 0.0)};
    cfg.projection = ProjectionFilterKind::kCommuting;
    cfg.drive = DriveKind::kWiener;
    cfg.n_trajectories = 2000;
    cfg.checkpoint_stride = 128;
    cfg.write_trajectories = false;
    cfg.track_positivity = false;
    return cfg;
  }
  throw ConfigError("preset", "unknown preset '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Config parsing

namespace {

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& item : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      throw ConfigError(join(path, item.key()), "unknown key");
    }
  }
}

double as_real(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(path, "must be finite");
  return x;
}

std::int64_t as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
  return v.get<std::int64_t>();
}

bool as_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) throw ConfigError(path, "expected true or false");
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw ConfigError(path, "expected a string");
  return v.get<std::string>();
}

template <class F>
auto parse_enum(const json& v, const std::string& path, F&& parse) {
  const std::string s = as_string(v, path);
  try {
    return parse(s);
  } catch (const UsageError& e) {
    throw ConfigError(path, e.what());
  }
}

Eigen::MatrixXd as_real_matrix(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) throw ConfigError(path, "expected a non-empty array of rows");
  const auto rows = static_cast<Index>(v.size());
  Eigen::MatrixXd m(rows, rows);
  for (Index i = 0; i < rows; ++i) {
    const json& row = v[static_cast<std::size_t>(i)];
    const std::string rp = path + "[" + std::to_string(i) + "]";
    if (!row.is_array() || static_cast<Index>(row.size()) != rows) {
      throw ConfigError(rp, "expected a row of length " + std::to_string(rows));
    }
    for (Index j = 0; j < rows; ++j) {
      m(i, j) = as_real(row[static_cast<std::size_t>(j)], rp + "[" + std::to_string(j) + "]");
    }
  }
  return m;
}

void apply_control(const json& v, ControlConfig& c) {
  const std::string p = "control";
  check_keys(v, p, {"kind", "amplitude", "rate", "axis", "random_amplitude"});
  if (v.contains("kind")) c.kind = parse_enum(v["kind"], p + ".kind", parse_control_kind);
  if (v.contains("amplitude")) c.amplitude = as_real(v["amplitude"], p + ".amplitude");
  if (v.contains("rate")) c.rate = as_real(v["rate"], p + ".rate");
  if (v.contains("axis")) c.axis = parse_enum(v["axis"], p + ".axis", parse_axis);
  if (v.contains("random_amplitude")) {
    c.random_amplitude = as_bool(v["random_amplitude"], p + ".random_amplitude");
  }
  if (c.axis == Axis::kX) throw ConfigError(p + ".axis", "control axis must be y or z");
}

void apply_initial_state(const json& v, InitialStateConfig& s) {
  const std::string p = "initial_state";
  check_keys(v, p, {"atom_excited", "atom_bloch", "matrix"});
  if (v.size() != 1) {
    throw ConfigError(p, "give exactly one of atom_excited, atom_bloch or matrix");
  }
  s = InitialStateConfig{};
  if (v.contains("atom_excited")) {
    const json& a = v["atom_excited"];
    if (!a.is_array() || a.empty()) throw ConfigError(p + ".atom_excited", "expected an array");
    for (std::size_t k = 0; k < a.size(); ++k) {
      const std::string kp = p + ".atom_excited[" + std::to_string(k) + "]";
      const double prob = as_real(a[k], kp);
      if (prob < 0.0 || prob > 1.0) throw ConfigError(kp, "probability must be in [0, 1]");
      s.atom_bloch.emplace_back(0.0, 0.0, 1.0 - 2.0 * prob);
    }
  } else if (v.contains("atom_bloch")) {
    const json& a = v["atom_bloch"];
    if (!a.is_array() || a.empty()) throw ConfigError(p + ".atom_bloch", "expected an array");
    for (std::size_t k = 0; k < a.size(); ++k) {
      const std::string kp = p + ".atom_bloch[" + std::to_string(k) + "]";
      if (!a[k].is_array() || a[k].size() != 3) throw ConfigError(kp, "expected [x, y, z]");
      Eigen::Vector3d r;
      for (int c = 0; c < 3; ++c) r(c) = as_real(a[k][static_cast<std::size_t>(c)], kp);
      if (r.norm() > 1.0 + 1e-12) throw ConfigError(kp, "Bloch vector longer than 1");
      s.atom_bloch.push_back(r);
    }
  } else {
    const json& m = v["matrix"];
    check_keys(m, p + ".matrix", {"re", "im"});
    if (!m.contains("re")) throw ConfigError(p + ".matrix.re", "missing");
    const Eigen::MatrixXd re = as_real_matrix(m["re"], p + ".matrix.re");
    Eigen::MatrixXd im = Eigen::MatrixXd::Zero(re.rows(), re.cols());
    if (m.contains("im")) {
      im = as_real_matrix(m["im"], p + ".matrix.im");
      if (im.rows() != re.rows()) throw ConfigError(p + ".matrix.im", "shape differs from re");
    }
    Eigen::MatrixXcd rho(re.rows(), re.cols());
    rho.real() = re;
    rho.imag() = im;
    s.matrix = std::move(rho);
  }
}

void validate(const RunConfig& cfg) {
  if (cfg.n_atoms < 1 || cfg.n_atoms > kMaxAtoms) {
    throw ConfigError("n_atoms", "must be in [1, " + std::to_string(kMaxAtoms) + "]");
  }
  if (!(cfg.mu > 0.0)) throw ConfigError("mu", "must be positive");
  if (!(cfg.horizon > 0.0)) throw ConfigError("grid.T", "must be positive");
  if (cfg.aggregation < 1) throw ConfigError("grid.R", "must be >= 1");
  if (cfg.fine_count < cfg.aggregation) throw ConfigError("grid.N0", "must be >= grid.R");
  if (cfg.fine_count % cfg.aggregation != 0) {
    throw ConfigError("grid.N0", "grid.N0 (" + std::to_string(cfg.fine_count) +
                                     ") is not divisible by grid.R (" +
                                     std::to_string(cfg.aggregation) + ")");
  }
  if (cfg.n_trajectories < 0) throw ConfigError("n_trajectories", "must be >= 0");
  if (cfg.checkpoint_stride < 1) throw ConfigError("checkpoint_stride", "must be >= 1");
  if (cfg.workers < 1) throw ConfigError("workers", "must be >= 1");
  const Index dim = Index{1} << cfg.n_atoms;
  if (cfg.pointer_index < 0 || cfg.pointer_index >= dim) {
    throw ConfigError("pointer_index", "must be in [0, " + std::to_string(dim) + ")");
  }
  if (cfg.control.kind == ControlProfile::Kind::kExpDecay && cfg.control.rate < 0.0) {
    throw ConfigError("control.rate", "must be >= 0");
  }
  const auto& s = cfg.initial_state;
  if (s.matrix) {
    const Eigen::MatrixXcd& m = *s.matrix;
    if (m.rows() != dim) {
      throw ConfigError("initial_state.matrix", "dimension must be 2^n_atoms = " +
                                                    std::to_string(dim));
    }
    const Operator rho(m);
    if (!rho.is_hermitian()) throw ConfigError("initial_state.matrix", "not Hermitian");
    if (std::abs(rho.trace() - 1.0) > 1e-9) throw ConfigError("initial_state.matrix", "trace != 1");
    if (min_eigenvalue(rho) < -1e-10) throw ConfigError("initial_state.matrix", "not PSD");
  } else if (static_cast<int>(s.atom_bloch.size()) != cfg.n_atoms) {
    throw ConfigError("initial_state", "needs one entry per atom (" +
                                           std::to_string(cfg.n_atoms) + ")");
  }
}

}  // namespace

RunConfig load_config(std::string_view document, std::optional<std::string> preset_override) {
  json doc;
  const std::string text(document);
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    doc = json::object();
  } else {
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError("<document>", std::string("malformed JSON: ") + e.what());
    }
  }
  check_keys(doc, "",
             {"preset", "n_atoms", "mu", "control", "initial_state", "grid", "schemes",
              "seed_base", "n_trajectories", "checkpoint_stride", "output_dir", "workers",
              "pointer_index", "drive", "zero_noise", "write_trajectories", "track_positivity",
              "residuals"});

  std::string preset = preset_override.value_or("fig3");
  if (doc.contains("preset")) preset = as_string(doc["preset"], "preset");
  RunConfig cfg = preset_config(preset);

  if (doc.contains("n_atoms")) cfg.n_atoms = static_cast<int>(as_int(doc["n_atoms"], "n_atoms"));
  if (doc.contains("mu")) cfg.mu = as_real(doc["mu"], "mu");
  if (doc.contains("control")) apply_control(doc["control"], cfg.control);
  if (doc.contains("initial_state")) {
    apply_initial_state(doc["initial_state"], cfg.initial_state);
  } else if (doc.contains("n_atoms") && cfg.n_atoms != 2) {
    // Preset state is for two atoms; extra atoms start maximally mixed.
    cfg.initial_state.atom_bloch.resize(static_cast<std::size_t>(std::max(cfg.n_atoms, 1)),
                                        Eigen::Vector3d::Zero());
  }
  if (doc.contains("grid")) {
    const json& g = doc["grid"];
    check_keys(g, "grid", {"T", "N0", "R"});
    if (g.contains("T")) cfg.horizon = as_real(g["T"], "grid.T");
    if (g.contains("N0")) cfg.fine_count = as_int(g["N0"], "grid.N0");
    if (g.contains("R")) cfg.aggregation = as_int(g["R"], "grid.R");
  }
  if (doc.contains("schemes")) {
    const json& s = doc["schemes"];
    check_keys(s, "schemes", {"quantum_filter", "projection_filter"});
    if (s.contains("quantum_filter")) {
      cfg.quantum_scheme =
          parse_enum(s["quantum_filter"], "schemes.quantum_filter", parse_quantum_scheme);
    }
    if (s.contains("projection_filter")) {
      cfg.projection =
          parse_enum(s["projection_filter"], "schemes.projection_filter", parse_projection_kind);
    }
  }
  if (doc.contains("seed_base")) {
    const json& v = doc["seed_base"];
    if (!v.is_number_unsigned()) throw ConfigError("seed_base", "expected a nonnegative integer");
    cfg.seed_base = v.get<std::uint64_t>();
  }
  if (doc.contains("n_trajectories")) {
    cfg.n_trajectories = as_int(doc["n_trajectories"], "n_trajectories");
  }
  if (doc.contains("checkpoint_stride")) {
    cfg.checkpoint_stride = as_int(doc["checkpoint_stride"], "checkpoint_stride");
  }
  if (doc.contains("output_dir")) cfg.output_dir = as_string(doc["output_dir"], "output_dir");
  if (doc.contains("workers")) cfg.workers = static_cast<int>(as_int(doc["workers"], "workers"));
  if (doc.contains("pointer_index")) {
    cfg.pointer_index = as_int(doc["pointer_index"], "pointer_index");
  }
  if (doc.contains("drive")) cfg.drive = parse_enum(doc["drive"], "drive", parse_drive);
  if (doc.contains("zero_noise")) cfg.zero_noise = as_bool(doc["zero_noise"], "zero_noise");
  if (doc.contains("write_trajectories")) {
    cfg.write_trajectories = as_bool(doc["write_trajectories"], "write_trajectories");
  }
  if (doc.contains("track_positivity")) {
    cfg.track_positivity = as_bool(doc["track_positivity"], "track_positivity");
  }
  if (doc.contains("residuals")) cfg.residuals = as_bool(doc["residuals"], "residuals");
  validate(cfg);
  return cfg;
}

RunConfig load_config_file(const std::filesystem::path& path,
                           std::optional<std::string> preset_override) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return load_config(text.str(), std::move(preset_override));
}

std::string config_to_json(const RunConfig& cfg) {
  json doc;
  doc["preset"] = cfg.preset;
  doc["n_atoms"] = cfg.n_atoms;
  doc["mu"] = cfg.mu;
  doc["control"] = {{"kind", std::string(control_kind_name(cfg.control.kind))},
                    {"amplitude", cfg.control.amplitude},
                    {"rate", cfg.control.rate},
                    {"axis", std::string(axis_name(cfg.control.axis))},
                    {"random_amplitude", cfg.control.random_amplitude}};
  if (cfg.initial_state.matrix) {
    const Eigen::MatrixXcd& m = *cfg.initial_state.matrix;
    json re = json::array();
    json im = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
      json rr = json::array();
      json ri = json::array();
      for (Index j = 0; j < m.cols(); ++j) {
        rr.push_back(m(i, j).real());
        ri.push_back(m(i, j).imag());
      }
      re.push_back(rr);
      im.push_back(ri);
    }
    doc["initial_state"] = {{"matrix", {{"re", re}, {"im", im}}}};
  } else {
    json bloch = json::array();
    for (const auto& r : cfg.initial_state.atom_bloch) bloch.push_back({r(0), r(1), r(2)});
    doc["initial_state"] = {{"atom_bloch", bloch}};
  }
  doc["grid"] = {{"T", cfg.horizon}, {"N0", cfg.fine_count}, {"R", cfg.aggregation}};
  doc["schemes"] = {{"quantum_filter", std::string(scheme_name(cfg.quantum_scheme))},
                    {"projection_filter", std::string(projection_kind_name(cfg.projection))}};
  doc["seed_base"] = cfg.seed_base;
  doc["n_trajectories"] = cfg.n_trajectories;
  doc["checkpoint_stride"] = cfg.checkpoint_stride;
  doc["output_dir"] = cfg.output_dir;
  doc["workers"] = cfg.workers;
  doc["pointer_index"] = cfg.pointer_index;
  doc["drive"] = std::string(drive_name(cfg.drive));
  doc["zero_noise"] = cfg.zero_noise;
  doc["write_trajectories"] = cfg.write_trajectories;
  doc["track_positivity"] = cfg.track_positivity;
  doc["residuals"] = cfg.residuals;
  return doc.dump(2);
}

// ---------------------------------------------------------------------------
// Scenario construction

Operator initial_density(const RunConfig& cfg) {
  if (cfg.initial_state.matrix) return Operator(*cfg.initial_state.matrix).hermitian_part();
  Operator rho;
  for (std::size_t k = 0; k < cfg.initial_state.atom_bloch.size(); ++k) {
    const Eigen::Vector3d& r = cfg.initial_state.atom_bloch[k];
    const Operator atom =
        ((Operator::identity(2) + pauli(Axis::kX) * r(0) + pauli(Axis::kY) * r(1) +
          pauli(Axis::kZ) * r(2)) *
         0.5)
            .hermitian_part();
    rho = k == 0 ? atom : kron(rho, atom);
  }
  return rho.hermitian_part();
}

TimeGrid config_grid(const RunConfig& cfg) {
  return make_grid(cfg.horizon, cfg.fine_count, cfg.aggregation);
}

SystemModel trajectory_model(const RunConfig& cfg, std::int64_t index) {
  const auto& c = cfg.control;
  double amplitude = c.amplitude;
  if (c.random_amplitude && c.kind != ControlProfile::Kind::kZero) {
    CounterRng rng(cfg.seed_base + static_cast<std::uint64_t>(index), 1);
    amplitude *= rng.normal();
  }
  ControlProfile profile{c.kind, c.kind == ControlProfile::Kind::kZero ? 0.0 : amplitude, c.rate};
  return build_spin_model(cfg.n_atoms, cfg.mu, profile, c.axis);
}

// ---------------------------------------------------------------------------
// Trajectories

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ns(Clock::time_point start) {
  return std::chrono::duration<double, std::nano>(Clock::now() - start).count();
}

Checkpoint make_checkpoint(const RunConfig& cfg, const Submanifold& sub, const SystemModel& model,
                           double t, const FilterState& rho, const UnnormalizedState& bar,
                           const ThetaState& theta) {
  Checkpoint c;
  c.t = t;
  c.theta = theta.theta;
  c.rho_diag = rho.rho.real_diagonal();
  const Operator manifold = manifold_state(sub, theta.theta);
  const FilterState approx = normalize(manifold);
  c.rhotilde_diag = approx.rho.real_diagonal();
  c.frob_err = frobenius_error(rho.rho, approx.rho);
  if (cfg.residuals) {
    try {
      const ResidualReport r = residual_report(sub, model, t, theta.theta);
      c.pred_res = r.prediction_norm;
      c.corr1 = r.correction1_norm;
      c.corr2 = r.correction2_norm;
    } catch (const NearSingularMetric&) {
      c.pred_res = c.corr1 = c.corr2 = std::numeric_limits<double>::quiet_NaN();
    }
  }
  c.tr_pr = off_pointer_weight(manifold, cfg.pointer_index);
  c.log_trace = bar.log_trace();
  c.pointer_distance = pointer_distance(rho.rho, cfg.pointer_index);
  return c;
}

}  // namespace

TrajectoryRecord run_trajectory(const RunConfig& cfg, std::int64_t index) {
  TrajectoryRecord rec;
  rec.index = index;
  rec.seed = cfg.seed_base + static_cast<std::uint64_t>(index);

  const SystemModel model = trajectory_model(cfg, index);
  rec.control_amplitude = model.control().profile.amplitude;
  const Operator rho0 = initial_density(cfg);
  const Submanifold sub = default_submanifold(model, rho0);
  const TimeGrid grid = config_grid(cfg);
  if (cfg.projection == ProjectionFilterKind::kCommuting &&
      !hamiltonian_commutes_with_coupling(model)) {
    throw UsageError("commuting projection filter requires [H, L] = 0");
  }
  const NoisePath noise = cfg.zero_noise ? zero_path(grid) : wiener_path(rec.seed, grid);
  std::optional<ReducedProjectionFilter> fast;
  if (cfg.projection == ProjectionFilterKind::kReduced) fast.emplace(sub, model);

  rec.x0_norm = frobenius_norm(initial_prediction_operator(model, rho0));
  const Eigen::MatrixXcd coupling_sum = model.coupling().matrix() + model.coupling_adjoint().matrix();

  FilterState rho{rho0};
  UnnormalizedState bar{rho0};
  ThetaState theta = ThetaState::origin(sub.size());
  rec.min_eig_pre = min_eigenvalue(rho0);

  const std::int64_t steps = grid.coarse_count();
  const double dt = grid.coarse_step();
  rec.observations.reserve(static_cast<std::size_t>(steps));
  rec.checkpoints.reserve(static_cast<std::size_t>(steps / cfg.checkpoint_stride + 2));
  rec.checkpoints.push_back(make_checkpoint(cfg, sub, model, 0.0, rho, bar, theta));

  for (std::int64_t k = 0; k < steps; ++k) {
    const double t = grid.coarse_time(k);
    const double dw = noise.coarse_increments[static_cast<std::size_t>(k)];
    double dy = dw;
    if (cfg.drive == DriveKind::kTruth) dy += (rho.rho.matrix() * coupling_sum).trace().real() * dt;
    rec.observations.push_back(dy);
    try {
      QuantumStepReport report;
      auto start = Clock::now();
      rho = quantum_filter_step(model, rho, t, dt, dy, cfg.quantum_scheme,
                                cfg.track_positivity ? &report : nullptr);
      rec.timings.quantum_ns += elapsed_ns(start);

      start = Clock::now();
      bar = unnormalized_filter_step(model, bar, t, dt, dy);
      rec.timings.unnormalized_ns += elapsed_ns(start);

      start = Clock::now();
      theta.t = t;
      switch (cfg.projection) {
        case ProjectionFilterKind::kReduced: fast->step(theta, dt, dy); break;
        case ProjectionFilterKind::kGeneralHeun:
          theta = projection_filter_step_general(sub, model, theta, dt, dy, ProjectionScheme::kHeun);
          break;
        case ProjectionFilterKind::kGeneralEuler:
          theta = projection_filter_step_general(sub, model, theta, dt, dy, ProjectionScheme::kEuler);
          break;
        case ProjectionFilterKind::kCommuting:
          theta = projection_filter_step_commuting(sub, theta, dt, dy);
          break;
      }
      rec.timings.projection_ns += elapsed_ns(start);
      ++rec.timings.steps;

      if (cfg.track_positivity) {
        rec.min_eig_pre = std::min(rec.min_eig_pre, report.min_eigenvalue_before);
        rec.max_trace_dev = std::max(rec.max_trace_dev, std::abs(rho.rho.trace().real() - 1.0));
      }
      if (!theta.theta.allFinite()) throw StepFailure("projection filter state is not finite", t);
      if (theta.theta.cwiseAbs().maxCoeff() > kThetaGuard) rec.theta_guard = true;

      if ((k + 1) % cfg.checkpoint_stride == 0 || k + 1 == steps) {
        rec.checkpoints.push_back(
            make_checkpoint(cfg, sub, model, grid.coarse_time(k + 1), rho, bar, theta));
      }
    } catch (const StepFailure& e) {
      rec.failed = true;
      rec.failure = e.what();
      break;
    } catch (const NearSingularMetric& e) {
      rec.failed = true;
      rec.failure = e.what();
      break;
    }
  }
  return rec;
}

// ---------------------------------------------------------------------------
// Ensembles

void CheckpointSummary::add(const Checkpoint& c) {
  t = c.t;
  if (exp_theta.empty()) {
    exp_theta.resize(static_cast<std::size_t>(c.theta.size()));
    rho_diag.resize(static_cast<std::size_t>(c.rho_diag.size()));
  }
  for (std::size_t i = 0; i < exp_theta.size(); ++i) {
    exp_theta[i].add(std::exp(c.theta(static_cast<Index>(i))));
  }
  for (std::size_t i = 0; i < rho_diag.size(); ++i) {
    rho_diag[i].add(c.rho_diag(static_cast<Index>(i)));
  }
  frob_err.add(c.frob_err);
  pred_res.add(c.pred_res);
  corr1.add(c.corr1);
  corr2.add(c.corr2);
  tr_pr.add(c.tr_pr);
  pointer_distance.add(c.pointer_distance);
}

void CheckpointSummary::merge(const CheckpointSummary& other) {
  if (other.frob_err.count() == 0) return;
  if (frob_err.count() == 0) {
    *this = other;
    return;
  }
  for (std::size_t i = 0; i < exp_theta.size(); ++i) exp_theta[i].merge(other.exp_theta[i]);
  for (std::size_t i = 0; i < rho_diag.size(); ++i) rho_diag[i].merge(other.rho_diag[i]);
  frob_err.merge(other.frob_err);
  pred_res.merge(other.pred_res);
  corr1.merge(other.corr1);
  corr2.merge(other.corr2);
  tr_pr.merge(other.tr_pr);
  pointer_distance.merge(other.pointer_distance);
}

void EnsembleSummary::add(const TrajectoryRecord& record) {
  ++n_trajectories;
  if (record.theta_guard) ++n_theta_guard;
  timings.quantum_ns += record.timings.quantum_ns;
  timings.unnormalized_ns += record.timings.unnormalized_ns;
  timings.projection_ns += record.timings.projection_ns;
  timings.steps += record.timings.steps;
  x0_norm = std::max(x0_norm, record.x0_norm);
  min_eig_pre = n_trajectories == 1 ? record.min_eig_pre : std::min(min_eig_pre, record.min_eig_pre);
  max_trace_dev = std::max(max_trace_dev, record.max_trace_dev);
  if (record.failed) {
    ++n_failed;
    return;
  }
  if (checkpoints.empty()) checkpoints.resize(record.checkpoints.size());
  if (checkpoints.size() != record.checkpoints.size()) {
    throw UsageError("ensemble records have different checkpoint counts");
  }
  for (std::size_t k = 0; k < checkpoints.size(); ++k) checkpoints[k].add(record.checkpoints[k]);
}

void EnsembleSummary::merge(const EnsembleSummary& other) {
  if (other.n_trajectories == 0) return;
  if (n_trajectories == 0) {
    *this = other;
    return;
  }
  n_trajectories += other.n_trajectories;
  n_failed += other.n_failed;
  n_theta_guard += other.n_theta_guard;
  x0_norm = std::max(x0_norm, other.x0_norm);
  min_eig_pre = std::min(min_eig_pre, other.min_eig_pre);
  max_trace_dev = std::max(max_trace_dev, other.max_trace_dev);
  timings.quantum_ns += other.timings.quantum_ns;
  timings.unnormalized_ns += other.timings.unnormalized_ns;
  timings.projection_ns += other.timings.projection_ns;
  timings.steps += other.timings.steps;
  if (checkpoints.empty()) {
    checkpoints = other.checkpoints;
  } else if (!other.checkpoints.empty()) {
    if (checkpoints.size() != other.checkpoints.size()) {
      throw UsageError("ensemble summaries have different checkpoint counts");
    }
    for (std::size_t k = 0; k < checkpoints.size(); ++k) checkpoints[k].merge(other.checkpoints[k]);
  }
}

bool EnsembleSummary::too_many_failures() const {
  return n_trajectories > 0 && 10 * n_failed > n_trajectories;
}

EnsembleResult run_ensemble(const RunConfig& cfg) {
  validate(cfg);
  EnsembleResult result;
  const std::int64_t n = cfg.n_trajectories;
  if (n == 0) return result;
  // Surface configuration problems before spawning workers.
  {
    const SystemModel model = trajectory_model(cfg, 0);
    const Submanifold sub = default_submanifold(model, initial_density(cfg));
    if (cfg.projection == ProjectionFilterKind::kCommuting &&
        !hamiltonian_commutes_with_coupling(model)) {
      throw ConfigError("schemes.projection_filter",
                        "commuting filter requires a control Hamiltonian commuting with L");
    }
  }

  result.records.resize(static_cast<std::size_t>(n));
  std::atomic<std::int64_t> next{0};
  auto worker = [&] {
    for (std::int64_t i = next++; i < n; i = next++) {
      auto& slot = result.records[static_cast<std::size_t>(i)];
      try {
        slot = run_trajectory(cfg, i);
      } catch (const std::exception& e) {
        slot = TrajectoryRecord{};
        slot.index = i;
        slot.seed = cfg.seed_base + static_cast<std::uint64_t>(i);
        slot.failed = true;
        slot.failure = e.what();
      }
    }
  };
  const int workers = static_cast<int>(std::min<std::int64_t>(cfg.workers, n));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& rec : result.records) result.summary.add(rec);
  return result;
}

}  // namespace qpf
