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

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qpf/errors.hpp"
#include "qpf/runner.hpp"

#ifndef QPF_BUILD_ID
#define QPF_BUILD_ID "qpf-unknown"
#endif

namespace qpf {

using json = nlohmann::ordered_json;

std::string_view build_id() { return QPF_BUILD_ID; }

std::string format_real(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace {

void append_indexed(std::string& out, std::string_view name, Index count) {
  for (Index i = 1; i <= count; ++i) {
    out += ',';
    out += name;
    out += '_';
    out += std::to_string(i);
  }
}

void append_value(std::string& out, double x) {
  out += ',';
  out += format_real(x);
}

void append_stat(std::string& out, const MeanAccumulator& a) {
  append_value(out, a.mean());
  append_value(out, a.stderr_of_mean());
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace

std::string trajectory_csv(const TrajectoryRecord& record) {
  std::string out = "t";
  if (!record.checkpoints.empty()) {
    const Checkpoint& first = record.checkpoints.front();
    append_indexed(out, "theta", first.theta.size());
    append_indexed(out, "rho_diag", first.rho_diag.size());
    append_indexed(out, "rhotilde_diag", first.rhotilde_diag.size());
  }
  out += ",frob_err,pred_res,corr1,corr2,trPR,logtrace\n";
  for (const Checkpoint& c : record.checkpoints) {
    out += format_real(c.t);
    for (Index i = 0; i < c.theta.size(); ++i) append_value(out, c.theta(i));
    for (Index i = 0; i < c.rho_diag.size(); ++i) append_value(out, c.rho_diag(i));
    for (Index i = 0; i < c.rhotilde_diag.size(); ++i) append_value(out, c.rhotilde_diag(i));
    append_value(out, c.frob_err);
    append_value(out, c.pred_res);
    append_value(out, c.corr1);
    append_value(out, c.corr2);
    append_value(out, c.tr_pr);
    append_value(out, c.log_trace);
    out += '\n';
  }
  return out;
}

std::string summary_csv(const EnsembleSummary& summary) {
  std::string out = "t,n";
  if (!summary.checkpoints.empty()) {
    const CheckpointSummary& first = summary.checkpoints.front();
    for (std::size_t i = 1; i <= first.exp_theta.size(); ++i) {
      out += ",exp_theta_" + std::to_string(i) + "_mean,exp_theta_" + std::to_string(i) + "_stderr";
    }
    for (std::size_t i = 1; i <= first.rho_diag.size(); ++i) {
      out += ",rho_diag_" + std::to_string(i) + "_mean,rho_diag_" + std::to_string(i) + "_stderr";
    }
  }
  for (const char* name : {"frob_err", "pred_res", "corr1", "corr2", "trPR", "pointer_distance"}) {
    out += std::string(",") + name + "_mean," + name + "_stderr";
  }
  out += '\n';
  for (const CheckpointSummary& c : summary.checkpoints) {
    out += format_real(c.t);
    out += ',';
    out += std::to_string(c.frob_err.count());
    for (const auto& a : c.exp_theta) append_stat(out, a);
    for (const auto& a : c.rho_diag) append_stat(out, a);
    append_stat(out, c.frob_err);
    append_stat(out, c.pred_res);
    append_stat(out, c.corr1);
    append_stat(out, c.corr2);
    append_stat(out, c.tr_pr);
    append_stat(out, c.pointer_distance);
    out += '\n';
  }
  return out;
}

void write_outputs(const EnsembleResult& result, const RunConfig& cfg,
                   const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string());

  if (cfg.write_trajectories) {
    for (const TrajectoryRecord& rec : result.records) {
      const std::string stem = "trajectory_" + std::to_string(rec.index);
      write_file(dir / (stem + ".csv"), trajectory_csv(rec));
      std::string obs = "k,t,dY\n";
      const double dt = config_grid(cfg).coarse_step();
      for (std::size_t k = 0; k < rec.observations.size(); ++k) {
        obs += std::to_string(k);
        append_value(obs, static_cast<double>(k) * dt);
        append_value(obs, rec.observations[k]);
        obs += '\n';
      }
      write_file(dir / (stem + "_dY.csv"), obs);
    }
  }
  write_file(dir / "summary.csv", summary_csv(result.summary));

  const EnsembleSummary& s = result.summary;
  const Index dim = Index{1} << cfg.n_atoms;
  json meta;
  meta["config"] = json::parse(config_to_json(cfg));
  meta["basis"] =
      "ordered product basis |q1 q2 ... qN>, q1 most significant; |0> is the +1 eigenstate "
      "of sigma_z, so index 0 is |00...0>";
  meta["rng"] = {{"algorithm", std::string(CounterRng::kAlgorithm)},
                 {"trajectory_seed", "seed_base + trajectory_index"},
                 {"streams", {{"0", "Wiener increments"}, {"1", "control amplitude"}}}};
  meta["build_id"] = std::string(build_id());
  const std::int64_t m = s.checkpoints.empty() || s.checkpoints.front().exp_theta.empty()
                             ? 0
                             : static_cast<std::int64_t>(s.checkpoints.front().exp_theta.size());
  meta["sde_components"] = {{"quantum_filter", dim * dim - 1}, {"projection_filter", m}};
  const double steps = s.timings.steps > 0 ? static_cast<double>(s.timings.steps) : 1.0;
  meta["timings_ns_per_step"] = {{"quantum_filter", s.timings.quantum_ns / steps},
                                 {"unnormalized_filter", s.timings.unnormalized_ns / steps},
                                 {"projection_filter", s.timings.projection_ns / steps},
                                 {"steps", s.timings.steps}};
  meta["ensemble"] = {{"n_trajectories", s.n_trajectories},
                      {"n_failed", s.n_failed},
                      {"n_theta_guard", s.n_theta_guard},
                      {"x0_norm", s.x0_norm},
                      {"min_eigenvalue_pre_correction", s.min_eig_pre},
                      {"max_trace_deviation", s.max_trace_dev}};
  json trajectories = json::array();
  for (const TrajectoryRecord& rec : result.records) {
    json t = {{"index", rec.index},
              {"seed", rec.seed},
              {"control_amplitude", rec.control_amplitude},
              {"failed", rec.failed},
              {"theta_guard", rec.theta_guard}};
    if (rec.failed) t["failure"] = rec.failure;
    trajectories.push_back(std::move(t));
  }
  meta["trajectories"] = std::move(trajectories);
  write_file(dir / "metadata.json", meta.dump(2) + "\n");
}

}  // namespace qpf
