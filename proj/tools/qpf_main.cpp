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

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qpf/bench.hpp"
#include "qpf/errors.hpp"
#include "qpf/invariants.hpp"
#include "qpf/runner.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitFailures = 2;

struct RunArgs {
  std::string config_path;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> trajectories;
  std::optional<int> workers;
  std::string out;
};

int do_run(const RunArgs& args) {
  std::optional<std::string> preset;
  if (!args.preset.empty()) preset = args.preset;
  qpf::RunConfig cfg = args.config_path.empty() ? qpf::load_config("", preset)
                                                : qpf::load_config_file(args.config_path, preset);
  if (!args.preset.empty() && args.preset != cfg.preset) {
    throw qpf::UsageError("--preset " + args.preset + " conflicts with config preset " + cfg.preset);
  }
  if (args.seed) cfg.seed_base = *args.seed;
  if (args.trajectories) cfg.n_trajectories = *args.trajectories;
  if (args.workers) cfg.workers = *args.workers;
  if (!args.out.empty()) cfg.output_dir = args.out;
  if (cfg.n_trajectories < 0) throw qpf::ConfigError("n_trajectories", "must be >= 0");
  if (cfg.workers < 1) throw qpf::ConfigError("workers", "must be >= 1");

  const qpf::EnsembleResult result = qpf::run_ensemble(cfg);
  qpf::write_outputs(result, cfg, cfg.output_dir);

  const auto& s = result.summary;
  std::cout << "preset " << cfg.preset << ": " << s.n_trajectories << " trajectories, "
            << s.n_failed << " failed, " << s.n_theta_guard << " hit the theta guard\n";
  if (!s.checkpoints.empty()) {
    const auto& last = s.checkpoints.back();
    for (std::size_t i = 0; i < last.exp_theta.size(); ++i) {
      std::cout << "  E[exp(theta_" << i + 1 << "(T))] = " << last.exp_theta[i].mean() << " +/- "
                << last.exp_theta[i].stderr_of_mean() << "\n";
    }
    std::cout << "  final Frobenius error (mean) = " << last.frob_err.mean() << "\n";
  }
  std::cout << "outputs written to " << cfg.output_dir << "\n";
  return s.too_many_failures() ? kExitFailures : kExitOk;
}

int do_check(std::uint64_t seed) {
  const auto results = qpf::run_invariant_suite(seed);
  bool ok = true;
  for (const auto& r : results) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
    ok = ok && r.passed;
  }
  return ok ? kExitOk : kExitFailures;
}

int do_bench(int max_atoms, std::int64_t steps, const std::string& scheme) {
  const auto rows = qpf::run_bench(max_atoms, steps, 3, qpf::parse_quantum_scheme(scheme));
  std::cout << qpf::bench_table(rows);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum filter and exponential projection filter simulator"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Simulate trajectories and write CSV outputs");
  run->add_option("config", run_args.config_path, "JSON config file")->check(CLI::ExistingFile);
  run->add_option("--preset", run_args.preset, "Scenario preset (fig3, fig5, hzero, martingale)");
  run->add_option("--seed", run_args.seed, "Base seed; trajectory i uses seed + i");
  run->add_option("--trajectories", run_args.trajectories, "Number of trajectories");
  run->add_option("--workers", run_args.workers, "Worker threads");
  run->add_option("--out", run_args.out, "Output directory");

  std::uint64_t check_seed = 2024;
  auto* check = app.add_subcommand("check", "Run the randomized invariant suite");
  check->add_option("--seed", check_seed, "Seed for the random inputs");

  int max_atoms = 5;
  std::int64_t steps = 2048;
  std::string scheme = "kraus";
  auto* bench = app.add_subcommand("bench", "Per-step cost of the full and projection filters");
  bench->add_option("--max-atoms", max_atoms, "Largest atom count")->check(CLI::Range(1, 8));
  bench->add_option("--steps", steps, "Steps per timed loop")->check(CLI::PositiveNumber);
  bench->add_option("--scheme", scheme, "Quantum filter scheme (kraus or euler)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run) return do_run(run_args);
    if (*check) return do_check(check_seed);
    if (*bench) return do_bench(max_atoms, steps, scheme);
  } catch (const qpf::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailures;
  }
  return kExitUsage;
}
