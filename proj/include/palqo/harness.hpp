// Copyright 2026 The PALQO Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "palqo/ansatz.hpp"
#include "palqo/dmd.hpp"
#include "palqo/pauli.hpp"
#include "palqo/pinn.hpp"
#include "palqo/predictor.hpp"
#include "palqo/vqe.hpp"

namespace palqo {

enum class Method { Vanilla, Palqo, Dmd };
std::string_view to_string(Method m);
Method parse_method(std::string_view text);

struct HamiltonianConfig {
  std::string builder;  // tfim, heisenberg, xxz or file
  std::size_t n = 0;
  double j = 1.0, h = 1.0;                  // tfim
  double jx = 1.0, jy = 1.0, jz = 1.0;      // heisenberg (with h)
  double jp = 1.0, delta = 1.0;             // xxz (with j)
  std::filesystem::path file;

  Hamiltonian build() const;
  std::string describe() const;
};

struct AnsatzConfig {
  std::string type = "hea";  // hea, hva or generators
  std::size_t layers = 1;
  std::filesystem::path file;

  AnsatzSpec build(const Hamiltonian& h) const;
};

struct ExperimentConfig {
  std::string name;
  std::optional<Method> method;
  HamiltonianConfig hamiltonian;
  AnsatzConfig ansatz;
  VqeConfig vqe;            // init_seed is replaced by each entry of `seeds`
  PalqoConfig palqo;        // loop.vqe is filled from `vqe` at run time
  DmdConfig dmd;            // likewise
  bool has_palqo_section = false;
  bool has_dmd_section = false;
  bool baseline = true;     // also run plain descent per seed for the speedup
  std::optional<std::size_t> baseline_max_iters;  // defaults to vqe.max_iters
  std::filesystem::path output_dir;  // relative to the output root; defaults to name
  std::vector<std::uint64_t> seeds{0};
  std::string source_text;  // copied verbatim next to the results

  /// Checks method-specific sections and every referenced file.
  void validate(Method method) const;
};

/// Parses the YAML schema documented in the README. Unknown keys, wrong
/// types and out-of-range values throw Error(Config) naming the line.
/// Relative file paths resolve against `base_dir`.
ExperimentConfig parse_experiment_config(std::string_view yaml, const std::filesystem::path& base_dir = {},
                                         std::string_view origin = "config");
ExperimentConfig load_experiment_config(const std::filesystem::path& file);

/// |e_hat - e_target|.
double compute_delta_e(double e_hat, double e_target);

/// baseline / method, or nullopt when either count is missing or zero.
std::optional<double> compute_speedup(std::optional<std::uint64_t> baseline_iters,
                                      std::optional<std::uint64_t> method_iters);

/// Quantum cost re-derived from persisted records: each quantum record after
/// the first is one gradient step, each predicted record one energy
/// evaluation, and each restart record one evaluation unless it repeats the
/// preceding quantum point.
std::uint64_t count_quantum_iterations(std::span<const TrajectoryRecord> records);

/// Cumulative quantum iterations at the first record with
/// |E - exact| <= accuracy, or nullopt. A predicted or restart record is
/// charged together with the rest of its selection block, since every
/// candidate is measured before the restart is known.
std::optional<std::uint64_t> iterations_to_accuracy(std::span<const TrajectoryRecord> records, double exact,
                                                    double accuracy);

struct RunSummary {
  std::uint64_t seed = 0;
  std::string termination;
  bool converged = false;  // reached the accuracy target
  double final_energy = 0.0;
  double delta_e = 0.0;
  std::uint64_t quantum_iterations = 0;
  std::uint64_t gradient_steps = 0;
  std::uint64_t energy_evaluations = 0;
  std::uint64_t shot_total = 0;
  std::optional<std::uint64_t> iters_to_accuracy;
};

struct SeedMetrics {
  RunSummary run;
  std::optional<RunSummary> baseline;
  std::optional<double> speedup;
  std::size_t cycles = 0;
  double wall_seconds = 0.0;  // written to timing.json only
};

struct SpeedupStats {
  std::size_t defined = 0;
  std::size_t total = 0;
  std::optional<double> median, min, max;
};

SpeedupStats aggregate_speedups(const std::vector<std::optional<double>>& values);

struct ExperimentResult {
  Method method = Method::Vanilla;
  double exact_energy = 0.0;
  std::vector<SeedMetrics> seeds;
  SpeedupStats speedup;
  std::filesystem::path output_dir;

  bool all_converged() const;
};

/// Validates everything (including reading referenced files and computing
/// the exact energy) before creating `output_root / config.output_dir`,
/// then writes per-seed trajectory CSVs, metrics.json, timing.json and
/// plot.csv. `method` overrides the config's method; a conflicting explicit
/// method is a Config error.
ExperimentResult run_experiment(const ExperimentConfig& config, std::optional<Method> method,
                                const std::filesystem::path& output_root);

/// metrics.json contents for a result (no wall-clock fields).
std::string metrics_json(const ExperimentConfig& config, const ExperimentResult& result);

/// Recomputes the record-derived fields of a seed summary (energy, delta_e,
/// iteration counts, crossing) from a persisted trajectory.
RunSummary summarize_trajectory(std::span<const TrajectoryRecord> records, double exact, double accuracy,
                                const ShotModel& shots);

}  // namespace palqo
