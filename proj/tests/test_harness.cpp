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

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "palqo/error.hpp"
#include "palqo/harness.hpp"
#include "palqo/trajectory_io.hpp"

using namespace palqo;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("palqo_harness_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string config_error(const std::string& yaml, const fs::path& base = {}) {
  try {
    parse_experiment_config(yaml, base, "cfg.yaml");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Config);
    return e.what();
  }
  FAIL("expected a config error");
  return {};
}

TrajectoryRecord rec(double theta, double energy, RecordSource src) {
  TrajectoryRecord r;
  r.theta = ParameterVector::Constant(1, theta);
  r.energy = energy;
  r.source = src;
  return r;
}

const char* kTfim2 = R"(name: tfim2
hamiltonian:
  builder: tfim
  n: 2
  j: 1
  h: 1
ansatz:
  type: hea
  layers: 3
vqe:
  eta: 0.05
  max_iters: 1000
seeds: [0, 1]
)";

const char* kPalqoSections = R"(pinn:
  width: 8
  epochs: 200
  lambda_data: 1
  lr_initial: 1e-2
  lr_final: 1e-4
  init: fan_in
palqo:
  tau: 2
  max_cycles: 30
dmd:
  tau: 3
  max_cycles: 30
)";

}  // namespace

TEST_CASE("energy gap") {
  CHECK(compute_delta_e(-2.2360, -2.2360679) == doctest::Approx(6.79e-5).epsilon(1e-9));
  CHECK(compute_delta_e(-1.5, -1.5) == 0.0);
  CHECK(compute_delta_e(0.3, -0.7) == compute_delta_e(-0.7, 0.3));
  CHECK_THROWS_AS(compute_delta_e(NAN, 0.0), Error);
}

TEST_CASE("speedup ratio") {
  CHECK(*compute_speedup(300, 10) == 30.0);
  CHECK(*compute_speedup(17, 17) == 1.0);
  CHECK_FALSE(compute_speedup(std::nullopt, 10));
  CHECK_FALSE(compute_speedup(10, std::nullopt));
  CHECK_FALSE(compute_speedup(0, 10));

  const SpeedupStats odd = aggregate_speedups({3.0, std::nullopt, 1.0, 2.0});
  CHECK(odd.defined == 3);
  CHECK(odd.total == 4);
  CHECK(*odd.median == 2.0);
  CHECK(*odd.min == 1.0);
  CHECK(*odd.max == 3.0);
  CHECK(*aggregate_speedups({4.0, 1.0}).median == 2.5);
  const SpeedupStats none = aggregate_speedups({std::nullopt});
  CHECK(none.defined == 0);
  CHECK_FALSE(none.median);
}

TEST_CASE("iteration recount from records") {
  using S = RecordSource;
  // theta0, two steps, a cycle whose restart repeats the endpoint, one more
  // step, then a cycle with two predictions and a moved restart.
  const std::vector<TrajectoryRecord> r = {
      rec(0.0, 5.0, S::Quantum),   rec(0.1, 4.0, S::Quantum),   rec(0.2, 3.0, S::Quantum),
      rec(0.9, 3.5, S::Predicted), rec(0.2, 3.0, S::Restart),   rec(0.3, 2.0, S::Quantum),
      rec(0.8, 1.5, S::Predicted), rec(0.7, 1.2, S::Predicted), rec(0.6, 1.0, S::Restart),
      rec(0.5, 0.9, S::Quantum)};
  CHECK(count_quantum_iterations(r) == 4 + 3 + 1);
  CHECK(count_quantum_iterations(std::span(r).first(1)) == 0);
  CHECK(*iterations_to_accuracy(r, 0.0, 3.0) == 2);
  // the first prediction that qualifies is charged with its whole block
  CHECK(*iterations_to_accuracy(r, 0.0, 1.5) == 7);
  CHECK(*iterations_to_accuracy(r, 0.0, 0.95) == 8);
  CHECK_FALSE(iterations_to_accuracy(r, 0.0, 0.5));

  const RunSummary s = summarize_trajectory(r, 0.5, 0.5, ShotModel{3, 0.1, 1});
  CHECK(s.gradient_steps == 4);
  CHECK(s.energy_evaluations == 4);
  CHECK(s.shot_total == 4 * 600 + 4 * 300);
  CHECK(s.final_energy == 0.9);
  CHECK(s.converged);
}

TEST_CASE("config parsing") {
  const fs::path dir = scratch("parse");
  { std::ofstream(dir / "h.txt") << "1.0 ZZ\n0.5 XI\n0.5 IX\n"; }

  SUBCASE("full schema") {
    const ExperimentConfig c = parse_experiment_config(R"(name: demo
method: palqo
hamiltonian:
  file: h.txt
ansatz:
  type: hva
  layers: 2
vqe:
  eta: 0.1
  max_iters: 50
  varsigma: 1e-8
  accuracy: 1e-4
  shot_epsilon: 1e-2
  noise:
    shots_per_term: 100
    depolarizing: 0.05
pinn:
  width: 12
  hidden_layers: 3
  epochs: 0
  init: fan_in
  p1_per_component: true
palqo:
  tau: 4
  tau_first: 6
  reset_network: true
  rollout:
    max_steps: 10
    delta_tol: 1e-3
baseline:
  enabled: false
seeds: [3, 1]
output_dir: sub/run
)",
                                                       dir);
    CHECK(c.name == "demo");
    CHECK(c.method == Method::Palqo);
    CHECK(c.hamiltonian.builder == "file");
    CHECK(c.hamiltonian.build().num_qubits() == 2);
    CHECK(c.ansatz.build(c.hamiltonian.build()).param_count() == 6);
    CHECK(c.vqe.eta == 0.1);
    CHECK(c.vqe.max_iters == 50);
    CHECK(c.vqe.noise->shots_per_term == 100u);
    CHECK(c.vqe.noise->depolarizing_prob == 0.05);
    CHECK(c.palqo.pinn.width == 12);
    CHECK(c.palqo.pinn.hidden_layers == 3);
    CHECK(c.palqo.pinn.init == InitScheme::FanIn);
    CHECK(c.palqo.pinn.p1_per_component);
    CHECK(c.palqo.loop.tau == 4);
    CHECK(c.palqo.loop.tau_first == 6);
    CHECK(c.palqo.reset_network_each_cycle);
    CHECK(c.palqo.rollout.max_steps == 10);
    CHECK_FALSE(c.baseline);
    CHECK(c.seeds == std::vector<std::uint64_t>{3, 1});
    CHECK(c.output_dir == fs::path("sub/run"));
  }
  SUBCASE("errors name the offending line") {
    CHECK(config_error("name: x\nhamiltonian:\n  builder: tfim\n  n: 2\n  jj: 1\n").find("cfg.yaml:5:") !=
          std::string::npos);
    CHECK(config_error("name: x\nbogus: 1\n").find("cfg.yaml:2: unknown key 'bogus'") != std::string::npos);
    CHECK(config_error(std::string(kTfim2) + "vqe:\n  eta: 1\n").find("duplicate key 'vqe'") !=
          std::string::npos);
    CHECK(config_error("name: x\nvqe:\n  eta: fast\n").find("cfg.yaml:3: expected a number") != std::string::npos);
    CHECK(config_error("name: x\nvqe:\n  eta: -1\n").find("cfg.yaml:3:") != std::string::npos);
    CHECK(config_error("name: x\nvqe:\n  max_iters: -4\n").find("non-negative integer") != std::string::npos);
    CHECK(config_error("name: x\nseeds: [1, 1]\n").find("duplicate seed") != std::string::npos);
    CHECK(config_error("name: [x\n").find("cfg.yaml:") != std::string::npos);
    CHECK(config_error("name: x\nhamiltonian:\n  builder: ising\n  n: 2\n").find("unknown builder") !=
          std::string::npos);
    CHECK(config_error("name: x\nhamiltonian:\n  builder: tfim\n  n: 20\n").find("n must be") != std::string::npos);
    CHECK(config_error("name: x\nmethod: quack\n").find("unknown method") != std::string::npos);
    CHECK(config_error("name: x\nhamiltonian:\n  builder: tfim\n").find("needs 'n'") != std::string::npos);
    CHECK(config_error("name: x\nhamiltonian:\n  builder: tfim\n  n: 2\nansatz:\n  type: hea\n"
                       "method: palqo\n")
              .find("needs a 'palqo' section") != std::string::npos);
    CHECK(config_error("name: x\nhamiltonian:\n  builder: tfim\n  n: 2\nansatz:\n  type: hea\n"
                       "pinn:\n  lr_initial: 0\n")
              .find("cfg.yaml:8:") != std::string::npos);
  }
  SUBCASE("missing files are reported before anything is written") {
    const std::string e = config_error("name: x\nhamiltonian:\n  file: nope.txt\n", dir);
    CHECK(e.find("cfg.yaml:3:") != std::string::npos);
    CHECK(e.find("does not exist") != std::string::npos);

    ExperimentConfig c = parse_experiment_config(kTfim2, dir);
    c.hamiltonian.builder = "file";
    c.hamiltonian.file = dir / "removed.txt";
    const fs::path root = scratch("missing");
    CHECK_THROWS_AS(run_experiment(c, Method::Vanilla, root), Error);
    CHECK(fs::is_empty(root));
  }
  SUBCASE("method resolution") {
    const ExperimentConfig c = parse_experiment_config(std::string(kTfim2) + "method: vanilla\n");
    const fs::path root = scratch("conflict");
    CHECK_THROWS_AS(run_experiment(c, Method::Palqo, root), Error);
    const ExperimentConfig none = parse_experiment_config(kTfim2);
    CHECK_THROWS_AS(run_experiment(none, std::nullopt, root), Error);
    CHECK_THROWS_AS(run_experiment(none, Method::Dmd, root), Error);  // no dmd section
    CHECK(fs::is_empty(root));
  }
}

TEST_CASE("vanilla experiment artifacts") {
  const fs::path root = scratch("vanilla");
  const ExperimentConfig c = parse_experiment_config(kTfim2);
  const ExperimentResult r = run_experiment(c, Method::Vanilla, root);
  const fs::path out = root / "tfim2";
  CHECK(r.output_dir == out);
  CHECK(std::abs(r.exact_energy + std::sqrt(5.0)) <= 1e-10);
  REQUIRE(r.seeds.size() == 2);
  for (const SeedMetrics& s : r.seeds) {
    CHECK(s.run.converged);
    CHECK(s.run.delta_e <= 1e-3);
    CHECK(*s.speedup == 1.0);
  }
  CHECK(r.all_converged());
  for (const char* f : {"seed_0/trajectory.csv", "seed_1/trajectory.csv", "metrics.json", "timing.json",
                        "plot.csv", "config.yaml"})
    CHECK(fs::is_regular_file(out / f));
  CHECK_FALSE(fs::exists(out / "seed_0/baseline.csv"));
  CHECK(slurp(out / "seed_0/trajectory.csv").rfind("step,t_scaled,energy,theta_0,", 0) == 0);
  CHECK(slurp(out / "plot.csv").rfind("method,seed,iteration,delta_e\nvanilla,0,0,", 0) == 0);
  CHECK(slurp(out / "config.yaml") == kTfim2);
  CHECK(slurp(out / "seed_0/trajectory.csv") != slurp(out / "seed_1/trajectory.csv"));
  CHECK(slurp(out / "metrics.json").find("wall") == std::string::npos);
}

TEST_CASE("accelerated experiments are re-derivable from their CSVs and reproducible") {
  const std::string yaml = std::string(kTfim2) + kPalqoSections;
  const ExperimentConfig c = parse_experiment_config(yaml);
  for (const Method m : {Method::Palqo, Method::Dmd}) {
    CAPTURE(to_string(m));
    const fs::path a = scratch(std::string("rerun_a_") + std::string(to_string(m)));
    const fs::path b = scratch(std::string("rerun_b_") + std::string(to_string(m)));
    const ExperimentResult ra = run_experiment(c, m, a);
    run_experiment(c, m, b);

    for (const char* f : {"seed_0/trajectory.csv", "seed_1/trajectory.csv", "seed_0/baseline.csv",
                          "seed_1/baseline.csv", "metrics.json", "plot.csv"})
      CHECK(slurp(a / "tfim2" / f) == slurp(b / "tfim2" / f));

    const auto j = nlohmann::json::parse(slurp(a / "tfim2/metrics.json"));
    CHECK(j["method"] == std::string(to_string(m)));
    const double exact = exact_ground_energy(build_tfim(2, 1.0, 1.0));
    CHECK(j["exact_energy"].get<double>() == exact);
    std::vector<std::optional<double>> alphas;
    for (std::size_t i = 0; i < 2; ++i) {
      const auto& js = j["seeds"][i];
      const std::string dir = "seed_" + std::to_string(js["seed"].get<std::uint64_t>());
      const auto method_recs = trajectory_from_csv(slurp(a / "tfim2" / dir / "trajectory.csv"));
      const auto base_recs = trajectory_from_csv(slurp(a / "tfim2" / dir / "baseline.csv"));

      // independent recount
      std::uint64_t quantum = 0;
      std::optional<std::uint64_t> method_iters;
      const TrajectoryRecord* last_q = nullptr;
      for (std::size_t k = 0; k < method_recs.size(); ++k) {
        const auto& rk = method_recs[k];
        if (rk.source == RecordSource::Quantum) {
          quantum += k > 0 ? 1 : 0;
          last_q = &rk;
        } else if (rk.source == RecordSource::Predicted || !(rk.theta == last_q->theta)) {
          ++quantum;
        }
        const bool block_end = k + 1 == method_recs.size() || method_recs[k + 1].source == RecordSource::Quantum ||
                               rk.source == RecordSource::Quantum;
        if (!method_iters && block_end) {
          // earliest qualifying record inside the block just closed
          std::size_t start = k;
          while (start > 0 && rk.source != RecordSource::Quantum &&
                 method_recs[start - 1].source != RecordSource::Quantum)
            --start;
          for (std::size_t q = start; q <= k; ++q)
            if (std::abs(method_recs[q].energy - exact) <= 1e-3) method_iters = quantum;
        }
      }
      std::optional<std::uint64_t> base_iters;
      for (std::size_t k = 0; k < base_recs.size() && !base_iters; ++k)
        if (std::abs(base_recs[k].energy - exact) <= 1e-3) base_iters = k;

      CHECK(js["quantum_iterations"].get<std::uint64_t>() == quantum);
      CHECK(js["delta_e"].get<double>() == std::abs(method_recs.back().energy - exact));
      CHECK(js["baseline_run"]["delta_e"].get<double>() == std::abs(base_recs.back().energy - exact));
      if (method_iters) CHECK(js["method_iters"].get<std::uint64_t>() == *method_iters);
      else CHECK(js["method_iters"].is_null());
      if (base_iters) CHECK(js["baseline_iters"].get<std::uint64_t>() == *base_iters);
      else CHECK(js["baseline_iters"].is_null());
      std::optional<double> alpha;
      if (method_iters && base_iters) alpha = static_cast<double>(*base_iters) / static_cast<double>(*method_iters);
      if (alpha) CHECK(js["speedup"].get<double>() == *alpha);
      else CHECK(js["speedup"].is_null());
      CHECK(js["speedup"] == (ra.seeds[i].speedup ? nlohmann::json(*ra.seeds[i].speedup) : nlohmann::json()));
      alphas.push_back(alpha);
    }
    const SpeedupStats st = aggregate_speedups(alphas);
    if (st.median) CHECK(j["speedup"]["median"].get<double>() == *st.median);
    CHECK(j["speedup"]["defined"].get<std::size_t>() == st.defined);
  }
}

TEST_CASE("shipped configs parse and validate") {
  int seen = 0;
  for (const auto& entry : fs::directory_iterator(fs::path(PALQO_SOURCE_DIR) / "configs")) {
    if (entry.path().extension() != ".yaml") continue;
    CAPTURE(entry.path().string());
    const ExperimentConfig c = load_experiment_config(entry.path());
    REQUIRE(c.method);
    CHECK_NOTHROW(c.validate(*c.method));
    CHECK_NOTHROW(c.ansatz.build(c.hamiltonian.build()));
    ++seen;
  }
  CHECK(seen >= 5);
}
