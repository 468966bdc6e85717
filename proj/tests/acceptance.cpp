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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/LU>

#include "palqo/dmd.hpp"
#include "palqo/error.hpp"
#include "palqo/format.hpp"
#include "palqo/harness.hpp"
#include "palqo/pinn.hpp"
#include "palqo/predictor.hpp"
#include "palqo/rng.hpp"
#include "palqo/vqe.hpp"

#ifndef PALQO_CLI
#error "PALQO_CLI must name the command-line binary"
#endif

using namespace palqo;
using Eigen::MatrixXd;
using Eigen::VectorXd;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("criterion %d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

void note(const std::string& line) {
  std::printf("  %s\n", line.c_str());
  std::fflush(stdout);
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : "undefined"; }

double rel_err(const MatrixXd& a, const MatrixXd& b) { return (a - b).norm() / std::max(b.norm(), 1e-12); }

// ---------------------------------------------------------------------------

void criterion1() {
  const double e2 = exact_ground_energy(build_tfim(2, 1.0, 1.0));
  const bool oracle_ok = std::abs(e2 + std::sqrt(5.0)) <= 1e-10;
  note("exact TFIM(2,1,1) = " + format_double(e2) + " (|err| " + fmt(std::abs(e2 + std::sqrt(5.0))) + ")");

  bool all_ok = oracle_ok;
  for (std::size_t n : {4, 6, 8})
    for (double ratio : {0.5, 1.0}) {
      const Hamiltonian h = build_tfim(n, 1.0, 1.0 / ratio);
      const double exact = exact_ground_energy(h);
      const VqeModel model(h, AnsatzSpec::hea(n, 3));
      const auto t0 = Clock::now();
      int reached = 0;
      std::string gaps;
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        VqeConfig c;
        c.init_seed = seed;
        c.max_iters = 1000;
        const VqeResult r = run_vqe(model, c, TargetStop{exact, 1e-3});
        const double gap = compute_delta_e(r.trajectory.back().energy, exact);
        reached += gap <= 1e-3 ? 1 : 0;
        gaps += (seed ? " " : "") + fmt(gap);
      }
      const double secs = seconds_since(t0);
      const bool ok = reached >= 4 && secs <= 120.0;
      all_ok = all_ok && ok;
      note("TFIM(n=" + std::to_string(n) + ", J/h=" + fmt(ratio) + ") HEA(3): " + std::to_string(reached) +
           "/5 seeds reach 1e-3 in 1000 iterations; final delta_e [" + gaps + "]; " + fmt(secs) + " s");
    }
  report(1, all_ok, "exact oracle and 1000-iteration VQE on TFIM n in {4,6,8}, J/h in {0.5,1}");
}

// ---------------------------------------------------------------------------

void criterion2() {
  using std::numbers::pi;
  const VqeModel ry(Hamiltonian({{1.0, PauliString::parse("Z")}}), load_generators("Y"));
  CounterRng rng(2024);
  double worst_sin = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double th = rng.uniform(-2.0 * pi, 2.0 * pi);
    ParameterVector t(1);
    t(0) = th;
    worst_sin = std::max(worst_sin, std::abs(ry.gradient(t, 0)(0) + std::sin(th)));
  }
  note("1-qubit Ry/Z: max |g + sin| over 100 angles = " + fmt(worst_sin));

  double worst_fd = 0.0;
  const double d = 1e-5;
  for (std::uint64_t inst = 0; inst < 10; ++inst) {
    CounterRng hr(derive_seed(77, {inst}));
    std::vector<PauliTerm> terms;
    const char letters[] = {'I', 'X', 'Y', 'Z'};
    for (int k = 0; k < 12; ++k) {
      std::string s(8, 'I');
      for (char& ch : s) ch = letters[hr.next_u64() % 4];
      if (s == std::string(8, 'I')) s[0] = 'Z';
      terms.push_back({hr.uniform(-1.0, 1.0), PauliString::parse(s)});
    }
    const std::size_t layers = 1 + inst % 3;
    const VqeModel m(Hamiltonian(terms), AnsatzSpec::hea(8, layers));
    ParameterVector theta(static_cast<Eigen::Index>(m.param_count()));
    for (Eigen::Index i = 0; i < theta.size(); ++i) theta(i) = hr.uniform(-pi, pi);
    const VectorXd g = m.gradient(theta, 0);
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      ParameterVector a = theta, b = theta;
      a(i) += d;
      b(i) -= d;
      worst_fd = std::max(worst_fd, std::abs(g(i) - (m.energy(a, 0) - m.energy(b, 0)) / (2.0 * d)));
    }
  }
  note("10 random 8-qubit HEA instances: max |shift - central FD| = " + fmt(worst_fd));
  report(2, worst_sin <= 1e-10 && worst_fd <= 1e-6, "parameter-shift gradients (analytic and finite-difference)");
}

// ---------------------------------------------------------------------------

VectorXd random_vec(Eigen::Index n, std::uint64_t seed) {
  CounterRng rng(seed);
  VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) x(i) = rng.uniform(-1.0, 1.0);
  return x;
}

TrainingSet random_set(std::size_t p, std::size_t tau, std::uint64_t seed) {
  CounterRng rng(seed);
  TrainingSet s;
  const auto pp = static_cast<Eigen::Index>(p);
  for (std::size_t j = 0; j < tau; ++j) {
    PinnSample smp;
    smp.input = VectorXd(pp + 1);
    smp.input(0) = 0.01 * static_cast<double>(j + 1);
    for (Eigen::Index i = 1; i <= pp; ++i) smp.input(i) = rng.uniform(-1.0, 1.0);
    smp.energy = rng.uniform(-1.0, 1.0);
    smp.theta_next = VectorXd(pp);
    for (Eigen::Index i = 0; i < pp; ++i) smp.theta_next(i) = rng.uniform(-1.0, 1.0);
    s.samples.push_back(smp);
  }
  return s;
}

void criterion3() {
  const auto t0 = Clock::now();
  double jac = 0.0, sym = 0.0, hess = 0.0, hvp = 0.0, wgrad = 0.0;
  int draws = 0;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const std::size_t p = 1 + seed % 4;
    const auto pp = static_cast<Eigen::Index>(p);
    const MlpParams w = MlpParams::random(p, 6 + seed % 11, 2, derive_seed(3, {seed}));
    const VectorXd x = random_vec(pp + 1, derive_seed(4, {seed}));
    MatrixXd fj(pp + 1, pp + 1);
    for (Eigen::Index c = 0; c <= pp; ++c) {
      VectorXd a = x, b = x;
      a(c) += 1e-6;
      b(c) -= 1e-6;
      fj.col(c) = (forward(w, a) - forward(w, b)) / 2e-6;
    }
    jac = std::max(jac, rel_err(input_jacobian(w, x), fj));

    const MatrixXd h = energy_input_hessian(w, x);
    sym = std::max(sym, (h - h.transpose()).cwiseAbs().maxCoeff());
    MatrixXd fh(pp, pp);
    const double s = 1e-4;
    for (Eigen::Index a = 0; a < pp; ++a)
      for (Eigen::Index b = 0; b < pp; ++b) {
        auto f = [&](double da, double db) {
          VectorXd y = x;
          y(a + 1) += da;
          y(b + 1) += db;
          return forward(w, y)(0);
        };
        fh(a, b) = (f(s, s) - f(s, -s) - f(-s, s) + f(-s, -s)) / (4.0 * s * s);
      }
    hess = std::max(hess, rel_err(h, fh));
    const VectorXd v = random_vec(pp, derive_seed(5, {seed}));
    hvp = std::max(hvp, (energy_hessian_vector(w, x, v) - h * v).cwiseAbs().maxCoeff());
    ++draws;
  }

  int wdraws = 0;
  for (const auto& [d, p1, p2] : {std::tuple{1.0, 0.0, 0.0}, std::tuple{0.0, 1.0, 0.0}, std::tuple{0.0, 0.0, 1.0},
                                  std::tuple{1e-4, 1.0, 1.0}})
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      PinnConfig c;
      c.lambda_data = d;
      c.lambda_p1 = p1;
      c.lambda_p2 = p2;
      const MlpParams w = MlpParams::random(2, 8, 2, derive_seed(6, {seed}));
      const TrainingSet set = random_set(2, 3, derive_seed(7, {seed}));
      wgrad = std::max(wgrad, rel_err(loss_weight_gradient(w, set, c).grad.flatten(),
                                      loss_weight_gradient_fd(w, set, c).flatten()));
      ++wdraws;
    }
  const double secs = seconds_since(t0);
  note(std::to_string(draws) + " input draws: jacobian rel " + fmt(jac) + ", hessian asym " + fmt(sym) +
       ", hessian rel " + fmt(hess) + ", HVP vs full " + fmt(hvp));
  note(std::to_string(wdraws) + " weight-gradient draws over 4 lambda configs: rel " + fmt(wgrad) + "; " +
       fmt(secs) + " s");
  report(3, jac <= 1e-4 && sym <= 1e-14 && hess <= 1e-4 && hvp <= 1e-10 && wgrad <= 1e-4 && secs <= 60.0,
         "network input derivatives and loss weight gradients");
}

// ---------------------------------------------------------------------------

void criterion4() {
  // E = 0.5 theta^T A theta, plain GD with eta = 0.05 from (1, -0.8)
  MatrixXd a(2, 2);
  a << 1.5, 0.3, 0.3, 0.8;
  const double eta = 0.05;
  std::vector<VectorXd> truth;
  VectorXd th(2);
  th << 1.0, -0.8;
  for (int k = 0; k <= 25; ++k) {
    truth.push_back(th);
    th -= eta * a * th;
  }
  std::vector<TrajectoryRecord> window;
  for (std::size_t k = 0; k <= 5; ++k) {
    TrajectoryRecord r;
    r.step = k;
    r.t_scaled = kTimeStep * static_cast<double>(k);
    r.theta = truth[k];
    r.energy = 0.5 * truth[k].dot(a * truth[k]);
    window.push_back(r);
  }
  const TrainingSet set = TrainingSet::from_window(window);

  PinnConfig c;
  c.width = 10;
  c.lambda_data = 1.0;
  c.eta_vqe = eta;
  c.epochs = 50000;
  c.init = InitScheme::FanIn;

  const auto t0 = Clock::now();
  double first = 0.0;
  std::string per_seed;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    c.train_seed = seed;
    const TrainResult tr = train(MlpParams::random(2, c.width, 2, seed, c.init), set, c);
    VectorXd cur = truth[5];
    VectorXd x(3);
    double err = 0.0;
    for (int k = 0; k < 20; ++k) {
      x(0) = kTimeStep * (6 + k);
      x.tail(2) = cur;
      cur = forward(tr.params, x).tail(2);
      err = std::max(err, (cur - truth[6 + k]).cwiseAbs().maxCoeff());
    }
    if (seed == 0) first = err;
    per_seed += (seed ? " " : "") + fmt(err);
  }
  double identity = 0.0;
  for (int k = 0; k < 20; ++k) identity = std::max(identity, (truth[5] - truth[6 + k]).cwiseAbs().maxCoeff());
  note("width 10, lambda (1,1,1), fan_in, 50000 epochs, lr 1e-3 -> 1e-5; max-norm error by init seed [" + per_seed +
       "] (seed 0 scored); holding theta fixed gives " + fmt(identity) + "; " + fmt(seconds_since(t0)) + " s");
  report(4, first <= 5e-2, "20-step rollout of a network trained on 5 GD steps of a p=2 quadratic");
}

// ---------------------------------------------------------------------------

struct Instance {
  std::string label;
  std::size_t n;
};

const std::vector<Instance> kSpeedupInstances = {{"TFIM(4, J/h=0.5)", 4}, {"TFIM(8, J/h=0.5)", 8}};

std::string instance_yaml(std::size_t n, const std::string& name) {
  return "name: " + name + R"(
hamiltonian:
  builder: tfim
  n: )" + std::to_string(n) +
         R"(
  j: 1
  h: 2
ansatz:
  type: hea
  layers: 3
vqe:
  eta: 0.05
  max_iters: 1000
  accuracy: 1e-3
pinn:
  width_factor: 2
  epochs: 200
  lambda_data: 1
  lr_initial: 1e-2
  lr_final: 1e-4
  init: fan_in
palqo:
  tau: 2
  max_cycles: 1000
dmd:
  tau: 3
  max_cycles: 1000
seeds: [0, 1, 2, 3, 4]
)";
}

struct SpeedupRuns {
  std::vector<ExperimentResult> palqo;
  std::vector<ExperimentResult> dmd;
  double palqo_seconds = 0.0;
};

SpeedupRuns run_speedup_instances(const fs::path& root) {
  SpeedupRuns out;
  for (const Instance& inst : kSpeedupInstances) {
    const ExperimentConfig cfg = parse_experiment_config(instance_yaml(inst.n, "tfim" + std::to_string(inst.n)));
    const auto t0 = Clock::now();
    out.palqo.push_back(run_experiment(cfg, Method::Palqo, root / "palqo"));
    out.palqo_seconds += seconds_since(t0);
    out.dmd.push_back(run_experiment(cfg, Method::Dmd, root / "dmd"));
  }
  return out;
}

void criterion5(const SpeedupRuns& runs) {
  bool ok = runs.palqo_seconds <= 900.0;
  for (std::size_t i = 0; i < kSpeedupInstances.size(); ++i) {
    const ExperimentResult& r = runs.palqo[i];
    std::string alphas, gaps, base;
    bool gaps_ok = true;
    for (const SeedMetrics& s : r.seeds) {
      alphas += (alphas.empty() ? "" : " ") + fmt(s.speedup);
      gaps += (gaps.empty() ? "" : " ") + fmt(s.run.delta_e);
      base += (base.empty() ? "" : " ") + fmt(s.baseline->delta_e);
      gaps_ok = gaps_ok && s.run.delta_e <= 1e-3;
    }
    const bool inst_ok = r.speedup.median && *r.speedup.median >= 2.0 && gaps_ok;
    ok = ok && inst_ok;
    note(kSpeedupInstances[i].label + " HEA(3): median alpha " + fmt(r.speedup.median) + " (" +
         std::to_string(r.speedup.defined) + "/5 defined) [" + alphas + "]; PALQO final delta_e [" + gaps +
         "]; vanilla final delta_e [" + base + "]");
  }
  note("PALQO experiments including their vanilla baselines: " + fmt(runs.palqo_seconds) + " s");
  report(5, ok, "median speedup >= 2 with final delta_e <= 1e-3 on TFIM(4) and TFIM(8), J/h = 0.5");
}

std::string run_cli(const std::string& args) {
  const std::string cmd = std::string(PALQO_CLI) + " " + args;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) return {};
  std::string out;
  char buf[256];
  while (std::fgets(buf, sizeof buf, pipe) != nullptr) out += buf;
  ::pclose(pipe);
  return out;
}

void criterion6(const SpeedupRuns& runs) {
  const std::string printed = run_cli("shots 120 39 1e-3 1");
  const bool cli_ok = printed == "9360000000\n";
  note("`shots 120 39 1e-3 1` printed " + (printed.empty() ? std::string("nothing") : printed.substr(0, printed.find('\n'))));
  bool fewer = true;
  for (std::size_t i = 0; i < kSpeedupInstances.size(); ++i) {
    std::string pairs;
    for (const SeedMetrics& s : runs.palqo[i].seeds) {
      fewer = fewer && s.run.shot_total < s.baseline->shot_total;
      pairs += (pairs.empty() ? "" : " ") + std::to_string(s.run.shot_total) + "/" +
               std::to_string(s.baseline->shot_total);
    }
    note(kSpeedupInstances[i].label + " shot totals PALQO/vanilla: " + pairs);
  }
  report(6, cli_ok && fewer, "shot formula via the CLI and PALQO spending fewer shots than vanilla");
}

void criterion7(const SpeedupRuns& runs) {
  CounterRng rng(11);
  MatrixXd x(4, 6);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-1.0, 1.0);
  const DmdModel m = fit_dmd_pairs(x, 0.5 * x);
  const double err = (m.a - 0.5 * MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff();
  note("A = 0.5 I recovered with max error " + fmt(err));
  bool reported = true;
  for (std::size_t i = 0; i < kSpeedupInstances.size(); ++i) {
    const ExperimentResult& d = runs.dmd[i];
    const ExperimentResult& p = runs.palqo[i];
    reported = reported && d.seeds.size() == 5 && d.speedup.total == 5;
    note(kSpeedupInstances[i].label + ": DMD median alpha " + fmt(d.speedup.median) + " (" +
         std::to_string(d.speedup.defined) + "/5 defined), PALQO median alpha " + fmt(p.speedup.median) + " (" +
         std::to_string(p.speedup.defined) + "/5 defined)");
  }
  report(7, err <= 1e-10 && reported, "DMD operator recovery and DMD speedup reported next to PALQO");
}

// ---------------------------------------------------------------------------

void criterion8() {
  const VqeModel m(build_tfim(4, 1.0, 1.0), AnsatzSpec::hea(4, 3));
  VqeConfig c;
  c.init_seed = 0;
  c.max_iters = 200;
  const VqeResult run = run_vqe(m, c);
  bool ok = true;
  for (std::size_t step : {0, 20, 100, 200}) {
    const ParameterVector& theta = run.trajectory.records().at(step).theta;
    const double e = m.energy(theta, 0);
    const VectorXd g = m.gradient(theta, 0);
    const double k = g.squaredNorm();
    std::vector<double> err;
    for (double eta : {0.05, 0.025, 0.0125}) err.push_back(std::abs((m.energy(gd_step(theta, g, eta), 0) - e) / eta + k));
    // err(eta) = c0 + c1 eta + c2 eta^2 through the three points; first-order
    // decay means the intercept vanishes and the linear coefficient does not.
    Eigen::Matrix3d v;
    v << 1, 0.05, 0.0025, 1, 0.025, 0.000625, 1, 0.0125, 0.00015625;
    const Eigen::Vector3d c = v.fullPivLu().solve(Eigen::Vector3d(err[0], err[1], err[2]));
    const bool point_ok = std::abs(c(0)) <= 0.05 * err[2] && c(1) > 0.0;
    ok = ok && point_ok;
    note("step " + std::to_string(step) + ": K' " + fmt(k) + ", residuals " + fmt(err[0]) + " " + fmt(err[1]) + " " +
         fmt(err[2]) + ", halving ratios " + fmt(err[1] / err[0]) + " " + fmt(err[2] / err[1]) +
         ", fit c0 " + fmt(c(0)) + " c1 " + fmt(c(1)) + " c2 " + fmt(c(2)));
  }
  report(8, ok, "|dE/eta + K'| extrapolates to zero linearly in eta (|c0| <= 5% of the smallest residual, c1 > 0)");
}

void criterion9() {
  const VqeModel m(build_tfim(4, 1.0, 1.0), AnsatzSpec::hea(4, 3), NoiseModel{0.05, 100});
  PalqoConfig pc;
  pc.pinn.width_factor = 2;
  pc.pinn.epochs = 200;
  pc.pinn.lambda_data = 1.0;
  pc.pinn.lr_initial = 1e-2;
  pc.pinn.lr_final = 1e-4;
  pc.pinn.init = InitScheme::FanIn;
  pc.loop.tau = 2;
  pc.loop.max_cycles = 1000;
  pc.loop.vqe.max_iters = 200;
  pc.loop.vqe.noise = NoiseModel{0.05, 100};
  const auto t0 = Clock::now();
  int improved = 0;
  std::string pairs;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    pc.loop.vqe.init_seed = seed;
    const CycleLoopResult r = run_palqo(m, pc);
    const double e0 = r.trajectory.records().front().energy;
    const double e1 = r.trajectory.back().energy;
    improved += e1 < e0 ? 1 : 0;
    pairs += (seed ? " " : "") + fmt(e0) + "->" + fmt(e1) + "(" + std::to_string(r.cycles.size()) + " cycles)";
  }
  note("TFIM(4,1,1) HEA(3), 100 shots per term, q = 0.05: " + pairs + "; " + fmt(seconds_since(t0)) + " s");
  report(9, improved >= 4, std::to_string(improved) + "/5 noisy PALQO runs end below their initial energy");
}

// ---------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::FILE* f = std::fopen(p.c_str(), "rb");
  if (f == nullptr) return "<missing>";
  std::string s;
  char buf[4096];
  std::size_t k = 0;
  while ((k = std::fread(buf, 1, sizeof buf, f)) > 0) s.append(buf, k);
  std::fclose(f);
  return s;
}

void criterion10(const fs::path& root) {
  const std::string yaml = R"(name: repro
hamiltonian:
  builder: tfim
  n: 4
  j: 1
  h: 1
ansatz:
  type: hea
  layers: 2
vqe:
  eta: 0.05
  max_iters: 60
  noise:
    shots_per_term: 200
pinn:
  width: 12
  epochs: 50
palqo:
  tau: 3
dmd:
  tau: 3
seeds: [0, 7]
)";
  const ExperimentConfig cfg = parse_experiment_config(yaml);
  bool same = true;
  int files = 0;
  for (Method m : {Method::Vanilla, Method::Palqo, Method::Dmd}) {
    const fs::path a = root / "repro_a" / to_string(m);
    const fs::path b = root / "repro_b" / to_string(m);
    run_experiment(cfg, m, a);
    run_experiment(cfg, m, b);
    for (const auto& entry : fs::recursive_directory_iterator(a / "repro")) {
      if (!entry.is_regular_file() || entry.path().filename() == "timing.json") continue;
      const fs::path rel = fs::relative(entry.path(), a);
      same = same && slurp(entry.path()) == slurp(b / rel);
      ++files;
    }
  }
  note(std::to_string(files) + " CSV/JSON artifacts compared across reruns of vanilla, palqo and dmd (noisy model)");
  report(10, same && files > 0, "byte-identical trajectories and metrics on rerun");
}

}  // namespace

// With arguments, runs only the listed criteria (e.g. `acceptance 2 8`).
int main(int argc, char** argv) {
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  const auto want = [&](std::initializer_list<int> ids) {
    if (only.empty()) return true;
    for (int id : ids)
      if (std::find(only.begin(), only.end(), id) != only.end()) return true;
    return false;
  };
  const fs::path root = fs::temp_directory_path() / ("palqo_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  const auto t0 = Clock::now();
  try {
    if (want({1})) criterion1();
    if (want({2})) criterion2();
    if (want({3})) criterion3();
    if (want({4})) criterion4();
    if (want({5, 6, 7})) {
      const SpeedupRuns runs = run_speedup_instances(root);
      if (want({5})) criterion5(runs);
      if (want({6})) criterion6(runs);
      if (want({7})) criterion7(runs);
    }
    if (want({8})) criterion8();
    if (want({9})) criterion9();
    if (want({10})) criterion10(root);
  } catch (const std::exception& e) {
    std::printf("acceptance aborted: %s\n", e.what());
    ++failures;
  }
  fs::remove_all(root);
  std::printf("acceptance: %d failing criteria, %.1f s\n", failures, seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
