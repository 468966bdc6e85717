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

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "palqo/pinn.hpp"
#include "palqo/vqe.hpp"

namespace palqo {

struct RolloutConfig {
  std::size_t max_steps = 2000;
  double delta_tol = 1e-4;
  double dt = kTimeStep;

  void validate() const;
};

/// One classical step theta^{k+1} = f(t_k, theta^k).
using StepFunction = std::function<Eigen::VectorXd(double t, const Eigen::VectorXd& theta)>;

struct RolloutCandidate {
  ParameterVector theta;
  double delta = 0.0;    // |theta^{k+1} - theta^k| at the step that produced theta
  std::size_t step = 0;  // 1-based rollout step
};

struct RolloutResult {
  /// Minimal-delta candidate first, then the final iterate. Empty only if
  /// the very first prediction was non-finite.
  std::vector<RolloutCandidate> candidates;
  std::size_t steps = 0;
  bool stopped_early = false;
  bool aborted = false;
};

RolloutResult rollout(const StepFunction& step, double t_start, const ParameterVector& theta_start,
                      const RolloutConfig& config);
/// Rolls the network's theta outputs forward; the energy output is ignored.
RolloutResult rollout(const MlpParams& w, double t_start, const ParameterVector& theta_start,
                      const RolloutConfig& config);

enum class CandidateKind { Endpoint, MinDelta, Final, Extrapolated };
std::string_view to_string(CandidateKind k);

struct RestartCandidate {
  ParameterVector theta;
  CandidateKind kind = CandidateKind::Final;
  double delta = std::numeric_limits<double>::infinity();
  std::optional<double> energy;  // known energies are not re-measured
};

struct RestartChoice {
  std::size_t index = 0;
  std::vector<double> energies;  // per candidate, after evaluation
  std::size_t evaluations = 0;   // charged energy evaluations
};

/// Measures every candidate without a known energy (one charged evaluation
/// each on `traj`, bit-identical thetas measured once) and returns the
/// argmin. Equal energies go to the smaller delta, then the earlier index.
RestartChoice select_restart(const EnergyModel& model, std::span<RestartCandidate> candidates, Trajectory& traj,
                             std::uint64_t seed);

/// Produces restart candidates from one cycle's burst. The outer loop adds
/// the burst endpoint itself.
class CyclePredictor {
 public:
  virtual ~CyclePredictor() = default;

  struct Context {
    const EnergyModel& model;
    Trajectory& trajectory;  // for charging evaluations made while predicting
    std::size_t cycle;
    std::uint64_t seed;
    std::string note;  // diagnostics copied into the cycle report
  };

  /// `window` holds the burst's start record followed by its tau quantum steps.
  virtual std::vector<RestartCandidate> propose(std::span<const TrajectoryRecord> window, Context& ctx) = 0;
};

struct CycleLoopConfig {
  std::size_t tau = 2;
  std::size_t tau_first = 0;  // 0 means tau
  std::size_t max_cycles = 100;
  VqeConfig vqe;  // eta, varsigma, seeds; max_iters caps the total gradient steps

  std::size_t first_burst() const { return tau_first != 0 ? tau_first : tau; }
  void validate() const;
};

struct CycleReport {
  std::size_t cycle = 0;
  std::size_t candidates = 0;
  CandidateKind chosen = CandidateKind::Endpoint;
  double endpoint_energy = 0.0;
  double restart_energy = 0.0;
  std::string note;  // predictor diagnostics, e.g. a training failure
};

struct CycleLoopResult {
  Trajectory trajectory;
  Termination termination = Termination::MaxIterations;
  bool warning = false;  // stopped by max_cycles or max_iters without converging
  std::vector<CycleReport> cycles;
};

/// Alternates tau-step quantum bursts with predictor-driven restarts until
/// the descent converges, reaches `target`, or a cap is hit. Each cycle
/// appends the evaluated non-chosen candidates as `predicted` records and
/// the chosen one as a `restart` record.
CycleLoopResult run_cycles(const EnergyModel& model, const CycleLoopConfig& config, CyclePredictor& predictor,
                           const std::optional<TargetStop>& target = {});

struct PalqoConfig {
  CycleLoopConfig loop;
  PinnConfig pinn;
  RolloutConfig rollout;
  bool reset_network_each_cycle = false;

  void validate() const;
};

/// Network predictor: trains on each window (warm-started unless reset is
/// requested) and proposes the rollout's minimal-delta and final iterates.
class PinnPredictor final : public CyclePredictor {
 public:
  PinnPredictor(std::size_t p, PinnConfig pinn, RolloutConfig rollout, bool reset_each_cycle);

  std::vector<RestartCandidate> propose(std::span<const TrajectoryRecord> window, Context& ctx) override;

  const MlpParams& network() const noexcept { return net_; }
  const std::vector<LossBreakdown>& last_history() const noexcept { return history_; }
  const RolloutResult& last_rollout() const noexcept { return rollout_; }

 private:
  std::size_t p_;
  PinnConfig pinn_;
  RolloutConfig rollout_config_;
  bool reset_;
  MlpParams net_;
  std::vector<LossBreakdown> history_;
  RolloutResult rollout_;
};

/// The full outer loop with the network predictor. pinn.eta_vqe is taken from
/// loop.vqe.eta.
CycleLoopResult run_palqo(const EnergyModel& model, const PalqoConfig& config,
                          const std::optional<TargetStop>& target = {});

}  // namespace palqo
