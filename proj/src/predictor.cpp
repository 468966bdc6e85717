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

#include "palqo/predictor.hpp"

#include <algorithm>
#include <cmath>

#include "palqo/error.hpp"
#include "palqo/rng.hpp"

namespace palqo {

namespace {

constexpr std::uint64_t kCycleTag = 0x6379636cULL;   // "cycl"
constexpr std::uint64_t kSelectTag = 0x73656c63ULL;  // "selc"
constexpr std::uint64_t kNetTag = 0x6e657477ULL;     // "netw"

bool same_theta(const ParameterVector& a, const ParameterVector& b) {
  return a.size() == b.size() && (a.array() == b.array()).all();
}

}  // namespace

void RolloutConfig::validate() const {
  if (max_steps < 1) throw Error(ErrorCode::InvalidArgument, "rollout max_steps must be at least 1");
  if (!(delta_tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "rollout delta_tol must be positive");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorCode::InvalidArgument, "rollout dt must be positive");
}

RolloutResult rollout(const StepFunction& step, double t_start, const ParameterVector& theta_start,
                      const RolloutConfig& config) {
  config.validate();
  RolloutResult out;
  ParameterVector theta = theta_start;
  RolloutCandidate best, last;
  best.delta = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < config.max_steps; ++k) {
    ParameterVector next = step(t_start + static_cast<double>(k) * config.dt, theta);
    if (next.size() != theta.size() || !next.allFinite()) {
      out.aborted = true;
      break;
    }
    const double delta = (next - theta).norm();
    ++out.steps;
    last = {next, delta, k + 1};
    if (delta < best.delta) best = last;
    theta = std::move(next);
    if (delta < config.delta_tol) {
      out.stopped_early = true;
      break;
    }
  }
  if (out.steps > 0) {
    out.candidates.push_back(std::move(best));
    out.candidates.push_back(std::move(last));
  }
  return out;
}

RolloutResult rollout(const MlpParams& w, double t_start, const ParameterVector& theta_start,
                      const RolloutConfig& config) {
  if (static_cast<std::size_t>(theta_start.size()) + 1 != w.input_dim())
    throw Error(ErrorCode::DimensionMismatch, "rollout start does not match the network's parameter count");
  Eigen::VectorXd input(theta_start.size() + 1);
  auto step = [&](double t, const Eigen::VectorXd& theta) {
    input(0) = t;
    input.tail(theta.size()) = theta;
    return Eigen::VectorXd(forward(w, input).tail(theta.size()));
  };
  return rollout(step, t_start, theta_start, config);
}

std::string_view to_string(CandidateKind k) {
  switch (k) {
    case CandidateKind::Endpoint: return "endpoint";
    case CandidateKind::MinDelta: return "min_delta";
    case CandidateKind::Final: return "final";
    case CandidateKind::Extrapolated: return "extrapolated";
  }
  return "endpoint";
}

RestartChoice select_restart(const EnergyModel& model, std::span<RestartCandidate> candidates, Trajectory& traj,
                             std::uint64_t seed) {
  if (candidates.empty()) throw Error(ErrorCode::InvalidArgument, "no restart candidates");
  RestartChoice out;
  out.energies.assign(candidates.size(), 0.0);
  std::vector<bool> resolved(candidates.size(), false);
  for (std::size_t i = 0; i < candidates.size(); ++i)
    if (candidates[i].energy) {
      out.energies[i] = *candidates[i].energy;
      resolved[i] = true;
    }
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (resolved[i]) continue;
    const auto dup = std::find_if(candidates.begin(), candidates.end(), [&](const RestartCandidate& c) {
      const auto j = static_cast<std::size_t>(&c - candidates.data());
      return resolved[j] && same_theta(c.theta, candidates[i].theta);
    });
    if (dup != candidates.end()) {
      out.energies[i] = out.energies[static_cast<std::size_t>(dup - candidates.begin())];
    } else {
      if (static_cast<std::size_t>(candidates[i].theta.size()) != model.param_count())
        throw Error(ErrorCode::DimensionMismatch, "restart candidate has the wrong parameter count");
      out.energies[i] = model.energy(candidates[i].theta, derive_seed(seed, {i}));
      traj.charge_energy_evaluation();
      ++out.evaluations;
    }
    resolved[i] = true;
    candidates[i].energy = out.energies[i];
  }
  auto key = [&](std::size_t i) { return std::isfinite(out.energies[i]) ? out.energies[i] : INFINITY; };
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const double a = key(i), b = key(out.index);
    if (a < b || (a == b && candidates[i].delta < candidates[out.index].delta)) out.index = i;
  }
  return out;
}

void CycleLoopConfig::validate() const {
  if (tau < 1) throw Error(ErrorCode::InvalidArgument, "tau must be at least 1");
  vqe.validate();
}

CycleLoopResult run_cycles(const EnergyModel& model, const CycleLoopConfig& config, CyclePredictor& predictor,
                           const std::optional<TargetStop>& target) {
  config.validate();
  const VqeConfig& v = config.vqe;
  CycleLoopResult out;
  out.trajectory = Trajectory(ShotModel{model.term_count(), v.shot_epsilon, model.param_count()});
  Trajectory& traj = out.trajectory;
  ParameterVector theta0 = initial_parameters(model.param_count(), v.init_seed);
  const double e0 = model.energy(theta0, energy_seed(v.init_seed, 0));
  traj.append(std::move(theta0), e0, RecordSource::Quantum);

  std::size_t burst_start = 0;
  auto burst = [&](std::size_t n) {
    burst_start = traj.size() - 1;
    const std::size_t budget = v.max_iters > traj.gradient_steps() ? v.max_iters - traj.gradient_steps() : 0;
    return descend(model, traj, v.eta, v.varsigma, std::min(n, budget), v.init_seed, target);
  };

  out.termination = burst(config.first_burst());
  if (out.termination != Termination::MaxIterations) return out;

  for (std::size_t c = 0; c < config.max_cycles && traj.gradient_steps() < v.max_iters; ++c) {
    const std::vector<TrajectoryRecord> window(traj.records().begin() + static_cast<std::ptrdiff_t>(burst_start),
                                               traj.records().end());
    if (window.size() < 2) break;
    CyclePredictor::Context ctx{model, traj, c, derive_seed(v.init_seed, {kCycleTag, c}), {}};
    std::vector<RestartCandidate> cands;
    cands.push_back({window.back().theta, CandidateKind::Endpoint, std::numeric_limits<double>::infinity(),
                     window.back().energy});
    for (auto& cand : predictor.propose(window, ctx)) cands.push_back(std::move(cand));
    const RestartChoice choice = select_restart(model, cands, traj, derive_seed(ctx.seed, {kSelectTag}));

    CycleReport report;
    report.cycle = c;
    report.candidates = cands.size();
    report.chosen = cands[choice.index].kind;
    report.endpoint_energy = window.back().energy;
    report.restart_energy = choice.energies[choice.index];
    report.note = std::move(ctx.note);
    out.cycles.push_back(std::move(report));

    for (std::size_t i = 1; i < cands.size(); ++i) {
      if (i == choice.index || same_theta(cands[i].theta, cands[choice.index].theta)) continue;
      const bool seen = std::any_of(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(i),
                                    [&](const RestartCandidate& o) { return same_theta(o.theta, cands[i].theta); });
      if (!seen) traj.append(cands[i].theta, choice.energies[i], RecordSource::Predicted);
    }
    traj.append(cands[choice.index].theta, choice.energies[choice.index], RecordSource::Restart);
    if (target && std::abs(choice.energies[choice.index] - target->energy) <= target->accuracy) {
      out.termination = Termination::TargetReached;
      return out;
    }
    out.termination = burst(config.tau);
    if (out.termination != Termination::MaxIterations) return out;
  }
  out.termination = Termination::MaxIterations;
  out.warning = true;
  return out;
}

void PalqoConfig::validate() const {
  loop.validate();
  pinn.validate();
  rollout.validate();
}

PinnPredictor::PinnPredictor(std::size_t p, PinnConfig pinn, RolloutConfig rollout, bool reset_each_cycle)
    : p_(p), pinn_(std::move(pinn)), rollout_config_(rollout), reset_(reset_each_cycle) {
  pinn_.validate();
  rollout_config_.validate();
}

std::vector<RestartCandidate> PinnPredictor::propose(std::span<const TrajectoryRecord> window, Context& ctx) {
  const TrainingSet set = TrainingSet::from_window(window);
  if (set.param_dim() != p_) throw Error(ErrorCode::DimensionMismatch, "window parameter count mismatch");
  if (net_.weights.empty() || reset_) {
    const std::uint64_t seed = reset_ ? derive_seed(pinn_.train_seed, {kNetTag, ctx.cycle}) : pinn_.train_seed;
    net_ = MlpParams::random(p_, pinn_.resolved_width(p_), pinn_.hidden_layers, seed, pinn_.init);
  }
  history_.clear();
  rollout_ = {};
  try {
    TrainResult r = train(net_, set, pinn_);
    net_ = std::move(r.params);
    history_ = std::move(r.history);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NonFinite) throw;
    ctx.note = e.what();
    net_ = {};
    return {};
  }
  const double t_start = kTimeStep * static_cast<double>(window.size());
  rollout_ = rollout(net_, t_start, window.back().theta, rollout_config_);
  if (rollout_.aborted) ctx.note = "rollout stopped at a non-finite prediction after " +
                                   std::to_string(rollout_.steps) + " steps";
  std::vector<RestartCandidate> out;
  for (std::size_t i = 0; i < rollout_.candidates.size(); ++i) {
    const auto& c = rollout_.candidates[i];
    out.push_back({c.theta, i == 0 ? CandidateKind::MinDelta : CandidateKind::Final, c.delta, std::nullopt});
  }
  return out;
}

CycleLoopResult run_palqo(const EnergyModel& model, const PalqoConfig& config,
                          const std::optional<TargetStop>& target) {
  config.validate();
  PinnConfig pinn = config.pinn;
  pinn.eta_vqe = config.loop.vqe.eta;
  PinnPredictor predictor(model.param_count(), pinn, config.rollout, config.reset_network_each_cycle);
  return run_cycles(model, config.loop, predictor, target);
}

}  // namespace palqo
