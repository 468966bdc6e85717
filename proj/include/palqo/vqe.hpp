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
#include <optional>
#include <string_view>
#include <vector>

#include "palqo/ansatz.hpp"
#include "palqo/pauli.hpp"
#include "palqo/statevector.hpp"

namespace palqo {

/// The "quantum side" as seen by the optimizers: an energy landscape over
/// circuit parameters. Stochastic models consume `seed`; ideal ones ignore it.
class EnergyModel {
 public:
  virtual ~EnergyModel() = default;

  virtual std::size_t param_count() const = 0;
  /// Number of measured terms M, used for shot accounting.
  virtual std::size_t term_count() const = 0;
  virtual double energy(const ParameterVector& theta, std::uint64_t seed) const = 0;
  /// Defaults to the parameter-shift rule.
  virtual Eigen::VectorXd gradient(const ParameterVector& theta, std::uint64_t seed) const;
};

/// <0|U(theta)^dag H U(theta)|0> on the statevector simulator.
class VqeModel final : public EnergyModel {
 public:
  VqeModel(Hamiltonian h, AnsatzSpec spec, std::optional<NoiseModel> noise = std::nullopt);

  std::size_t param_count() const override { return spec_.param_count(); }
  std::size_t term_count() const override { return h_.num_terms(); }
  double energy(const ParameterVector& theta, std::uint64_t seed) const override;

  const Hamiltonian& hamiltonian() const noexcept { return h_; }
  const AnsatzSpec& ansatz() const noexcept { return spec_; }
  const std::optional<NoiseModel>& noise() const noexcept { return noise_; }

 private:
  Hamiltonian h_;
  AnsatzSpec spec_;
  std::optional<NoiseModel> noise_;
};

/// Synthetic landscape E = 1/2 (theta - c)^T A (theta - c) + offset with an
/// analytic gradient. A must be symmetric.
class QuadraticModel final : public EnergyModel {
 public:
  QuadraticModel(Eigen::MatrixXd curvature, Eigen::VectorXd center, double offset = 0.0);

  std::size_t param_count() const override { return static_cast<std::size_t>(center_.size()); }
  std::size_t term_count() const override { return 1; }
  double energy(const ParameterVector& theta, std::uint64_t seed) const override;
  Eigen::VectorXd gradient(const ParameterVector& theta, std::uint64_t seed) const override;

  double minimum() const noexcept { return offset_; }

 private:
  Eigen::MatrixXd a_;
  Eigen::VectorXd center_;
  double offset_;
};

/// Energy of `theta` under (h, spec), optionally noisy.
double energy(const Hamiltonian& h, const AnsatzSpec& spec, const ParameterVector& theta,
              const NoiseModel* noise = nullptr, std::uint64_t seed = 0);

/// dE/dtheta_i = [E(theta_i + pi/2) - E(theta_i - pi/2)] / 2. Each shifted
/// evaluation draws its own stream derived from (seed, i, sign).
Eigen::VectorXd parameter_shift_gradient(const EnergyModel& model, const ParameterVector& theta,
                                         std::uint64_t seed = 0);

/// theta - eta * grad. Throws Error(NonFinite) if grad has non-finite entries.
ParameterVector gd_step(const ParameterVector& theta, const Eigen::VectorXd& grad, double eta);

/// K' = sum_i (dE/dtheta_i)^2, the single-point quantum neural tangent kernel.
double qntk_scalar(const EnergyModel& model, const ParameterVector& theta, std::uint64_t seed = 0);

/// theta^(0) ~ U[0,1]^p.
ParameterVector initial_parameters(std::size_t p, std::uint64_t seed);

struct ShotModel {
  std::size_t terms = 1;   // M
  double epsilon = 1e-3;   // target accuracy
  std::size_t params = 1;  // p

  void validate() const;
};

/// iterations * ceil(2 p M / eps^2); exact integer arithmetic, throws Error(Overflow).
std::uint64_t shot_cost(const ShotModel& model, std::uint64_t iterations);
/// evaluations * ceil(M / eps^2), the cost of plain energy estimates.
std::uint64_t energy_shot_cost(const ShotModel& model, std::uint64_t evaluations);

enum class RecordSource { Quantum, Predicted, Restart };
std::string_view to_string(RecordSource s);
RecordSource parse_record_source(std::string_view text);

/// Scaled time grid: t_scaled = kTimeStep * step.
inline constexpr double kTimeStep = 0.01;

struct TrajectoryRecord {
  std::size_t step = 0;
  double t_scaled = 0.0;
  ParameterVector theta;
  double energy = 0.0;
  RecordSource source = RecordSource::Quantum;
};

/// Ordered optimization history plus quantum-cost tallies. Every gradient
/// step adds one quantum iteration and 2pM/eps^2 shots; every charged
/// energy evaluation adds one quantum iteration and M/eps^2 shots.
class Trajectory {
 public:
  Trajectory() = default;
  explicit Trajectory(ShotModel shots) : shots_(shots) {}

  const std::vector<TrajectoryRecord>& records() const noexcept { return records_; }
  const TrajectoryRecord& back() const { return records_.back(); }
  bool empty() const noexcept { return records_.empty(); }
  std::size_t size() const noexcept { return records_.size(); }

  /// Appends with step = size() and t_scaled = kTimeStep * step.
  void append(ParameterVector theta, double energy, RecordSource source);

  void charge_gradient_step();
  void charge_energy_evaluation();

  std::uint64_t quantum_iterations() const noexcept { return gradient_steps_ + energy_evaluations_; }
  std::uint64_t gradient_steps() const noexcept { return gradient_steps_; }
  std::uint64_t energy_evaluations() const noexcept { return energy_evaluations_; }
  std::uint64_t shot_total() const noexcept { return shot_total_; }
  const ShotModel& shot_model() const noexcept { return shots_; }

 private:
  ShotModel shots_;
  std::vector<TrajectoryRecord> records_;
  std::uint64_t gradient_steps_ = 0;
  std::uint64_t energy_evaluations_ = 0;
  std::uint64_t shot_total_ = 0;
};

struct VqeConfig {
  double eta = 0.05;
  std::size_t max_iters = 1000;
  std::uint64_t init_seed = 0;
  std::optional<NoiseModel> noise;
  double varsigma = 1e-6;   // convergence constant
  double accuracy = 1e-3;   // target a for Delta E
  double shot_epsilon = 1e-3;

  void validate() const;
};

enum class Termination { Tolerance, MaxIterations, TargetReached };
std::string_view to_string(Termination t);

/// |theta_a - theta_b|_2 + |E_a - E_b| <= varsigma
bool converged_between(const TrajectoryRecord& a, const TrajectoryRecord& b, double varsigma);

/// Stops a descent once the energy is within `accuracy` of `energy`.
struct TargetStop {
  double energy = 0.0;
  double accuracy = 1e-3;
};

/// Runs up to `steps` gradient-descent steps from the trajectory's last record,
/// appending one quantum record per step. Returns the reason it stopped.
/// Seeds for stochastic models derive from (seed, step index).
Termination descend(const EnergyModel& model, Trajectory& traj, double eta, double varsigma,
                    std::size_t steps, std::uint64_t seed, const std::optional<TargetStop>& target = {});

struct VqeResult {
  Trajectory trajectory;
  Termination termination = Termination::MaxIterations;
};

/// Plain gradient-descent VQE from theta^(0) ~ U[0,1]^p.
VqeResult run_vqe(const EnergyModel& model, const VqeConfig& config,
                  const std::optional<TargetStop>& target = {});

/// Seed of the energy estimate attached to record `step`.
std::uint64_t energy_seed(std::uint64_t base, std::size_t step);

}  // namespace palqo
