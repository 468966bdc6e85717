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

#include "palqo/vqe.hpp"

#include <cmath>
#include <numbers>

#include "palqo/error.hpp"
#include "palqo/rng.hpp"

namespace palqo {

namespace {

constexpr std::uint64_t kGradientTag = 0x67726164ULL;  // "grad"
constexpr std::uint64_t kEnergyTag = 0x656e7267ULL;    // "enrg"
constexpr double kDivergenceBound = 1e6;

using u128 = unsigned __int128;

std::uint64_t ceil_cost(double x) {
  // Values within 1e-9 relative of an integer are treated as that integer so
  // that decimal inputs such as eps = 1e-3 give the textbook count.
  const double r = std::nearbyint(x);
  const double v = std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x)) ? r : std::ceil(x);
  if (!(v >= 0.0) || v >= 1.8e19) throw Error(ErrorCode::Overflow, "shot count exceeds 64-bit range");
  return static_cast<std::uint64_t>(v);
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  const u128 r = static_cast<u128>(a) * b;
  if (r > static_cast<u128>(UINT64_MAX)) throw Error(ErrorCode::Overflow, "shot total exceeds 64-bit range");
  return static_cast<std::uint64_t>(r);
}

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  const u128 r = static_cast<u128>(a) + b;
  if (r > static_cast<u128>(UINT64_MAX)) throw Error(ErrorCode::Overflow, "shot total exceeds 64-bit range");
  return static_cast<std::uint64_t>(r);
}

}  // namespace

Eigen::VectorXd EnergyModel::gradient(const ParameterVector& theta, std::uint64_t seed) const {
  return parameter_shift_gradient(*this, theta, seed);
}

VqeModel::VqeModel(Hamiltonian h, AnsatzSpec spec, std::optional<NoiseModel> noise)
    : h_(std::move(h)), spec_(std::move(spec)), noise_(noise) {
  if (h_.num_qubits() != spec_.num_qubits())
    throw Error(ErrorCode::DimensionMismatch, "Hamiltonian acts on " + std::to_string(h_.num_qubits()) +
                                                  " qubits but the ansatz on " +
                                                  std::to_string(spec_.num_qubits()));
  if (noise_) noise_->validate();
}

double VqeModel::energy(const ParameterVector& theta, std::uint64_t seed) const {
  return palqo::energy(h_, spec_, theta, noise_ ? &*noise_ : nullptr, seed);
}

QuadraticModel::QuadraticModel(Eigen::MatrixXd curvature, Eigen::VectorXd center, double offset)
    : a_(std::move(curvature)), center_(std::move(center)), offset_(offset) {
  if (a_.rows() != a_.cols() || a_.rows() != center_.size() || center_.size() == 0)
    throw Error(ErrorCode::DimensionMismatch, "curvature must be p x p with p = center size");
}

double QuadraticModel::energy(const ParameterVector& theta, std::uint64_t) const {
  if (theta.size() != center_.size()) throw Error(ErrorCode::DimensionMismatch, "parameter length mismatch");
  const Eigen::VectorXd d = theta - center_;
  return 0.5 * d.dot(a_ * d) + offset_;
}

Eigen::VectorXd QuadraticModel::gradient(const ParameterVector& theta, std::uint64_t) const {
  if (theta.size() != center_.size()) throw Error(ErrorCode::DimensionMismatch, "parameter length mismatch");
  return a_ * (theta - center_);
}

double energy(const Hamiltonian& h, const AnsatzSpec& spec, const ParameterVector& theta, const NoiseModel* noise,
              std::uint64_t seed) {
  const StateVector psi = prepare_state(spec, theta);
  if (noise == nullptr) return expectation(psi, h);
  return noisy_expectation(psi, h, *noise, seed);
}

Eigen::VectorXd parameter_shift_gradient(const EnergyModel& model, const ParameterVector& theta,
                                         std::uint64_t seed) {
  const auto p = static_cast<Eigen::Index>(model.param_count());
  if (theta.size() != p) throw Error(ErrorCode::DimensionMismatch, "parameter length mismatch");
  constexpr double shift = std::numbers::pi / 2.0;
  Eigen::VectorXd grad(p);
  ParameterVector shifted = theta;
  for (Eigen::Index i = 0; i < p; ++i) {
    const auto idx = static_cast<std::uint64_t>(i);
    shifted(i) = theta(i) + shift;
    const double plus = model.energy(shifted, derive_seed(seed, {idx, 1}));
    shifted(i) = theta(i) - shift;
    const double minus = model.energy(shifted, derive_seed(seed, {idx, 0}));
    shifted(i) = theta(i);
    grad(i) = 0.5 * (plus - minus);
  }
  return grad;
}

ParameterVector gd_step(const ParameterVector& theta, const Eigen::VectorXd& grad, double eta) {
  if (theta.size() != grad.size()) throw Error(ErrorCode::DimensionMismatch, "gradient length mismatch");
  if (!grad.allFinite()) throw Error(ErrorCode::NonFinite, "gradient has non-finite entries");
  return theta - eta * grad;
}

double qntk_scalar(const EnergyModel& model, const ParameterVector& theta, std::uint64_t seed) {
  return model.gradient(theta, seed).squaredNorm();
}

ParameterVector initial_parameters(std::size_t p, std::uint64_t seed) {
  CounterRng rng(derive_seed(seed, {0x696e6974ULL}));
  ParameterVector theta(static_cast<Eigen::Index>(p));
  for (Eigen::Index i = 0; i < theta.size(); ++i) theta(i) = rng.uniform();
  return theta;
}

void ShotModel::validate() const {
  if (terms < 1 || params < 1 || !(epsilon > 0.0))
    throw Error(ErrorCode::InvalidArgument, "shot model needs M >= 1, p >= 1, epsilon > 0");
}

std::uint64_t shot_cost(const ShotModel& model, std::uint64_t iterations) {
  model.validate();
  const double per_iter = 2.0 * static_cast<double>(model.params) * static_cast<double>(model.terms) /
                          (model.epsilon * model.epsilon);
  return checked_mul(iterations, ceil_cost(per_iter));
}

std::uint64_t energy_shot_cost(const ShotModel& model, std::uint64_t evaluations) {
  model.validate();
  const double per_eval = static_cast<double>(model.terms) / (model.epsilon * model.epsilon);
  return checked_mul(evaluations, ceil_cost(per_eval));
}

std::string_view to_string(RecordSource s) {
  switch (s) {
    case RecordSource::Quantum: return "quantum";
    case RecordSource::Predicted: return "predicted";
    case RecordSource::Restart: return "restart";
  }
  return "quantum";
}

RecordSource parse_record_source(std::string_view text) {
  if (text == "quantum") return RecordSource::Quantum;
  if (text == "predicted") return RecordSource::Predicted;
  if (text == "restart") return RecordSource::Restart;
  throw Error(ErrorCode::InvalidArgument, "unknown record source '" + std::string(text) + "'");
}

void Trajectory::append(ParameterVector theta, double energy, RecordSource source) {
  if (!records_.empty() && records_.front().theta.size() != theta.size())
    throw Error(ErrorCode::DimensionMismatch, "trajectory records must share one parameter length");
  TrajectoryRecord r;
  r.step = records_.size();
  r.t_scaled = kTimeStep * static_cast<double>(r.step);
  r.theta = std::move(theta);
  r.energy = energy;
  r.source = source;
  records_.push_back(std::move(r));
}

void Trajectory::charge_gradient_step() {
  shot_total_ = checked_add(shot_total_, shot_cost(shots_, 1));
  ++gradient_steps_;
}

void Trajectory::charge_energy_evaluation() {
  shot_total_ = checked_add(shot_total_, energy_shot_cost(shots_, 1));
  ++energy_evaluations_;
}

void VqeConfig::validate() const {
  if (!(eta > 0.0)) throw Error(ErrorCode::InvalidArgument, "learning rate eta must be positive");
  if (!(varsigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "convergence constant must be positive");
  if (!(accuracy > 0.0)) throw Error(ErrorCode::InvalidArgument, "accuracy target must be positive");
  if (!(shot_epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "shot epsilon must be positive");
  if (noise) noise->validate();
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::Tolerance: return "tolerance";
    case Termination::MaxIterations: return "max_iterations";
    case Termination::TargetReached: return "target_reached";
  }
  return "max_iterations";
}

bool converged_between(const TrajectoryRecord& a, const TrajectoryRecord& b, double varsigma) {
  return (a.theta - b.theta).norm() + std::abs(a.energy - b.energy) <= varsigma;
}

std::uint64_t energy_seed(std::uint64_t base, std::size_t step) {
  return derive_seed(base, {kEnergyTag, static_cast<std::uint64_t>(step)});
}

Termination descend(const EnergyModel& model, Trajectory& traj, double eta, double varsigma, std::size_t steps,
                    std::uint64_t seed, const std::optional<TargetStop>& target) {
  if (traj.empty()) throw Error(ErrorCode::InvalidArgument, "descent needs a starting record");
  auto reached = [&](double e) { return target && std::abs(e - target->energy) <= target->accuracy; };
  if (reached(traj.back().energy)) return Termination::TargetReached;
  for (std::size_t k = 0; k < steps; ++k) {
    const TrajectoryRecord& last = traj.back();
    const std::size_t step = last.step;
    const Eigen::VectorXd grad = model.gradient(last.theta, derive_seed(seed, {kGradientTag, step}));
    ParameterVector next = gd_step(last.theta, grad, eta);
    const double e = model.energy(next, energy_seed(seed, step + 1));
    if (!std::isfinite(e) || std::abs(e) > kDivergenceBound)
      throw Error(ErrorCode::Divergence, "energy diverged at step " + std::to_string(step + 1));
    traj.charge_gradient_step();
    traj.append(std::move(next), e, RecordSource::Quantum);
    const auto& recs = traj.records();
    if (converged_between(recs[recs.size() - 2], recs.back(), varsigma)) return Termination::Tolerance;
    if (reached(e)) return Termination::TargetReached;
  }
  return Termination::MaxIterations;
}

VqeResult run_vqe(const EnergyModel& model, const VqeConfig& config, const std::optional<TargetStop>& target) {
  config.validate();
  VqeResult out;
  out.trajectory = Trajectory(ShotModel{model.term_count(), config.shot_epsilon, model.param_count()});
  ParameterVector theta0 = initial_parameters(model.param_count(), config.init_seed);
  const double e0 = model.energy(theta0, energy_seed(config.init_seed, 0));
  out.trajectory.append(std::move(theta0), e0, RecordSource::Quantum);
  out.termination = descend(model, out.trajectory, config.eta, config.varsigma, config.max_iters,
                            config.init_seed, target);
  return out;
}

}  // namespace palqo
