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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "palqo/vqe.hpp"

namespace palqo {

/// Weight initialization. `Uniform` draws every weight and bias from
/// U[-1, 1]. `FanIn` draws from U[-1/sqrt(fan_in), 1/sqrt(fan_in)], which
/// keeps wide tanh layers out of saturation.
enum class InitScheme { Uniform, FanIn };
std::string_view to_string(InitScheme s);
InitScheme parse_init_scheme(std::string_view text);

/// Fully connected tanh network [p+1, W, ..., W, p+1] with an affine output
/// layer. Layer l maps a_{l-1} to tanh(weights[l] a_{l-1} + biases[l]); the
/// last entry of `weights` is the output layer.
struct MlpParams {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  static MlpParams zeros(std::size_t p, std::size_t width, std::size_t hidden_layers);
  static MlpParams random(std::size_t p, std::size_t width, std::size_t hidden_layers, std::uint64_t seed,
                          InitScheme scheme = InitScheme::Uniform);

  std::size_t input_dim() const { return static_cast<std::size_t>(weights.front().cols()); }
  std::size_t output_dim() const { return static_cast<std::size_t>(weights.back().rows()); }
  std::size_t hidden_layers() const { return weights.size() - 1; }
  /// Total number of scalar weights and biases.
  std::size_t size() const;
  bool all_finite() const;

  /// Every entry in layer order (weights column-major, then bias), and back.
  Eigen::VectorXd flatten() const;
  void assign(const Eigen::VectorXd& flat);

  /// Throws Error(DimensionMismatch) if consecutive layers do not chain.
  void validate() const;
};

struct PinnConfig {
  std::size_t width = 0;          // hidden width; 0 selects width_factor * p
  std::size_t width_factor = 50;  // used when width == 0
  std::size_t hidden_layers = 2;
  double lambda_data = 1e-4;
  double lambda_p1 = 1.0;
  double lambda_p2 = 1.0;
  double eta_vqe = 0.05;  // learning rate of the quantum-side descent
  std::size_t epochs = 3400;
  double lr_initial = 1e-3;
  double lr_final = 1e-5;
  std::uint64_t train_seed = 0;
  bool p2_enabled = true;
  bool p1_per_component = false;
  InitScheme init = InitScheme::Uniform;

  std::size_t resolved_width(std::size_t p) const { return width != 0 ? width : width_factor * p; }
  void validate() const;
};

/// One supervised pair: input (t_hat, theta^(j)) and targets E^(j), theta^(j+1).
struct PinnSample {
  Eigen::VectorXd input;
  double energy = 0.0;
  Eigen::VectorXd theta_next;
};

struct TrainingSet {
  std::vector<PinnSample> samples;

  std::size_t size() const noexcept { return samples.size(); }
  bool empty() const noexcept { return samples.empty(); }
  std::size_t param_dim() const;

  /// Builds tau = window.size() - 1 samples from consecutive records, with
  /// the cycle-local clock t_hat = kTimeStep * (j + 1) for sample j.
  static TrainingSet from_window(std::span<const TrajectoryRecord> window);
  /// Throws unless nonempty with consistent dimensions.
  void validate() const;
};

Eigen::VectorXd forward(const MlpParams& w, const Eigen::VectorXd& input);

/// d output / d input, (p+1) x (p+1). Row 0 is the energy gradient, column 0
/// the time derivative.
Eigen::MatrixXd input_jacobian(const MlpParams& w, const Eigen::VectorXd& input);

/// Hessian of output 0 with respect to input slots 1..p. Symmetric by construction.
Eigen::MatrixXd energy_input_hessian(const MlpParams& w, const Eigen::VectorXd& input);

/// H v for the Hessian above, by forward-mode differentiation of the
/// reverse pass. `v` has length p.
Eigen::VectorXd energy_hessian_vector(const MlpParams& w, const Eigen::VectorXd& input, const Eigen::VectorXd& v);

enum class HessianPath { HessianVector, Full };

double loss_data(const MlpParams& w, const TrainingSet& s);
double loss_p1(const MlpParams& w, const TrainingSet& s, bool per_component = false);
double loss_p2(const MlpParams& w, const TrainingSet& s, double eta_vqe, HessianPath path = HessianPath::HessianVector);

struct LossBreakdown {
  double data = 0.0;
  double p1 = 0.0;
  double p2 = 0.0;
  double total = 0.0;
};

LossBreakdown total_loss(const MlpParams& w, const TrainingSet& s, const PinnConfig& config);

struct LossGradient {
  LossBreakdown loss;
  MlpParams grad;  // same shapes as the network
};

/// Exact gradient of total_loss with respect to every weight and bias.
LossGradient loss_weight_gradient(const MlpParams& w, const TrainingSet& s, const PinnConfig& config);

/// Central-difference gradient of total_loss. Validation only: O(size) loss calls.
MlpParams loss_weight_gradient_fd(const MlpParams& w, const TrainingSet& s, const PinnConfig& config,
                                  double step = 1e-6);

struct TrainResult {
  MlpParams params;
  std::vector<LossBreakdown> history;  // one entry per epoch, before its update
};

/// Full-batch Adam (beta1 0.9, beta2 0.999, eps 1e-8) with the learning rate
/// decayed linearly from lr_initial to lr_final. Throws Error(NonFinite) if a
/// loss or gradient stops being finite.
TrainResult train(MlpParams w0, const TrainingSet& s, const PinnConfig& config);

/// Text checkpoint: a version line, the layer sizes, then each layer's
/// weights row by row followed by its biases. Round-trips bit-exactly.
std::string save_checkpoint(const MlpParams& w);
MlpParams load_checkpoint(std::string_view text);

}  // namespace palqo
