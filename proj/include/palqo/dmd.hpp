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
#include <span>

#include "palqo/predictor.hpp"
#include "palqo/vqe.hpp"

namespace palqo {

/// Linear one-step operator theta^{k+1} ~ A theta^k.
struct DmdModel {
  Eigen::MatrixXd a;
};

struct DmdFitOptions {
  double rcond = 1e-12;  // singular values below rcond * s_max are dropped
  std::size_t rank = 0;  // keep at most this many singular values; 0 keeps all
};

/// A = Y pinv(X) for snapshot matrices X = [theta^0 .. theta^{k-1}],
/// Y = [theta^1 .. theta^k]. Throws with fewer than two snapshots.
DmdModel fit_dmd(std::span<const ParameterVector> snapshots, const DmdFitOptions& options = {});
/// Same fit from explicit column pairs (Y[:, j] follows X[:, j]).
DmdModel fit_dmd_pairs(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const DmdFitOptions& options = {});

/// A^steps theta by repeated application. Sets *diverged when an iterate's
/// norm exceeds 1e6.
ParameterVector predict_dmd(const DmdModel& model, const ParameterVector& theta, std::size_t steps,
                            bool* diverged = nullptr);

struct DmdConfig {
  CycleLoopConfig loop;  // loop.tau is the fit window, default 3
  DmdFitOptions fit;
  std::size_t max_predict_steps = 2000;

  DmdConfig() { loop.tau = 3; }
  void validate() const;
};

/// Extrapolates with the fitted operator, measuring (and charging) every
/// predicted step, and stops at the first step that fails to lower the energy
/// or reaches a fixed point. Every measured step becomes a candidate.
class DmdPredictor final : public CyclePredictor {
 public:
  DmdPredictor(DmdFitOptions fit, std::size_t max_steps) : fit_(fit), max_steps_(max_steps) {}
  std::vector<RestartCandidate> propose(std::span<const TrajectoryRecord> window, Context& ctx) override;

 private:
  DmdFitOptions fit_;
  std::size_t max_steps_;
};

CycleLoopResult run_dmd(const EnergyModel& model, const DmdConfig& config,
                        const std::optional<TargetStop>& target = {});

}  // namespace palqo
