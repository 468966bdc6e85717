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

#include "palqo/dmd.hpp"

#include <Eigen/SVD>
#include <cmath>

#include "palqo/error.hpp"
#include "palqo/rng.hpp"

namespace palqo {

namespace {
constexpr double kDivergenceNorm = 1e6;
}

DmdModel fit_dmd_pairs(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const DmdFitOptions& options) {
  if (x.rows() != y.rows() || x.cols() != y.cols() || x.cols() < 1 || x.rows() < 1)
    throw Error(ErrorCode::DimensionMismatch, "snapshot matrices must share a nonempty shape");
  if (!x.allFinite() || !y.allFinite()) throw Error(ErrorCode::NonFinite, "snapshots contain non-finite entries");
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  Eigen::Index keep = 0;
  const double cutoff = options.rcond * (s.size() > 0 ? s(0) : 0.0);
  while (keep < s.size() && s(keep) > cutoff) ++keep;
  if (options.rank > 0) keep = std::min<Eigen::Index>(keep, static_cast<Eigen::Index>(options.rank));
  DmdModel m;
  m.a = y * svd.matrixV().leftCols(keep) * s.head(keep).cwiseInverse().asDiagonal() *
        svd.matrixU().leftCols(keep).transpose();
  return m;
}

DmdModel fit_dmd(std::span<const ParameterVector> snapshots, const DmdFitOptions& options) {
  if (snapshots.size() < 2) throw Error(ErrorCode::InvalidArgument, "DMD needs at least two snapshots");
  const auto p = snapshots.front().size();
  const auto k = static_cast<Eigen::Index>(snapshots.size()) - 1;
  Eigen::MatrixXd x(p, k), y(p, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const auto& a = snapshots[static_cast<std::size_t>(j)];
    const auto& b = snapshots[static_cast<std::size_t>(j) + 1];
    if (a.size() != p || b.size() != p) throw Error(ErrorCode::DimensionMismatch, "snapshot lengths differ");
    x.col(j) = a;
    y.col(j) = b;
  }
  return fit_dmd_pairs(x, y, options);
}

ParameterVector predict_dmd(const DmdModel& model, const ParameterVector& theta, std::size_t steps, bool* diverged) {
  if (model.a.rows() != theta.size() || model.a.cols() != theta.size())
    throw Error(ErrorCode::DimensionMismatch, "operator and parameter vector sizes differ");
  ParameterVector out = theta;
  for (std::size_t k = 0; k < steps; ++k) {
    out = model.a * out;
    if (diverged && !(out.norm() <= kDivergenceNorm)) *diverged = true;
  }
  return out;
}

void DmdConfig::validate() const {
  loop.validate();
  if (max_predict_steps < 1) throw Error(ErrorCode::InvalidArgument, "max_predict_steps must be at least 1");
  if (!(fit.rcond >= 0.0)) throw Error(ErrorCode::InvalidArgument, "rcond must be nonnegative");
}

std::vector<RestartCandidate> DmdPredictor::propose(std::span<const TrajectoryRecord> window, Context& ctx) {
  std::vector<ParameterVector> snaps;
  for (const auto& r : window) snaps.push_back(r.theta);
  const DmdModel m = fit_dmd(snaps, fit_);
  ParameterVector theta = window.back().theta;
  double prev = window.back().energy;
  // Every measured step is returned, so each charged evaluation shows up in
  // the trajectory; the outer loop picks the lowest.
  std::vector<RestartCandidate> out;
  for (std::size_t k = 1; k <= max_steps_; ++k) {
    bool diverged = false;
    ParameterVector next = predict_dmd(m, theta, 1, &diverged);
    if (diverged || !next.allFinite()) {
      ctx.note = "DMD extrapolation diverged after " + std::to_string(k - 1) + " steps";
      break;
    }
    if ((next.array() == theta.array()).all()) break;
    const double e = ctx.model.energy(next, derive_seed(ctx.seed, {0x646d64ULL, k}));
    ctx.trajectory.charge_energy_evaluation();
    out.push_back({next, CandidateKind::Extrapolated, static_cast<double>(k), e});
    if (!(e < prev)) break;
    prev = e;
    theta = std::move(next);
  }
  return out;
}

CycleLoopResult run_dmd(const EnergyModel& model, const DmdConfig& config, const std::optional<TargetStop>& target) {
  config.validate();
  DmdPredictor predictor(config.fit, config.max_predict_steps);
  return run_cycles(model, config.loop, predictor, target);
}

}  // namespace palqo
