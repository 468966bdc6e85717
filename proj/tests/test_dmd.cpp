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

#include <Eigen/SVD>
#include <cmath>

#include "doctest.h"
#include "palqo/dmd.hpp"
#include "palqo/error.hpp"
#include "palqo/rng.hpp"

using namespace palqo;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  CounterRng rng(seed);
  MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-1.0, 1.0);
  return m;
}

std::vector<ParameterVector> orbit(const MatrixXd& a, VectorXd x, int n) {
  std::vector<ParameterVector> out;
  for (int k = 0; k < n; ++k) {
    out.push_back(x);
    x = a * x;
  }
  return out;
}

}  // namespace

TEST_CASE("DMD recovers a linear operator") {
  SUBCASE("0.5 I from independent starts") {
    const MatrixXd x = random_matrix(3, 5, 1);
    const DmdModel m = fit_dmd_pairs(x, 0.5 * x);
    CHECK((m.a - 0.5 * MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-10);
  }
  SUBCASE("0.5 I along one orbit is exact on the data") {
    const auto snaps = orbit(0.5 * MatrixXd::Identity(3, 3), VectorXd::LinSpaced(3, 1.0, 2.0), 4);
    const DmdModel m = fit_dmd(snaps);
    for (std::size_t k = 0; k + 1 < snaps.size(); ++k)
      CHECK((m.a * snaps[k] - snaps[k + 1]).norm() <= 1e-12);
  }
  SUBCASE("scalar least squares") {
    const std::vector<ParameterVector> s = {VectorXd::Constant(1, 1.0), VectorXd::Constant(1, 2.0),
                                            VectorXd::Constant(1, 4.0)};
    CHECK(fit_dmd(s).a(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
  }
  SUBCASE("constant snapshots are a fixed point") {
    const VectorXd c = VectorXd::LinSpaced(4, -1.0, 1.0);
    const std::vector<ParameterVector> s(3, c);
    const DmdModel m = fit_dmd(s);
    CHECK((m.a * c - c).norm() <= 1e-12);
  }
  SUBCASE("fit residual on well-conditioned random maps") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const MatrixXd a = random_matrix(4, 4, seed + 10);
      const MatrixXd x = random_matrix(4, 6, seed + 20);
      const MatrixXd y = a * x;
      const DmdModel m = fit_dmd_pairs(x, y);
      CHECK((y - m.a * x).norm() <= 1e-8 * y.norm());
      CHECK((m.a - a).norm() <= 1e-8 * a.norm());
    }
  }
  SUBCASE("ill-conditioned map up to 1e6") {
    Eigen::VectorXd d(4);
    d << 1.0, 1e-2, 1e-4, 1e-6;
    const MatrixXd q = Eigen::JacobiSVD<MatrixXd>(random_matrix(4, 4, 3), Eigen::ComputeFullU).matrixU();
    const MatrixXd a = q * d.asDiagonal() * q.transpose();
    const MatrixXd x = random_matrix(4, 8, 4);
    const MatrixXd y = a * x;
    CHECK((y - fit_dmd_pairs(x, y).a * x).norm() <= 1e-8 * y.norm());
  }
  SUBCASE("rank truncation") {
    const MatrixXd x = random_matrix(3, 5, 5);
    DmdFitOptions opt;
    opt.rank = 1;
    const DmdModel m = fit_dmd_pairs(x, 0.5 * x, opt);
    Eigen::JacobiSVD<MatrixXd> svd(m.a);
    CHECK(svd.singularValues()(1) <= 1e-12);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(fit_dmd(std::vector<ParameterVector>{VectorXd::Ones(2)}), Error);
    CHECK_THROWS_AS(fit_dmd(std::vector<ParameterVector>{VectorXd::Ones(2), VectorXd::Ones(3)}), Error);
    CHECK_THROWS_AS(fit_dmd_pairs(MatrixXd::Ones(2, 2), MatrixXd::Constant(2, 2, NAN)), Error);
  }
}

TEST_CASE("DMD prediction") {
  DmdModel m{0.5 * MatrixXd::Identity(2, 2)};
  const VectorXd t = VectorXd::Ones(2);
  CHECK(predict_dmd(m, t, 0) == t);
  CHECK(predict_dmd(m, t, 2) == VectorXd::Constant(2, 0.25));

  const DmdModel r{random_matrix(3, 3, 9)};
  const VectorXd x = VectorXd::LinSpaced(3, 0.1, 0.9);
  for (std::size_t a : {0, 1, 3})
    for (std::size_t b : {0, 2, 5}) CHECK(predict_dmd(r, x, a + b) == predict_dmd(r, predict_dmd(r, x, a), b));

  bool diverged = false;
  DmdModel big{3.0 * MatrixXd::Identity(2, 2)};
  predict_dmd(big, t, 10, &diverged);
  CHECK_FALSE(diverged);
  predict_dmd(big, t, 20, &diverged);
  CHECK(diverged);
  CHECK_THROWS_AS(predict_dmd(m, VectorXd::Ones(3), 1), Error);
}

TEST_CASE("DMD outer loop on a quadratic landscape") {
  MatrixXd a(2, 2);
  a << 1.5, 0.3, 0.3, 0.8;
  const QuadraticModel model(a, (VectorXd(2) << 0.3, -0.2).finished(), -1.0);
  DmdConfig cfg;
  cfg.loop.vqe.eta = 0.05;
  cfg.loop.vqe.max_iters = 2000;
  CHECK(cfg.loop.tau == 3);

  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    cfg.loop.vqe.init_seed = seed;
    const TargetStop target{-1.0, 1e-6};
    const auto r = run_dmd(model, cfg, target);
    CHECK(r.termination == Termination::TargetReached);
    for (const auto& c : r.cycles) CHECK(c.restart_energy <= c.endpoint_energy + 1e-9);
    // GD on a quadratic is exactly linear-affine, so DMD extrapolation is
    // far cheaper than plain descent.
    const auto plain = run_vqe(model, cfg.loop.vqe, target);
    CHECK(r.trajectory.quantum_iterations() < plain.trajectory.quantum_iterations());
    CHECK(r.trajectory.quantum_iterations() ==
          r.trajectory.gradient_steps() + r.trajectory.energy_evaluations());
  }
}

TEST_CASE("DMD predictor charges every evaluated step") {
  class Counting final : public EnergyModel {
   public:
    explicit Counting(const EnergyModel& inner) : inner_(inner) {}
    std::size_t param_count() const override { return inner_.param_count(); }
    std::size_t term_count() const override { return inner_.term_count(); }
    double energy(const ParameterVector& t, std::uint64_t s) const override {
      ++calls;
      return inner_.energy(t, s);
    }
    Eigen::VectorXd gradient(const ParameterVector& t, std::uint64_t s) const override {
      return inner_.gradient(t, s);
    }
    mutable std::uint64_t calls = 0;

   private:
    const EnergyModel& inner_;
  };
  MatrixXd a(2, 2);
  a << 2.0, 0.0, 0.0, 0.1;
  const QuadraticModel base(a, VectorXd::Zero(2), 0.0);
  const Counting model(base);
  DmdConfig cfg;
  cfg.loop.max_cycles = 4;
  cfg.loop.vqe.max_iters = 100;
  const auto r = run_dmd(model, cfg);
  CHECK_FALSE(r.cycles.empty());
  // One call for theta^(0), one per descent step, the rest are charged.
  CHECK(model.calls == 1 + r.trajectory.gradient_steps() + r.trajectory.energy_evaluations());
  CHECK(r.trajectory.energy_evaluations() >= r.cycles.size());
}
