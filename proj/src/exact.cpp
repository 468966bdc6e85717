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

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "palqo/error.hpp"
#include "palqo/pauli.hpp"
#include "palqo/rng.hpp"
#include "pauli_kernels.hpp"

namespace palqo {

namespace {

bool is_real_matrix(const Hamiltonian& h) {
  return std::all_of(h.terms().begin(), h.terms().end(),
                     [](const PauliTerm& t) { return t.string.y_count() % 2 == 0; });
}

void check_cap(const Hamiltonian& h, std::size_t cap) {
  if (h.num_qubits() > cap)
    throw Error(ErrorCode::TooLarge, "exact diagonalization supports at most " + std::to_string(cap) +
                                         " qubits, got " + std::to_string(h.num_qubits()));
}

template <typename Matrix>
Matrix assemble(const Hamiltonian& h) {
  const std::uint64_t dim = std::uint64_t{1} << h.num_qubits();
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (const auto& t : h.terms()) {
    const auto f = t.string.flip_mask();
    const auto z = t.string.phase_mask();
    const auto base = t.coeff * detail::i_power(t.string.y_count());
    for (std::uint64_t k = 0; k < dim; ++k) {
      const auto row = static_cast<Eigen::Index>(k ^ f);
      const auto col = static_cast<Eigen::Index>(k);
      if constexpr (std::is_same_v<typename Matrix::Scalar, double>)
        m(row, col) += base.real() * detail::parity_sign(k, z);
      else
        m(row, col) += base * detail::parity_sign(k, z);
    }
  }
  return m;
}

}  // namespace

double dense_ground_energy(const Hamiltonian& h) {
  check_cap(h, kDenseMaxQubits);
  if (is_real_matrix(h)) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(assemble<Eigen::MatrixXd>(h),
                                                      Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(assemble<Eigen::MatrixXcd>(h), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

// Lanczos with full reorthogonalization. The lowest Ritz value is accepted
// once its residual bound drops below 1e-13 relative to the spectral scale.
double lanczos_ground_energy(const Hamiltonian& h) {
  check_cap(h, kExactMaxQubits);
  using Vec = Eigen::VectorXcd;
  const std::uint64_t dim = std::uint64_t{1} << h.num_qubits();
  const auto n = static_cast<Eigen::Index>(dim);

  double scale = 0.0;
  for (const auto& t : h.terms()) scale += std::abs(t.coeff);

  auto apply = [&](const Vec& in, Vec& out) {
    out.setZero();
    std::span<const detail::cplx> src(in.data(), dim);
    std::span<detail::cplx> dst(out.data(), dim);
    for (const auto& t : h.terms()) detail::accumulate_pauli(t.string, t.coeff, src, dst);
  };

  CounterRng rng(0x1a2c05ULL);
  Vec v(n);
  for (Eigen::Index k = 0; k < n; ++k) v(k) = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
  v.normalize();

  const Eigen::Index max_iter = std::min<Eigen::Index>(n, 800);
  std::vector<Vec> basis;
  std::vector<double> alpha;
  std::vector<double> beta;
  Vec w(n);
  double best = 0.0;
  for (Eigen::Index it = 0; it < max_iter; ++it) {
    basis.push_back(v);
    apply(v, w);
    const double a = v.dot(w).real();  // dot conjugates the first argument
    alpha.push_back(a);
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) w -= b * b.dot(w);
    const double bnorm = w.norm();

    const auto k = static_cast<Eigen::Index>(alpha.size());
    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
      tri(i, i) = alpha[static_cast<std::size_t>(i)];
      if (i + 1 < k) tri(i, i + 1) = tri(i + 1, i) = beta[static_cast<std::size_t>(i)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
    best = es.eigenvalues()(0);
    const double residual = bnorm * std::abs(es.eigenvectors()(k - 1, 0));
    if (residual < 1e-13 * std::max(1.0, scale) || bnorm < 1e-14 * std::max(1.0, scale)) break;
    beta.push_back(bnorm);
    v = w / bnorm;
  }
  return best;
}

double exact_ground_energy(const Hamiltonian& h) {
  check_cap(h, kExactMaxQubits);
  if (h.num_qubits() <= kDenseMaxQubits) return dense_ground_energy(h);
  return lanczos_ground_energy(h);
}

}  // namespace palqo
