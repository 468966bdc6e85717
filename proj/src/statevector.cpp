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

#include "palqo/statevector.hpp"

#include <algorithm>
#include <cmath>

#include "palqo/error.hpp"
#include "palqo/rng.hpp"
#include "pauli_kernels.hpp"

namespace palqo {

StateVector::StateVector(std::size_t n, std::size_t max_qubits) : n_(n) {
  if (n < 1 || n > max_qubits)
    throw Error(ErrorCode::OutOfRange, "qubit count " + std::to_string(n) + " outside [1, " +
                                           std::to_string(max_qubits) + "]");
  amps_.assign(std::size_t{1} << n, cplx{0.0, 0.0});
  amps_[0] = 1.0;
}

double StateVector::norm_squared() const noexcept {
  double s = 0.0;
  for (const auto& a : amps_) s += std::norm(a);
  return s;
}

std::uint64_t StateVector::bit_of(std::size_t qubit) const {
  if (qubit >= n_)
    throw Error(ErrorCode::OutOfRange, "qubit " + std::to_string(qubit) + " out of range for " +
                                           std::to_string(n_) + " qubits");
  return std::uint64_t{1} << (n_ - 1 - qubit);
}

void StateVector::apply_rotation(Axis axis, std::size_t qubit, double angle) {
  const std::uint64_t bit = bit_of(qubit);
  const double c = std::cos(0.5 * angle);
  const double s = std::sin(0.5 * angle);
  const std::uint64_t dim = amps_.size();
  switch (axis) {
    case Axis::X:
      // [[c, -is], [-is, c]]
      for (std::uint64_t k = 0; k < dim; ++k) {
        if (k & bit) continue;
        const cplx a0 = amps_[k], a1 = amps_[k | bit];
        amps_[k] = c * a0 + cplx(0.0, -s) * a1;
        amps_[k | bit] = cplx(0.0, -s) * a0 + c * a1;
      }
      break;
    case Axis::Y:
      // [[c, -s], [s, c]]
      for (std::uint64_t k = 0; k < dim; ++k) {
        if (k & bit) continue;
        const cplx a0 = amps_[k], a1 = amps_[k | bit];
        amps_[k] = c * a0 - s * a1;
        amps_[k | bit] = s * a0 + c * a1;
      }
      break;
    case Axis::Z: {
      const cplx lo(c, -s), hi(c, s);
      for (std::uint64_t k = 0; k < dim; ++k) amps_[k] *= (k & bit) ? hi : lo;
      break;
    }
  }
}

void StateVector::apply_cz(std::size_t q1, std::size_t q2) {
  if (q1 == q2) throw Error(ErrorCode::InvalidArgument, "CZ needs two distinct qubits");
  const std::uint64_t both = bit_of(q1) | bit_of(q2);
  for (std::uint64_t k = 0; k < amps_.size(); ++k)
    if ((k & both) == both) amps_[k] = -amps_[k];
}

void StateVector::apply_pauli(const PauliString& p) {
  if (p.size() != n_) throw Error(ErrorCode::DimensionMismatch, "Pauli string width differs from register");
  std::vector<cplx> out(amps_.size(), cplx{0.0, 0.0});
  detail::accumulate_pauli(p, 1.0, amps_, out);
  amps_ = std::move(out);
}

void StateVector::apply_pauli_exponential(const PauliString& p, double angle) {
  if (p.size() != n_) throw Error(ErrorCode::DimensionMismatch, "Pauli string width differs from register");
  if (p.is_identity())
    throw Error(ErrorCode::IdentityGenerator, "identity generator only produces a global phase");
  if (angle == 0.0) return;
  const double c = std::cos(0.5 * angle);
  const double s = std::sin(0.5 * angle);
  const std::uint64_t f = p.flip_mask();
  const std::uint64_t z = p.phase_mask();
  // -i s * i^{nY}
  const cplx coef = cplx(0.0, -s) * detail::i_power(p.y_count());
  // Amplitudes k and k^f mix in pairs; visit each pair once via the lower index.
  for (std::uint64_t k = 0; k < amps_.size(); ++k) {
    const std::uint64_t j = k ^ f;
    if (j < k) continue;
    if (j == k) {  // diagonal (Z-type) string
      amps_[k] *= c + coef * detail::parity_sign(k, z);
      continue;
    }
    const cplx ak = amps_[k], aj = amps_[j];
    // (P psi)[j] = phase(k) psi[k], (P psi)[k] = phase(j) psi[j]
    amps_[k] = c * ak + coef * detail::parity_sign(j, z) * aj;
    amps_[j] = c * aj + coef * detail::parity_sign(k, z) * ak;
  }
}

cplx pauli_expectation(const StateVector& state, const PauliString& p) {
  if (p.size() != state.num_qubits())
    throw Error(ErrorCode::DimensionMismatch, "Pauli string width differs from register");
  if (p.is_identity()) return {state.norm_squared(), 0.0};
  return detail::pauli_expectation(p, state.amplitudes());
}

double expectation(const StateVector& state, const Hamiltonian& h) {
  if (h.num_qubits() != state.num_qubits())
    throw Error(ErrorCode::DimensionMismatch, "Hamiltonian and state qubit counts differ");
  double e = 0.0;
  for (const auto& t : h.terms()) {
    if (t.string.is_identity()) {
      e += t.coeff;
      continue;
    }
    e += t.coeff * detail::pauli_expectation(t.string, state.amplitudes()).real();
  }
  return e;
}

void NoiseModel::validate() const {
  if (!(depolarizing_prob >= 0.0 && depolarizing_prob <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "depolarizing probability must lie in [0, 1]");
  if (shots_per_term && *shots_per_term == 0)
    throw Error(ErrorCode::InvalidArgument, "shots_per_term must be positive");
}

double noisy_expectation(const StateVector& state, const Hamiltonian& h, const NoiseModel& noise,
                         std::uint64_t seed) {
  noise.validate();
  if (h.num_qubits() != state.num_qubits())
    throw Error(ErrorCode::DimensionMismatch, "Hamiltonian and state qubit counts differ");
  double e = 0.0;
  std::uint64_t term_index = 0;
  for (const auto& t : h.terms()) {
    ++term_index;
    if (t.string.is_identity()) {
      e += t.coeff;
      continue;
    }
    const double mean = detail::pauli_expectation(t.string, state.amplitudes()).real();
    if (!noise.shots_per_term) {
      e += t.coeff * mean;
      continue;
    }
    const double p_plus = std::clamp(0.5 * (1.0 + mean), 0.0, 1.0);
    CounterRng rng(derive_seed(seed, {term_index}));
    const std::uint64_t shots = *noise.shots_per_term;
    std::uint64_t plus = 0;
    for (std::uint64_t s = 0; s < shots; ++s)
      if (rng.uniform() < p_plus) ++plus;
    const double avg = (2.0 * static_cast<double>(plus) - static_cast<double>(shots)) / static_cast<double>(shots);
    e += t.coeff * avg;
  }
  const double q = noise.depolarizing_prob;
  if (q == 0.0) return e;
  return (1.0 - q) * e + q * h.identity_coeff();
}

}  // namespace palqo
