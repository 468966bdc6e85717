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

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "palqo/pauli.hpp"

namespace palqo {

using cplx = std::complex<double>;

enum class Axis { X, Y, Z };

/// Pure n-qubit state. Basis index convention: qubit 0 is the most
/// significant bit, so |q0 q1 ... q_{n-1}> has index sum q_i 2^{n-1-i}.
class StateVector {
 public:
  static constexpr std::size_t kDefaultMaxQubits = 28;

  /// |0...0>. Throws Error(OutOfRange) unless 1 <= n <= max_qubits.
  explicit StateVector(std::size_t n, std::size_t max_qubits = kDefaultMaxQubits);

  std::size_t num_qubits() const noexcept { return n_; }
  std::size_t dim() const noexcept { return amps_.size(); }
  std::span<const cplx> amplitudes() const noexcept { return amps_; }
  std::span<cplx> amplitudes() noexcept { return amps_; }
  cplx operator[](std::size_t k) const { return amps_[k]; }
  double norm_squared() const noexcept;

  /// exp(-i angle/2 * P_axis) on one qubit.
  void apply_rotation(Axis axis, std::size_t qubit, double angle);
  void apply_cz(std::size_t q1, std::size_t q2);
  /// exp(-i angle/2 * P) = cos(angle/2) - i sin(angle/2) P.
  void apply_pauli_exponential(const PauliString& p, double angle);
  /// psi <- P psi.
  void apply_pauli(const PauliString& p);

 private:
  std::uint64_t bit_of(std::size_t qubit) const;

  std::size_t n_;
  std::vector<cplx> amps_;
};

inline StateVector init_zero_state(std::size_t n) { return StateVector(n); }

/// Ideal <psi|H|psi>. Terms are accumulated in the Hamiltonian's canonical order.
double expectation(const StateVector& state, const Hamiltonian& h);
/// <psi|P|psi> as a complex number (imaginary part is rounding noise).
cplx pauli_expectation(const StateVector& state, const PauliString& p);

struct NoiseModel {
  /// Global depolarizing probability q in [0, 1].
  double depolarizing_prob = 0.0;
  /// Measurement repetitions per Pauli term; nullopt means the exact mean.
  std::optional<std::uint64_t> shots_per_term;

  void validate() const;
  bool is_ideal() const noexcept { return depolarizing_prob == 0.0 && !shots_per_term; }
};

/// Shot-sampled, globally depolarized estimate of <H>:
/// each term's +-1 outcomes are sampled `shots_per_term` times from the exact
/// distribution, averaged and weighted, then E <- (1-q) E + q c_I.
/// Deterministic in `seed`.
double noisy_expectation(const StateVector& state, const Hamiltonian& h, const NoiseModel& noise,
                         std::uint64_t seed);

}  // namespace palqo
