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

// Basis-index kernels shared by the simulator and the exact eigensolver.
// P|k> = i^{nY} (-1)^{popcount(k & phase_mask)} |k ^ flip_mask>.

#pragma once

#include <bit>
#include <complex>
#include <cstdint>
#include <span>

#include "palqo/pauli.hpp"

namespace palqo::detail {

using cplx = std::complex<double>;

inline cplx i_power(unsigned k) {
  switch (k % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

inline double parity_sign(std::uint64_t k, std::uint64_t mask) {
  return (std::popcount(k & mask) & 1) ? -1.0 : 1.0;
}

/// out += coeff * P * in
inline void accumulate_pauli(const PauliString& p, double coeff, std::span<const cplx> in,
                             std::span<cplx> out) {
  const std::uint64_t f = p.flip_mask();
  const std::uint64_t z = p.phase_mask();
  const cplx base = coeff * i_power(p.y_count());
  const std::uint64_t dim = in.size();
  for (std::uint64_t k = 0; k < dim; ++k) out[k ^ f] += base * parity_sign(k, z) * in[k];
}

/// <psi|P|psi>, summed in ascending basis order.
inline cplx pauli_expectation(const PauliString& p, std::span<const cplx> psi) {
  const std::uint64_t f = p.flip_mask();
  const std::uint64_t z = p.phase_mask();
  const std::uint64_t dim = psi.size();
  cplx acc{0.0, 0.0};
  for (std::uint64_t k = 0; k < dim; ++k) acc += parity_sign(k, z) * std::conj(psi[k ^ f]) * psi[k];
  return acc * i_power(p.y_count());
}

}  // namespace palqo::detail
