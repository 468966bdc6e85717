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

#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace palqo {

enum class Pauli : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

char to_char(Pauli op);

/// Tensor product of single-qubit Pauli operators. Position 0 is qubit 0.
class PauliString {
 public:
  PauliString() = default;
  explicit PauliString(std::vector<Pauli> ops);

  /// Parses text such as "XZIY". Throws Error(InvalidPauli) on bad input.
  static PauliString parse(std::string_view text);
  static PauliString identity(std::size_t n);
  /// Single non-identity operator `op` on `qubit` of an n-qubit register.
  static PauliString single(std::size_t n, std::size_t qubit, Pauli op);
  /// `op` on qubits q and q+1.
  static PauliString pair(std::size_t n, std::size_t q, Pauli op);

  std::size_t size() const noexcept { return ops_.size(); }
  Pauli operator[](std::size_t q) const { return ops_[q]; }
  const std::vector<Pauli>& ops() const noexcept { return ops_; }

  bool is_identity() const noexcept;
  std::size_t weight() const noexcept;
  std::string str() const;

  // Basis-index bit masks (qubit 0 is the most significant bit).
  std::uint64_t flip_mask() const noexcept;   // X or Y
  std::uint64_t phase_mask() const noexcept;  // Y or Z
  unsigned y_count() const noexcept;

  auto operator<=>(const PauliString&) const = default;

 private:
  std::vector<Pauli> ops_;
};

struct PauliTerm {
  double coeff = 0.0;
  PauliString string;
};

/// Real-weighted sum of Pauli strings. Construction merges duplicate strings,
/// drops terms whose merged coefficient is exactly zero, and stores terms in
/// canonical (lexicographic I<X<Y<Z) order so that every derived quantity is
/// independent of input term order.
class Hamiltonian {
 public:
  explicit Hamiltonian(std::vector<PauliTerm> terms);

  std::size_t num_qubits() const noexcept { return n_; }
  std::size_t num_terms() const noexcept { return terms_.size(); }
  const std::vector<PauliTerm>& terms() const noexcept { return terms_; }

  /// Coefficient of the all-identity string, 0 if absent.
  double identity_coeff() const noexcept;

 private:
  std::size_t n_ = 0;
  std::vector<PauliTerm> terms_;
};

/// Reads the plain-text term format: one `<real> <pauli>` per line,
/// `#` comments and blank lines ignored.
Hamiltonian parse_hamiltonian(std::string_view text);
std::string format_hamiltonian(const Hamiltonian& h);

/// -J sum Z_j Z_{j+1} - h sum X_j on an open chain.
Hamiltonian build_tfim(std::size_t n, double J, double h);
/// -1/2 sum (Jx XX + Jy YY + Jz ZZ) - h/2 sum Z on an open chain.
Hamiltonian build_heisenberg(std::size_t n, double Jx, double Jy, double Jz, double h);
/// Bond-alternating XXZ: bond j (1-indexed) carries J if odd, Jp if even;
/// terms XX + YY + delta ZZ.
Hamiltonian build_xxz(std::size_t n, double J, double Jp, double delta);

/// Largest register for which exact_ground_energy is available.
inline constexpr std::size_t kExactMaxQubits = 14;
/// Registers up to this size are diagonalized densely; larger ones use Lanczos.
inline constexpr std::size_t kDenseMaxQubits = 10;

/// Smallest eigenvalue of the Hamiltonian matrix.
double exact_ground_energy(const Hamiltonian& h);
/// Dense-only and Lanczos-only variants, exposed for cross-checking.
double dense_ground_energy(const Hamiltonian& h);
double lanczos_ground_energy(const Hamiltonian& h);

}  // namespace palqo
