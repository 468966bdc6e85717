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
#include <string_view>
#include <variant>
#include <vector>

#include "palqo/pauli.hpp"
#include "palqo/statevector.hpp"

namespace palqo {

/// Circuit angles in radians.
using ParameterVector = Eigen::VectorXd;

/// Hardware-efficient ansatz. Each layer applies Ry then Rz on every qubit
/// and then CZ on the open chain (0,1), (1,2), ..., (n-2,n-1).
/// Parameter index of (layer l, qubit q, gate g in {Ry=0, Rz=1}) is 2(nl + q) + g.
struct HeaSpec {
  std::size_t qubits = 0;
  std::size_t layers = 0;
};

/// Hamiltonian variational ansatz: each layer applies exp(-i theta/2 G_k) for
/// every generator in order. Parameter index of (layer l, generator k) is l*K + k.
struct HvaSpec {
  std::size_t layers = 0;
  std::vector<PauliString> generators;
};

/// One exp(-i theta_k/2 G_k) per listed generator, in order.
struct PauliRotationSpec {
  std::vector<PauliString> generators;
};

class AnsatzSpec {
 public:
  using Kind = std::variant<HeaSpec, HvaSpec, PauliRotationSpec>;

  AnsatzSpec(Kind kind);  // NOLINT(google-explicit-constructor)

  static AnsatzSpec hea(std::size_t qubits, std::size_t layers) { return AnsatzSpec(HeaSpec{qubits, layers}); }

  const Kind& kind() const noexcept { return kind_; }
  std::size_t num_qubits() const noexcept { return n_; }
  std::size_t param_count() const noexcept { return p_; }
  std::string_view name() const;

 private:
  Kind kind_;
  std::size_t n_ = 0;
  std::size_t p_ = 0;
};

/// U(theta)|0...0>. Throws Error(DimensionMismatch) on length mismatch.
StateVector prepare_state(const AnsatzSpec& spec, const ParameterVector& theta);

/// Generator list for an HVA built from a Hamiltonian: each non-identity term
/// is its own generator, grouped by operator type (heavier types first,
/// e.g. all ZZ bonds before all X fields) and by position within a group.
std::vector<PauliString> hva_generators(const Hamiltonian& h);

/// One Pauli string per non-comment line.
AnsatzSpec load_generators(std::string_view text);

}  // namespace palqo
