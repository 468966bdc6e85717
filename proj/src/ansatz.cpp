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

#include "palqo/ansatz.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "palqo/error.hpp"

namespace palqo {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::size_t check_generators(const std::vector<PauliString>& gens) {
  if (gens.empty()) throw Error(ErrorCode::InvalidArgument, "ansatz needs at least one generator");
  const std::size_t n = gens.front().size();
  for (const auto& g : gens) {
    if (g.size() != n) throw Error(ErrorCode::InconsistentWidth, "generators act on different qubit counts");
    if (g.is_identity()) throw Error(ErrorCode::IdentityGenerator, "identity generator");
  }
  return n;
}

}  // namespace

AnsatzSpec::AnsatzSpec(Kind kind) : kind_(std::move(kind)) {
  std::visit(overloaded{
                 [&](const HeaSpec& s) {
                   if (s.qubits < 1 || s.layers < 1)
                     throw Error(ErrorCode::InvalidArgument, "HEA needs qubits >= 1 and layers >= 1");
                   n_ = s.qubits;
                   p_ = 2 * s.qubits * s.layers;
                 },
                 [&](const HvaSpec& s) {
                   if (s.layers < 1) throw Error(ErrorCode::InvalidArgument, "HVA needs layers >= 1");
                   n_ = check_generators(s.generators);
                   p_ = s.layers * s.generators.size();
                 },
                 [&](const PauliRotationSpec& s) {
                   n_ = check_generators(s.generators);
                   p_ = s.generators.size();
                 },
             },
             kind_);
}

std::string_view AnsatzSpec::name() const {
  return std::visit(overloaded{[](const HeaSpec&) { return std::string_view("hea"); },
                               [](const HvaSpec&) { return std::string_view("hva"); },
                               [](const PauliRotationSpec&) { return std::string_view("generators"); }},
                    kind_);
}

StateVector prepare_state(const AnsatzSpec& spec, const ParameterVector& theta) {
  if (static_cast<std::size_t>(theta.size()) != spec.param_count())
    throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(spec.param_count()) +
                                                  " parameters, got " + std::to_string(theta.size()));
  StateVector psi(spec.num_qubits());
  Eigen::Index idx = 0;
  std::visit(overloaded{
                 [&](const HeaSpec& s) {
                   for (std::size_t l = 0; l < s.layers; ++l) {
                     for (std::size_t q = 0; q < s.qubits; ++q) {
                       psi.apply_rotation(Axis::Y, q, theta(idx++));
                       psi.apply_rotation(Axis::Z, q, theta(idx++));
                     }
                     for (std::size_t q = 0; q + 1 < s.qubits; ++q) psi.apply_cz(q, q + 1);
                   }
                 },
                 [&](const HvaSpec& s) {
                   for (std::size_t l = 0; l < s.layers; ++l)
                     for (const auto& g : s.generators) psi.apply_pauli_exponential(g, theta(idx++));
                 },
                 [&](const PauliRotationSpec& s) {
                   for (const auto& g : s.generators) psi.apply_pauli_exponential(g, theta(idx++));
                 },
             },
             spec.kind());
  return psi;
}

std::vector<PauliString> hva_generators(const Hamiltonian& h) {
  // type label: the non-identity letters in qubit order, e.g. "ZZ" or "X"
  std::map<std::pair<std::size_t, std::string>, std::vector<std::pair<std::size_t, PauliString>>, std::greater<>>
      groups;
  for (const auto& t : h.terms()) {
    if (t.string.is_identity()) continue;
    std::string label;
    std::size_t first = t.string.size();
    for (std::size_t q = 0; q < t.string.size(); ++q) {
      if (t.string[q] == Pauli::I) continue;
      label.push_back(to_char(t.string[q]));
      first = std::min(first, q);
    }
    groups[{t.string.weight(), label}].emplace_back(first, t.string);
  }
  std::vector<PauliString> out;
  for (auto& [key, members] : groups) {
    std::stable_sort(members.begin(), members.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& m : members) out.push_back(m.second);
  }
  if (out.empty()) throw Error(ErrorCode::InvalidArgument, "Hamiltonian has no non-identity terms");
  return out;
}

AnsatzSpec load_generators(std::string_view text) {
  std::vector<PauliString> gens;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) continue;
    line = line.substr(b, line.find_last_not_of(" \t\r") - b + 1);
    if (line.front() == '#') continue;
    PauliString g;
    try {
      g = PauliString::parse(line);
    } catch (const Error& e) {
      throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!gens.empty() && g.size() != gens.front().size())
      throw Error(ErrorCode::InconsistentWidth, "line " + std::to_string(line_no) + ": expected " +
                                                    std::to_string(gens.front().size()) + " qubits");
    gens.push_back(std::move(g));
  }
  if (gens.empty()) throw Error(ErrorCode::EmptyFile, "no generators found");
  return AnsatzSpec(PauliRotationSpec{std::move(gens)});
}

}  // namespace palqo
