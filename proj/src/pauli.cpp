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

#include "palqo/pauli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include "palqo/error.hpp"
#include "palqo/format.hpp"

namespace palqo {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::MalformedCoefficient: return "MalformedCoefficient";
    case ErrorCode::InvalidPauli: return "InvalidPauli";
    case ErrorCode::InconsistentWidth: return "InconsistentWidth";
    case ErrorCode::EmptyHamiltonian: return "EmptyHamiltonian";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::IdentityGenerator: return "IdentityGenerator";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::Divergence: return "Divergence";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::Config: return "Config";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

char to_char(Pauli op) {
  static constexpr char kChars[] = {'I', 'X', 'Y', 'Z'};
  return kChars[static_cast<int>(op)];
}

PauliString::PauliString(std::vector<Pauli> ops) : ops_(std::move(ops)) {
  if (ops_.empty()) throw Error(ErrorCode::InvalidPauli, "Pauli string must act on at least one qubit");
}

PauliString PauliString::parse(std::string_view text) {
  if (text.empty()) throw Error(ErrorCode::InvalidPauli, "empty Pauli string");
  std::vector<Pauli> ops;
  ops.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case 'I': ops.push_back(Pauli::I); break;
      case 'X': ops.push_back(Pauli::X); break;
      case 'Y': ops.push_back(Pauli::Y); break;
      case 'Z': ops.push_back(Pauli::Z); break;
      default:
        throw Error(ErrorCode::InvalidPauli, "invalid Pauli character '" + std::string(1, c) + "'");
    }
  }
  return PauliString(std::move(ops));
}

PauliString PauliString::identity(std::size_t n) { return PauliString(std::vector<Pauli>(n, Pauli::I)); }

PauliString PauliString::single(std::size_t n, std::size_t qubit, Pauli op) {
  if (qubit >= n) throw Error(ErrorCode::OutOfRange, "qubit index out of range");
  std::vector<Pauli> ops(n, Pauli::I);
  ops[qubit] = op;
  return PauliString(std::move(ops));
}

PauliString PauliString::pair(std::size_t n, std::size_t q, Pauli op) {
  if (q + 1 >= n) throw Error(ErrorCode::OutOfRange, "bond index out of range");
  std::vector<Pauli> ops(n, Pauli::I);
  ops[q] = op;
  ops[q + 1] = op;
  return PauliString(std::move(ops));
}

bool PauliString::is_identity() const noexcept {
  return std::all_of(ops_.begin(), ops_.end(), [](Pauli p) { return p == Pauli::I; });
}

std::size_t PauliString::weight() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(ops_.begin(), ops_.end(), [](Pauli p) { return p != Pauli::I; }));
}

std::string PauliString::str() const {
  std::string s;
  s.reserve(ops_.size());
  for (auto op : ops_) s.push_back(to_char(op));
  return s;
}

std::uint64_t PauliString::flip_mask() const noexcept {
  const std::size_t n = ops_.size();
  std::uint64_t mask = 0;
  for (std::size_t q = 0; q < n; ++q)
    if (ops_[q] == Pauli::X || ops_[q] == Pauli::Y) mask |= std::uint64_t{1} << (n - 1 - q);
  return mask;
}

std::uint64_t PauliString::phase_mask() const noexcept {
  const std::size_t n = ops_.size();
  std::uint64_t mask = 0;
  for (std::size_t q = 0; q < n; ++q)
    if (ops_[q] == Pauli::Y || ops_[q] == Pauli::Z) mask |= std::uint64_t{1} << (n - 1 - q);
  return mask;
}

unsigned PauliString::y_count() const noexcept {
  return static_cast<unsigned>(std::count(ops_.begin(), ops_.end(), Pauli::Y));
}

Hamiltonian::Hamiltonian(std::vector<PauliTerm> terms) {
  if (terms.empty()) throw Error(ErrorCode::EmptyHamiltonian, "Hamiltonian has no terms");
  n_ = terms.front().string.size();
  std::map<PauliString, double> merged;
  for (const auto& t : terms) {
    if (t.string.size() != n_)
      throw Error(ErrorCode::InconsistentWidth, "terms act on different qubit counts");
    if (!std::isfinite(t.coeff)) throw Error(ErrorCode::NonFinite, "non-finite coefficient");
    merged[t.string] += t.coeff;
  }
  for (auto& [s, c] : merged)
    if (c != 0.0) terms_.push_back({c, s});
  if (terms_.empty())
    throw Error(ErrorCode::EmptyHamiltonian, "all coefficients cancel; Hamiltonian is empty");
}

double Hamiltonian::identity_coeff() const noexcept {
  for (const auto& t : terms_)
    if (t.string.is_identity()) return t.coeff;
  return 0.0;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

double parse_coefficient(std::string_view tok, std::size_t line) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double value = 0.0;
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, value);
  if (tok.empty() || ec != std::errc{} || ptr != end || !std::isfinite(value))
    throw Error(ErrorCode::MalformedCoefficient,
                "line " + std::to_string(line) + ": cannot parse coefficient '" + std::string(tok) + "'");
  return value;
}

}  // namespace

Hamiltonian parse_hamiltonian(std::string_view text) {
  std::vector<PauliTerm> terms;
  std::size_t line_no = 0;
  std::size_t width = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto sep = line.find_first_of(" \t");
    if (sep == std::string_view::npos)
      throw Error(ErrorCode::MalformedCoefficient,
                  "line " + std::to_string(line_no) + ": expected '<coefficient> <pauli>'");
    const double coeff = parse_coefficient(line.substr(0, sep), line_no);
    const auto pauli_text = trim(line.substr(sep));
    if (pauli_text.find_first_of(" \t") != std::string_view::npos)
      throw Error(ErrorCode::InvalidPauli, "line " + std::to_string(line_no) + ": trailing tokens");
    PauliString ps;
    try {
      ps = PauliString::parse(pauli_text);
    } catch (const Error& e) {
      throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.what());
    }
    if (width == 0) width = ps.size();
    if (ps.size() != width)
      throw Error(ErrorCode::InconsistentWidth,
                  "line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                      " qubits, got " + std::to_string(ps.size()));
    terms.push_back({coeff, std::move(ps)});
  }
  if (terms.empty()) throw Error(ErrorCode::EmptyFile, "no terms found");
  return Hamiltonian(std::move(terms));
}

std::string format_hamiltonian(const Hamiltonian& h) {
  std::string out;
  for (const auto& t : h.terms()) {
    out += format_double(t.coeff);
    out += ' ';
    out += t.string.str();
    out += '\n';
  }
  return out;
}

namespace {

void require_chain(std::size_t n) {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "chain Hamiltonians need n >= 2");
}

}  // namespace

Hamiltonian build_tfim(std::size_t n, double J, double h) {
  require_chain(n);
  std::vector<PauliTerm> terms;
  for (std::size_t j = 0; j + 1 < n; ++j) terms.push_back({-J, PauliString::pair(n, j, Pauli::Z)});
  for (std::size_t j = 0; j < n; ++j) terms.push_back({-h, PauliString::single(n, j, Pauli::X)});
  return Hamiltonian(std::move(terms));
}

Hamiltonian build_heisenberg(std::size_t n, double Jx, double Jy, double Jz, double h) {
  require_chain(n);
  std::vector<PauliTerm> terms;
  for (std::size_t j = 0; j + 1 < n; ++j) {
    terms.push_back({-0.5 * Jx, PauliString::pair(n, j, Pauli::X)});
    terms.push_back({-0.5 * Jy, PauliString::pair(n, j, Pauli::Y)});
    terms.push_back({-0.5 * Jz, PauliString::pair(n, j, Pauli::Z)});
  }
  for (std::size_t j = 0; j < n; ++j) terms.push_back({-0.5 * h, PauliString::single(n, j, Pauli::Z)});
  return Hamiltonian(std::move(terms));
}

Hamiltonian build_xxz(std::size_t n, double J, double Jp, double delta) {
  require_chain(n);
  std::vector<PauliTerm> terms;
  for (std::size_t j = 0; j + 1 < n; ++j) {
    // bond index j+1 is odd for even j
    const double c = (j % 2 == 0) ? J : Jp;
    terms.push_back({c, PauliString::pair(n, j, Pauli::X)});
    terms.push_back({c, PauliString::pair(n, j, Pauli::Y)});
    terms.push_back({c * delta, PauliString::pair(n, j, Pauli::Z)});
  }
  return Hamiltonian(std::move(terms));
}

}  // namespace palqo
