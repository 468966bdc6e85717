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

#include "palqo/trajectory_io.hpp"

#include <charconv>

#include "palqo/error.hpp"
#include "palqo/format.hpp"

namespace palqo {

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  while (true) {
    const auto c = line.find(',');
    out.push_back(line.substr(0, c));
    if (c == std::string_view::npos) break;
    line.remove_prefix(c + 1);
  }
  return out;
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::Io, "trajectory CSV line " + std::to_string(line) + ": " + what);
}

}  // namespace

std::string trajectory_to_csv(const std::vector<TrajectoryRecord>& records, bool with_source) {
  const Eigen::Index p = records.empty() ? 0 : records.front().theta.size();
  std::string out = "step,t_scaled,energy";
  for (Eigen::Index i = 0; i < p; ++i) out += ",theta_" + std::to_string(i);
  if (with_source) out += ",source";
  out += '\n';
  for (const auto& r : records) {
    out += std::to_string(r.step);
    out += ',';
    out += format_double(r.t_scaled);
    out += ',';
    out += format_double(r.energy);
    for (Eigen::Index i = 0; i < r.theta.size(); ++i) {
      out += ',';
      out += format_double(r.theta(i));
    }
    if (with_source) {
      out += ',';
      out += to_string(r.source);
    }
    out += '\n';
  }
  return out;
}

std::vector<TrajectoryRecord> trajectory_from_csv(std::string_view text) {
  std::vector<TrajectoryRecord> out;
  std::size_t line_no = 0;
  std::size_t p = 0;
  bool has_source = false;
  bool header_seen = false;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto cells = split_commas(line);
    if (!header_seen) {
      if (cells.size() < 3 || cells[0] != "step" || cells[1] != "t_scaled" || cells[2] != "energy")
        fail(line_no, "header must start with step,t_scaled,energy");
      has_source = cells.back() == "source";
      p = cells.size() - 3 - (has_source ? 1 : 0);
      for (std::size_t i = 0; i < p; ++i)
        if (cells[3 + i] != "theta_" + std::to_string(i)) fail(line_no, "expected column theta_" + std::to_string(i));
      header_seen = true;
      continue;
    }
    if (cells.size() != 3 + p + (has_source ? 1 : 0)) fail(line_no, "wrong number of columns");
    TrajectoryRecord r;
    const auto [ptr, ec] = std::from_chars(cells[0].data(), cells[0].data() + cells[0].size(), r.step);
    if (ec != std::errc{} || ptr != cells[0].data() + cells[0].size()) fail(line_no, "bad step");
    try {
      r.t_scaled = parse_double(cells[1]);
      r.energy = parse_double(cells[2]);
      r.theta.resize(static_cast<Eigen::Index>(p));
      for (std::size_t i = 0; i < p; ++i) r.theta(static_cast<Eigen::Index>(i)) = parse_double(cells[3 + i]);
      if (has_source) r.source = parse_record_source(cells.back());
    } catch (const Error& e) {
      fail(line_no, e.what());
    }
    out.push_back(std::move(r));
  }
  if (!header_seen) throw Error(ErrorCode::Io, "trajectory CSV is empty");
  return out;
}

}  // namespace palqo
