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

#include <string>
#include <string_view>
#include <vector>

#include "palqo/vqe.hpp"

namespace palqo {

/// Header `step,t_scaled,energy,theta_0,...,theta_{p-1}` followed by one row
/// per record, numbers in shortest round-trip form. With `with_source` a
/// trailing `source` column holds quantum/predicted/restart.
std::string trajectory_to_csv(const std::vector<TrajectoryRecord>& records, bool with_source);

/// Inverse of trajectory_to_csv. The source column is optional; rows without
/// it are read as quantum records. Throws Error(Io) with a line number.
std::vector<TrajectoryRecord> trajectory_from_csv(std::string_view text);

}  // namespace palqo
