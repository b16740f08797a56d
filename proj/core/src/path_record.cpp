// Copyright 2026 The mfjump Authors
// SPDX-License-Identifier: Apache-2.0
#include "mfjump/path_record.hpp"

#include <algorithm>

namespace mfjump {

std::vector<PathRecord::Knot> PathRecord::knots() const {
  std::vector<Knot> out;
  out.reserve(grid_times.size() + jumps.size());
  std::size_t j = 0;
  for (std::size_t k = 0; k < grid_times.size(); ++k) {
    while (j < jumps.size() && jumps[j].time < grid_times[k]) {
      out.push_back({jumps[j].time, jumps[j].post, jumps[j].pre});
      ++j;
    }
    out.push_back({grid_times[k], grid_value(k), {}});
    while (j < jumps.size() && jumps[j].time == grid_times[k]) {
      out.push_back({jumps[j].time, jumps[j].post, jumps[j].pre});
      ++j;
    }
  }
  for (; j < jumps.size(); ++j) out.push_back({jumps[j].time, jumps[j].post, jumps[j].pre});
  return out;
}

PathRecord PathRecordSet::particle(std::size_t i) const {
  PathRecord p;
  p.dim = dim;
  p.grid_times = grid_times;
  p.grid_values.reserve(grid_times.size() * static_cast<std::size_t>(dim));
  for (std::size_t k = 0; k < grid_times.size(); ++k) {
    auto v = value(k, i);
    p.grid_values.insert(p.grid_values.end(), v.begin(), v.end());
  }
  if (i < jumps.size()) p.jumps = jumps[i];
  return p;
}

std::size_t PathRecordSet::jump_count(double t) const {
  return static_cast<std::size_t>(
      std::count_if(jump_log.begin(), jump_log.end(),
                    [t](const JumpLogEntry& e) { return e.time <= t; }));
}

}  // namespace mfjump
