// Copyright 2026 The mfjump Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace mfjump {

/// Main jump of one particle: left limit and value at the jump time.
struct JumpKnot {
  double time = 0.0;
  std::vector<double> pre;
  std::vector<double> post;
};

struct JumpLogEntry {
  double time = 0.0;
  std::size_t jumper = 0;
  double amplitude = 0.0;  // norm of the main jump
};

/// Cadlag path of one particle: values on the output grid plus its own main
/// jumps. Between recorded points the path is read as right-continuous and
/// piecewise constant.
struct PathRecord {
  int dim = 1;
  std::vector<double> grid_times;
  std::vector<double> grid_values;  // grid_times.size() x dim
  std::vector<JumpKnot> jumps;      // sorted by time

  double horizon() const { return grid_times.empty() ? 0.0 : grid_times.back(); }
  std::span<const double> grid_value(std::size_t k) const {
    return {grid_values.data() + k * static_cast<std::size_t>(dim),
            static_cast<std::size_t>(dim)};
  }
  /// All recorded (time, value) points in time order; at equal times a grid
  /// point comes before a jump, so the last entry at a time is the cadlag
  /// value there.
  /// `left` is the pre-jump value for jump knots and empty for grid knots.
  struct Knot {
    double time;
    std::span<const double> value;
    std::span<const double> left;
  };
  std::vector<Knot> knots() const;
};

/// Paths of all particles of one simulated system.
struct PathRecordSet {
  int dim = 1;
  std::size_t n = 0;
  std::vector<double> grid_times;
  std::vector<double> grid_values;  // [k][i][c]
  std::vector<std::vector<JumpKnot>> jumps;
  std::vector<JumpLogEntry> jump_log;
  std::vector<std::uint64_t> stream_ids;

  std::span<const double> value(std::size_t k, std::size_t i) const {
    return {grid_values.data() + (k * n + i) * static_cast<std::size_t>(dim),
            static_cast<std::size_t>(dim)};
  }
  /// Positions of all particles at grid index k (row-major n x dim).
  std::span<const double> snapshot(std::size_t k) const {
    return {grid_values.data() + k * n * static_cast<std::size_t>(dim),
            n * static_cast<std::size_t>(dim)};
  }
  PathRecord particle(std::size_t i) const;
  /// Number of accepted main jumps with time <= t.
  std::size_t jump_count(double t) const;
};

}  // namespace mfjump
