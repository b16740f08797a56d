// Copyright 2026 The mfjump Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mfjump/model.hpp"
#include "mfjump/path_record.hpp"

namespace mfjump {

inline constexpr std::size_t kDefaultAssignmentCap = 512;

/// Exact W1 between two equal-size empirical measures on the line:
/// mean |a_(i) - b_(i)| over sorted samples.
double w1_1d(std::span<const double> a, std::span<const double> b);

struct Assignment {
  double cost = 0.0;
  std::vector<std::size_t> row_to_col;
};

/// Minimum-cost perfect matching on a dense n x n cost matrix (row-major),
/// shortest augmenting paths with dual potentials. Near-ties (within 1e-12)
/// go to the lowest column index.
Assignment solve_assignment(std::span<const double> cost, std::size_t n);

/// Exact W1 between uniform empirical measures of n points in R^dim under the
/// Euclidean ground cost. Throws InvalidInput when n exceeds `cap`.
double w1_assignment(std::span<const double> a, std::span<const double> b,
                     int dim, std::size_t cap = kDefaultAssignmentCap);

struct SubsampledW1 {
  double value = 0.0;
  std::size_t blocks = 0;
  std::size_t block_size = 0;
  double standard_error = 0.0;  // spread across blocks
};

/// W1 for n above the assignment cap: both samples are reordered by the same
/// seeded permutation, cut into ceil(n / cap) blocks of near-equal size, and
/// the exact block distances are averaged with weights proportional to block
/// size. The result is an upper bound on the exact value (the block
/// matchings form a full matching); the block spread is reported as its
/// standard error.
SubsampledW1 w1_subsampled(std::span<const double> a,
                           std::span<const double> b, int dim,
                           std::size_t cap, std::uint64_t seed);

/// Dispatch: sorted formula in d = 1, assignment up to the cap, blocks above.
double w1_empirical(std::span<const double> a, std::span<const double> b,
                    int dim, std::size_t cap = kDefaultAssignmentCap,
                    std::uint64_t seed = 0);

/// sup_t ||p(t) - q(t)|| over the union of both grids and jump times, with
/// both paths read as right-continuous step functions.
double path_sup_distance(const PathRecord& p, const PathRecord& q);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double slope_se = 0.0;
  double slope_ci_lo = 0.0;
  double slope_ci_hi = 0.0;
};

/// Weighted least squares of log(error) on log(N). With standard errors the
/// weights are (error / se)^2; without them (or if any se is zero) the fit is
/// unweighted. The 95% slope interval uses Student t with n - 2 dof.
RateFit fit_rate(std::span<const double> ns, std::span<const double> errors,
                 std::span<const double> std_errors = {});

struct TrendFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double mean = 0.0;
  std::size_t points = 0;
};

/// OLS line through (t, v) restricted to t >= t_from.
TrendFit linear_trend(std::span<const double> times,
                      std::span<const double> values, double t_from);

struct MomentSeries {
  int power = 1;
  std::vector<double> times;
  std::vector<double> values;  // <mu^N(t), lambda^p>, averaged over replicas
  TrendFit trend;              // on [T/2, T]
};

/// <mu^N(t), lambda^p> on the output grid for p in {1, 2, 3, 4}, averaged
/// over the given replicas, with its trend over the second half of the
/// horizon.
MomentSeries moment_diagnostics(std::span<const PathRecordSet> replicas,
                                const ModelSpec& spec, int p);

struct WilsonInterval {
  double lo = 0.0;
  double hi = 0.0;
};
WilsonInterval wilson_interval(std::size_t hits, std::size_t trials,
                               double z = 1.959963984540054);

struct TailRow {
  double threshold = 0.0;
  std::size_t hits = 0;
  std::size_t trials = 0;
  double p_hat = 0.0;
  WilsonInterval ci;
};

/// Empirical P(C_N(T) / N >= H) across replicas, one row per threshold H.
/// `jump_counts` holds C_N(T) for each replica.
std::vector<TailRow> jump_count_stats(std::span<const std::size_t> jump_counts,
                                      std::size_t n, std::span<const double> thresholds);

/// Convenience overload on jump logs (entries with time <= horizon count).
std::vector<TailRow> jump_count_stats(
    std::span<const std::vector<JumpLogEntry>> jump_logs, std::size_t n,
    double horizon, std::span<const double> thresholds);

}  // namespace mfjump
