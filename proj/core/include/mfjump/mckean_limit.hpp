// Copyright 2026 The mfjump Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "mfjump/drivers.hpp"
#include "mfjump/metrics.hpp"
#include "mfjump/model.hpp"
#include "mfjump/particle_system.hpp"

namespace mfjump {

/// Replica keys reserved for the limit ensemble. Particle systems use small
/// replica indices, so the ensemble never shares streams with them.
inline constexpr std::uint64_t kLimitReplica = 0x4c494d4954000000ULL;
inline constexpr std::uint64_t kNoiseFloorReplica = kLimitReplica + 1;

struct LimitConfig {
  SimOptions sim;
  double init_low = -1.0;
  double init_high = 1.0;
  /// C = safety_factor * sup_t <mu_0, lambda> for the superlinear class.
  double safety_factor = 4.0;
  /// C doubles while <mu, lambda> > C on more than this fraction of cells.
  double saturation_fraction = 0.01;
  std::size_t w1_cap = kDefaultAssignmentCap;
  bool noise_floor = true;
};

/// Time marginals of the limit law on a grid, each an ensemble of M points.
/// Cell k is [t_k, t_{k+1}) and uses the ensemble at t_k.
class FlowApproximation final : public FlowField {
 public:
  FlowApproximation() = default;
  /// `ensemble` is [k][m][c] for grid_times.size() snapshots of M points.
  FlowApproximation(const ModelSpec& spec, std::vector<double> grid_times,
                    std::size_t m, std::vector<double> ensemble,
                    double truncation = std::numeric_limits<double>::infinity());

  const std::vector<double>& grid_times() const override { return grid_; }
  const EmpiricalMeasure& measure(std::size_t k) const override {
    return measures_.at(k);
  }
  void collateral_drift(std::size_t k, PointView x, PointOut out) const override;

  int dim() const { return spec_.dims.d; }
  std::size_t ensemble_size() const { return m_; }
  std::span<const double> ensemble(std::size_t k) const {
    return measures_.at(k).flat();
  }
  /// <mu_k, lambda(., mu_k)>.
  double mean_rate(std::size_t k) const { return mean_rate_.at(k); }
  const std::vector<double>& mean_rates() const { return mean_rate_; }
  double truncation() const { return truncation_; }
  void set_truncation(double c) { truncation_ = c; }
  /// Fraction of cells where the truncation binds.
  double saturation() const;
  const ModelSpec& spec() const { return spec_; }

  // Filled in by solve_limit.
  std::vector<double> deltas;
  std::vector<double> truncations;  // C used by each iteration
  bool converged = false;
  double noise_floor = std::numeric_limits<double>::quiet_NaN();

 private:
  ModelSpec spec_;
  std::vector<double> grid_;
  std::size_t m_ = 0;
  std::vector<EmpiricalMeasure> measures_;
  std::vector<double> mean_rate_;
  double truncation_ = std::numeric_limits<double>::infinity();
};

/// Iteration 0: the initial ensemble held constant in time.
FlowApproximation initial_flow(const ModelSpec& spec, std::size_t m,
                               const LimitConfig& config,
                               std::uint64_t master_seed);

/// sup_k W1(a_k, b_k). Exact in d = 1 and up to the assignment cap; above it
/// the index coupling mean_m ||a_km - b_km|| (an upper bound).
double flow_distance(const FlowApproximation& a, const FlowApproximation& b,
                     std::size_t cap = kDefaultAssignmentCap);

struct PicardStep {
  FlowApproximation flow;
  double delta = 0.0;
};

/// One frozen-flow iteration: M copies driven by `flow` (same streams every
/// iteration), their snapshots form the next flow.
PicardStep picard_iterate(const FlowApproximation& flow, const ModelSpec& spec,
                          const LimitConfig& config, std::uint64_t master_seed,
                          std::uint64_t replica = kLimitReplica);

/// Picard iteration from initial_flow until delta < tol or max_iter. The
/// result carries the delta sequence, the converged flag and, if enabled,
/// the noise floor: W1 between one more iteration on the final flow and the
/// same iteration on independent streams.
FlowApproximation solve_limit(const ModelSpec& spec, std::size_t m,
                              const LimitConfig& config, double tol,
                              int max_iter, std::uint64_t master_seed);

struct CoupledDistanceSample {
  std::size_t n = 0;
  std::vector<double> xy;  // sup_t |X_i - Y_i|
  std::vector<double> yl;  // sup_t |Y_i - Xbar_i|
  std::vector<double> xl;  // sup_t |X_i - Xbar_i|
  std::size_t x_jumps = 0;
};

/// X, Y and N limit copies on shared per-index streams and shared initial
/// points, with per-index sup distances.
CoupledDistanceSample coupled_chaos_run(const ModelSpec& spec, std::size_t n,
                                        const FlowApproximation& flow,
                                        const LimitConfig& config,
                                        const DriverBundle& drivers);

/// Versioned text format "MFJFLOW 1" with exact (hex float) values.
void write_flow(std::ostream& out, const FlowApproximation& flow);
FlowApproximation read_flow(std::istream& in, const ModelSpec& spec);

}  // namespace mfjump
