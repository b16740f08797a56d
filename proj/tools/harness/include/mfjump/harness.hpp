// Copyright 2026 The mfjump Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mfjump/mckean_limit.hpp"
#include "mfjump/metrics.hpp"
#include "mfjump/model_zoo.hpp"
#include "mfjump/validate.hpp"

namespace mfjump::harness {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "1.0.0";

struct PicardSettings {
  double tol = 1e-3;  // infinity stops after one iteration
  int max_iter = 8;
  bool noise_floor = true;
};

struct DiagnosticsSettings {
  bool moments = true;
  bool jump_counts = true;
  std::vector<int> powers{1, 2, 3, 4};
  /// Empty: a single threshold at twice the mean C_N(T)/N of the largest N.
  std::vector<double> thresholds;
};

/// One experiment. Read from a JSON document with "schema_version": 1;
/// unknown keys are rejected.
struct SimConfig {
  std::string model_id = "lipschitz-demo";
  ModelParams params;
  bool collateral_zero = false;
  std::vector<std::size_t> n_list{32};
  double horizon = 1.0;
  double dt = 0.01;
  /// Unset: event-driven for the superlinear class when the model allows it.
  std::optional<bool> event_driven;
  std::size_t replicas = 1;
  std::size_t ensemble_size = 0;  // 0: 16 * max N
  PicardSettings picard;
  std::uint64_t seed = 0;
  std::string output_dir;
  std::string system = "X";  // simulate: X, Y or limit
  RateArgument y_rate_argument = RateArgument::jumper;
  double init_low = -1.0;
  double init_high = 1.0;
  double density_threshold = 1.0;
  int max_refinements = 16;
  double bound_slack = 0.05;
  int bound_retries = 3;
  std::size_t w1_cap = kDefaultAssignmentCap;
  std::string flow_file;  // reuse a solved limit instead of solving
  bool save_flow = false;
  DiagnosticsSettings diagnostics;
};

/// Parses a config document. A report.json is accepted too: its
/// manifest.config is used.
SimConfig parse_config(const nlohmann::json& doc);
SimConfig load_config(const std::string& path);
nlohmann::json to_json(const SimConfig& config);

/// Checks the invariants of a config (T > 0, dt > 0, N list strictly
/// increasing, ...). Throws InvalidInput.
void check_config(const SimConfig& config);

ModelSpec build_spec(const SimConfig& config);
bool uses_event_driven(const SimConfig& config, const ModelSpec& spec);
LimitConfig limit_config(const SimConfig& config, const ModelSpec& spec);
std::size_t ensemble_size(const SimConfig& config);

struct RunOptions {
  std::size_t workers = 1;
  bool force = false;
  std::string timestamp;  // empty: current UTC time
};

/// Runs fn(cell) for cell = 0..count-1 on `workers` threads, cell c on
/// worker c % workers. Errors are captured per cell; after the first error
/// the remaining cells are skipped.
struct CellOutcome {
  bool ok = false;
  bool skipped = false;
  std::string error;
};
std::vector<CellOutcome> run_cells(std::size_t count, std::size_t workers,
                                   const std::function<void(std::size_t)>& fn);

struct Summary {
  double mean = 0.0;
  double se = 0.0;
  std::size_t count = 0;
};
Summary summarize(std::span<const double> values);

struct ChaosCell {
  std::size_t n = 0;
  std::size_t replica = 0;
  double xy = 0.0;  // means over particle indices
  double yl = 0.0;
  double xl = 0.0;
  double xy_max = 0.0;
  std::size_t x_jumps = 0;
  CellOutcome outcome;
};

struct ChaosRow {
  std::size_t n = 0;
  Summary xy, yl, xl;
};

struct FitBlock {
  bool valid = false;
  RateFit fit;
  std::string note;
};

struct LimitSummary {
  std::vector<double> deltas;
  std::vector<double> truncations;
  bool converged = false;
  double noise_floor = 0.0;
  std::size_t ensemble_size = 0;
  std::string source;  // "solved" or the flow file
};

struct ChaosReport {
  SimConfig config;
  std::string timestamp;
  std::string validation;  // overall verdict of validate_model
  std::vector<std::string> warnings;
  LimitSummary limit;
  std::vector<ChaosCell> cells;  // cell order: N-major, then replica
  std::vector<ChaosRow> rows;
  FitBlock fit_xy, fit_yl, fit_xl;
  std::vector<std::string> failures;
  bool partial = false;
};

/// Solves the limit once, runs coupled_chaos_run for every (N, replica)
/// cell, aggregates and fits. Writes the run directory when the config has
/// an output directory (also when cells failed, flagged as partial).
ChaosReport run_chaos_sweep(const SimConfig& config, const RunOptions& options);

struct MomentRow {
  std::size_t n = 0;
  MomentSeries series;
  std::string verdict;  // "bounded" or "growing"
};

struct JumpRow {
  std::size_t n = 0;
  Summary per_particle;  // C_N(T) / N across replicas
  std::vector<TailRow> tail;
};

struct DiagnosticsReport {
  SimConfig config;
  std::string timestamp;
  std::vector<std::string> warnings;
  std::vector<MomentRow> moments;
  std::vector<JumpRow> jumps;
  std::vector<double> thresholds;
  std::string moment_verdict;  // over all N and powers
  std::string tail_verdict;    // "non-increasing" or "increasing"
  std::vector<std::string> failures;
  bool partial = false;
};

/// X-system runs for every (N, replica): moment series of lambda and jump
/// count tails, with summary verdicts.
DiagnosticsReport run_diagnostics(const SimConfig& config,
                                  const RunOptions& options);

/// Whether tail probabilities over increasing N are non-increasing up to
/// overlapping Wilson intervals.
bool tails_non_increasing(const std::vector<JumpRow>& rows, std::size_t column);

AssumptionReport run_validate(const std::string& model_id,
                              const ModelParams& params,
                              const ProbeConfig& probe = {});
/// 0 pass, 2 fail, 3 indeterminate.
int exit_code(Verdict v);

struct SimulateResult {
  PathRecordSet paths;
  std::vector<std::string> warnings;
};
/// One system of size n_list[0] on replica 0; writes paths.csv, jumps.csv,
/// samples.txt and report.json when an output directory is set.
SimulateResult run_simulate(const SimConfig& config, const RunOptions& options);

// Versioned file formats.
void write_chaos_outputs(const ChaosReport& report, const std::string& dir);
void write_diagnostics_outputs(const DiagnosticsReport& report,
                               const std::string& dir);
std::string distances_csv(const ChaosReport& report);
void write_samples(const std::string& path, std::span<const double> points,
                   int dim);
/// Reads "# mfjump samples v1 dim=D" files; rows of D numbers.
std::vector<double> read_samples(const std::string& path, int& dim);

/// %.17g rendering used by every text output.
std::string fmt(double v);
std::string utc_timestamp();

}  // namespace mfjump::harness
