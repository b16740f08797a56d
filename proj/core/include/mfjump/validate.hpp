// Copyright 2026 The mfjump Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mfjump/model.hpp"

namespace mfjump {

enum class Verdict { pass, fail, indeterminate };
const char* to_string(Verdict v);

/// Sampling plan for validate_model. Probe p only reads counter positions
/// derived from p, so the first B' probes of a budget B run are exactly the
/// probes of a budget B' run with the same seed.
struct ProbeConfig {
  std::size_t budget = 1024;
  double radius = 4.0;        // points are drawn from [-radius, radius]^d
  double fd_step = 1e-6;      // offset of the near pairs and derivative step
  std::uint64_t seed = 0;
  std::size_t measure_size = 8;
  double margin = 1e-6;       // relative slack before a violation counts
};

/// Concrete input that broke an inequality: lhs <= rhs was expected.
struct Witness {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> alpha;  // flat points of the first measure
  std::vector<double> gamma;  // flat points of the second measure
  double r = 0.0;             // radius, for one-dimensional checks
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;        // lhs - rhs
};

struct ConditionResult {
  std::string name;
  std::string inequality;
  Verdict verdict = Verdict::indeterminate;
  std::optional<double> declared;
  std::optional<double> estimate;
  std::optional<Witness> witness;
  std::string note;
};

/// Largest observed ratios |f(x, a) - f(y, a)| / |x - y| and
/// |f(x, a) - f(x, g)| / W1(a, g).
struct LipschitzEstimates {
  double drift_x = 0.0;
  double drift_mu = 0.0;
  double diffusion_x = 0.0;
  double diffusion_mu = 0.0;
  double main_jump = 0.0;
  double collateral_drift = 0.0;
};

struct AssumptionReport {
  std::string model;
  ModelClass model_class = ModelClass::lipschitz;
  std::vector<ConditionResult> conditions;
  LipschitzEstimates estimates;
  std::size_t probes_used = 0;
  ProbeConfig probe;
  std::vector<std::string> notes;

  /// fail if any condition failed, else indeterminate if any was, else pass.
  Verdict overall() const;
  const ConditionResult* find(const std::string& name) const;
};

/// Probes the assumptions declared for the spec's class. A pass means no
/// violation was found at the given budget; it is evidence, not proof.
AssumptionReport validate_model(const ModelSpec& spec,
                                const ProbeConfig& probe = {});

/// Human-readable multi-line rendering.
std::string format_report(const AssumptionReport& report);

}  // namespace mfjump
