// Copyright 2026 The mfjump Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mfjump {

/// Bad arguments or malformed input files.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A zoo model was asked for parameters that break its declared assumptions.
class ModelRejected : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A thinning bound turned out smaller than the rate it must dominate.
class RateBoundViolation : public std::runtime_error {
 public:
  RateBoundViolation(const std::string& what, double rate, double bound)
      : std::runtime_error(what), rate_(rate), bound_(bound) {}
  double rate() const { return rate_; }
  double bound() const { return bound_; }

 private:
  double rate_;
  double bound_;
};

/// Positions became non-finite. Carries the state at the moment of failure.
class NumericalBlowup : public std::runtime_error {
 public:
  NumericalBlowup(const std::string& what, double time,
                  std::vector<double> snapshot)
      : std::runtime_error(what), time_(time), snapshot_(std::move(snapshot)) {}
  double time() const { return time_; }
  const std::vector<double>& snapshot() const { return snapshot_; }

 private:
  double time_;
  std::vector<double> snapshot_;
};

}  // namespace mfjump
