// Copyright 2026 The mfjump Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <numeric>
#include <vector>

#include "mfjump/model.hpp"

namespace mfjump::testing {

/// Small hand-built models: F = -kappa x (+ drift_const), sigma = sigma I,
/// lambda = lambda (constant), psi = psi (1, ..., 1), Theta = theta (1,...,1).
struct Toy {
  int d = 1;
  double kappa = 0.0;
  double drift_const = 0.0;
  double sigma = 0.0;
  double lambda = 0.0;
  double psi = 0.0;
  bool has_theta = false;
  double theta = 0.0;
};

inline ModelSpec toy(const Toy& t) {
  ModelSpec s;
  s.name = "toy";
  s.dims = {t.d, t.d};
  s.model_class = ModelClass::lipschitz;
  s.drift = [t](PointView x, const EmpiricalMeasure&, PointOut out) {
    for (std::size_t c = 0; c < x.size(); ++c) out[c] = -t.kappa * x[c] + t.drift_const;
  };
  if (t.sigma != 0.0)
    s.diffusion = [t](PointView x, const EmpiricalMeasure&, PointOut out) {
      const std::size_t d = x.size();
      for (std::size_t i = 0; i < d * d; ++i) out[i] = 0.0;
      for (std::size_t c = 0; c < d; ++c) out[c * d + c] = t.sigma;
    };
  s.rate = [t](PointView, const EmpiricalMeasure&) { return t.lambda; };
  s.rate_envelope = [t](double) { return t.lambda; };
  s.main_jump = [t](PointView, const EmpiricalMeasure&, double, PointOut out) {
    for (auto& v : out) v = t.psi;
  };
  if (t.has_theta) {
    s.collateral_jump = [t](PointView, PointView, const EmpiricalMeasure&, double, double,
                            PointOut out) {
      for (auto& v : out) v = t.theta;
    };
    s.mean_collateral_constant = std::vector<double>(static_cast<std::size_t>(t.d), t.theta);
  }
  if (t.sigma == 0.0 && t.kappa > 0.0)
    s.affine_drift = AffineDrift{t.kappa, std::vector<double>(static_cast<std::size_t>(t.d),
                                                              t.drift_const)};
  s.meta.lipschitz = t.kappa;
  s.meta.jump_lipschitz = 0.0;
  s.meta.collateral_bound = std::abs(t.theta) * std::sqrt(static_cast<double>(t.d));
  return s;
}

inline std::vector<std::uint64_t> iota_ids(std::size_t n, std::uint64_t start = 0) {
  std::vector<std::uint64_t> v(n);
  std::iota(v.begin(), v.end(), start);
  return v;
}

}  // namespace mfjump::testing
