// Copyright 2026 The mfjump Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mfjump/empirical_measure.hpp"

namespace mfjump {

enum class ModelClass { lipschitz, convex_potential, superlinear_rate };

const char* to_string(ModelClass c);

struct Dims {
  int d = 1;   // state dimension
  int d1 = 1;  // Brownian dimension
};

using DriftFn = std::function<void(PointView x, const EmpiricalMeasure& mu,
                                   PointOut out)>;
/// Writes the d x d1 matrix row-major.
using DiffusionFn = std::function<void(PointView x, const EmpiricalMeasure& mu,
                                       PointOut out)>;
using RateFn = std::function<double(PointView x, const EmpiricalMeasure& mu)>;
using MainJumpFn = std::function<void(PointView x, const EmpiricalMeasure& mu,
                                      double h1, PointOut out)>;
using CollateralJumpFn =
    std::function<void(PointView jumper, PointView target,
                       const EmpiricalMeasure& mu, double h1, double h2,
                       PointOut out)>;
using MeanCollateralFn =
    std::function<void(PointView jumper, PointView target,
                       const EmpiricalMeasure& mu, PointOut out)>;

/// Drift of the form F(x, mu) = -relaxation * x + offset with constant
/// offset. Needed by the event-driven integrator.
struct AffineDrift {
  double relaxation = 1.0;
  std::vector<double> offset;
};

/// Constants the model declares about itself. Which fields matter depends on
/// the model class; validate_model checks the relevant ones.
struct AssumptionMeta {
  // Global Lipschitz constant of F and sigma in (x, mu) jointly.
  std::optional<double> lipschitz;
  // L1-Lipschitz constant of the jump terms.
  std::optional<double> jump_lipschitz;
  // Bound on ||Theta|| over all arguments.
  std::optional<double> collateral_bound;

  // Superlinear class: lambda(x) = b(||x||) + h(x) with b' <= gamma b + c,
  // |h| <= H, bounded amplitudes V and U.
  std::function<double(double)> b;
  std::function<double(double)> b_prime;
  std::optional<double> gamma;
  std::optional<double> c;
  std::optional<double> h_bound;
  std::optional<double> mean_norm_v;
  std::optional<double> mean_norm_u;
  std::optional<double> sup_norm_v;
  std::optional<double> sup_norm_u;
  // Factor K in gamma * K * E||V|| < 1. Anything other than 5 is flagged.
  double gamma_factor = 5.0;

  // Convex-potential class: F = -grad U + b(x, mu).
  std::function<void(PointView, PointOut)> potential_gradient;
  DriftFn interaction;
  std::optional<double> interaction_bound;
  std::optional<double> interaction_lipschitz;
  std::optional<double> diffusion_lipschitz;
};

/// Coefficients of one mean-field jump-diffusion model. All functions must be
/// pure; instances are shared read-only across threads.
struct ModelSpec {
  std::string name;
  Dims dims;
  ModelClass model_class = ModelClass::lipschitz;

  DriftFn drift;
  DiffusionFn diffusion;  // empty means sigma == 0
  RateFn rate;
  MainJumpFn main_jump;
  CollateralJumpFn collateral_jump;  // empty means Theta == 0

  /// sup of lambda(x, mu) over ||x|| <= radius and all mu. Used for thinning.
  std::function<double(double radius)> rate_envelope;

  /// E_{nu2}[Theta] when it does not depend on its arguments.
  std::optional<std::vector<double>> mean_collateral_constant;
  /// E_{nu2}[Theta] in closed form; quadrature over marks is used otherwise.
  MeanCollateralFn mean_collateral;

  std::optional<AffineDrift> affine_drift;

  AssumptionMeta meta;
  /// Set when the instance was built outside its declared assumptions.
  std::vector<std::string> warnings;

  bool has_diffusion() const { return static_cast<bool>(diffusion); }
  bool collateral_is_zero() const { return !collateral_jump; }
  /// Whether the event-driven integrator may be used.
  bool supports_event_driven() const {
    return affine_drift.has_value() && !has_diffusion();
  }

  /// E_{nu2}[Theta(jumper, target, mu, h1, h2)] using the closed form when
  /// declared, else 8x8 Gauss-Legendre quadrature on [0,1]^2.
  void expected_collateral(PointView jumper, PointView target,
                           const EmpiricalMeasure& mu, PointOut out) const;
};

/// Gauss-Legendre nodes and weights on [0, 1] (n = 8); exact for polynomials
/// of degree <= 15.
struct UnitQuadrature {
  static constexpr int kNodes = 8;
  static const double* nodes();
  static const double* weights();
};

}  // namespace mfjump
