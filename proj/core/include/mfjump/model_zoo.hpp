// Copyright 2026 The mfjump Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <vector>

#include "mfjump/model.hpp"

namespace mfjump {

/// Numeric model parameters by name. Integer-valued parameters (dimension,
/// exponent m) are passed as doubles and checked to be integral.
using ModelParams = std::map<std::string, double>;

struct BuildOptions {
  /// Replace the collateral jump by zero (X and Y then coincide).
  bool collateral_zero = false;
};

/// "lipschitz-demo", "convex-potential", "neuronal".
std::vector<std::string> model_ids();

/// Complete default parameter set of a model. Throws InvalidInput for an
/// unknown id.
ModelParams default_params(const std::string& id);

/// Defaults overlaid with `params`. Unknown keys are InvalidInput.
ModelParams resolve_params(const std::string& id, const ModelParams& params);

/// Builds a zoo model. Out-of-range parameters raise ModelRejected with the
/// violated inequality in the message.
///
/// lipschitz-demo:   F = -a x + k (mean - x), sigma = sigma0 I,
///                   lambda = lambda0 + lambda1 min(|x|, R),
///                   psi = -beta x h1, Theta = v0 (2 h2 - 1) (1, ..., 1).
/// convex-potential: F = -grad U + theta tanh(mean - x) with
///                   U = sum_k |x_k|^(2m) / (2m); jumps as above.
/// neuronal:         F = -x, no diffusion, lambda = b(|x|) + h(x) with
///                   b(r) = b0 + r^alpha and h = h_amp sin(x_1 + ... + x_d);
///                   the jumper resets to U(h1) uniform on [0, u_max]^d and
///                   every other particle moves by V / N, V = v h2 (1,...,1)/sqrt(d).
///                   Requires gamma_factor * gamma * E|V| < 1; a gamma_factor
///                   other than 5 is accepted but flagged in `warnings`.
ModelSpec build_model(const std::string& id, const ModelParams& params = {},
                      const BuildOptions& options = {});

/// Smallest c with alpha r^(alpha-1) <= gamma r^alpha + c for all r > 0.
double growth_constant(double alpha, double gamma);

}  // namespace mfjump
