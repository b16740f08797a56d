// Copyright 2026 The mfjump Authors
// SPDX-License-Identifier: Apache-2.0
#include "mfjump/model.hpp"

#include <algorithm>

namespace mfjump {

namespace {
constexpr double kGLNodes[UnitQuadrature::kNodes] = {
    0.019855071751231912, 0.10166676129318664, 0.2372337950418355,
    0.4082826787521751,   0.5917173212478248,  0.7627662049581645,
    0.8983332387068134,   0.9801449282487681};
constexpr double kGLWeights[UnitQuadrature::kNodes] = {
    0.050614268145188344, 0.11119051722668717, 0.15685332293894352,
    0.18134189168918088,  0.18134189168918088, 0.15685332293894352,
    0.11119051722668717,  0.050614268145188344};
}  // namespace

const double* UnitQuadrature::nodes() { return kGLNodes; }
const double* UnitQuadrature::weights() { return kGLWeights; }

const char* to_string(ModelClass c) {
  switch (c) {
    case ModelClass::lipschitz:
      return "lipschitz";
    case ModelClass::convex_potential:
      return "convex_potential";
    case ModelClass::superlinear_rate:
      return "superlinear_rate";
  }
  return "unknown";
}

void ModelSpec::expected_collateral(PointView jumper, PointView target,
                                    const EmpiricalMeasure& mu,
                                    PointOut out) const {
  std::fill(out.begin(), out.end(), 0.0);
  if (collateral_is_zero()) return;
  if (mean_collateral_constant) {
    std::copy(mean_collateral_constant->begin(),
              mean_collateral_constant->end(), out.begin());
    return;
  }
  if (mean_collateral) {
    mean_collateral(jumper, target, mu, out);
    return;
  }
  std::vector<double> tmp(out.size());
  for (int a = 0; a < UnitQuadrature::kNodes; ++a) {
    for (int b = 0; b < UnitQuadrature::kNodes; ++b) {
      collateral_jump(jumper, target, mu, kGLNodes[a], kGLNodes[b], tmp);
      const double w = kGLWeights[a] * kGLWeights[b];
      for (std::size_t c = 0; c < out.size(); ++c) out[c] += w * tmp[c];
    }
  }
}

}  // namespace mfjump
