// Copyright 2026 The mfjump Authors
// SPDX-License-Identifier: Apache-2.0
#include "mfjump/model_zoo.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mfjump/errors.hpp"

namespace mfjump {

namespace {

double norm(PointView x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

int integral_param(const ModelParams& p, const char* key, int lo) {
  const double v = p.at(key);
  if (v != std::floor(v) || v < lo || v > 64)
    throw ModelRejected(std::string(key) + " must be an integer in [" +
                        std::to_string(lo) + ", 64]");
  return static_cast<int>(v);
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ModelRejected(what);
}

const ModelParams& lipschitz_defaults() {
  static const ModelParams p = {
      {"d", 1},       {"a", 1.0},      {"k", 1.0},       {"sigma0", 0.5},
      {"lambda0", 1.0}, {"lambda1", 0.5}, {"R", 2.0},     {"beta", 0.5},
      {"v0", 0.5}};
  return p;
}

const ModelParams& convex_defaults() {
  static const ModelParams p = {
      {"d", 1},       {"m", 2},        {"theta", 1.0},   {"sigma0", 0.5},
      {"lambda0", 1.0}, {"lambda1", 0.5}, {"R", 2.0},     {"beta", 0.5},
      {"v0", 0.5}};
  return p;
}

const ModelParams& neuronal_defaults() {
  static const ModelParams p = {
      {"d", 1},     {"alpha", 2.0}, {"b0", 1.0},          {"gamma", 0.2},
      {"u_max", 1.0}, {"v", 1.0},   {"h_amp", 0.0},       {"gamma_factor", 5.0}};
  return p;
}

/// Shared jump part of the lipschitz-demo and convex-potential models.
struct JumpParams {
  double lambda0, lambda1, R, beta, v0;
  int d;
};

void check_jump_params(const JumpParams& j) {
  require(j.lambda0 >= 0.0, "lambda0 >= 0 violated");
  require(j.lambda1 >= 0.0, "lambda1 >= 0 violated");
  require(j.R > 0.0, "R > 0 violated");
  require(j.beta >= 0.0 && j.beta <= 1.0, "beta in [0, 1] violated");
  require(j.v0 >= 0.0, "v0 >= 0 violated");
}

void attach_jumps(ModelSpec& spec, const JumpParams& j, bool collateral_zero) {
  spec.rate = [j](PointView x, const EmpiricalMeasure&) {
    return j.lambda0 + j.lambda1 * std::min(norm(x), j.R);
  };
  spec.rate_envelope = [j](double r) {
    return j.lambda0 + j.lambda1 * std::min(std::max(r, 0.0), j.R);
  };
  spec.main_jump = [j](PointView x, const EmpiricalMeasure&, double h1,
                       PointOut out) {
    for (std::size_t c = 0; c < x.size(); ++c) out[c] = -j.beta * x[c] * h1;
  };
  // Jump constant: min-rate term beta/2 (lambda0 + lambda1 R) plus the rate
  // change lambda1 |x - y| times the largest mean jump beta R / 2.
  const double lbar = 0.5 * j.beta * (j.lambda0 + 2.0 * j.lambda1 * j.R);
  spec.meta.jump_lipschitz = lbar;
  if (collateral_zero || j.v0 == 0.0) {
    spec.meta.collateral_bound = 0.0;
    return;
  }
  spec.collateral_jump = [j](PointView, PointView, const EmpiricalMeasure&,
                             double, double h2, PointOut out) {
    std::fill(out.begin(), out.end(), j.v0 * (2.0 * h2 - 1.0));
  };
  spec.mean_collateral_constant =
      std::vector<double>(static_cast<std::size_t>(j.d), 0.0);
  spec.meta.collateral_bound = j.v0 * std::sqrt(static_cast<double>(j.d));
}

ModelSpec build_lipschitz(const ModelParams& p, const BuildOptions& opt) {
  const int d = integral_param(p, "d", 1);
  const double a = p.at("a"), k = p.at("k"), s0 = p.at("sigma0");
  require(a >= 0.0, "a >= 0 violated");
  require(k >= 0.0, "k >= 0 violated");
  require(s0 >= 0.0, "sigma0 >= 0 violated");
  const JumpParams j{p.at("lambda0"), p.at("lambda1"), p.at("R"),
                     p.at("beta"), p.at("v0"), d};
  check_jump_params(j);

  ModelSpec spec;
  spec.name = "lipschitz-demo";
  spec.dims = {d, d};
  spec.model_class = ModelClass::lipschitz;
  spec.drift = [a, k](PointView x, const EmpiricalMeasure& mu, PointOut out) {
    const auto m = mu.mean();
    for (std::size_t c = 0; c < x.size(); ++c)
      out[c] = -a * x[c] + k * (m[c] - x[c]);
  };
  if (s0 > 0.0) {
    spec.diffusion = [s0, d](PointView, const EmpiricalMeasure&, PointOut out) {
      std::fill(out.begin(), out.end(), 0.0);
      for (int c = 0; c < d; ++c) out[static_cast<std::size_t>(c * d + c)] = s0;
    };
  }
  attach_jumps(spec, j, opt.collateral_zero);
  if (k == 0.0 && a > 0.0 && s0 == 0.0)
    spec.affine_drift =
        AffineDrift{a, std::vector<double>(static_cast<std::size_t>(d), 0.0)};
  spec.meta.lipschitz = std::max(a + k, *spec.meta.jump_lipschitz);
  spec.meta.diffusion_lipschitz = 0.0;
  return spec;
}

ModelSpec build_convex(const ModelParams& p, const BuildOptions& opt) {
  const int d = integral_param(p, "d", 1);
  const double m = p.at("m"), theta = p.at("theta"), s0 = p.at("sigma0");
  require(m >= 1.0, "m >= 1 violated");
  require(theta >= 0.0, "theta >= 0 violated");
  require(s0 >= 0.0, "sigma0 >= 0 violated");
  const JumpParams j{p.at("lambda0"), p.at("lambda1"), p.at("R"),
                     p.at("beta"), p.at("v0"), d};
  check_jump_params(j);

  ModelSpec spec;
  spec.name = "convex-potential";
  spec.dims = {d, d};
  spec.model_class = ModelClass::convex_potential;
  auto grad = [m](PointView x, PointOut out) {
    for (std::size_t c = 0; c < x.size(); ++c)
      out[c] = x[c] * std::pow(std::abs(x[c]), 2.0 * m - 2.0);
  };
  auto interaction = [theta](PointView x, const EmpiricalMeasure& mu,
                             PointOut out) {
    const auto mean = mu.mean();
    for (std::size_t c = 0; c < x.size(); ++c)
      out[c] = theta * std::tanh(mean[c] - x[c]);
  };
  spec.drift = [grad, interaction](PointView x, const EmpiricalMeasure& mu,
                                   PointOut out) {
    double g[64];
    grad(x, PointOut(g, x.size()));
    interaction(x, mu, out);
    for (std::size_t c = 0; c < x.size(); ++c) out[c] -= g[c];
  };
  if (s0 > 0.0) {
    spec.diffusion = [s0, d](PointView, const EmpiricalMeasure&, PointOut out) {
      std::fill(out.begin(), out.end(), 0.0);
      for (int c = 0; c < d; ++c) out[static_cast<std::size_t>(c * d + c)] = s0;
    };
  }
  attach_jumps(spec, j, opt.collateral_zero);
  spec.meta.potential_gradient = grad;
  spec.meta.interaction = interaction;
  spec.meta.interaction_bound = theta * std::sqrt(static_cast<double>(d));
  spec.meta.interaction_lipschitz = theta;
  spec.meta.diffusion_lipschitz = 0.0;
  return spec;
}

/// Splits the bits of one uniform mark into d roughly uniform coordinates.
void reset_point(double h, double u_max, int d, PointOut out) {
  if (d == 1) {
    out[0] = u_max * h;
    return;
  }
  const int bits = 52 / d;
  double v = h;
  for (int c = 0; c < d; ++c) {
    out[static_cast<std::size_t>(c)] = u_max * v;
    v = std::ldexp(v, bits);
    v -= std::floor(v);
  }
}

ModelSpec build_neuronal(const ModelParams& p, const BuildOptions& opt) {
  const int d = integral_param(p, "d", 1);
  const double alpha = p.at("alpha"), b0 = p.at("b0"), gamma = p.at("gamma");
  const double u_max = p.at("u_max"), v = p.at("v"), h_amp = p.at("h_amp");
  const double factor = p.at("gamma_factor");
  require(alpha >= 1.0, "alpha >= 1 violated");
  require(b0 > 0.0, "b0 > 0 violated (b must be positive)");
  require(gamma > 0.0, "gamma > 0 violated");
  require(u_max >= 0.0, "u_max >= 0 violated");
  require(v >= 0.0, "v >= 0 violated");
  require(h_amp >= 0.0 && h_amp <= b0,
          "0 <= h_amp <= b0 violated (the rate must stay nonnegative)");
  require(factor > 0.0, "gamma_factor > 0 violated");

  const double mean_v = opt.collateral_zero ? 0.0 : 0.5 * v;
  const double lhs = factor * gamma * mean_v;
  if (!(lhs < 1.0)) {
    std::ostringstream os;
    os << "gamma_factor * gamma * E|V| < 1 violated: " << factor << " * "
       << gamma << " * " << mean_v << " = " << lhs << " >= 1";
    throw ModelRejected(os.str());
  }

  ModelSpec spec;
  spec.name = "neuronal";
  spec.dims = {d, d};
  spec.model_class = ModelClass::superlinear_rate;
  if (factor != 5.0) {
    spec.warnings.push_back(
        "gamma_factor = " + std::to_string(factor) +
        " replaces 5 in gamma * K * E|V| < 1; this violates the moment "
        "assumption as stated");
  }
  auto b = [alpha, b0](double r) { return b0 + std::pow(r, alpha); };
  auto b_prime = [alpha](double r) {
    return alpha == 1.0 ? 1.0 : alpha * std::pow(r, alpha - 1.0);
  };
  spec.drift = [](PointView x, const EmpiricalMeasure&, PointOut out) {
    for (std::size_t c = 0; c < x.size(); ++c) out[c] = -x[c];
  };
  spec.rate = [b, h_amp](PointView x, const EmpiricalMeasure&) {
    double s = 0.0;
    for (double xi : x) s += xi;
    return b(norm(x)) + (h_amp != 0.0 ? h_amp * std::sin(s) : 0.0);
  };
  spec.rate_envelope = [b, h_amp](double r) {
    return b(std::max(r, 0.0)) + h_amp;
  };
  spec.main_jump = [u_max, d](PointView x, const EmpiricalMeasure&, double h1,
                              PointOut out) {
    reset_point(h1, u_max, d, out);
    for (std::size_t c = 0; c < x.size(); ++c) out[c] -= x[c];
  };
  const double e = 1.0 / std::sqrt(static_cast<double>(d));
  if (!opt.collateral_zero && v > 0.0) {
    spec.collateral_jump = [v, e](PointView, PointView, const EmpiricalMeasure&,
                                  double, double h2, PointOut out) {
      std::fill(out.begin(), out.end(), v * h2 * e);
    };
    spec.mean_collateral_constant =
        std::vector<double>(static_cast<std::size_t>(d), 0.5 * v * e);
  }
  spec.affine_drift =
      AffineDrift{1.0, std::vector<double>(static_cast<std::size_t>(d), 0.0)};

  auto& m = spec.meta;
  m.b = b;
  m.b_prime = b_prime;
  m.gamma = gamma;
  m.c = growth_constant(alpha, gamma);
  m.h_bound = h_amp;
  m.mean_norm_v = mean_v;
  m.sup_norm_v = opt.collateral_zero ? 0.0 : v;
  m.sup_norm_u = u_max * std::sqrt(static_cast<double>(d));
  m.mean_norm_u = d == 1 ? 0.5 * u_max
                         : u_max * std::sqrt(static_cast<double>(d) / 3.0);
  m.gamma_factor = factor;
  return spec;
}

}  // namespace

double growth_constant(double alpha, double gamma) {
  if (alpha < 1.0 || !(gamma > 0.0))
    throw InvalidInput("growth_constant: need alpha >= 1 and gamma > 0");
  if (alpha == 1.0) return 1.0;
  return std::pow((alpha - 1.0) / gamma, alpha - 1.0);
}

std::vector<std::string> model_ids() {
  return {"lipschitz-demo", "convex-potential", "neuronal"};
}

ModelParams default_params(const std::string& id) {
  if (id == "lipschitz-demo") return lipschitz_defaults();
  if (id == "convex-potential") return convex_defaults();
  if (id == "neuronal") return neuronal_defaults();
  throw InvalidInput("unknown model id '" + id + "'");
}

ModelParams resolve_params(const std::string& id, const ModelParams& params) {
  ModelParams p = default_params(id);
  for (const auto& [key, value] : params) {
    if (!p.count(key))
      throw InvalidInput("model '" + id + "' has no parameter '" + key + "'");
    if (!std::isfinite(value))
      throw InvalidInput("parameter '" + key + "' must be finite");
    p[key] = value;
  }
  return p;
}

ModelSpec build_model(const std::string& id, const ModelParams& params,
                      const BuildOptions& options) {
  const ModelParams p = resolve_params(id, params);
  if (id == "lipschitz-demo") return build_lipschitz(p, options);
  if (id == "convex-potential") return build_convex(p, options);
  return build_neuronal(p, options);
}

}  // namespace mfjump
