// Copyright 2026 The mfjump Authors
// SPDX-License-Identifier: Apache-2.0
#include "mfjump/mckean_limit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "mfjump/errors.hpp"

namespace mfjump {

FlowApproximation::FlowApproximation(const ModelSpec& spec,
                                     std::vector<double> grid_times,
                                     std::size_t m, std::vector<double> ensemble,
                                     double truncation)
    : spec_(spec), grid_(std::move(grid_times)), m_(m), truncation_(truncation) {
  const std::size_t d = static_cast<std::size_t>(spec_.dims.d);
  if (grid_.empty() || m_ == 0)
    throw InvalidInput("flow: need a non-empty grid and M >= 1");
  if (ensemble.size() != grid_.size() * m_ * d)
    throw InvalidInput("flow: ensemble size does not match grid x M x d");
  measures_.reserve(grid_.size());
  mean_rate_.reserve(grid_.size());
  for (std::size_t k = 0; k < grid_.size(); ++k) {
    const auto first = ensemble.begin() + static_cast<std::ptrdiff_t>(k * m_ * d);
    measures_.emplace_back(std::vector<double>(first, first + static_cast<std::ptrdiff_t>(m_ * d)),
                           spec_.dims.d);
    const auto& mu = measures_.back();
    double s = 0.0;
    for (std::size_t j = 0; j < m_; ++j) s += spec_.rate(mu.point(j), mu);
    mean_rate_.push_back(s / static_cast<double>(m_));
  }
}

double FlowApproximation::saturation() const {
  std::size_t hits = 0;
  for (double r : mean_rate_)
    if (r > truncation_) ++hits;
  return static_cast<double>(hits) / static_cast<double>(mean_rate_.size());
}

void FlowApproximation::collateral_drift(std::size_t k, PointView x,
                                         PointOut out) const {
  std::fill(out.begin(), out.end(), 0.0);
  if (spec_.collateral_is_zero()) return;
  const double rate = mean_rate_.at(k);
  const double scale = rate > truncation_ ? truncation_ / rate : 1.0;
  if (spec_.mean_collateral_constant) {
    const auto& c = *spec_.mean_collateral_constant;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = rate * scale * c[i];
    return;
  }
  const auto& mu = measures_.at(k);
  std::vector<double> e(out.size());
  for (std::size_t j = 0; j < m_; ++j) {
    spec_.expected_collateral(mu.point(j), x, mu, e);
    const double w = spec_.rate(mu.point(j), mu) * scale / static_cast<double>(m_);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += w * e[i];
  }
}

namespace {

std::vector<double> grid_for(const SimOptions& sim) {
  const double q = sim.horizon / sim.dt;
  const double r = std::round(q);
  if (!(sim.horizon > 0.0) || !(sim.dt > 0.0) || r < 1.0 ||
      std::abs(q - r) > 1e-9 * std::max(1.0, q))
    throw InvalidInput("limit: T / dt must be a positive integer");
  std::vector<double> g(static_cast<std::size_t>(r) + 1);
  for (std::size_t k = 0; k < g.size(); ++k) g[k] = static_cast<double>(k) * sim.dt;
  return g;
}

std::vector<std::uint64_t> iota_ids(std::size_t n) {
  std::vector<std::uint64_t> ids(n);
  std::iota(ids.begin(), ids.end(), std::uint64_t{0});
  return ids;
}

bool truncated_class(const ModelSpec& spec) {
  return spec.model_class == ModelClass::superlinear_rate &&
         !spec.collateral_is_zero();
}

}  // namespace

FlowApproximation initial_flow(const ModelSpec& spec, std::size_t m,
                               const LimitConfig& config,
                               std::uint64_t master_seed) {
  if (m == 0) throw InvalidInput("limit: ensemble size M must be >= 1");
  const auto grid = grid_for(config.sim);
  const DriverBundle drivers(master_seed, kLimitReplica);
  const auto ids = iota_ids(m);
  const auto x0 = sample_initial(drivers, spec.dims.d, config.init_low,
                                 config.init_high, ids);
  std::vector<double> ens;
  ens.reserve(grid.size() * x0.size());
  for (std::size_t k = 0; k < grid.size(); ++k) ens.insert(ens.end(), x0.begin(), x0.end());
  FlowApproximation flow(spec, grid, m, std::move(ens));
  if (truncated_class(spec)) {
    const double sup = *std::max_element(flow.mean_rates().begin(),
                                         flow.mean_rates().end());
    flow.set_truncation(config.safety_factor * std::max(sup, 1e-300));
  }
  return flow;
}

double flow_distance(const FlowApproximation& a, const FlowApproximation& b,
                     std::size_t cap) {
  if (a.grid_times().size() != b.grid_times().size() ||
      a.ensemble_size() != b.ensemble_size() || a.dim() != b.dim())
    throw InvalidInput("flow_distance: flows live on different grids or sizes");
  const int d = a.dim();
  const std::size_t m = a.ensemble_size();
  double sup = 0.0;
  for (std::size_t k = 0; k < a.grid_times().size(); ++k) {
    const auto pa = a.ensemble(k);
    const auto pb = b.ensemble(k);
    double w = 0.0;
    if (d == 1 || m <= cap) {
      w = w1_empirical(pa, pb, d, cap);
    } else {
      const std::size_t du = static_cast<std::size_t>(d);
      for (std::size_t j = 0; j < m; ++j) {
        double s = 0.0;
        for (std::size_t c = 0; c < du; ++c) {
          const double diff = pa[j * du + c] - pb[j * du + c];
          s += diff * diff;
        }
        w += std::sqrt(s);
      }
      w /= static_cast<double>(m);
    }
    sup = std::max(sup, w);
  }
  if (!std::isfinite(sup))
    throw NumericalBlowup("limit: flow distance is not finite", 0.0, {});
  return sup;
}

PicardStep picard_iterate(const FlowApproximation& flow, const ModelSpec& spec,
                          const LimitConfig& config, std::uint64_t master_seed,
                          std::uint64_t replica) {
  FlowApproximation driver = flow;
  if (truncated_class(spec) && std::isfinite(driver.truncation())) {
    while (driver.saturation() > config.saturation_fraction)
      driver.set_truncation(2.0 * driver.truncation());
  }
  const std::size_t m = flow.ensemble_size();
  const DriverBundle drivers(master_seed, replica);
  const auto ids = iota_ids(m);
  const auto x0 = sample_initial(drivers, spec.dims.d, config.init_low,
                                 config.init_high, ids);
  SimOptions sim = config.sim;
  const auto rec = simulate(SystemKind::limit, spec, x0, sim, drivers, ids, &driver);
  PicardStep out;
  out.flow = FlowApproximation(spec, rec.grid_times, m, rec.grid_values,
                               driver.truncation());
  out.delta = flow_distance(flow, out.flow, config.w1_cap);
  return out;
}

FlowApproximation solve_limit(const ModelSpec& spec, std::size_t m,
                              const LimitConfig& config, double tol,
                              int max_iter, std::uint64_t master_seed) {
  if (!(tol > 0.0)) throw InvalidInput("solve_limit: tol must be > 0");
  if (max_iter < 1) throw InvalidInput("solve_limit: max_iter must be >= 1");
  FlowApproximation flow = initial_flow(spec, m, config, master_seed);
  std::vector<double> deltas, truncs;
  FlowApproximation best = flow;
  double best_delta = std::numeric_limits<double>::infinity();
  bool converged = false;
  for (int it = 0; it < max_iter; ++it) {
    PicardStep step = picard_iterate(flow, spec, config, master_seed);
    deltas.push_back(step.delta);
    truncs.push_back(step.flow.truncation());
    flow = std::move(step.flow);
    if (step.delta <= best_delta) {
      best_delta = step.delta;
      best = flow;
    }
    if (step.delta < tol) {
      converged = true;
      best = flow;
      break;
    }
  }
  if (config.noise_floor) {
    const auto a = picard_iterate(best, spec, config, master_seed, kLimitReplica);
    const auto b = picard_iterate(best, spec, config, master_seed, kNoiseFloorReplica);
    best.noise_floor = flow_distance(a.flow, b.flow, config.w1_cap);
  }
  best.deltas = std::move(deltas);
  best.truncations = std::move(truncs);
  best.converged = converged;
  return best;
}

CoupledDistanceSample coupled_chaos_run(const ModelSpec& spec, std::size_t n,
                                        const FlowApproximation& flow,
                                        const LimitConfig& config,
                                        const DriverBundle& drivers) {
  if (n == 0) throw InvalidInput("chaos run: N must be >= 1");
  const auto ids = iota_ids(n);
  const auto x0 = sample_initial(drivers, spec.dims.d, config.init_low,
                                 config.init_high, ids);
  const auto x = simulate(SystemKind::X, spec, x0, config.sim, drivers, ids);
  const auto y = simulate(SystemKind::Y, spec, x0, config.sim, drivers, ids);
  const auto l =
      simulate(SystemKind::limit, spec, x0, config.sim, drivers, ids, &flow);
  CoupledDistanceSample s;
  s.n = n;
  s.x_jumps = x.jump_log.size();
  s.xy.resize(n);
  s.yl.resize(n);
  s.xl.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto px = x.particle(i);
    const auto py = y.particle(i);
    const auto pl = l.particle(i);
    s.xy[i] = path_sup_distance(px, py);
    s.yl[i] = path_sup_distance(py, pl);
    s.xl[i] = path_sup_distance(px, pl);
  }
  return s;
}

namespace {

void put_hex(std::ostream& out, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  out << buf;
}

double get_hex(std::istream& in) {
  std::string tok;
  if (!(in >> tok)) throw InvalidInput("flow file: truncated");
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0')
    throw InvalidInput("flow file: bad number '" + tok + "'");
  return v;
}

}  // namespace

void write_flow(std::ostream& out, const FlowApproximation& flow) {
  const auto& g = flow.grid_times();
  const std::size_t d = static_cast<std::size_t>(flow.dim());
  out << "MFJFLOW 1\n";
  out << "model " << flow.spec().name << "\n";
  out << "dim " << d << " M " << flow.ensemble_size() << " K " << g.size() << "\n";
  out << "truncation ";
  put_hex(out, flow.truncation());
  out << "\nconverged " << (flow.converged ? 1 : 0) << "\nnoise_floor ";
  put_hex(out, flow.noise_floor);
  out << "\ndeltas " << flow.deltas.size();
  for (double v : flow.deltas) {
    out << ' ';
    put_hex(out, v);
  }
  out << "\ntruncations " << flow.truncations.size();
  for (double v : flow.truncations) {
    out << ' ';
    put_hex(out, v);
  }
  out << "\n";
  for (std::size_t k = 0; k < g.size(); ++k) {
    put_hex(out, g[k]);
    for (double v : flow.ensemble(k)) {
      out << ' ';
      put_hex(out, v);
    }
    out << "\n";
  }
}

FlowApproximation read_flow(std::istream& in, const ModelSpec& spec) {
  std::string line;
  if (!std::getline(in, line) || line != "MFJFLOW 1")
    throw InvalidInput("flow file: missing 'MFJFLOW 1' header");
  std::string key, name;
  in >> key;
  std::getline(in, name);
  if (key != "model") throw InvalidInput("flow file: expected 'model'");
  if (!name.empty() && name.front() == ' ') name.erase(0, 1);
  if (name != spec.name)
    throw InvalidInput("flow file: written for model '" + name + "', not '" +
                       spec.name + "'");
  std::size_t d = 0, m = 0, kk = 0;
  std::string kd, km, kk_;
  in >> kd >> d >> km >> m >> kk_ >> kk;
  if (kd != "dim" || km != "M" || kk_ != "K" || !in)
    throw InvalidInput("flow file: bad size line");
  if (d != static_cast<std::size_t>(spec.dims.d))
    throw InvalidInput("flow file: dimension does not match the model");
  auto expect = [&](const char* k) {
    std::string t;
    in >> t;
    if (t != k) throw InvalidInput(std::string("flow file: expected '") + k + "'");
  };
  expect("truncation");
  const double trunc = get_hex(in);
  expect("converged");
  int conv = 0;
  in >> conv;
  expect("noise_floor");
  const double floor = get_hex(in);
  auto read_list = [&](const char* k) {
    expect(k);
    std::size_t cnt = 0;
    in >> cnt;
    std::vector<double> v(cnt);
    for (auto& x : v) x = get_hex(in);
    return v;
  };
  auto deltas = read_list("deltas");
  auto truncs = read_list("truncations");
  std::vector<double> grid(kk), ens(kk * m * d);
  for (std::size_t k = 0; k < kk; ++k) {
    grid[k] = get_hex(in);
    for (std::size_t j = 0; j < m * d; ++j) ens[k * m * d + j] = get_hex(in);
  }
  FlowApproximation flow(spec, std::move(grid), m, std::move(ens), trunc);
  flow.deltas = std::move(deltas);
  flow.truncations = std::move(truncs);
  flow.converged = conv != 0;
  flow.noise_floor = floor;
  return flow;
}

}  // namespace mfjump
