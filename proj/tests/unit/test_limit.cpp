// Copyright 2026 The mfjump Authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "helpers.hpp"
#include "mfjump/errors.hpp"
#include "mfjump/mckean_limit.hpp"
#include "mfjump/model_zoo.hpp"

using namespace mfjump;

namespace {

LimitConfig config(double horizon, double dt, double low = -1.0, double high = 1.0) {
  LimitConfig c;
  c.sim.horizon = horizon;
  c.sim.dt = dt;
  c.init_low = low;
  c.init_high = high;
  return c;
}

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double var_of(std::span<const double> v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace

TEST_CASE("constant rate gives a constant mean rate") {
  const auto s = testing::toy({.kappa = 1.0, .sigma = 0.2, .lambda = 1.3, .psi = 0.1});
  const auto cfg = config(1.0, 0.1);
  const auto f0 = initial_flow(s, 200, cfg, 1);
  const auto step = picard_iterate(f0, s, cfg, 1);
  for (double r : step.flow.mean_rates()) CHECK(r == doctest::Approx(1.3).epsilon(1e-14));
  CHECK(step.flow.grid_times().size() == 11);
  CHECK(step.flow.ensemble_size() == 200);
}

TEST_CASE("measure-free decay converges after one iteration") {
  const auto s = testing::toy({.kappa = 1.0});
  const auto cfg = config(1.0, 0.1);
  const auto f0 = initial_flow(s, 100, cfg, 2);
  const auto s1 = picard_iterate(f0, s, cfg, 2);
  const auto s2 = picard_iterate(s1.flow, s, cfg, 2);
  CHECK(s1.delta > 0.0);
  CHECK(s2.delta == 0.0);
  // Iteration 1 snapshot k is the Euler decay of the initial points.
  const auto e0 = f0.ensemble(0);
  const auto e5 = s1.flow.ensemble(5);
  for (std::size_t j = 0; j < 100; ++j)
    CHECK(e5[j] == doctest::Approx(e0[j] * std::pow(0.9, 5)).epsilon(1e-13));
}

TEST_CASE("limit collateral drift") {
  const double lam = 0.8, c = 0.5;
  const auto s = testing::toy({.lambda = lam, .has_theta = true, .theta = c});
  const auto cfg = config(1.0, 0.25);
  const auto f0 = initial_flow(s, 50, cfg, 3);
  std::vector<double> out(1);
  const std::vector<double> x{0.3};
  f0.collateral_drift(0, x, out);
  CHECK(out[0] == doctest::Approx(lam * c));
  const auto s1 = picard_iterate(f0, s, cfg, 3);
  const auto a = s1.flow.ensemble(0), b = s1.flow.ensemble(4);
  for (std::size_t j = 0; j < 50; ++j) CHECK(b[j] == doctest::Approx(a[j] + lam * c).epsilon(1e-13));
}

TEST_CASE("OU limit mean and variance") {
  // dX = -X dt + sigma dW from U[1, 2]; the Euler recursion is the oracle.
  const double sigma = 0.5, dt = 0.05;
  const auto s = testing::toy({.kappa = 1.0, .sigma = sigma});
  const auto cfg = config(1.0, dt, 1.0, 2.0);
  const std::size_t m = 4000;
  const auto flow = solve_limit(s, m, cfg, 1e-3, 4, 4);
  double mean = 1.5, var = 1.0 / 12.0;
  for (std::size_t k = 0; k < flow.grid_times().size(); ++k) {
    const auto e = flow.ensemble(k);
    const double se = std::sqrt(var / m);
    CHECK(std::abs(mean_of(e) - mean) < 4.0 * se);
    CHECK(std::abs(var_of(e) - var) < 4.0 * var * std::sqrt(2.0 / m) + 1e-3);
    mean *= 1.0 - dt;
    var = (1.0 - dt) * (1.0 - dt) * var + sigma * sigma * dt;
  }
}

TEST_CASE("reset model relaxes to the master-equation mean") {
  // F = -x, lambda = lambda0, jumps reset to U[0, u_max]:
  // m' = -m + lambda0 (u_max / 2 - m).
  const double lam = 2.0, umax = 1.0, T = 2.0, dt = 0.01;
  auto s = testing::toy({.kappa = 1.0, .lambda = lam});
  s.main_jump = [umax](PointView x, const EmpiricalMeasure&, double h1, PointOut out) {
    out[0] = umax * h1 - x[0];
  };
  s.affine_drift.reset();
  const auto cfg = config(T, dt, 0.0, 0.0);
  const std::size_t m = 4000;
  const auto flow = solve_limit(s, m, cfg, 1e-3, 3, 5);
  const double target = lam * umax / 2.0 / (1.0 + lam);
  const auto e = flow.ensemble(flow.grid_times().size() - 1);
  const double exact = target * (1.0 - std::exp(-(1.0 + lam) * T));
  CHECK(std::abs(mean_of(e) - exact) < 4.0 * std::sqrt(var_of(e) / m) + 2.0 * dt);
}

TEST_CASE("infinite tolerance stops after one iteration") {
  const auto s = build_model("lipschitz-demo");
  const auto cfg = config(0.5, 0.05);
  const auto f = solve_limit(s, 64, cfg, std::numeric_limits<double>::infinity(), 8, 6);
  CHECK(f.deltas.size() == 1);
  CHECK(f.converged);
  CHECK(std::isfinite(f.noise_floor));
  CHECK(f.noise_floor > 0.0);
  CHECK_THROWS_AS(solve_limit(s, 64, cfg, 0.0, 8, 6), InvalidInput);
  CHECK_THROWS_AS(solve_limit(s, 64, cfg, 1.0, 0, 6), InvalidInput);
  CHECK_THROWS_AS(initial_flow(s, 0, cfg, 6), InvalidInput);
}

TEST_CASE("picard deltas shrink for the lipschitz demo") {
  const auto s = build_model("lipschitz-demo");
  const auto cfg = config(1.0, 0.05);
  const auto f = solve_limit(s, 500, cfg, 1e-9, 5, 7);
  REQUIRE(f.deltas.size() == 5);
  CHECK(f.deltas[2] < f.deltas[0]);
  CHECK_FALSE(f.converged);
}

TEST_CASE("superlinear class gets a finite truncation") {
  const auto s = build_model("neuronal");
  const auto cfg = config(1.0, 0.05, 0.0, 1.0);
  const auto f0 = initial_flow(s, 100, cfg, 8);
  CHECK(std::isfinite(f0.truncation()));
  CHECK(f0.truncation() == doctest::Approx(4.0 * f0.mean_rate(0)));
  const auto s1 = picard_iterate(f0, s, cfg, 8);
  CHECK(s1.flow.truncation() >= f0.truncation());
  const auto lip = initial_flow(build_model("lipschitz-demo"), 100, cfg, 8);
  CHECK(std::isinf(lip.truncation()));
}

TEST_CASE("coupled runs: zero collateral and measure-free models") {
  const auto zero = build_model("lipschitz-demo", {}, BuildOptions{true});
  const auto cfg = config(1.0, 0.05);
  const auto flow = solve_limit(zero, 200, cfg, 1e-2, 2, 9);
  const auto run = coupled_chaos_run(zero, 16, flow, cfg, DriverBundle(9, 0));
  for (double v : run.xy) CHECK(v == 0.0);

  const auto free = testing::toy({.kappa = 1.0, .sigma = 0.3, .lambda = 1.0, .psi = 0.2});
  const auto f2 = solve_limit(free, 50, cfg, 1e-2, 2, 9);
  const auto r2 = coupled_chaos_run(free, 10, f2, cfg, DriverBundle(9, 1));
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(r2.yl[i] == 0.0);
    CHECK(r2.xy[i] == 0.0);
  }
}

TEST_CASE("coupled distances satisfy the triangle inequality") {
  const auto s = build_model("lipschitz-demo");
  const auto cfg = config(1.0, 0.05);
  const auto flow = solve_limit(s, 300, cfg, 1e-2, 3, 10);
  for (std::uint64_t r = 0; r < 3; ++r) {
    const auto run = coupled_chaos_run(s, 40, flow, cfg, DriverBundle(10, r));
    REQUIRE(run.xy.size() == 40);
    for (std::size_t i = 0; i < 40; ++i) {
      CHECK(run.xl[i] <= run.xy[i] + run.yl[i] + 1e-12);
      CHECK(run.xy[i] > 0.0);
    }
    CHECK(run.x_jumps > 0);
  }
}

TEST_CASE("flow files round-trip exactly") {
  const auto s = build_model("neuronal");
  const auto cfg = config(0.5, 0.1, 0.0, 1.0);
  const auto f = solve_limit(s, 30, cfg, 1e-6, 2, 11);
  std::stringstream ss;
  write_flow(ss, f);
  const auto g = read_flow(ss, s);
  CHECK(g.grid_times() == f.grid_times());
  CHECK(g.ensemble_size() == f.ensemble_size());
  for (std::size_t k = 0; k < f.grid_times().size(); ++k) {
    const auto a = f.ensemble(k), b = g.ensemble(k);
    CHECK(std::equal(a.begin(), a.end(), b.begin(), b.end()));
  }
  CHECK(g.deltas == f.deltas);
  CHECK(g.truncations == f.truncations);
  CHECK(g.truncation() == f.truncation());
  CHECK(g.converged == f.converged);
  CHECK(g.noise_floor == f.noise_floor);

  std::stringstream bad("MFJFLOW 2\n");
  CHECK_THROWS_AS(read_flow(bad, s), InvalidInput);
  std::stringstream wrong;
  write_flow(wrong, f);
  CHECK_THROWS_AS(read_flow(wrong, build_model("lipschitz-demo", {{"d", 2}})), InvalidInput);
}

TEST_CASE("flow distance falls back to the index coupling") {
  const auto s = build_model("lipschitz-demo", {{"d", 2}});
  const auto cfg = config(0.2, 0.1);
  const auto f0 = initial_flow(s, 40, cfg, 12);
  const auto s1 = picard_iterate(f0, s, cfg, 12);
  const double exact = flow_distance(f0, s1.flow, 512);
  const double coupled = flow_distance(f0, s1.flow, 10);
  CHECK(coupled >= exact - 1e-12);
}

TEST_CASE("neuronal Picard deltas contract") {
  const auto s = build_model("neuronal");
  auto cfg = config(1.0, 0.02, 0.0, 1.0);
  cfg.sim.event_driven = true;
  const auto f = solve_limit(s, 2000, cfg, 1e-300, 5, 13);
  REQUIRE(f.deltas.size() == 5);
  for (std::size_t k = 1; k < 5; ++k) CHECK(f.deltas[k] < f.deltas[k - 1]);
}

TEST_CASE("a converged flow is a fixed point up to noise") {
  const auto s = build_model("lipschitz-demo");
  const auto cfg = config(1.0, 0.05);
  const auto f = solve_limit(s, 1000, cfg, 1e-6, 8, 14);
  const auto again = picard_iterate(f, s, cfg, 14);
  CHECK(again.delta <= 2.0 * f.noise_floor);
}
