// Copyright 2026 The mfjump Authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "helpers.hpp"
#include "mfjump/errors.hpp"
#include "mfjump/model_zoo.hpp"
#include "mfjump/particle_system.hpp"

using namespace mfjump;
using testing::iota_ids;

namespace {

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double t = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= t) ++i;
    while (j < b.size() && b[j] <= t) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() -
                             static_cast<double>(j) / b.size()));
  }
  return d;
}

}  // namespace

TEST_CASE("null jumps leave the Euler step alone") {
  const auto s = testing::toy({.kappa = 1.0, .lambda = 5.0});
  const DriverBundle drv(1, 0);
  auto st = make_state(drv, {1.0}, 1);
  step_X(st, s, 0.1, drv);
  CHECK(st.positions[0] == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(st.t == doctest::Approx(0.1));
}

TEST_CASE("forced jump moves the others by Theta / N") {
  const auto s = testing::toy({.lambda = 1.0, .has_theta = true, .theta = 1.0});
  std::vector<double> x{0.0, 0.0, 0.0, 0.0};
  const std::vector<double> h2{0.5, 0.5, 0.5, 0.5};
  apply_x_jump(s, x, 1, 0, 0.5, h2);
  CHECK(x[0] == 0.0);
  for (int j = 1; j < 4; ++j) CHECK(x[j] == 0.25);
}

TEST_CASE("engine applies collateral jumps of every accepted event") {
  const auto s = testing::toy({.lambda = 1.0, .has_theta = true, .theta = 1.0});
  const DriverBundle drv(2, 0);
  auto st = make_state(drv, std::vector<double>(4, 0.0), 1);
  step_X(st, s, 1.0, drv, SimOptions{.density_threshold = 100.0});
  std::vector<int> own(4, 0);
  for (const auto& e : st.jump_log) ++own[e.jumper];
  const int total = static_cast<int>(st.jump_log.size());
  for (int i = 0; i < 4; ++i)
    CHECK(st.positions[i] == doctest::Approx((total - own[i]) * 0.25).epsilon(1e-14));
}

TEST_CASE("compound Poisson mean") {
  const double a = 0.3, lam = 2.0, T = 1.0;
  const auto s = testing::toy({.lambda = lam, .psi = a});
  std::vector<double> ends;
  for (std::uint64_t r = 0; r < 10; ++r) {
    const DriverBundle drv(3, r);
    const std::vector<double> x0(500, 1.0);
    const auto rec = simulate(SystemKind::X, s, x0, {.horizon = T, .dt = 0.1}, drv);
    for (std::size_t i = 0; i < rec.n; ++i) ends.push_back(rec.value(rec.grid_times.size() - 1, i)[0]);
  }
  const double mean = std::accumulate(ends.begin(), ends.end(), 0.0) / ends.size();
  const double se = a * std::sqrt(lam * T) / std::sqrt(static_cast<double>(ends.size()));
  CHECK(std::abs(mean - (1.0 + a * lam * T)) < 3.0 * se);
}

TEST_CASE("zero collateral makes X and Y identical") {
  for (const auto& id : model_ids()) {
    const auto s = build_model(id, {}, BuildOptions{true});
    for (std::size_t n : {1u, 7u, 40u}) {
      const DriverBundle drv(17, n);
      const auto ids = iota_ids(n);
      const auto x0 = sample_initial(drv, 1, -1.0, 1.0, ids);
      for (bool ev : {false, true}) {
        if (ev && !s.supports_event_driven()) continue;
        SimOptions o{.horizon = 1.0, .dt = 0.05, .event_driven = ev};
        const auto x = simulate(SystemKind::X, s, x0, o, drv, ids);
        const auto y = simulate(SystemKind::Y, s, x0, o, drv, ids);
        CHECK(x.grid_values == y.grid_values);
        REQUIRE(x.jump_log.size() == y.jump_log.size());
        for (std::size_t k = 0; k < x.jump_log.size(); ++k) {
          CHECK(x.jump_log[k].time == y.jump_log[k].time);
          CHECK(x.jump_log[k].amplitude == y.jump_log[k].amplitude);
        }
      }
    }
  }
}

TEST_CASE("Y collateral drift with a constant Theta is lambda0 c") {
  const double lam = 1.5, c = 0.4, dt = 0.01;
  const auto s = testing::toy({.lambda = lam, .has_theta = true, .theta = c});
  for (std::size_t n : {3u, 50u}) {
    const DriverBundle drv(4, 0);
    std::vector<double> x0(n);
    for (std::size_t i = 0; i < n; ++i) x0[i] = 0.1 * static_cast<double>(i);
    auto st = make_state(drv, x0, 1);
    step_Y(st, s, dt, drv);
    for (std::size_t i = 0; i < n; ++i)
      CHECK(st.positions[i] == doctest::Approx(x0[i] + lam * c * dt).epsilon(1e-14));
  }
}

TEST_CASE("Y drift for lambda = |x| with two particles") {
  const double theta_bar = 0.7, dt = 1e-3;
  auto s = testing::toy({.has_theta = true, .theta = theta_bar});
  s.rate = [](PointView x, const EmpiricalMeasure&) { return std::abs(x[0]); };
  s.rate_envelope = [](double r) { return r; };
  const DriverBundle drv(5, 0);
  const std::vector<double> y0{0.5, -1.5};
  auto st = make_state(drv, y0, 1);
  step_Y(st, s, dt, drv);
  const double drift = (0.5 + 1.5) * theta_bar / 2.0;
  CHECK(st.positions[0] == doctest::Approx(0.5 + drift * dt).epsilon(1e-14));
  CHECK(st.positions[1] == doctest::Approx(-1.5 + drift * dt).epsilon(1e-14));
  // Target's own rate instead: lambda(Y_i) * theta_bar.
  auto st2 = make_state(drv, y0, 1);
  step_Y(st2, s, dt, drv, SimOptions{.y_rate_argument = RateArgument::target});
  CHECK(st2.positions[0] == doctest::Approx(0.5 + 0.5 * theta_bar * dt).epsilon(1e-14));
  CHECK(st2.positions[1] == doctest::Approx(-1.5 + 1.5 * theta_bar * dt).epsilon(1e-14));
}

TEST_CASE("event-driven linear decay is exact") {
  const auto s = testing::toy({.d = 2, .kappa = 1.0});
  const DriverBundle drv(6, 0);
  const std::vector<double> x0{1.0, -2.0, 0.5, 3.0};
  const auto rec = simulate(SystemKind::X, s, x0, {.horizon = 2.0, .dt = 0.01, .event_driven = true}, drv);
  const auto last = rec.snapshot(rec.grid_times.size() - 1);
  for (std::size_t k = 0; k < x0.size(); ++k)
    CHECK(std::abs(last[k] - x0[k] * std::exp(-2.0)) <= 1e-12 * std::abs(x0[k] * std::exp(-2.0)));
  CHECK(rec.jump_log.empty());
}

TEST_CASE("event-driven mode needs a supported model") {
  const auto s = build_model("lipschitz-demo");
  const DriverBundle drv(6, 0);
  CHECK_THROWS_AS(simulate(SystemKind::X, s, std::vector<double>{0.0}, {.event_driven = true}, drv),
                  InvalidInput);
  CHECK_THROWS_AS(simulate(SystemKind::X, s, std::vector<double>{0.0}, {.horizon = 1.0, .dt = 0.3}, drv),
                  InvalidInput);
  CHECK_THROWS_AS(simulate(SystemKind::limit, s, std::vector<double>{0.0}, {}, drv), InvalidInput);
}

TEST_CASE("permuting particles and streams permutes the paths") {
  const std::vector<std::size_t> perm{3, 0, 5, 1, 4, 2};
  for (const char* id : {"lipschitz-demo", "neuronal"}) {
    const auto s = build_model(id);
    const DriverBundle drv(7, 0);
    const auto ids = iota_ids(6);
    const auto x0 = sample_initial(drv, 1, 0.0, 1.0, ids);
    std::vector<double> px(6);
    std::vector<std::uint64_t> pids(6);
    for (std::size_t i = 0; i < 6; ++i) {
      px[i] = x0[perm[i]];
      pids[i] = ids[perm[i]];
    }
    SimOptions o{.horizon = 1.0, .dt = 0.05, .event_driven = s.supports_event_driven()};
    const auto a = simulate(SystemKind::X, s, x0, o, drv, ids);
    const auto b = simulate(SystemKind::X, s, px, o, drv, pids);
    for (std::size_t k = 0; k < a.grid_times.size(); ++k)
      for (std::size_t i = 0; i < 6; ++i)
        CHECK(b.value(k, i)[0] == doctest::Approx(a.value(k, perm[i])[0]).epsilon(1e-10));
    CHECK(a.jump_log.size() == b.jump_log.size());
  }
}

TEST_CASE("jump bookkeeping is consistent") {
  const auto s = build_model("neuronal");
  const DriverBundle drv(8, 0);
  const auto ids = iota_ids(30);
  const auto x0 = sample_initial(drv, 1, 0.0, 1.0, ids);
  for (bool ev : {false, true}) {
    const auto rec = simulate(SystemKind::X, s, x0, {.horizon = 2.0, .dt = 0.01, .event_driven = ev},
                              drv, ids);
    std::size_t knots = 0;
    for (const auto& j : rec.jumps) knots += j.size();
    CHECK(knots == rec.jump_log.size());
    CHECK(rec.jump_count(2.0) == rec.jump_log.size());
    CHECK(rec.jump_log.size() > 0);
    for (std::size_t k = 1; k < rec.jump_log.size(); ++k)
      CHECK(rec.jump_log[k].time >= rec.jump_log[k - 1].time);
  }
}

TEST_CASE("event-driven and time-stepped agree on mean jump counts") {
  const auto s = build_model("neuronal");
  double ev_sum = 0.0, ts_sum = 0.0, ev_sq = 0.0, ts_sq = 0.0;
  constexpr int kReps = 12;
  for (int r = 0; r < kReps; ++r) {
    const DriverBundle drv(9, r);
    const auto ids = iota_ids(128);
    const auto x0 = sample_initial(drv, 1, 0.0, 1.0, ids);
    const double e = static_cast<double>(simulate(SystemKind::X, s, x0,
        {.horizon = 2.0, .dt = 0.01, .event_driven = true}, drv, ids).jump_log.size()) / 128.0;
    const double t = static_cast<double>(simulate(SystemKind::X, s, x0,
        {.horizon = 2.0, .dt = 0.005}, drv, ids).jump_log.size()) / 128.0;
    ev_sum += e;
    ev_sq += e * e;
    ts_sum += t;
    ts_sq += t * t;
  }
  const double me = ev_sum / kReps, mt = ts_sum / kReps;
  const double ve = (ev_sq / kReps - me * me) / (kReps - 1);
  const double vt = (ts_sq / kReps - mt * mt) / (kReps - 1);
  // Time discretization bias of order dt plus sampling noise.
  CHECK(std::abs(me - mt) < 4.0 * std::sqrt(ve + vt) + 0.02 * me);
}

TEST_CASE("particles are exchangeable (two-sample KS)") {
  const auto s = build_model("lipschitz-demo");
  std::vector<double> first, other;
  for (std::uint64_t r = 0; r < 400; ++r) {
    const DriverBundle drv(10, r);
    const auto ids = iota_ids(8);
    const auto x0 = sample_initial(drv, 1, -1.0, 1.0, ids);
    const auto rec = simulate(SystemKind::X, s, x0, {.horizon = 1.0, .dt = 0.05}, drv, ids);
    const std::size_t last = rec.grid_times.size() - 1;
    first.push_back(rec.value(last, 0)[0]);
    other.push_back(rec.value(last, 5)[0]);
  }
  const double n = static_cast<double>(first.size());
  const double crit = 1.628 * std::sqrt(2.0 / n);  // alpha = 0.01
  CHECK(ks_statistic(first, other) < crit);
}

TEST_CASE("bridge refinement keeps the Brownian path") {
  // lambda * dt = 5 forces several halvings; with F = 0 and psi = 0 the end
  // point is x0 + sigma * sum of base increments.
  const auto s = testing::toy({.sigma = 0.3, .lambda = 50.0});
  const DriverBundle drv(11, 0);
  const auto rec = simulate(SystemKind::X, s, std::vector<double>{0.25},
                            {.horizon = 1.0, .dt = 0.1}, drv);
  double w = 0.0;
  const StreamState b = drv.stream(0, StreamKind::brownian);
  for (int k = 0; k < 10; ++k) w += std::sqrt(0.1) * b.normal_at(k);
  CHECK(rec.grid_values.back() == doctest::Approx(0.25 + 0.3 * w).epsilon(1e-12));
}

TEST_CASE("bad coefficients raise typed errors") {
  const DriverBundle drv(12, 0);
  auto nan_rate = testing::toy({.lambda = 1.0});
  nan_rate.rate = [](PointView, const EmpiricalMeasure&) { return NAN; };
  CHECK_THROWS_AS(simulate(SystemKind::X, nan_rate, std::vector<double>{0.0}, {}, drv),
                  RateBoundViolation);
  auto blowup = testing::toy({.lambda = 0.0});
  blowup.drift = [](PointView x, const EmpiricalMeasure&, PointOut out) {
    out[0] = 1e300 * (1.0 + x[0] * x[0]);
  };
  try {
    simulate(SystemKind::X, blowup, std::vector<double>{1.0}, {}, drv);
    FAIL("expected blowup");
  } catch (const NumericalBlowup& e) {
    CHECK(e.time() > 0.0);
    CHECK_FALSE(e.snapshot().empty());
  }
  auto small_env = testing::toy({.kappa = 1.0, .lambda = 3.0});
  small_env.rate_envelope = [](double) { return 1.0; };
  CHECK_THROWS_AS(simulate(SystemKind::X, small_env, std::vector<double>(20, 0.0),
                           {.horizon = 5.0, .dt = 0.1, .event_driven = true}, drv),
                  RateBoundViolation);
  auto huge_env = testing::toy({.kappa = 1.0, .lambda = 3.0});
  huge_env.rate_envelope = [](double) { return 1e300; };
  CHECK_THROWS_AS(simulate(SystemKind::X, huge_env, std::vector<double>(3, 0.0),
                           {.horizon = 1.0, .dt = 0.1, .event_driven = true}, drv),
                  RateBoundViolation);
}

TEST_CASE("initial positions come from the init streams") {
  const DriverBundle drv(13, 2);
  const auto ids = iota_ids(5, 10);
  const auto a = sample_initial(drv, 2, -1.0, 3.0, ids);
  REQUIRE(a.size() == 10);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t c = 0; c < 2; ++c) {
      CHECK(a[i * 2 + c] == -1.0 + 4.0 * drv.stream(ids[i], StreamKind::init).uniform_at(c));
    }
}

TEST_CASE("generator of constants is zero") {
  const auto s = build_model("lipschitz-demo");
  TestFunction one{[](std::span<const double>) { return 1.0; },
                   [](std::span<const double>, std::span<double> g) {
                     std::fill(g.begin(), g.end(), 0.0);
                   },
                   {}};
  const std::vector<double> x{0.3, -0.2, 1.0};
  const auto g = generator_apply(s, one, x);
  CHECK(g.value == doctest::Approx(0.0).scale(1.0));
  CHECK(g.converged);
}

TEST_CASE("generator without jumps is the drift term") {
  const auto s = testing::toy({.kappa = 1.0});
  TestFunction x1{[](std::span<const double> x) { return x[0]; },
                  [](std::span<const double>, std::span<double> g) {
                    std::fill(g.begin(), g.end(), 0.0);
                    g[0] = 1.0;
                  },
                  {}};
  const std::vector<double> x{0.8, -0.4};
  CHECK(generator_apply(s, x1, x).value == doctest::Approx(-0.8));
}

TEST_CASE("generator with constant rate and jump") {
  const auto s = testing::toy({.lambda = 1.7, .psi = 0.45});
  TestFunction x1{[](std::span<const double> x) { return x[0]; },
                  [](std::span<const double>, std::span<double> g) {
                    std::fill(g.begin(), g.end(), 0.0);
                    g[0] = 1.0;
                  },
                  {}};
  const std::vector<double> x{0.1, 0.2, 0.3};
  CHECK(generator_apply(s, x1, x).value == doctest::Approx(1.7 * 0.45));
}

TEST_CASE("generator of the lipschitz demo in closed form") {
  // phi = x_1 for particle 0; jumps of particle 0 move it by -beta x h1,
  // others move it by v0 (2 h2 - 1) / N with mean zero.
  const auto s = build_model("lipschitz-demo");
  const std::vector<double> x{1.0, -0.5, 0.3, 0.8};
  TestFunction x1{[](std::span<const double> y) { return y[0]; },
                  [](std::span<const double>, std::span<double> g) {
                    std::fill(g.begin(), g.end(), 0.0);
                    g[0] = 1.0;
                  },
                  [](std::span<const double>, std::span<double> h) {
                    std::fill(h.begin(), h.end(), 0.0);
                  }};
  const double mean = (1.0 - 0.5 + 0.3 + 0.8) / 4.0;
  const double drift = -1.0 * 1.0 + 1.0 * (mean - 1.0);
  const double lam0 = 1.0 + 0.5 * std::min(1.0, 2.0);
  const double jump = lam0 * (-0.5 * 1.0 * 0.5);
  const auto g = generator_apply(s, x1, x);
  CHECK(g.value == doctest::Approx(drift + jump).epsilon(1e-12));
  CHECK(g.converged);
  // Second-order term: phi = x_1^2 adds sigma0^2.
  TestFunction sq{[](std::span<const double> y) { return y[0] * y[0]; },
                  [](std::span<const double> y, std::span<double> g2) {
                    std::fill(g2.begin(), g2.end(), 0.0);
                    g2[0] = 2.0 * y[0];
                  },
                  [](std::span<const double>, std::span<double> h) {
                    std::fill(h.begin(), h.end(), 0.0);
                    h[0] = 2.0;
                  }};
  // E[(x - b x h)^2 - x^2] = x^2 (-b + b^2 / 3) for h uniform.
  double coll = 0.0;
  for (int j = 1; j < 4; ++j) {
    const double lj = 1.0 + 0.5 * std::min(std::abs(x[j]), 2.0);
    // E[(x + v0 (2h - 1) / 4)^2 - x^2] = v0^2 / 48.
    coll += lj * 0.25 / 48.0;
  }
  const double expect = 2.0 * 1.0 * drift + 0.25 + lam0 * (-0.5 + 0.25 / 3.0) + coll;
  CHECK(generator_apply(s, sq, x).value == doctest::Approx(expect).epsilon(1e-12));
}
