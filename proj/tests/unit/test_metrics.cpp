// Copyright 2026 The mfjump Authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "helpers.hpp"
#include "mfjump/errors.hpp"
#include "mfjump/metrics.hpp"
#include "mfjump/particle_system.hpp"

using namespace mfjump;

namespace {

double brute_w1(const std::vector<double>& a, const std::vector<double>& b, int d) {
  const std::size_t n = a.size() / static_cast<std::size_t>(d);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double c = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (int k = 0; k < d; ++k) {
        const double diff = a[i * d + k] - b[perm[i] * d + k];
        s += diff * diff;
      }
      c += std::sqrt(s);
    }
    best = std::min(best, c / static_cast<double>(n));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

std::vector<double> random_points(std::mt19937_64& rng, std::size_t n, int d) {
  std::normal_distribution<double> g;
  std::vector<double> v(n * static_cast<std::size_t>(d));
  for (auto& x : v) x = g(rng);
  return v;
}

PathRecord constant_path(double value, std::vector<double> grid) {
  PathRecord p;
  p.grid_times = grid;
  p.grid_values.assign(grid.size(), value);
  return p;
}

}  // namespace

TEST_CASE("w1 examples") {
  const std::vector<double> a{0, 0, 3}, b{1, 1, 1};
  CHECK(w1_1d(a, b) == doctest::Approx(4.0 / 3.0));
  CHECK(w1_empirical(a, b, 1) == doctest::Approx(4.0 / 3.0));
  CHECK(w1_assignment(a, b, 1) == doctest::Approx(4.0 / 3.0));
  // Two points in the plane swapped: zero.
  const std::vector<double> p{0, 0, 1, 1}, q{1, 1, 0, 0};
  CHECK(w1_assignment(p, q, 2) == 0.0);
  const std::vector<double> r{0, 0, 3, 4};
  CHECK(w1_assignment(std::vector<double>{0, 0, 0, 0}, r, 2) == doctest::Approx(2.5));
}

TEST_CASE("w1 trivial cases") {
  CHECK(w1_1d(std::vector<double>{0, 1}, std::vector<double>{0, 1}) == 0.0);
  CHECK(w1_1d(std::vector<double>{0}, std::vector<double>{1}) == 1.0);
  const std::vector<double> p{0.5, 2.0, -1.0, 3.0, 0.0, 0.0};
  CHECK(w1_assignment(p, p, 2) == 0.0);
}

TEST_CASE("w1 input errors") {
  const std::vector<double> a{0, 1}, b{0, 1, 2};
  CHECK_THROWS_AS(w1_1d(a, b), InvalidInput);
  CHECK_THROWS_AS(w1_assignment(a, std::vector<double>{0, 1, 2, 3}, 2), InvalidInput);
  const std::vector<double> big(2 * 600, 0.0);
  CHECK_THROWS_AS(w1_assignment(big, big, 2, 512), InvalidInput);
}

TEST_CASE("assignment matches brute force") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 60; ++trial) {
    const int d = 1 + trial % 3;
    const std::size_t n = 1 + static_cast<std::size_t>(trial % 7);
    const auto a = random_points(rng, n, d), b = random_points(rng, n, d);
    CHECK(w1_assignment(a, b, d) == doctest::Approx(brute_w1(a, b, d)).epsilon(1e-12));
    if (d == 1) CHECK(w1_1d(a, b) == doctest::Approx(brute_w1(a, b, d)).epsilon(1e-12));
  }
}

TEST_CASE("solve_assignment returns a permutation of the optimal cost") {
  const std::vector<double> cost{4, 1, 3, 2, 0, 5, 3, 2, 2};
  const auto res = solve_assignment(cost, 3);
  CHECK(res.cost == doctest::Approx(5.0));
  auto cols = res.row_to_col;
  std::sort(cols.begin(), cols.end());
  CHECK(cols == std::vector<std::size_t>{0, 1, 2});
  double c = 0.0;
  for (std::size_t i = 0; i < 3; ++i) c += cost[i * 3 + res.row_to_col[i]];
  CHECK(c == doctest::Approx(res.cost));
}

TEST_CASE("w1 is a metric") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = 1 + trial % 2;
    const std::size_t n = 20;
    const auto a = random_points(rng, n, d), b = random_points(rng, n, d),
               c = random_points(rng, n, d);
    const double ab = w1_empirical(a, b, d), ba = w1_empirical(b, a, d);
    CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
    CHECK(w1_empirical(a, a, d) == doctest::Approx(0.0).scale(1.0));
    CHECK(ab <= w1_empirical(a, c, d) + w1_empirical(c, b, d) + 1e-12);
    CHECK(ab >= 0.0);
  }
}

TEST_CASE("w1 above the cap uses blocks") {
  std::mt19937_64 rng(3);
  const auto a = random_points(rng, 300, 2);
  auto b = a;
  for (auto& x : b) x += 1.0;  // translation by (1, 1)
  const auto sub = w1_subsampled(a, b, 2, 100, 5);
  CHECK(sub.blocks == 3);
  CHECK(sub.block_size == 100);
  // Each block distance is at most the translation length.
  CHECK(sub.value <= std::sqrt(2.0) + 1e-12);
  CHECK(sub.value > 0.0);
  CHECK(w1_empirical(a, b, 2, 100, 5) == sub.value);
  CHECK(w1_empirical(a, a, 2, 100, 5) == 0.0);
  // Uneven blocks still bound the exact value from above.
  const auto c = random_points(rng, 300, 2);
  const auto uneven = w1_subsampled(a, c, 2, 128, 6);
  CHECK(uneven.blocks == 3);
  CHECK(uneven.value >= w1_assignment(a, c, 2, 300) - 1e-12);
}

TEST_CASE("path sup distance examples") {
  const std::vector<double> grid{0.0, 1.0, 2.0};
  const auto zero = constant_path(0.0, grid);
  CHECK(path_sup_distance(zero, zero) == 0.0);

  auto step = constant_path(0.0, grid);
  step.grid_values = {0.0, 1.0, 1.0};
  step.jumps.push_back({1.0, {0.0}, {1.0}});
  CHECK(path_sup_distance(zero, step) == doctest::Approx(1.0));
  CHECK(path_sup_distance(step, zero) == doctest::Approx(1.0));

  // A jump strictly inside a grid cell and back: the excursion counts.
  auto spike = constant_path(0.0, grid);
  spike.jumps.push_back({0.3, {0.0}, {2.0}});
  spike.jumps.push_back({0.6, {2.0}, {0.0}});
  CHECK(path_sup_distance(zero, spike) == doctest::Approx(2.0));

  // Same jump at the same time on both paths: the left limits are compared.
  auto a = constant_path(0.0, grid);
  a.grid_values = {0.0, 0.0, 0.0};
  a.jumps.push_back({1.5, {3.0}, {0.0}});
  auto b = a;
  b.jumps[0].pre = {1.0};
  CHECK(path_sup_distance(a, b) == doctest::Approx(2.0));
}

TEST_CASE("path sup distance under a constant shift") {
  const auto s = testing::toy({.d = 2, .sigma = 0.4, .lambda = 3.0, .psi = 0.2});
  const DriverBundle drv(20, 0);
  const auto p = simulate(SystemKind::X, s, std::vector<double>{0.0, 0.0},
                          {.horizon = 1.0, .dt = 0.1}, drv).particle(0);
  REQUIRE_FALSE(p.jumps.empty());
  auto q = p;
  for (auto& v : q.grid_values) v += 0.75;
  for (auto& j : q.jumps) {
    for (auto& v : j.pre) v += 0.75;
    for (auto& v : j.post) v += 0.75;
  }
  CHECK(path_sup_distance(p, q) == doctest::Approx(0.75 * std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("path sup distance bounds every grid distance") {
  const auto s = testing::toy({.sigma = 0.5, .lambda = 2.0, .psi = 0.3});
  const auto a = simulate(SystemKind::X, s, std::vector<double>{0.0},
                          {.horizon = 1.0, .dt = 0.05}, DriverBundle(24, 0)).particle(0);
  const auto b = simulate(SystemKind::X, s, std::vector<double>{0.1},
                          {.horizon = 1.0, .dt = 0.05}, DriverBundle(24, 1)).particle(0);
  const double d = path_sup_distance(a, b);
  for (std::size_t k = 0; k < a.grid_times.size(); ++k)
    CHECK(d >= std::abs(a.grid_value(k)[0] - b.grid_value(k)[0]));
  auto c = b;
  c.grid_times.back() = 2.0;
  CHECK_THROWS_AS(path_sup_distance(a, c), InvalidInput);
}

TEST_CASE("path sup distance triangle inequality on simulated paths") {
  const auto s = testing::toy({.sigma = 0.5, .lambda = 2.0, .psi = 0.3});
  std::vector<PathRecord> paths;
  for (std::uint64_t r = 0; r < 3; ++r) {
    const DriverBundle drv(21, r);
    paths.push_back(simulate(SystemKind::X, s, std::vector<double>{0.0},
                             {.horizon = 1.0, .dt = 0.1}, drv).particle(0));
  }
  const double ab = path_sup_distance(paths[0], paths[1]);
  CHECK(ab <= path_sup_distance(paths[0], paths[2]) + path_sup_distance(paths[2], paths[1]) + 1e-12);
  CHECK(ab == path_sup_distance(paths[1], paths[0]));
}

TEST_CASE("fit_rate recovers exact power laws") {
  const std::vector<double> ns{32, 64, 128, 256, 512};
  std::vector<double> e(ns.size());
  for (std::size_t k = 0; k < ns.size(); ++k) e[k] = 3.0 * std::pow(ns[k], -0.5);
  const auto f = fit_rate(ns, e);
  CHECK(f.slope == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("fit_rate flat and inverse-N series") {
  const std::vector<double> ns{8, 16, 32, 64};
  const std::vector<double> flat(4, 0.7);
  CHECK(fit_rate(ns, flat).slope == doctest::Approx(0.0).scale(1.0));
  std::vector<double> inv(4);
  for (std::size_t k = 0; k < 4; ++k) inv[k] = 2.0 / ns[k];
  CHECK(fit_rate(ns, inv).slope == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("fit_rate is scale equivariant") {
  const std::vector<double> ns{10, 20, 40, 80};
  const std::vector<double> e{0.9, 0.55, 0.41, 0.3};
  const std::vector<double> se{0.05, 0.04, 0.02, 0.03};
  const auto base = fit_rate(ns, e, se);
  std::vector<double> e7(e), se7(se), ns3(ns);
  for (auto& v : e7) v *= 7.0;
  for (auto& v : se7) v *= 7.0;
  for (auto& v : ns3) v *= 3.0;
  const auto scaled = fit_rate(ns, e7, se7);
  CHECK(std::abs(scaled.slope - base.slope) < 1e-12);
  CHECK(std::abs(scaled.intercept - base.intercept - std::log(7.0)) < 1e-12);
  const auto shifted = fit_rate(ns3, e, se);
  CHECK(std::abs(shifted.slope - base.slope) < 1e-12);
  CHECK(std::abs(shifted.slope_ci_hi - base.slope_ci_hi) < 1e-12);
}

TEST_CASE("fit_rate weighted oracle") {
  const std::vector<double> ns{10, 20, 40, 80};
  const std::vector<double> e{0.9, 0.55, 0.41, 0.3};
  const std::vector<double> se{0.05, 0.04, 0.02, 0.03};
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < 4; ++k) {
    const double w = std::pow(e[k] / se[k], 2), x = std::log(ns[k]), y = std::log(e[k]);
    sw += w;
    sx += w * x;
    sy += w * y;
    sxx += w * x * x;
    sxy += w * x * y;
  }
  const double slope = (sw * sxy - sx * sy) / (sw * sxx - sx * sx);
  const auto f = fit_rate(ns, e, se);
  CHECK(f.slope == doctest::Approx(slope).epsilon(1e-12));
  CHECK(f.slope_ci_lo < f.slope);
  CHECK(f.slope_ci_hi > f.slope);
  // Zero standard error falls back to the unweighted fit.
  const std::vector<double> zero{0.05, 0.0, 0.02, 0.03};
  const auto u = fit_rate(ns, e, zero), plain = fit_rate(ns, e);
  CHECK(u.slope == plain.slope);
}

TEST_CASE("fit_rate rejects bad input") {
  const std::vector<double> two{1, 2};
  CHECK_THROWS_AS(fit_rate(two, two), InvalidInput);
  const std::vector<double> ns{1, 2, 3}, neg{1, -1, 2};
  CHECK_THROWS_AS(fit_rate(ns, neg), InvalidInput);
}

TEST_CASE("linear trend") {
  const std::vector<double> t{0, 1, 2, 3, 4}, v{5, 5, 1, 2, 3};
  const auto f = linear_trend(t, v, 2.0);
  CHECK(f.points == 3);
  CHECK(f.slope == doctest::Approx(1.0));
  CHECK(f.mean == doctest::Approx(2.0));
  CHECK(f.slope_se == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("moment diagnostics with a constant rate") {
  const double lam = 1.7;
  const auto s = testing::toy({.kappa = 1.0, .lambda = lam, .psi = 0.2});
  std::vector<PathRecordSet> reps;
  for (std::uint64_t r = 0; r < 3; ++r) {
    const DriverBundle drv(22, r);
    reps.push_back(simulate(SystemKind::X, s, std::vector<double>(10, 0.5),
                            {.horizon = 1.0, .dt = 0.1}, drv));
  }
  for (int p = 1; p <= 4; ++p) {
    const auto m = moment_diagnostics(reps, s, p);
    REQUIRE(m.values.size() == 11);
    for (double v : m.values) CHECK(v == doctest::Approx(std::pow(lam, p)));
    CHECK(m.trend.slope == doctest::Approx(0.0).scale(1.0));
  }
  CHECK_THROWS_AS(moment_diagnostics(reps, s, 5), InvalidInput);
  CHECK_THROWS_AS(moment_diagnostics(reps, s, 0), InvalidInput);
  CHECK_THROWS_AS(moment_diagnostics({}, s, 1), InvalidInput);
}

TEST_CASE("wilson interval") {
  const auto w = wilson_interval(0, 10);
  const double z2 = 1.959963984540054 * 1.959963984540054;
  CHECK(w.lo == doctest::Approx(0.0).scale(1.0));
  CHECK(w.hi == doctest::Approx(z2 / (10.0 + z2)));
  const auto h = wilson_interval(5, 10);
  CHECK(h.lo + h.hi == doctest::Approx(1.0));
}

TEST_CASE("jump count tails") {
  const std::vector<std::size_t> zeros(20, 0);
  const std::vector<double> th{0.5, std::numeric_limits<double>::infinity()};
  for (const auto& row : jump_count_stats(zeros, 10, th)) {
    CHECK(row.hits == 0);
    CHECK(row.trials == 20);
    CHECK(row.p_hat == 0.0);
  }
  CHECK_THROWS_AS(jump_count_stats(zeros, 0, th), InvalidInput);
  const std::vector<double> bad{0.0};
  CHECK_THROWS_AS(jump_count_stats(zeros, 10, bad), InvalidInput);

  // Constant rate: C_N(T) / N concentrates at lambda0 T.
  const double lam = 2.0;
  const auto s = testing::toy({.lambda = lam, .psi = 0.1});
  std::vector<std::vector<JumpLogEntry>> logs;
  for (std::uint64_t r = 0; r < 20; ++r) {
    const DriverBundle drv(23, r);
    logs.push_back(simulate(SystemKind::X, s, std::vector<double>(400, 0.0),
                            {.horizon = 1.0, .dt = 0.1}, drv).jump_log);
  }
  const std::vector<double> h{0.5 * lam, 1.5 * lam};
  const auto rows = jump_count_stats(logs, 400, 1.0, h);
  CHECK(rows[0].p_hat == 1.0);
  CHECK(rows[1].p_hat == 0.0);
}
