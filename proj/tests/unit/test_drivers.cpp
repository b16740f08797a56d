// Copyright 2026 The mfjump Authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "mfjump/drivers.hpp"
#include "mfjump/errors.hpp"

using namespace mfjump;

TEST_CASE("same key gives identical streams") {
  const StreamKey k{42, 3, 7, StreamKind::poisson};
  StreamState a = derive_stream(k);
  StreamState b = derive_stream(k);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("streams of neighbouring particles are independent (chi-square)") {
  const StreamState a = derive_stream({42, 0, 0, StreamKind::brownian});
  const StreamState b = derive_stream({42, 0, 1, StreamKind::brownian});
  constexpr int kBins = 10;
  constexpr int kDraws = 10000;
  double table[kBins][kBins] = {};
  for (int i = 0; i < kDraws; ++i) {
    const int r = static_cast<int>(a.uniform_at(i) * kBins);
    const int c = static_cast<int>(b.uniform_at(i) * kBins);
    table[r][c] += 1.0;
  }
  double rows[kBins] = {}, cols[kBins] = {};
  for (int r = 0; r < kBins; ++r)
    for (int c = 0; c < kBins; ++c) {
      rows[r] += table[r][c];
      cols[c] += table[r][c];
    }
  double chi2 = 0.0;
  for (int r = 0; r < kBins; ++r)
    for (int c = 0; c < kBins; ++c) {
      const double e = rows[r] * cols[c] / kDraws;
      chi2 += (table[r][c] - e) * (table[r][c] - e) / e;
    }
  const boost::math::chi_squared dist((kBins - 1) * (kBins - 1));
  CHECK(chi2 < boost::math::quantile(dist, 0.99));
}

TEST_CASE("frozen stream test vectors") {
  std::ifstream in(MFJUMP_FIXTURE_DIR "/stream_vectors.txt");
  REQUIRE(in);
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::uint64_t seed, replica, particle;
    std::string kind, key, o[4];
    double u0, n0;
    ls >> seed >> replica >> particle >> kind >> key >> o[0] >> o[1] >> o[2] >> o[3] >> u0 >> n0;
    REQUIRE(ls);
    const StreamKind k = kind == "brownian" ? StreamKind::brownian
                         : kind == "poisson" ? StreamKind::poisson
                         : kind == "marks"   ? StreamKind::marks
                                             : StreamKind::init;
    const std::uint64_t h = derive_key({seed, replica, particle, k});
    CHECK(h == std::stoull(key, nullptr, 16));
    const StreamState s(h);
    for (int c = 0; c < 4; ++c) CHECK(s.at(c) == std::stoull(o[c], nullptr, 16));
    CHECK(s.uniform_at(0) == u0);
    CHECK(s.normal_at(0) == doctest::Approx(n0).epsilon(1e-14));
    ++rows;
  }
  CHECK(rows == 5);
}

TEST_CASE("brownian increments") {
  StreamState s = derive_stream({1, 0, 0, StreamKind::brownian});
  const double dt = 0.01;
  constexpr int kDraws = 100000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < kDraws; ++i) {
    const double z = brownian_increment(s, dt, 1)[0];
    sum += z;
    sum2 += z * z;
  }
  const double mean = sum / kDraws;
  const double var = sum2 / kDraws - mean * mean;
  CHECK(std::abs(mean) < 3.0 * std::sqrt(dt / kDraws));
  CHECK(std::abs(var - dt) < 0.05 * dt);
  CHECK(brownian_increment(s, dt, 3).size() == 3);
  CHECK_THROWS_AS(brownian_increment(s, 0.0, 1), InvalidInput);
  CHECK_THROWS_AS(brownian_increment(s, -1.0, 1), InvalidInput);
}

TEST_CASE("tiny rate bound gives no candidate") {
  for (std::uint64_t p = 0; p < 1000; ++p) {
    PoissonStream ps(derive_key({5, 0, p, StreamKind::poisson}));
    CHECK_FALSE(next_candidate_event(ps, 0.0, 1.0, 1e-12).has_value());
  }
}

TEST_CASE("candidate counts are Poisson(bound * horizon)") {
  constexpr int kReps = 10000;
  double total = 0.0;
  for (int r = 0; r < kReps; ++r) {
    PoissonStream ps(derive_key({6, static_cast<std::uint64_t>(r), 0, StreamKind::poisson}));
    double t = 0.0, last = -1.0;
    while (auto ev = next_candidate_event(ps, t, 10.0, 2.0)) {
      REQUIRE(ev->time > last);
      REQUIRE(ev->u > 0.0);
      REQUIRE(ev->u <= 2.0);
      last = t = ev->time;
      total += 1.0;
    }
  }
  CHECK(std::abs(total / kReps - 20.0) < 3.0 * std::sqrt(20.0 / kReps));
}

TEST_CASE("thinning a bound of 2 down to rate 1") {
  constexpr int kReps = 10000;
  double accepted = 0.0;
  for (int r = 0; r < kReps; ++r) {
    PoissonStream ps(derive_key({7, static_cast<std::uint64_t>(r), 0, StreamKind::poisson}));
    double t = 0.0;
    while (auto ev = next_candidate_event(ps, t, 10.0, 2.0)) {
      if (ev->u <= 1.0) accepted += 1.0;
      t = ev->time;
    }
  }
  CHECK(std::abs(accepted / kReps - 10.0) < 3.0 * std::sqrt(10.0 / kReps));
}

TEST_CASE("invalid candidate requests") {
  PoissonStream ps(derive_key({8, 0, 0, StreamKind::poisson}));
  CHECK_THROWS_AS(next_candidate_event(ps, 0.0, 1.0, 0.0), InvalidInput);
  CHECK_THROWS_AS(next_candidate_event(ps, 0.0, 1.0, -2.0), InvalidInput);
  CHECK_THROWS_AS(next_candidate_event(ps, 1.0, 1.0, 1.0), InvalidInput);
}

TEST_CASE("first_below agrees with thinning and does not consume") {
  for (std::uint64_t p = 0; p < 200; ++p) {
    const std::uint64_t key = derive_key({9, 0, p, StreamKind::poisson});
    // Thinning at a bound of 4 for rate 1.5.
    PoissonStream a(key);
    std::optional<PoissonEvent> first;
    double t = 0.0;
    while (auto ev = next_candidate_event(a, t, 5.0, 4.0)) {
      if (ev->u <= 1.5) {
        first = ev;
        break;
      }
      t = ev->time;
    }
    PoissonStream b(key);
    const auto low = b.first_below(0.0, 5.0, 0.3);
    const auto fb = b.first_below(0.0, 5.0, 1.5);
    REQUIRE(first.has_value() == fb.has_value());
    if (fb) {
      CHECK(fb->time == first->time);
      CHECK(fb->event_id == first->event_id);
    }
    if (low && fb) CHECK(low->time >= fb->time);
  }
}

TEST_CASE("marks are deterministic uniforms") {
  const std::uint64_t k = derive_key({10, 0, 3, StreamKind::marks});
  double sum = 0.0;
  for (std::uint64_t e = 0; e < 1000; ++e) {
    const double h = mark_at(k, e, 5);
    CHECK(h == mark_at(k, e, 5));
    CHECK(h > 0.0);
    CHECK(h < 1.0);
    sum += h;
  }
  CHECK(std::abs(sum / 1000.0 - 0.5) < 3.0 / std::sqrt(12.0 * 1000.0));
  CHECK(mark_at(k, 1, 0) != mark_at(k, 1, 1));
}

TEST_CASE("driver bundle addresses streams by id") {
  const DriverBundle d(42, 0);
  CHECK(d.key(0, StreamKind::brownian) == derive_key({42, 0, 0, StreamKind::brownian}));
  CHECK(d.brownian_step(3, 5, 1, 0, 0.25) ==
        0.5 * d.stream(3, StreamKind::brownian).normal_at(5));
}
