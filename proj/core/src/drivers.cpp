// Copyright 2026 The mfjump Authors
// SPDX-License-Identifier: Apache-2.0
#include "mfjump/drivers.hpp"

#include <cmath>
#include <numbers>

#include "mfjump/errors.hpp"

namespace mfjump {

namespace {
constexpr std::uint64_t kLayerSalt = 0xd1b54a32d192ed03ULL;
constexpr std::uint64_t kBridgeSalt = 0xb5ad4eceda1ce2a9ULL;
}  // namespace

std::uint64_t derive_key(const StreamKey& key) {
  std::uint64_t h = mix64(key.master_seed);
  h = mix64(h ^ (key.replica + kGolden));
  h = mix64(h ^ (key.particle + kGolden));
  h = mix64(h ^ (static_cast<std::uint64_t>(key.kind) + kGolden));
  return h;
}

StreamState derive_stream(const StreamKey& key) {
  return StreamState(derive_key(key));
}

double StreamState::normal_at(std::uint64_t n) const {
  const double u1 = uniform_at(2 * n);
  const double u2 = uniform_at(2 * n + 1);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

double StreamState::next_normal() {
  // Keep the pairing of normal_at: always start on an even counter.
  if (counter_ % 2 != 0) ++counter_;
  const double z = normal_at(counter_ / 2);
  counter_ += 2;
  return z;
}

std::vector<double> brownian_increment(StreamState& stream, double dt,
                                       int d1) {
  if (!(dt > 0.0)) throw InvalidInput("brownian_increment: dt must be > 0");
  if (d1 < 1) throw InvalidInput("brownian_increment: d1 must be >= 1");
  std::vector<double> out(static_cast<std::size_t>(d1));
  const double scale = std::sqrt(dt);
  for (auto& v : out) v = scale * stream.next_normal();
  return out;
}

double layer_lower_edge(int layer) {
  return layer == 0 ? 0.0 : std::ldexp(1.0, layer - 1);
}

double layer_upper_edge(int layer) { return std::ldexp(1.0, layer); }

int layers_below(double rate_bound) {
  if (!(rate_bound > 0.0)) return 0;
  int n = 1;
  while (n < PoissonStream::kMaxLayers && layer_lower_edge(n) < rate_bound) ++n;
  if (layer_lower_edge(n) < rate_bound && n == PoissonStream::kMaxLayers)
    throw InvalidInput("rate bound exceeds the largest Poisson level band");
  return n;
}

void PoissonStream::advance(int layer, Cursor& c) const {
  const StreamState sub(mix64(key_ ^ ((static_cast<std::uint64_t>(layer) + 1) *
                                      kLayerSalt)));
  const double lo = layer_lower_edge(layer);
  const double width = layer_upper_edge(layer) - lo;
  const std::uint64_t s = c.primed ? c.seq + 1 : 0;
  const double gap = -std::log(sub.uniform_at(2 * s)) / width;
  c.time = (c.primed ? c.time : 0.0) + gap;
  c.u = lo + width * sub.uniform_at(2 * s + 1);
  c.seq = s;
  c.primed = true;
}

std::optional<PoissonEvent> PoissonStream::peek(double t, double rate_bound) {
  const int n = layers_below(rate_bound);
  if (n == 0) return std::nullopt;
  if (static_cast<int>(cursors_.size()) < n) cursors_.resize(n);
  std::optional<PoissonEvent> best;
  for (int k = 0; k < n; ++k) {
    Cursor& c = cursors_[k];
    if (!c.primed) advance(k, c);
    while (c.time <= t) advance(k, c);
    if (!best || c.time < best->time) {
      best = PoissonEvent{c.time, c.u,
                          (static_cast<std::uint64_t>(k) << 40) | c.seq, k};
    }
  }
  return best;
}

std::optional<PoissonEvent> PoissonStream::first_below(double t,
                                                       double horizon,
                                                       double level) {
  const int n = layers_below(level);
  if (n == 0) return std::nullopt;
  if (static_cast<int>(cursors_.size()) < n) cursors_.resize(n);
  std::optional<PoissonEvent> best;
  for (int k = 0; k < n; ++k) {
    Cursor& c = cursors_[k];
    if (!c.primed) advance(k, c);
    while (c.time <= t) advance(k, c);
    Cursor probe = c;
    while (probe.time <= horizon && (!best || probe.time < best->time)) {
      if (probe.u <= level) {
        best = PoissonEvent{probe.time, probe.u,
                            (static_cast<std::uint64_t>(k) << 40) | probe.seq,
                            k};
        break;
      }
      advance(k, probe);
    }
  }
  return best;
}

void PoissonStream::consume(int layer) {
  Cursor& c = cursors_.at(static_cast<std::size_t>(layer));
  advance(layer, c);
}

std::optional<PoissonEvent> next_candidate_event(PoissonStream& stream,
                                                 double t, double horizon,
                                                 double rate_bound) {
  if (!(rate_bound > 0.0))
    throw InvalidInput("next_candidate_event: rate_bound must be > 0");
  if (!(t < horizon))
    throw InvalidInput("next_candidate_event: t must be < horizon");
  for (;;) {
    auto ev = stream.peek(t, rate_bound);
    if (!ev || ev->time > horizon) return std::nullopt;
    stream.consume(ev->layer);
    if (ev->u <= rate_bound) return ev;
    t = ev->time;
  }
}

double mark_at(std::uint64_t marks_key, std::uint64_t event_id,
               std::uint64_t coordinate) {
  const StreamState per_event(mix64(marks_key ^ (event_id + kGolden)));
  return per_event.uniform_at(coordinate);
}

double DriverBundle::brownian_step(std::uint64_t stream_id, std::uint64_t step,
                                   int d1, int component, double dt) const {
  const StreamState s(key(stream_id, StreamKind::brownian));
  return std::sqrt(dt) *
         s.normal_at(step * static_cast<std::uint64_t>(d1) + component);
}

double DriverBundle::bridge_normal(std::uint64_t stream_id, std::uint64_t step,
                                   std::uint64_t node, int component) const {
  const std::uint64_t base =
      mix64(key(stream_id, StreamKind::brownian) ^ kBridgeSalt);
  const StreamState s(mix64(base ^ (step * kGolden + node)));
  return s.normal_at(static_cast<std::uint64_t>(component));
}

}  // namespace mfjump
