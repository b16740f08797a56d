// Copyright 2026 The mfjump Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace mfjump {

/// Random source a stream feeds. The numeric values enter the key derivation
/// and are part of the documented stream format; do not renumber.
enum class StreamKind : std::uint64_t {
  brownian = 1,
  poisson = 2,
  marks = 3,
  init = 4,
};

struct StreamKey {
  std::uint64_t master_seed = 0;
  std::uint64_t replica = 0;
  std::uint64_t particle = 0;
  StreamKind kind = StreamKind::brownian;
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

/// Key of a stream: h = mix64(seed), then h = mix64(h ^ (w + golden)) for
/// w in (replica, particle, kind).
std::uint64_t derive_key(const StreamKey& key);

/// Counter-based generator. Output number c of a stream with key h is
/// mix64(h + (c + 1) * golden), so any position can be read without touching
/// the others.
class StreamState {
 public:
  explicit StreamState(std::uint64_t key, std::uint64_t counter = 0)
      : key_(key), counter_(counter) {}

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

  std::uint64_t at(std::uint64_t counter) const {
    return mix64(key_ + (counter + 1) * kGolden);
  }
  /// Uniform on the open interval (0, 1).
  double uniform_at(std::uint64_t counter) const {
    return (static_cast<double>(at(counter) >> 11) + 0.5) * 0x1.0p-53;
  }
  /// Standard normal built from outputs 2n and 2n+1 (Box-Muller, cosine branch).
  double normal_at(std::uint64_t n) const;

  std::uint64_t next_u64() { return at(counter_++); }
  double next_uniform() { return uniform_at(counter_++); }
  double next_normal();

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
};

StreamState derive_stream(const StreamKey& key);

/// Gaussian vector with covariance dt * I, drawn from the current position.
std::vector<double> brownian_increment(StreamState& stream, double dt, int d1);

/// One point of the Poisson random measure on time x level, restricted to a
/// level bound. The caller thins: accept iff u <= rate(state).
struct PoissonEvent {
  double time = 0.0;
  double u = 0.0;
  std::uint64_t event_id = 0;
  int layer = 0;
};

/// Poisson random measure of one particle on [0, inf) x (0, inf), realized in
/// level bands (0,1], (1,2], (2,4], ... Each band is an independent
/// homogeneous process in time with intensity equal to its width, drawn from
/// its own sub-key. Any rate bound sees the same underlying points, so coupled
/// systems with different bounds still share the random measure.
class PoissonStream {
 public:
  static constexpr int kMaxLayers = 62;

  PoissonStream() = default;
  explicit PoissonStream(std::uint64_t key) : key_(key) {}

  /// Earliest point after t among the bands whose lower edge lies below
  /// rate_bound, without consuming it. Stale points (time <= t) in those
  /// bands are discarded.
  std::optional<PoissonEvent> peek(double t, double rate_bound);
  /// Consume the point currently at the head of a band.
  void consume(int layer);
  /// First point in (t, horizon] with level u <= `level`, or nothing. Points
  /// at or before t are discarded; later points are left in place, so a
  /// subsequent call with a different level sees them again.
  std::optional<PoissonEvent> first_below(double t, double horizon,
                                          double level);

  std::uint64_t key() const { return key_; }

 private:
  struct Cursor {
    double time = 0.0;
    double u = 0.0;
    std::uint64_t seq = 0;
    bool primed = false;
  };
  void advance(int layer, Cursor& c) const;

  std::uint64_t key_ = 0;
  std::vector<Cursor> cursors_;
};

double layer_lower_edge(int layer);
double layer_upper_edge(int layer);
int layers_below(double rate_bound);

/// Next point in (t, horizon] whose level is <= rate_bound. Points in the
/// searched bands with level above the bound are consumed on the way. Returns
/// nothing (and leaves later points untouched) when the next arrival is past
/// the horizon.
std::optional<PoissonEvent> next_candidate_event(PoissonStream& stream,
                                                 double t, double horizon,
                                                 double rate_bound);

/// Mark coordinate `coordinate` of event `event_id` of a marks stream: output
/// `coordinate` of the stream keyed mix64(marks_key ^ (event_id + golden)).
double mark_at(std::uint64_t marks_key, std::uint64_t event_id,
               std::uint64_t coordinate);

/// Per-replica random drivers. Particle streams are addressed by stream id,
/// which is what coupled systems share.
class DriverBundle {
 public:
  DriverBundle(std::uint64_t master_seed, std::uint64_t replica)
      : seed_(master_seed), replica_(replica) {}

  std::uint64_t master_seed() const { return seed_; }
  std::uint64_t replica() const { return replica_; }

  std::uint64_t key(std::uint64_t stream_id, StreamKind kind) const {
    return derive_key({seed_, replica_, stream_id, kind});
  }
  StreamState stream(std::uint64_t stream_id, StreamKind kind) const {
    return StreamState(key(stream_id, kind));
  }
  PoissonStream poisson(std::uint64_t stream_id) const {
    return PoissonStream(key(stream_id, StreamKind::poisson));
  }

  /// Increment of component `component` over base step `step` (variance dt).
  double brownian_step(std::uint64_t stream_id, std::uint64_t step, int d1,
                       int component, double dt) const;

  /// Standard normal used to refine step `step` by Brownian bridging.
  /// `node` identifies the dyadic midpoint being filled in.
  double bridge_normal(std::uint64_t stream_id, std::uint64_t step,
                       std::uint64_t node, int component) const;

 private:
  std::uint64_t seed_;
  std::uint64_t replica_;
};

}  // namespace mfjump
