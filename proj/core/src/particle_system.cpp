// Copyright 2026 The mfjump Authors
// SPDX-License-Identifier: Apache-2.0
#include "mfjump/particle_system.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>

#include "mfjump/errors.hpp"

namespace mfjump {

namespace {

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(),
                     [](double x) { return std::isfinite(x); });
}

double checked_rate(const ModelSpec& spec, PointView x,
                    const EmpiricalMeasure& mu, double t) {
  const double r = spec.rate(x, mu);
  if (!std::isfinite(r))
    throw RateBoundViolation("jump rate is not finite at t = " +
                                 std::to_string(t),
                             r, 0.0);
  if (r >= layer_lower_edge(PoissonStream::kMaxLayers - 1))
    throw RateBoundViolation("jump rate exceeds the largest level band at t = " +
                                 std::to_string(t),
                             r, layer_lower_edge(PoissonStream::kMaxLayers - 1));
  return std::max(r, 0.0);
}

double checked_bound(double bound, double t) {
  const double top = layer_lower_edge(PoissonStream::kMaxLayers - 1);
  if (std::isnan(bound) || bound >= top)
    throw RateBoundViolation("rate envelope exceeds the largest level band at t = " +
                                 std::to_string(t),
                             bound, top);
  return bound;
}

/// Everything one simulation run needs; positions live in `st`.
struct Run {
  SystemKind kind;
  const ModelSpec& spec;
  const DriverBundle& drv;
  const SimOptions& opt;
  const FlowField* flow;
  StepObserver* obs;
  SystemState& st;
  std::vector<std::vector<JumpKnot>>* knots;  // per particle, may be null

  std::size_t n = 0;
  std::size_t d = 1;
  std::size_t d1 = 1;
  std::vector<std::uint64_t> marks_keys;
  std::vector<StreamState> brownian;

  Run(SystemKind k, const ModelSpec& s, const DriverBundle& dr,
      const SimOptions& o, const FlowField* f, StepObserver* ob,
      SystemState& state, std::vector<std::vector<JumpKnot>>* kn)
      : kind(k), spec(s), drv(dr), opt(o), flow(f), obs(ob), st(state),
        knots(kn) {
    n = st.size();
    d = static_cast<std::size_t>(spec.dims.d);
    d1 = static_cast<std::size_t>(spec.dims.d1);
    marks_keys.resize(n);
    brownian.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      marks_keys[i] = drv.key(st.stream_ids[i], StreamKind::marks);
      brownian.emplace_back(drv.key(st.stream_ids[i], StreamKind::brownian));
    }
  }

  std::span<double> pos(std::size_t i) {
    return {st.positions.data() + i * d, d};
  }
  EmpiricalMeasure own_measure() const {
    return EmpiricalMeasure(st.positions, static_cast<int>(d));
  }

  double h1_of(std::size_t i, const PoissonEvent& ev) const {
    return mark_at(marks_keys[i], ev.event_id, st.stream_ids[i]);
  }

  void log_jump(double t, std::size_t i, std::span<const double> pre,
                double amplitude) {
    st.jump_log.push_back({t, i, amplitude});
    if (knots) {
      const auto p = pos(i);
      (*knots)[i].push_back(
          {t, std::vector<double>(pre.begin(), pre.end()),
           std::vector<double>(p.begin(), p.end())});
    }
  }

  /// Main jump of i at the pre-jump measure `mu`; collateral jumps too for X.
  void jump(std::size_t i, const PoissonEvent& ev, const EmpiricalMeasure& mu) {
    const double h1 = h1_of(i, ev);
    std::vector<double> pre(pos(i).begin(), pos(i).end());
    std::vector<double> psi(d);
    spec.main_jump(pre, mu, h1, psi);
    if (kind == SystemKind::X && !spec.collateral_is_zero() && n > 1) {
      std::vector<double> delta(n * d, 0.0), theta(d);
      const double inv_n = 1.0 / static_cast<double>(n);
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double h2 = mark_at(marks_keys[i], ev.event_id, st.stream_ids[j]);
        spec.collateral_jump(pre, mu.point(j), mu, h1, h2, theta);
        for (std::size_t c = 0; c < d; ++c) delta[j * d + c] = theta[c] * inv_n;
      }
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        for (std::size_t c = 0; c < d; ++c)
          st.positions[j * d + c] += delta[j * d + c];
      }
    }
    auto p = pos(i);
    for (std::size_t c = 0; c < d; ++c) p[c] += psi[c];
    log_jump(ev.time, i, pre, norm(psi));
    if (obs) obs->on_jump(ev.time, i, st.positions);
  }

  /// Collateral drift of the Y-system per unit time, added into `out`.
  void y_collateral(const EmpiricalMeasure& mu, std::span<const double> lam,
                    std::span<double> out, double scale) const {
    if (spec.collateral_is_zero()) return;
    const bool jumper = opt.y_rate_argument == RateArgument::jumper;
    if (spec.mean_collateral_constant) {
      const auto& cbar = *spec.mean_collateral_constant;
      const double mean_rate =
          std::accumulate(lam.begin(), lam.end(), 0.0) / static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double r = jumper ? mean_rate : lam[i];
        for (std::size_t c = 0; c < d; ++c) out[i * d + c] += r * cbar[c] * scale;
      }
      return;
    }
    std::vector<double> e(d);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        spec.expected_collateral(mu.point(j), mu.point(i), mu, e);
        const double r = (jumper ? lam[j] : lam[i]) / static_cast<double>(n);
        for (std::size_t c = 0; c < d; ++c) out[i * d + c] += r * e[c] * scale;
      }
    }
  }

  /// Drift and noise increments of particle i over an interval of length h.
  void increments(PointView x, const EmpiricalMeasure& mu,
                  std::span<const double> dw, double h, std::span<double> drift,
                  std::span<double> noise) const {
    spec.drift(x, mu, drift);
    for (auto& v : drift) v *= h;
    std::fill(noise.begin(), noise.end(), 0.0);
    if (spec.has_diffusion()) {
      std::vector<double> sig(d * d1);
      spec.diffusion(x, mu, sig);
      for (std::size_t c = 0; c < d; ++c)
        for (std::size_t k = 0; k < d1; ++k) noise[c] += sig[c * d1 + k] * dw[k];
    }
  }

  void check_finite(double t) {
    if (!all_finite(st.positions))
      throw NumericalBlowup("positions became non-finite at t = " +
                                std::to_string(t),
                            t, st.positions);
  }

  std::vector<double> bridge_split(std::span<const double> dw, std::size_t i0,
                                   std::size_t count, double h,
                                   std::uint64_t step, std::uint64_t node) const {
    std::vector<double> left(count * d1);
    const double sd = 0.5 * std::sqrt(h);
    for (std::size_t i = 0; i < count; ++i)
      for (std::size_t c = 0; c < d1; ++c)
        left[i * d1 + c] =
            0.5 * dw[i * d1 + c] +
            sd * drv.bridge_normal(st.stream_ids[i0 + i], step, node,
                                   static_cast<int>(c));
    return left;
  }

  // ---- time-stepped X / Y ----------------------------------------------

  void interval_xy(double a, double b, std::span<const double> dw,
                   std::uint64_t step, std::uint64_t node, int depth) {
    EmpiricalMeasure mu = own_measure();
    std::vector<double> lam(n);
    double max_rate = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      lam[i] = checked_rate(spec, mu.point(i), mu, a);
      max_rate = std::max(max_rate, lam[i]);
    }
    const double h = b - a;
    if (max_rate * h > opt.density_threshold && depth < opt.max_refinements) {
      const auto left = bridge_split(dw, 0, n, h, step, node);
      std::vector<double> right(dw.begin(), dw.end());
      for (std::size_t k = 0; k < right.size(); ++k) right[k] -= left[k];
      const double mid = a + 0.5 * h;
      interval_xy(a, mid, left, step, 2 * node, depth + 1);
      interval_xy(mid, b, right, step, 2 * node + 1, depth + 1);
      return;
    }
    std::vector<double> drift(n * d), noise(n * d);
    for (std::size_t i = 0; i < n; ++i)
      increments(mu.point(i), mu, dw.subspan(i * d1, d1), h,
                 std::span<double>(drift).subspan(i * d, d),
                 std::span<double>(noise).subspan(i * d, d));
    if (kind == SystemKind::Y) y_collateral(mu, lam, drift, h);
    if (obs) obs->on_interval_begin(a, st.positions);

    // Exact thinning: between jumps the state is frozen, so particle i's
    // next jump is its first Poisson point below lambda_i.
    std::vector<std::optional<PoissonEvent>> next(n);
    for (std::size_t i = 0; i < n; ++i)
      next[i] = st.poisson[i].first_below(a, b, lam[i]);
    for (;;) {
      std::size_t best = n;
      for (std::size_t i = 0; i < n; ++i)
        if (next[i] && (best == n || next[i]->time < next[best]->time)) best = i;
      if (best == n) break;
      const PoissonEvent ev = *next[best];
      jump(best, ev, mu);
      mu = own_measure();
      for (std::size_t j = 0; j < n; ++j) {
        const double r = checked_rate(spec, mu.point(j), mu, ev.time);
        if (j == best || r != lam[j]) {
          lam[j] = r;
          next[j] = st.poisson[j].first_below(ev.time, b, r);
        }
      }
    }
    if (obs) obs->on_interval_end(a, b, st.positions, drift, noise);
    for (std::size_t k = 0; k < n * d; ++k)
      st.positions[k] = st.positions[k] + drift[k] + noise[k];
    check_finite(b);
  }

  // ---- time-stepped limit copies ---------------------------------------

  void interval_copy(std::size_t i, std::size_t cell, double a, double b,
                     std::span<const double> dw, std::uint64_t step,
                     std::uint64_t node, int depth) {
    const EmpiricalMeasure& mu = flow->measure(cell);
    auto x = pos(i);
    double lam = checked_rate(spec, x, mu, a);
    const double h = b - a;
    if (lam * h > opt.density_threshold && depth < opt.max_refinements) {
      const auto left = bridge_split(dw, i, 1, h, step, node);
      std::vector<double> right(dw.begin(), dw.end());
      for (std::size_t k = 0; k < right.size(); ++k) right[k] -= left[k];
      const double mid = a + 0.5 * h;
      interval_copy(i, cell, a, mid, left, step, 2 * node, depth + 1);
      interval_copy(i, cell, mid, b, right, step, 2 * node + 1, depth + 1);
      return;
    }
    std::vector<double> drift(d), noise(d);
    increments(x, mu, dw, h, drift, noise);
    if (!spec.collateral_is_zero()) {
      std::vector<double> coll(d);
      flow->collateral_drift(cell, x, coll);
      for (std::size_t c = 0; c < d; ++c) drift[c] += coll[c] * h;
    }
    double t = a;
    std::vector<double> pre(d), psi(d);
    while (auto ev = st.poisson[i].first_below(t, b, lam)) {
      std::copy(x.begin(), x.end(), pre.begin());
      spec.main_jump(pre, mu, h1_of(i, *ev), psi);
      for (std::size_t c = 0; c < d; ++c) x[c] += psi[c];
      log_jump(ev->time, i, pre, norm(psi));
      t = ev->time;
      lam = checked_rate(spec, x, mu, t);
    }
    for (std::size_t c = 0; c < d; ++c) x[c] = x[c] + drift[c] + noise[c];
    if (!all_finite(x))
      throw NumericalBlowup("limit copy " + std::to_string(i) +
                                " became non-finite at t = " + std::to_string(b),
                            b, std::vector<double>(x.begin(), x.end()));
  }

  void base_step(double a, double b, std::uint64_t step) {
    const double h = b - a;
    const double sq = std::sqrt(h);
    std::vector<double> dw(n * d1);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < d1; ++c)
        dw[i * d1 + c] = sq * brownian[i].normal_at(step * d1 + c);
    if (kind == SystemKind::limit) {
      const std::size_t cell = static_cast<std::size_t>(step);
      for (std::size_t i = 0; i < n; ++i)
        interval_copy(i, cell, a, b, std::span<const double>(dw).subspan(i * d1, d1),
                      step, 1, 0);
    } else {
      interval_xy(a, b, dw, step, 1, 0);
    }
    st.t = b;
    st.step = step + 1;
  }

  // ---- event-driven ------------------------------------------------------

  double kappa() const { return spec.affine_drift->relaxation; }

  void relax(std::span<double> x, std::span<const double> x_eq, double e) {
    for (std::size_t c = 0; c < d; ++c) x[c] = x_eq[c] + (x[c] - x_eq[c]) * e;
  }

  /// Equilibrium points of the frozen affine flow, one per particle.
  void equilibria(const EmpiricalMeasure& mu, std::vector<double>& x_eq,
                  double t) {
    const auto& base = spec.affine_drift->offset;
    x_eq.assign(n * d, 0.0);
    std::vector<double> coll(n * d, 0.0);
    if (kind == SystemKind::Y && !spec.collateral_is_zero()) {
      std::vector<double> lam(n);
      for (std::size_t j = 0; j < n; ++j)
        lam[j] = checked_rate(spec, mu.point(j), mu, t);
      y_collateral(mu, lam, coll, 1.0);
    }
    const double k = kappa();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < d; ++c)
        x_eq[i * d + c] = (base[c] + coll[i * d + c]) / k;
  }

  double bound_radius(std::span<const double> x,
                      std::span<const double> x_eq) const {
    return std::max(norm(x), norm(x_eq));
  }
  double padded(double r) const {
    return r * (1.0 + opt.bound_slack) + opt.bound_slack;
  }

  void event_xy(std::size_t steps, PathRecordSet& rec) {
    const double T = opt.horizon;
    std::vector<double> x_eq, rbound(n), bound(n);
    std::vector<std::optional<PoissonEvent>> next(n);
    EmpiricalMeasure mu = own_measure();
    equilibria(mu, x_eq, 0.0);
    auto eq = [&](std::size_t i) {
      return std::span<const double>(x_eq.data() + i * d, d);
    };
    auto rescan = [&](std::size_t i, double t) {
      rbound[i] = padded(bound_radius(pos(i), eq(i)));
      bound[i] = checked_bound(spec.rate_envelope(rbound[i]), t);
      next[i] = bound[i] > 0.0 ? st.poisson[i].first_below(t, T, bound[i])
                               : std::nullopt;
    };
    for (std::size_t i = 0; i < n; ++i) rescan(i, 0.0);
    auto advance_all = [&](double s) {
      const double e = std::exp(-kappa() * s);
      for (std::size_t i = 0; i < n; ++i) relax(pos(i), eq(i), e);
    };
    double t = 0.0;
    std::size_t k = 1;
    while (k <= steps) {
      std::size_t best = n;
      for (std::size_t i = 0; i < n; ++i)
        if (next[i] && (best == n || next[i]->time < next[best]->time)) best = i;
      const double grid = static_cast<double>(k) * opt.dt;
      if (best == n || next[best]->time > grid) {
        advance_all(grid - t);
        t = grid;
        check_finite(t);
        record(rec, k);
        ++k;
        if (kind == SystemKind::Y) {
          mu = own_measure();
          equilibria(mu, x_eq, t);
        }
        for (std::size_t i = 0; i < n; ++i)
          if (bound_radius(pos(i), eq(i)) > rbound[i]) rescan(i, t);
        continue;
      }
      const PoissonEvent ev = *next[best];
      advance_all(ev.time - t);
      t = ev.time;
      mu = own_measure();
      const double lam = checked_rate(spec, pos(best), mu, t);
      if (lam > bound[best] * (1.0 + 1e-12))
        throw RateBoundViolation(
            "rate envelope too small for particle " + std::to_string(best) +
                " at t = " + std::to_string(t),
            lam, bound[best]);
      if (ev.u <= lam) {
        jump(best, ev, mu);
        mu = own_measure();
      }
      if (kind == SystemKind::Y) equilibria(mu, x_eq, t);
      for (std::size_t i = 0; i < n; ++i)
        if (i == best || bound_radius(pos(i), eq(i)) > rbound[i]) rescan(i, t);
    }
  }

  void event_limit(std::size_t steps, PathRecordSet& rec) {
    const auto& base = spec.affine_drift->offset;
    const double k = kappa();
    std::vector<double> x_eq(d), coll(d), pre(d), psi(d);
    for (std::size_t i = 0; i < n; ++i) {
      auto x = pos(i);
      double t = 0.0;
      for (std::size_t cell = 0; cell < steps; ++cell) {
        const double b = static_cast<double>(cell + 1) * opt.dt;
        const EmpiricalMeasure& mu = flow->measure(cell);
        std::fill(coll.begin(), coll.end(), 0.0);
        if (!spec.collateral_is_zero()) flow->collateral_drift(cell, x, coll);
        for (std::size_t c = 0; c < d; ++c) x_eq[c] = (base[c] + coll[c]) / k;
        for (;;) {
          const double bound = checked_bound(spec.rate_envelope(padded(bound_radius(x, x_eq))), t);
          if (!(bound > 0.0)) break;
          const auto ev = st.poisson[i].first_below(t, b, bound);
          if (!ev) break;
          relax(x, x_eq, std::exp(-k * (ev->time - t)));
          t = ev->time;
          const double lam = checked_rate(spec, x, mu, t);
          if (lam > bound * (1.0 + 1e-12))
            throw RateBoundViolation("rate envelope too small for limit copy " +
                                         std::to_string(i),
                                     lam, bound);
          if (ev->u <= lam) {
            std::copy(x.begin(), x.end(), pre.begin());
            spec.main_jump(pre, mu, h1_of(i, *ev), psi);
            for (std::size_t c = 0; c < d; ++c) x[c] += psi[c];
            log_jump(t, i, pre, norm(psi));
          }
        }
        relax(x, x_eq, std::exp(-k * (b - t)));
        t = b;
        if (!all_finite(x))
          throw NumericalBlowup("limit copy became non-finite", t,
                                std::vector<double>(x.begin(), x.end()));
        std::copy(x.begin(), x.end(),
                  rec.grid_values.begin() +
                      static_cast<std::ptrdiff_t>(((cell + 1) * n + i) * d));
      }
    }
  }

  void record(PathRecordSet& rec, std::size_t k) {
    std::copy(st.positions.begin(), st.positions.end(),
              rec.grid_values.begin() + static_cast<std::ptrdiff_t>(k * n * d));
  }
};

std::size_t step_count(double horizon, double dt) {
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw InvalidInput("simulate: horizon T must be > 0");
  if (!(dt > 0.0)) throw InvalidInput("simulate: dt must be > 0");
  const double q = horizon / dt;
  const double r = std::round(q);
  if (r < 1.0 || std::abs(q - r) > 1e-9 * std::max(1.0, q))
    throw InvalidInput("simulate: T / dt must be a positive integer");
  return static_cast<std::size_t>(r);
}

}  // namespace

const char* to_string(SystemKind k) {
  switch (k) {
    case SystemKind::X:
      return "X";
    case SystemKind::Y:
      return "Y";
    case SystemKind::limit:
      return "limit";
  }
  return "unknown";
}

SystemState make_state(const DriverBundle& drivers,
                       std::vector<double> positions, int dim,
                       std::vector<std::uint64_t> stream_ids) {
  if (dim < 1) throw InvalidInput("make_state: dim must be >= 1");
  if (positions.empty() || positions.size() % static_cast<std::size_t>(dim))
    throw InvalidInput("make_state: positions must be a non-empty n x d array");
  if (!all_finite(positions))
    throw InvalidInput("make_state: non-finite initial position");
  const std::size_t n = positions.size() / static_cast<std::size_t>(dim);
  if (stream_ids.empty()) {
    stream_ids.resize(n);
    std::iota(stream_ids.begin(), stream_ids.end(), std::uint64_t{0});
  }
  if (stream_ids.size() != n)
    throw InvalidInput("make_state: one stream id per particle required");
  SystemState st;
  st.dim = dim;
  st.positions = std::move(positions);
  st.stream_ids = std::move(stream_ids);
  st.poisson.reserve(n);
  for (auto id : st.stream_ids) st.poisson.push_back(drivers.poisson(id));
  return st;
}

std::vector<double> sample_initial(const DriverBundle& drivers, int dim,
                                   double low, double high,
                                   std::span<const std::uint64_t> stream_ids) {
  if (dim < 1) throw InvalidInput("sample_initial: dim must be >= 1");
  if (!(high >= low)) throw InvalidInput("sample_initial: need low <= high");
  const std::size_t du = static_cast<std::size_t>(dim);
  std::vector<double> out(stream_ids.size() * du);
  for (std::size_t i = 0; i < stream_ids.size(); ++i) {
    const StreamState s = drivers.stream(stream_ids[i], StreamKind::init);
    for (std::size_t c = 0; c < du; ++c)
      out[i * du + c] = low + (high - low) * s.uniform_at(c);
  }
  return out;
}

void step_system(SystemKind kind, SystemState& state, const ModelSpec& spec,
                 double dt, const DriverBundle& drivers,
                 const SimOptions& options, const FlowField* flow,
                 StepObserver* observer) {
  if (!(dt > 0.0)) throw InvalidInput("step: dt must be > 0");
  if (state.dim != spec.dims.d)
    throw InvalidInput("step: state dimension does not match the model");
  if (kind == SystemKind::limit && !flow)
    throw InvalidInput("step: limit copies need a flow");
  Run run(kind, spec, drivers, options, flow, observer, state, nullptr);
  run.base_step(state.t, state.t + dt, state.step);
}

double apply_x_jump(const ModelSpec& spec, std::span<double> positions,
                    int dim, std::size_t jumper, double h1,
                    std::span<const double> h2) {
  const std::size_t d = static_cast<std::size_t>(dim);
  const std::size_t n = positions.size() / d;
  if (jumper >= n) throw InvalidInput("apply_x_jump: jumper out of range");
  if (!spec.collateral_is_zero() && h2.size() != n)
    throw InvalidInput("apply_x_jump: one collateral mark per particle");
  const EmpiricalMeasure mu(
      std::vector<double>(positions.begin(), positions.end()), dim);
  std::vector<double> psi(d), theta(d);
  spec.main_jump(mu.point(jumper), mu, h1, psi);
  if (!spec.collateral_is_zero()) {
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == jumper) continue;
      spec.collateral_jump(mu.point(jumper), mu.point(j), mu, h1, h2[j], theta);
      for (std::size_t c = 0; c < d; ++c) positions[j * d + c] += theta[c] * inv_n;
    }
  }
  for (std::size_t c = 0; c < d; ++c) positions[jumper * d + c] += psi[c];
  return norm(psi);
}

PathRecordSet simulate(SystemKind kind, const ModelSpec& spec,
                       std::span<const double> initial,
                       const SimOptions& options, const DriverBundle& drivers,
                       std::span<const std::uint64_t> stream_ids,
                       const FlowField* flow, StepObserver* observer) {
  const std::size_t steps = step_count(options.horizon, options.dt);
  const int dim = spec.dims.d;
  std::vector<std::uint64_t> ids(stream_ids.begin(), stream_ids.end());
  SystemState st = make_state(drivers, std::vector<double>(initial.begin(),
                                                           initial.end()),
                              dim, std::move(ids));
  const std::size_t n = st.size();
  const std::size_t d = static_cast<std::size_t>(dim);

  if (kind == SystemKind::limit) {
    if (!flow) throw InvalidInput("simulate: limit copies need a flow");
    const auto& g = flow->grid_times();
    if (g.size() != steps + 1)
      throw InvalidInput("simulate: flow grid does not match T / dt");
    for (std::size_t k = 0; k <= steps; ++k)
      if (std::abs(g[k] - static_cast<double>(k) * options.dt) >
          1e-9 * std::max(1.0, options.horizon))
        throw InvalidInput("simulate: flow grid does not match T / dt");
  }
  if (options.event_driven) {
    if (!spec.supports_event_driven())
      throw InvalidInput(
          "simulate: event-driven mode needs an affine drift and no diffusion");
    if (!spec.rate_envelope)
      throw InvalidInput("simulate: event-driven mode needs a rate envelope");
    if (!(spec.affine_drift->relaxation > 0.0))
      throw InvalidInput("simulate: event-driven mode needs relaxation > 0");
  }

  PathRecordSet rec;
  rec.dim = dim;
  rec.n = n;
  rec.grid_times.resize(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k)
    rec.grid_times[k] = static_cast<double>(k) * options.dt;
  rec.grid_values.assign((steps + 1) * n * d, 0.0);
  std::copy(st.positions.begin(), st.positions.end(), rec.grid_values.begin());
  rec.jumps.resize(n);
  rec.stream_ids = st.stream_ids;

  Run run(kind, spec, drivers, options, flow, observer, st, &rec.jumps);
  if (options.event_driven) {
    if (kind == SystemKind::limit)
      run.event_limit(steps, rec);
    else
      run.event_xy(steps, rec);
  } else {
    for (std::size_t k = 0; k < steps; ++k) {
      run.base_step(static_cast<double>(k) * options.dt,
                    static_cast<double>(k + 1) * options.dt, k);
      run.record(rec, k + 1);
    }
  }
  rec.jump_log = std::move(st.jump_log);
  if (kind == SystemKind::limit)
    std::stable_sort(rec.jump_log.begin(), rec.jump_log.end(),
                     [](const JumpLogEntry& a, const JumpLogEntry& b) {
                       return a.time < b.time;
                     });
  return rec;
}

namespace {

struct Rule {
  const double* nodes;
  const double* weights;
  int size;
};

constexpr double kGL4Nodes[4] = {0.06943184420297371, 0.33000947820757187,
                                 0.6699905217924281, 0.9305681557970262};
constexpr double kGL4Weights[4] = {0.17392742256872692, 0.3260725774312731,
                                   0.3260725774312731, 0.17392742256872692};

/// E over marks of phi(x + Delta_i) - phi(x) with a tensor rule over the
/// `dims` marks that matter (jumper first, then the other particles).
double jump_expectation(const ModelSpec& spec, const TestFunction& phi,
                        std::span<const double> x, const EmpiricalMeasure& mu,
                        std::size_t i, const Rule& rule) {
  const std::size_t d = static_cast<std::size_t>(mu.dim());
  const std::size_t n = mu.size();
  const bool coll = !spec.collateral_is_zero() && n > 1;
  const std::size_t dims = coll ? n : 1;
  const double base = phi.value(x);
  std::vector<std::size_t> idx(dims, 0);
  std::vector<double> y(x.begin(), x.end()), psi(d), theta(d);
  const double inv_n = 1.0 / static_cast<double>(n);
  double acc = 0.0;
  for (;;) {
    std::copy(x.begin(), x.end(), y.begin());
    const double h1 = rule.nodes[idx[0]];
    double w = rule.weights[idx[0]];
    spec.main_jump(mu.point(i), mu, h1, psi);
    for (std::size_t c = 0; c < d; ++c) y[i * d + c] += psi[c];
    if (coll) {
      std::size_t slot = 1;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double h2 = rule.nodes[idx[slot]];
        w *= rule.weights[idx[slot]];
        ++slot;
        spec.collateral_jump(mu.point(i), mu.point(j), mu, h1, h2, theta);
        for (std::size_t c = 0; c < d; ++c) y[j * d + c] += theta[c] * inv_n;
      }
    }
    acc += w * (phi.value(y) - base);
    std::size_t k = 0;
    while (k < dims && ++idx[k] == static_cast<std::size_t>(rule.size)) {
      idx[k] = 0;
      ++k;
    }
    if (k == dims) break;
  }
  return acc;
}

double jump_expectation_mc(const ModelSpec& spec, const TestFunction& phi,
                           std::span<const double> x,
                           const EmpiricalMeasure& mu, std::size_t i,
                           std::size_t samples, double& se) {
  const std::size_t d = static_cast<std::size_t>(mu.dim());
  const std::size_t n = mu.size();
  const StreamState s(mix64(0x6a09e667f3bcc909ULL ^ (i + kGolden)));
  const double base = phi.value(x);
  std::vector<double> y(x.size()), psi(d), theta(d);
  const double inv_n = 1.0 / static_cast<double>(n);
  double sum = 0.0, sum2 = 0.0;
  std::uint64_t c = 0;
  for (std::size_t m = 0; m < samples; ++m) {
    std::copy(x.begin(), x.end(), y.begin());
    const double h1 = s.uniform_at(c++);
    spec.main_jump(mu.point(i), mu, h1, psi);
    for (std::size_t k = 0; k < d; ++k) y[i * d + k] += psi[k];
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      spec.collateral_jump(mu.point(i), mu.point(j), mu, h1, s.uniform_at(c++),
                           theta);
      for (std::size_t k = 0; k < d; ++k) y[j * d + k] += theta[k] * inv_n;
    }
    const double v = phi.value(y) - base;
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / static_cast<double>(samples);
  const double var = std::max(0.0, sum2 / static_cast<double>(samples) - mean * mean);
  se = std::sqrt(var / static_cast<double>(samples));
  return mean;
}

}  // namespace

GeneratorValue generator_apply(const ModelSpec& spec, const TestFunction& phi,
                               std::span<const double> x, double tol) {
  if (!phi.value || !phi.gradient)
    throw InvalidInput("generator_apply: phi needs a value and a gradient");
  const int dim = spec.dims.d;
  const EmpiricalMeasure mu = make_empirical(
      std::vector<double>(x.begin(), x.end()), dim);
  const std::size_t n = mu.size();
  const std::size_t d = static_cast<std::size_t>(dim);
  const std::size_t d1 = static_cast<std::size_t>(spec.dims.d1);
  const std::size_t nd = n * d;

  std::vector<double> grad(nd);
  phi.gradient(x, grad);
  GeneratorValue out;
  std::vector<double> f(d);
  for (std::size_t i = 0; i < n; ++i) {
    spec.drift(mu.point(i), mu, f);
    for (std::size_t c = 0; c < d; ++c) out.value += f[c] * grad[i * d + c];
  }
  if (spec.has_diffusion() && phi.hessian) {
    std::vector<double> hess(nd * nd), sig(d * d1);
    phi.hessian(x, hess);
    for (std::size_t i = 0; i < n; ++i) {
      spec.diffusion(mu.point(i), mu, sig);
      for (std::size_t p = 0; p < d; ++p)
        for (std::size_t q = 0; q < d; ++q) {
          double a = 0.0;
          for (std::size_t k = 0; k < d1; ++k) a += sig[p * d1 + k] * sig[q * d1 + k];
          out.value += 0.5 * a * hess[(i * d + p) * nd + (i * d + q)];
        }
    }
  }

  const bool coll = !spec.collateral_is_zero() && n > 1;
  const bool tensor = !coll || n <= 6;
  const Rule fine{UnitQuadrature::nodes(), UnitQuadrature::weights(),
                  UnitQuadrature::kNodes};
  const Rule coarse{kGL4Nodes, kGL4Weights, 4};
  double err = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lam = spec.rate(mu.point(i), mu);
    if (lam == 0.0) continue;
    if (tensor) {
      const double jf = jump_expectation(spec, phi, x, mu, i, fine);
      const double jc = jump_expectation(spec, phi, x, mu, i, coarse);
      out.value += lam * jf;
      err += lam * std::abs(jf - jc);
    } else {
      double se = 0.0;
      out.value += lam * jump_expectation_mc(spec, phi, x, mu, i, 1u << 14, se);
      err += 3.0 * lam * se;
    }
  }
  out.error_estimate = err;
  out.converged = err <= tol * (1.0 + std::abs(out.value));
  return out;
}

}  // namespace mfjump
