// Copyright 2026 The mfjump Authors
// SPDX-License-Identifier: Apache-2.0
#include "mfjump/metrics.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>
#include <numeric>

#include "mfjump/drivers.hpp"
#include "mfjump/errors.hpp"

namespace mfjump {

namespace {

constexpr double kReducedCostTolerance = 1e-12;

double euclid(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t c = 0; c < x.size(); ++c) {
    const double d = x[c] - y[c];
    s += d * d;
  }
  return std::sqrt(s);
}

void check_equal_sizes(std::size_t na, std::size_t nb, const char* who) {
  if (na == 0 || nb == 0)
    throw InvalidInput(std::string(who) + ": empty sample");
  if (na != nb)
    throw InvalidInput(std::string(who) +
                       ": samples must have equal sizes (unequal-size W1 is "
                       "not supported)");
}

double t_quantile_975(std::size_t dof) {
  boost::math::students_t dist(static_cast<double>(dof));
  return boost::math::quantile(dist, 0.975);
}

}  // namespace

double w1_1d(std::span<const double> a, std::span<const double> b) {
  check_equal_sizes(a.size(), b.size(), "w1_1d");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  double acc = 0.0;
  for (std::size_t i = 0; i < sa.size(); ++i) acc += std::abs(sa[i] - sb[i]);
  return acc / static_cast<double>(sa.size());
}

Assignment solve_assignment(std::span<const double> cost, std::size_t n) {
  if (cost.size() != n * n)
    throw InvalidInput("solve_assignment: cost matrix must be n x n");
  Assignment result;
  if (n == 0) return result;
  const double inf = std::numeric_limits<double>::infinity();
  // 1-based rows/columns; column 0 is the virtual root of each augmentation.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (j1 == 0 || minv[j] < delta - kReducedCostTolerance) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  result.row_to_col.assign(n, 0);
  for (std::size_t j = 1; j <= n; ++j) result.row_to_col[match[j] - 1] = j - 1;
  for (std::size_t i = 0; i < n; ++i)
    result.cost += cost[i * n + result.row_to_col[i]];
  return result;
}

double w1_assignment(std::span<const double> a, std::span<const double> b,
                     int dim, std::size_t cap) {
  if (dim < 1) throw InvalidInput("w1_assignment: dim must be >= 1");
  const std::size_t d = static_cast<std::size_t>(dim);
  if (a.size() % d != 0 || b.size() % d != 0)
    throw InvalidInput("w1_assignment: coordinate count not a multiple of d");
  const std::size_t n = a.size() / d;
  check_equal_sizes(n, b.size() / d, "w1_assignment");
  if (n > cap)
    throw InvalidInput("w1_assignment: n exceeds the assignment cap; use "
                       "w1_subsampled");
  std::vector<double> cost(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      cost[i * n + j] = euclid(a.subspan(i * d, d), b.subspan(j * d, d));
  return solve_assignment(cost, n).cost / static_cast<double>(n);
}

SubsampledW1 w1_subsampled(std::span<const double> a,
                           std::span<const double> b, int dim,
                           std::size_t cap, std::uint64_t seed) {
  if (dim < 1 || cap < 1)
    throw InvalidInput("w1_subsampled: dim and cap must be >= 1");
  const std::size_t d = static_cast<std::size_t>(dim);
  const std::size_t n = a.size() / d;
  check_equal_sizes(n, b.size() / d, "w1_subsampled");
  SubsampledW1 out;
  if (n <= cap) {
    out.value = w1_assignment(a, b, dim, cap);
    out.blocks = 1;
    out.block_size = n;
    return out;
  }
  auto shuffled = [&](std::uint64_t salt) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    const StreamState s(mix64(seed ^ salt));
    for (std::size_t i = n - 1; i > 0; --i) {
      const std::size_t j = static_cast<std::size_t>(s.at(i) % (i + 1));
      std::swap(perm[i], perm[j]);
    }
    return perm;
  };
  // One permutation for both samples: the block matchings then combine into
  // a matching of the full samples, so the estimate never undershoots.
  const auto perm = shuffled(0x5851f42d4c957f2dULL);
  out.blocks = (n + cap - 1) / cap;
  out.block_size = (n + out.blocks - 1) / out.blocks;
  std::vector<double> values, weights;
  for (std::size_t blk = 0; blk < out.blocks; ++blk) {
    const std::size_t lo = blk * n / out.blocks, hi = (blk + 1) * n / out.blocks;
    std::vector<double> xa, xb;
    xa.reserve((hi - lo) * d);
    xb.reserve((hi - lo) * d);
    for (std::size_t k = lo; k < hi; ++k) {
      const auto off = static_cast<std::ptrdiff_t>(perm[k] * d);
      xa.insert(xa.end(), a.begin() + off, a.begin() + off + static_cast<std::ptrdiff_t>(d));
      xb.insert(xb.end(), b.begin() + off, b.begin() + off + static_cast<std::ptrdiff_t>(d));
    }
    values.push_back(w1_assignment(xa, xb, dim, cap));
    weights.push_back(static_cast<double>(hi - lo) / static_cast<double>(n));
  }
  double m = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) m += weights[k] * values[k];
  out.value = m;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - m) * (v - m);
    out.standard_error =
        std::sqrt(ss / (values.size() - 1) / static_cast<double>(values.size()));
  }
  return out;
}

double w1_empirical(std::span<const double> a, std::span<const double> b,
                    int dim, std::size_t cap, std::uint64_t seed) {
  if (dim == 1) return w1_1d(a, b);
  const std::size_t n = a.size() / static_cast<std::size_t>(dim);
  if (n <= cap) return w1_assignment(a, b, dim, cap);
  return w1_subsampled(a, b, dim, cap, seed).value;
}

double path_sup_distance(const PathRecord& p, const PathRecord& q) {
  if (p.dim != q.dim) throw InvalidInput("path_sup_distance: dimension mismatch");
  const double hp = p.horizon();
  const double hq = q.horizon();
  if (std::abs(hp - hq) > 1e-12 * std::max({1.0, std::abs(hp), std::abs(hq)}))
    throw InvalidInput("path_sup_distance: horizons differ");
  const auto kp = p.knots();
  const auto kq = q.knots();
  if (kp.empty() || kq.empty()) return 0.0;
  std::size_t ip = 0, iq = 0;
  double best = 0.0;
  while (ip < kp.size() || iq < kq.size()) {
    double t = std::numeric_limits<double>::infinity();
    if (ip < kp.size()) t = std::min(t, kp[ip].time);
    if (iq < kq.size()) t = std::min(t, kq[iq].time);
    // Left limits at t: a path that jumps at t contributes its pre-jump
    // value, the other its value before t.
    auto left_at = [t](const std::vector<PathRecord::Knot>& k, std::size_t i)
        -> std::span<const double> {
      for (std::size_t j = i; j < k.size() && k[j].time == t; ++j)
        if (!k[j].left.empty()) return k[j].left;
      return k[i == 0 ? 0 : i - 1].value;
    };
    const bool jp = ip < kp.size() && kp[ip].time == t;
    const bool jq = iq < kq.size() && kq[iq].time == t;
    if (jp || jq) best = std::max(best, euclid(left_at(kp, ip), left_at(kq, iq)));
    while (ip < kp.size() && kp[ip].time <= t) ++ip;
    while (iq < kq.size() && kq[iq].time <= t) ++iq;
    const auto& vp = kp[ip == 0 ? 0 : ip - 1].value;
    const auto& vq = kq[iq == 0 ? 0 : iq - 1].value;
    best = std::max(best, euclid(vp, vq));
  }
  return best;
}

RateFit fit_rate(std::span<const double> ns, std::span<const double> errors,
                 std::span<const double> std_errors) {
  const std::size_t n = ns.size();
  if (errors.size() != n)
    throw InvalidInput("fit_rate: N and error lists differ in length");
  if (!std_errors.empty() && std_errors.size() != n)
    throw InvalidInput("fit_rate: standard error list has the wrong length");
  {
    std::vector<double> distinct(ns.begin(), ns.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()),
                   distinct.end());
    if (distinct.size() < 3)
      throw InvalidInput("fit_rate: need at least 3 distinct N values");
  }
  bool weighted = !std_errors.empty();
  for (std::size_t i = 0; i < n; ++i) {
    if (!(errors[i] > 0.0) || !std::isfinite(errors[i]))
      throw InvalidInput("fit_rate: errors must be positive and finite");
    if (!(ns[i] > 0.0)) throw InvalidInput("fit_rate: N must be positive");
    if (weighted && !(std_errors[i] > 0.0)) weighted = false;
  }
  std::vector<double> x(n), y(n), w(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = std::log(ns[i]);
    y[i] = std::log(errors[i]);
    if (weighted) {
      const double rel = std_errors[i] / errors[i];
      w[i] = 1.0 / (rel * rel);
    }
  }
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  const double xbar = sx / sw;
  const double ybar = sy / sw;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += w[i] * (x[i] - xbar) * (x[i] - xbar);
    sxy += w[i] * (x[i] - xbar) * (y[i] - ybar);
    syy += w[i] * (y[i] - ybar) * (y[i] - ybar);
  }
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = ybar - fit.slope * xbar;
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    ssr += w[i] * r * r;
  }
  fit.r2 = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
  // Normalize the weights so the residual variance is on the scale of log y.
  const double s2 = ssr / static_cast<double>(n - 2);
  fit.slope_se = std::sqrt(s2 / sxx);
  const double tq = t_quantile_975(n - 2);
  fit.slope_ci_lo = fit.slope - tq * fit.slope_se;
  fit.slope_ci_hi = fit.slope + tq * fit.slope_se;
  return fit;
}

TrendFit linear_trend(std::span<const double> times,
                      std::span<const double> values, double t_from) {
  if (times.size() != values.size())
    throw InvalidInput("linear_trend: length mismatch");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] >= t_from) {
      x.push_back(times[i]);
      y.push_back(values[i]);
    }
  }
  TrendFit fit;
  fit.points = x.size();
  if (x.size() < 3) throw InvalidInput("linear_trend: need at least 3 points");
  const double n = static_cast<double>(x.size());
  const double xbar = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double ybar = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - xbar) * (x[i] - xbar);
    sxy += (x[i] - xbar) * (y[i] - ybar);
  }
  fit.mean = ybar;
  fit.slope = sxy / sxx;
  fit.intercept = ybar - fit.slope * xbar;
  double ssr = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    ssr += r * r;
  }
  fit.slope_se = std::sqrt(ssr / (n - 2.0) / sxx);
  const double tq = t_quantile_975(x.size() - 2);
  fit.ci_lo = fit.slope - tq * fit.slope_se;
  fit.ci_hi = fit.slope + tq * fit.slope_se;
  return fit;
}

MomentSeries moment_diagnostics(std::span<const PathRecordSet> replicas,
                                const ModelSpec& spec, int p) {
  if (p < 1 || p > 4)
    throw InvalidInput("moment_diagnostics: p must be in {1, 2, 3, 4}");
  if (replicas.empty())
    throw InvalidInput("moment_diagnostics: no replicas given");
  MomentSeries out;
  out.power = p;
  out.times = replicas.front().grid_times;
  out.values.assign(out.times.size(), 0.0);
  for (const auto& rec : replicas) {
    if (rec.grid_times.size() != out.times.size())
      throw InvalidInput("moment_diagnostics: replicas on different grids");
    for (std::size_t k = 0; k < out.times.size(); ++k) {
      auto snap = rec.snapshot(k);
      const EmpiricalMeasure mu(std::vector<double>(snap.begin(), snap.end()),
                                rec.dim);
      double acc = 0.0;
      for (std::size_t i = 0; i < mu.size(); ++i)
        acc += std::pow(spec.rate(mu.point(i), mu), p);
      out.values[k] += acc / static_cast<double>(mu.size());
    }
  }
  for (auto& v : out.values) v /= static_cast<double>(replicas.size());
  out.trend = linear_trend(out.times, out.values, 0.5 * out.times.back());
  return out;
}

WilsonInterval wilson_interval(std::size_t hits, std::size_t trials,
                               double z) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double ph = static_cast<double>(hits) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (ph + z2 / (2.0 * n)) / denom;
  const double half =
      z * std::sqrt(ph * (1.0 - ph) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

std::vector<TailRow> jump_count_stats(std::span<const std::size_t> jump_counts,
                                      std::size_t n,
                                      std::span<const double> thresholds) {
  if (n == 0) throw InvalidInput("jump_count_stats: N must be >= 1");
  std::vector<TailRow> rows;
  for (double h : thresholds) {
    if (!(h > 0.0))
      throw InvalidInput("jump_count_stats: thresholds must be positive");
    TailRow row;
    row.threshold = h;
    row.trials = jump_counts.size();
    for (std::size_t c : jump_counts)
      if (static_cast<double>(c) / static_cast<double>(n) >= h) ++row.hits;
    row.p_hat = row.trials ? static_cast<double>(row.hits) / row.trials : 0.0;
    row.ci = wilson_interval(row.hits, row.trials);
    rows.push_back(row);
  }
  return rows;
}

std::vector<TailRow> jump_count_stats(
    std::span<const std::vector<JumpLogEntry>> jump_logs, std::size_t n,
    double horizon, std::span<const double> thresholds) {
  std::vector<std::size_t> counts;
  counts.reserve(jump_logs.size());
  for (const auto& log : jump_logs) {
    counts.push_back(static_cast<std::size_t>(
        std::count_if(log.begin(), log.end(), [horizon](const JumpLogEntry& e) {
          return e.time <= horizon;
        })));
  }
  return jump_count_stats(counts, n, thresholds);
}

}  // namespace mfjump
