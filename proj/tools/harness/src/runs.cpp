// Copyright 2026 The mfjump Authors
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <thread>

#include "mfjump/errors.hpp"
#include "mfjump/harness.hpp"

namespace mfjump::harness {

std::vector<CellOutcome> run_cells(std::size_t count, std::size_t workers,
                                   const std::function<void(std::size_t)>& fn) {
  std::vector<CellOutcome> out(count);
  std::atomic<bool> failed{false};
  auto work = [&](std::size_t w, std::size_t stride) {
    for (std::size_t c = w; c < count; c += stride) {
      if (failed.load()) {
        out[c].skipped = true;
        out[c].error = "skipped after an earlier failure";
        continue;
      }
      try {
        fn(c);
        out[c].ok = true;
      } catch (const std::exception& e) {
        out[c].error = e.what();
        failed.store(true);
      }
    }
  };
  workers = std::max<std::size_t>(1, std::min(workers, std::max<std::size_t>(count, 1)));
  if (workers == 1) {
    work(0, 1);
    return out;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
  for (auto& t : pool) t.join();
  return out;
}

Summary summarize(std::span<const double> v) {
  Summary s;
  s.count = v.size();
  if (v.empty()) return s;
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  }
  return s;
}

namespace {

/// Retries an event-driven run with a wider bound slack when the rate
/// envelope was exceeded.
template <class F>
auto with_bound_retries(const SimConfig& c, LimitConfig lc, F&& run) {
  for (int attempt = 0;; ++attempt) {
    try {
      return run(lc);
    } catch (const RateBoundViolation&) {
      if (!lc.sim.event_driven || attempt >= c.bound_retries) throw;
      lc.sim.bound_slack = std::max(2.0 * lc.sim.bound_slack, 0.05);
    }
  }
}

void prepare(const SimConfig& c, const ModelSpec& spec, const RunOptions& o,
             std::vector<std::string>& warnings, std::string* verdict) {
  for (const auto& w : spec.warnings) warnings.push_back(w);
  const auto report = validate_model(spec);
  const auto v = report.overall();
  if (verdict) *verdict = to_string(v);
  if (v == Verdict::fail) {
    if (!o.force)
      throw ModelRejected("model '" + c.model_id +
                          "' fails its assumption checks (run 'validate' for "
                          "details, or pass --force)");
    warnings.push_back("model fails its assumption checks; continuing because of --force");
  } else if (v == Verdict::indeterminate) {
    warnings.push_back("some assumption checks are indeterminate");
  }
  if (c.n_list.front() == 1)
    warnings.push_back("N = 1: mean-field quantities are degenerate");
}

std::vector<std::uint64_t> iota_ids(std::size_t n) {
  std::vector<std::uint64_t> ids(n);
  std::iota(ids.begin(), ids.end(), std::uint64_t{0});
  return ids;
}

FitBlock fit_series(const std::vector<ChaosRow>& rows,
                    Summary ChaosRow::*field) {
  std::vector<double> ns, e, se;
  for (const auto& r : rows) {
    const Summary& s = r.*field;
    if (s.count >= 2 && s.mean > 0.0) {
      ns.push_back(static_cast<double>(r.n));
      e.push_back(s.mean);
      se.push_back(s.se);
    }
  }
  FitBlock b;
  if (ns.size() < 3) {
    b.note = "fewer than 3 N values with >= 2 replicas and positive distance";
    return b;
  }
  b.fit = fit_rate(ns, e, se);
  b.valid = true;
  return b;
}

}  // namespace

ChaosReport run_chaos_sweep(const SimConfig& config, const RunOptions& options) {
  check_config(config);
  ChaosReport rep;
  rep.config = config;
  rep.timestamp = options.timestamp.empty() ? utc_timestamp() : options.timestamp;
  const ModelSpec spec = build_spec(config);
  prepare(config, spec, options, rep.warnings, &rep.validation);
  const LimitConfig lc0 = limit_config(config, spec);

  FlowApproximation flow;
  if (!config.flow_file.empty() && std::filesystem::exists(config.flow_file)) {
    std::ifstream in(config.flow_file);
    flow = read_flow(in, spec);
    rep.limit.source = config.flow_file;
  } else {
    flow = with_bound_retries(config, lc0, [&](const LimitConfig& lc) {
      return solve_limit(spec, ensemble_size(config), lc, config.picard.tol,
                         config.picard.max_iter, config.seed);
    });
    rep.limit.source = "solved";
  }
  rep.limit.deltas = flow.deltas;
  rep.limit.truncations = flow.truncations;
  rep.limit.converged = flow.converged;
  rep.limit.noise_floor = flow.noise_floor;
  rep.limit.ensemble_size = flow.ensemble_size();
  if (!flow.converged) rep.warnings.push_back("Picard iteration did not reach its tolerance");

  const std::size_t nn = config.n_list.size();
  rep.cells.resize(nn * config.replicas);
  for (std::size_t a = 0; a < nn; ++a)
    for (std::size_t r = 0; r < config.replicas; ++r) {
      auto& cell = rep.cells[a * config.replicas + r];
      cell.n = config.n_list[a];
      cell.replica = r;
    }
  const auto outcomes = run_cells(rep.cells.size(), options.workers, [&](std::size_t c) {
    auto& cell = rep.cells[c];
    const DriverBundle drivers(config.seed, cell.replica);
    const auto s = with_bound_retries(config, lc0, [&](const LimitConfig& lc) {
      return coupled_chaos_run(spec, cell.n, flow, lc, drivers);
    });
    const double inv = 1.0 / static_cast<double>(cell.n);
    cell.xy = std::accumulate(s.xy.begin(), s.xy.end(), 0.0) * inv;
    cell.yl = std::accumulate(s.yl.begin(), s.yl.end(), 0.0) * inv;
    cell.xl = std::accumulate(s.xl.begin(), s.xl.end(), 0.0) * inv;
    cell.xy_max = *std::max_element(s.xy.begin(), s.xy.end());
    cell.x_jumps = s.x_jumps;
  });
  for (std::size_t c = 0; c < rep.cells.size(); ++c) {
    rep.cells[c].outcome = outcomes[c];
    if (!outcomes[c].ok && !outcomes[c].skipped)
      rep.failures.push_back("N=" + std::to_string(rep.cells[c].n) + " replica=" +
                             std::to_string(rep.cells[c].replica) + ": " +
                             outcomes[c].error);
    if (!outcomes[c].ok) rep.partial = true;
  }

  for (std::size_t a = 0; a < nn; ++a) {
    std::vector<double> xy, yl, xl;
    for (std::size_t r = 0; r < config.replicas; ++r) {
      const auto& cell = rep.cells[a * config.replicas + r];
      if (!cell.outcome.ok) continue;
      xy.push_back(cell.xy);
      yl.push_back(cell.yl);
      xl.push_back(cell.xl);
    }
    rep.rows.push_back({config.n_list[a], summarize(xy), summarize(yl), summarize(xl)});
  }
  rep.fit_xy = fit_series(rep.rows, &ChaosRow::xy);
  rep.fit_yl = fit_series(rep.rows, &ChaosRow::yl);
  rep.fit_xl = fit_series(rep.rows, &ChaosRow::xl);

  if (!config.output_dir.empty()) {
    write_chaos_outputs(rep, config.output_dir);
    if (config.save_flow) {
      std::ofstream out(std::filesystem::path(config.output_dir) / "limit.mfjflow");
      write_flow(out, flow);
    }
  }
  return rep;
}

bool tails_non_increasing(const std::vector<JumpRow>& rows, std::size_t column) {
  for (std::size_t k = 1; k < rows.size(); ++k) {
    if (column >= rows[k].tail.size() || column >= rows[k - 1].tail.size()) continue;
    const auto& prev = rows[k - 1].tail[column];
    const auto& cur = rows[k].tail[column];
    const bool decreasing = cur.p_hat <= prev.p_hat;
    const bool overlap = cur.ci.lo <= prev.ci.hi && prev.ci.lo <= cur.ci.hi;
    if (!decreasing && !overlap) return false;
  }
  return true;
}

DiagnosticsReport run_diagnostics(const SimConfig& config, const RunOptions& options) {
  check_config(config);
  DiagnosticsReport rep;
  rep.config = config;
  rep.timestamp = options.timestamp.empty() ? utc_timestamp() : options.timestamp;
  const ModelSpec spec = build_spec(config);
  prepare(config, spec, options, rep.warnings, nullptr);
  const LimitConfig lc0 = limit_config(config, spec);
  const auto& powers = config.diagnostics.powers;

  struct Cell {
    std::size_t n = 0, replica = 0, jumps = 0;
    std::vector<double> times;
    std::vector<std::vector<double>> series;  // per power
  };
  const std::size_t nn = config.n_list.size();
  std::vector<Cell> cells(nn * config.replicas);
  for (std::size_t a = 0; a < nn; ++a)
    for (std::size_t r = 0; r < config.replicas; ++r)
      cells[a * config.replicas + r] = {config.n_list[a], r, 0, {}, {}};

  const auto outcomes = run_cells(cells.size(), options.workers, [&](std::size_t c) {
    auto& cell = cells[c];
    const DriverBundle drivers(config.seed, cell.replica);
    const auto ids = iota_ids(cell.n);
    const auto x0 = sample_initial(drivers, spec.dims.d, config.init_low,
                                   config.init_high, ids);
    const auto rec = with_bound_retries(config, lc0, [&](const LimitConfig& lc) {
      return simulate(SystemKind::X, spec, x0, lc.sim, drivers, ids);
    });
    cell.jumps = rec.jump_log.size();
    if (config.diagnostics.moments) {
      std::span<const PathRecordSet> one(&rec, 1);
      for (int p : powers) {
        auto m = moment_diagnostics(one, spec, p);
        cell.times = m.times;
        cell.series.push_back(std::move(m.values));
      }
    }
  });
  for (std::size_t c = 0; c < cells.size(); ++c)
    if (!outcomes[c].ok) {
      rep.partial = true;
      if (!outcomes[c].skipped)
        rep.failures.push_back("N=" + std::to_string(cells[c].n) + " replica=" +
                               std::to_string(cells[c].replica) + ": " +
                               outcomes[c].error);
    }

  rep.moment_verdict = "bounded";
  for (std::size_t a = 0; a < nn && config.diagnostics.moments; ++a) {
    for (std::size_t q = 0; q < powers.size(); ++q) {
      MomentRow row;
      row.n = config.n_list[a];
      row.series.power = powers[q];
      std::size_t used = 0;
      for (std::size_t r = 0; r < config.replicas; ++r) {
        const auto& cell = cells[a * config.replicas + r];
        if (!outcomes[a * config.replicas + r].ok) continue;
        if (row.series.values.empty()) {
          row.series.times = cell.times;
          row.series.values.assign(cell.times.size(), 0.0);
        }
        for (std::size_t k = 0; k < cell.times.size(); ++k)
          row.series.values[k] += cell.series[q][k];
        ++used;
      }
      if (used == 0) continue;
      for (auto& v : row.series.values) v /= static_cast<double>(used);
      row.series.trend =
          linear_trend(row.series.times, row.series.values, 0.5 * config.horizon);
      row.verdict = row.series.trend.ci_hi <= 0.05 * row.series.trend.mean ? "bounded"
                                                                           : "growing";
      if (row.verdict != "bounded") rep.moment_verdict = "growing";
      rep.moments.push_back(std::move(row));
    }
  }

  if (config.diagnostics.jump_counts) {
    std::vector<std::vector<std::size_t>> counts(nn);
    for (std::size_t a = 0; a < nn; ++a)
      for (std::size_t r = 0; r < config.replicas; ++r)
        if (outcomes[a * config.replicas + r].ok)
          counts[a].push_back(cells[a * config.replicas + r].jumps);
    rep.thresholds = config.diagnostics.thresholds;
    if (rep.thresholds.empty()) {
      std::vector<double> per;
      for (auto c : counts.back())
        per.push_back(static_cast<double>(c) / static_cast<double>(config.n_list.back()));
      const double m = summarize(per).mean;
      rep.thresholds.push_back(m > 0.0 ? 2.0 * m : std::numeric_limits<double>::infinity());
    }
    for (std::size_t a = 0; a < nn; ++a) {
      JumpRow row;
      row.n = config.n_list[a];
      std::vector<double> per;
      for (auto c : counts[a])
        per.push_back(static_cast<double>(c) / static_cast<double>(row.n));
      row.per_particle = summarize(per);
      if (!counts[a].empty()) row.tail = jump_count_stats(counts[a], row.n, rep.thresholds);
      rep.jumps.push_back(std::move(row));
    }
    rep.tail_verdict = "non-increasing";
    for (std::size_t h = 0; h < rep.thresholds.size(); ++h)
      if (!tails_non_increasing(rep.jumps, h)) rep.tail_verdict = "increasing";
  }
  if (!config.output_dir.empty()) write_diagnostics_outputs(rep, config.output_dir);
  return rep;
}

AssumptionReport run_validate(const std::string& model_id, const ModelParams& params,
                              const ProbeConfig& probe) {
  return validate_model(build_model(model_id, params), probe);
}

int exit_code(Verdict v) {
  switch (v) {
    case Verdict::pass:
      return 0;
    case Verdict::fail:
      return 2;
    case Verdict::indeterminate:
      return 3;
  }
  return 3;
}

SimulateResult run_simulate(const SimConfig& config, const RunOptions& options) {
  check_config(config);
  SimulateResult res;
  const ModelSpec spec = build_spec(config);
  prepare(config, spec, options, res.warnings, nullptr);
  const LimitConfig lc0 = limit_config(config, spec);
  const std::size_t n = config.n_list.front();
  const DriverBundle drivers(config.seed, 0);
  const auto ids = iota_ids(n);
  const auto x0 = sample_initial(drivers, spec.dims.d, config.init_low, config.init_high, ids);
  if (config.system == "limit") {
    const auto flow = with_bound_retries(config, lc0, [&](const LimitConfig& lc) {
      return solve_limit(spec, ensemble_size(config), lc, config.picard.tol,
                         config.picard.max_iter, config.seed);
    });
    res.paths = with_bound_retries(config, lc0, [&](const LimitConfig& lc) {
      return simulate(SystemKind::limit, spec, x0, lc.sim, drivers, ids, &flow);
    });
  } else {
    const auto kind = config.system == "X" ? SystemKind::X : SystemKind::Y;
    res.paths = with_bound_retries(config, lc0, [&](const LimitConfig& lc) {
      return simulate(kind, spec, x0, lc.sim, drivers, ids);
    });
  }
  if (!config.output_dir.empty()) {
    namespace fs = std::filesystem;
    const fs::path dir(config.output_dir);
    fs::create_directories(dir);
    const auto& p = res.paths;
    const std::size_t d = static_cast<std::size_t>(p.dim);
    {
      std::ofstream out(dir / "paths.csv");
      out << "# mfjump paths v1 dim=" << d << " n=" << p.n << "\nt,particle";
      for (std::size_t c = 0; c < d; ++c) out << ",x" << (c + 1);
      out << "\n";
      for (std::size_t k = 0; k < p.grid_times.size(); ++k)
        for (std::size_t i = 0; i < p.n; ++i) {
          out << fmt(p.grid_times[k]) << ',' << i;
          for (double v : p.value(k, i)) out << ',' << fmt(v);
          out << "\n";
        }
    }
    {
      std::ofstream out(dir / "jumps.csv");
      out << "# mfjump jumps v1\nt,jumper,amplitude\n";
      for (const auto& j : p.jump_log)
        out << fmt(j.time) << ',' << j.jumper << ',' << fmt(j.amplitude) << "\n";
    }
    write_samples((dir / "samples.txt").string(), p.snapshot(p.grid_times.size() - 1),
                  p.dim);
    nlohmann::json rep;
    rep["format"] = "mfjump-simulate-report";
    rep["format_version"] = 1;
    rep["manifest"] = {{"tool", "mfjump"},
                       {"version", kToolVersion},
                       {"config", to_json(config)},
                       {"seed", config.seed},
                       {"timestamp", options.timestamp.empty() ? utc_timestamp()
                                                               : options.timestamp}};
    rep["system"] = config.system;
    rep["n"] = p.n;
    rep["accepted_jumps"] = p.jump_log.size();
    rep["warnings"] = res.warnings;
    std::ofstream out(dir / "report.json");
    out << rep.dump(2) << "\n";
    std::ofstream echo(dir / "config.echo");
    echo << "# mfjump config v1\n" << to_json(config).dump(2) << "\n";
  }
  return res;
}

}  // namespace mfjump::harness
