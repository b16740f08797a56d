// Copyright 2026 The mfjump Authors
// SPDX-License-Identifier: Apache-2.0
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mfjump/errors.hpp"
#include "mfjump/harness.hpp"

namespace {

namespace h = mfjump::harness;

constexpr int kOk = 0;
constexpr int kRuntimeError = 1;
constexpr int kValidationFail = 2;
constexpr int kUsage = 64;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::size_t workers = 1;
  std::string out;
  bool force = false;
};

void add_common(CLI::App* app, Common& c, bool needs_config = true) {
  auto* opt = app->add_option("--config", c.config, "JSON config file (or a report.json)");
  if (needs_config) opt->required();
  app->add_option("--seed", c.seed, "Override the master seed");
  app->add_option("--workers", c.workers, "Worker threads")->check(CLI::PositiveNumber);
  app->add_option("--out", c.out, "Output directory (overrides the config)");
  app->add_flag("--force", c.force, "Run even if the model fails its assumption checks");
}

h::SimConfig config_from(const Common& c) {
  auto cfg = h::load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (!c.out.empty()) cfg.output_dir = c.out;
  return cfg;
}

h::RunOptions options_from(const Common& c) {
  h::RunOptions o;
  o.workers = c.workers;
  o.force = c.force;
  return o;
}

void print_warnings(const std::vector<std::string>& w) {
  for (const auto& s : w) std::cerr << "warning: " << s << "\n";
}

int cmd_simulate(const Common& c) {
  const auto cfg = config_from(c);
  const auto res = h::run_simulate(cfg, options_from(c));
  print_warnings(res.warnings);
  std::cout << "system " << cfg.system << ", N = " << res.paths.n << ", T = " << cfg.horizon
            << ", accepted jumps = " << res.paths.jump_log.size() << "\n";
  if (!cfg.output_dir.empty()) std::cout << "wrote " << cfg.output_dir << "\n";
  return kOk;
}

void print_fit(const char* name, const h::FitBlock& b) {
  if (!b.valid) {
    std::cout << "  " << name << ": no fit (" << b.note << ")\n";
    return;
  }
  std::printf("  %s: slope %.4f  95%% CI [%.4f, %.4f]  R2 %.4f\n", name, b.fit.slope,
              b.fit.slope_ci_lo, b.fit.slope_ci_hi, b.fit.r2);
}

int cmd_chaos(const Common& c) {
  const auto cfg = config_from(c);
  const auto rep = h::run_chaos_sweep(cfg, options_from(c));
  print_warnings(rep.warnings);
  std::printf("%8s %14s %14s %14s\n", "N", "X-Y", "Y-limit", "X-limit");
  for (const auto& r : rep.rows)
    std::printf("%8zu %14.6g %14.6g %14.6g\n", r.n, r.xy.mean, r.yl.mean, r.xl.mean);
  print_fit("X-Y", rep.fit_xy);
  print_fit("Y-limit", rep.fit_yl);
  print_fit("X-limit", rep.fit_xl);
  for (const auto& f : rep.failures) std::cerr << "failed: " << f << "\n";
  return rep.partial ? kRuntimeError : kOk;
}

int cmd_diagnostics(const Common& c) {
  const auto cfg = config_from(c);
  const auto rep = h::run_diagnostics(cfg, options_from(c));
  print_warnings(rep.warnings);
  for (const auto& m : rep.moments)
    std::printf("N %zu  <mu, lambda^%d>: mean %.6g  trend %.4g [%.4g, %.4g]  %s\n", m.n,
                m.series.power, m.series.trend.mean, m.series.trend.slope,
                m.series.trend.ci_lo, m.series.trend.ci_hi, m.verdict.c_str());
  for (const auto& j : rep.jumps) {
    std::printf("N %zu  C_N(T)/N: %.6g +- %.3g", j.n, j.per_particle.mean, j.per_particle.se);
    for (const auto& t : j.tail)
      std::printf("  P(>= %.4g) = %.4g [%.4g, %.4g]", t.threshold, t.p_hat, t.ci.lo, t.ci.hi);
    std::printf("\n");
  }
  if (!rep.moment_verdict.empty() && cfg.diagnostics.moments)
    std::cout << "moments: " << rep.moment_verdict << "\n";
  if (!rep.tail_verdict.empty()) std::cout << "jump tails: " << rep.tail_verdict << "\n";
  for (const auto& f : rep.failures) std::cerr << "failed: " << f << "\n";
  return rep.partial ? kRuntimeError : kOk;
}

int cmd_validate(const std::string& model, const std::vector<std::string>& params,
                 const std::string& config, const mfjump::ProbeConfig& probe) {
  std::string id = model;
  mfjump::ModelParams p;
  if (!config.empty()) {
    const auto cfg = h::load_config(config);
    if (id.empty()) id = cfg.model_id;
    p = cfg.params;
  }
  if (id.empty()) throw mfjump::InvalidInput("validate: give --model or --config");
  for (const auto& kv : params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw mfjump::InvalidInput("validate: --param expects key=value, got '" + kv + "'");
    try {
      p[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
    } catch (const std::exception&) {
      throw mfjump::InvalidInput("validate: bad number in '" + kv + "'");
    }
  }
  const auto rep = h::run_validate(id, p, probe);
  std::cout << mfjump::format_report(rep);
  return h::exit_code(rep.overall());
}

int cmd_wasserstein(const std::string& a, const std::string& b, std::size_t cap,
                    std::uint64_t seed) {
  int da = 0, db = 0;
  const auto xa = h::read_samples(a, da);
  const auto xb = h::read_samples(b, db);
  if (da != db) throw mfjump::InvalidInput("wasserstein: sample dimensions differ");
  std::cout << h::fmt(mfjump::w1_empirical(xa, xb, da, cap, seed)) << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mfjump: mean-field jump particle systems and their limits"};
  app.require_subcommand(1);
  app.set_version_flag("--version", mfjump::harness::kToolVersion);

  Common sim_c, chaos_c, diag_c;
  auto* sim = app.add_subcommand("simulate", "Simulate one particle system and write its paths");
  add_common(sim, sim_c);
  auto* chaos = app.add_subcommand("chaos-sweep", "Coupled X / Y / limit distances over N");
  add_common(chaos, chaos_c);
  auto* diag = app.add_subcommand("diagnostics", "Moment and jump-count diagnostics");
  add_common(diag, diag_c);

  auto* val = app.add_subcommand("validate", "Probe a zoo model's assumptions");
  std::string model, val_config;
  std::vector<std::string> params;
  mfjump::ProbeConfig probe;
  val->add_option("--model", model, "Model id");
  val->add_option("--param", params, "Parameter override key=value (repeatable)");
  val->add_option("--config", val_config, "Take model id and params from a config");
  val->add_option("--seed", probe.seed, "Probe seed");
  val->add_option("--budget", probe.budget, "Number of probes");

  auto* w1 = app.add_subcommand("wasserstein", "W1 between two sample files");
  std::string fa, fb;
  std::size_t cap = mfjump::kDefaultAssignmentCap;
  std::uint64_t w1_seed = 0;
  w1->add_option("a", fa, "First samples file")->required();
  w1->add_option("b", fb, "Second samples file")->required();
  w1->add_option("--cap", cap, "Largest exact assignment size");
  w1->add_option("--seed", w1_seed, "Subsampling seed above the cap");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (sim->parsed()) return cmd_simulate(sim_c);
    if (chaos->parsed()) return cmd_chaos(chaos_c);
    if (diag->parsed()) return cmd_diagnostics(diag_c);
    if (val->parsed()) return cmd_validate(model, params, val_config, probe);
    if (w1->parsed()) return cmd_wasserstein(fa, fb, cap, w1_seed);
  } catch (const mfjump::ModelRejected& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidationFail;
  } catch (const mfjump::InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kUsage;
}
