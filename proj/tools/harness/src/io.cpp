// Copyright 2026 The mfjump Authors
// SPDX-License-Identifier: Apache-2.0
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mfjump/errors.hpp"
#include "mfjump/harness.hpp"

namespace mfjump::harness {

using nlohmann::json;
namespace fs = std::filesystem;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace {

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json summary_json(const Summary& s) {
  return {{"mean", num(s.mean)}, {"se", num(s.se)}, {"replicas", s.count}};
}

json fit_json(const FitBlock& b) {
  if (!b.valid) return {{"valid", false}, {"note", b.note}};
  return {{"valid", true},
          {"slope", num(b.fit.slope)},
          {"intercept", num(b.fit.intercept)},
          {"r2", num(b.fit.r2)},
          {"slope_se", num(b.fit.slope_se)},
          {"slope_ci", {num(b.fit.slope_ci_lo), num(b.fit.slope_ci_hi)}}};
}

json manifest(const SimConfig& c, const std::string& timestamp) {
  return {{"tool", "mfjump"},
          {"version", kToolVersion},
          {"config", to_json(c)},
          {"seed", c.seed},
          {"timestamp", timestamp}};
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw InvalidInput("cannot write '" + p.string() + "'");
  out << s;
}

std::string config_echo(const SimConfig& c) {
  return "# mfjump config v1\n" + to_json(c).dump(2) + "\n";
}

std::string tail_rows(std::size_t n, const std::vector<TailRow>& tail) {
  std::ostringstream out;
  for (const auto& t : tail)
    out << "tail," << n << ',' << fmt(t.threshold) << ',' << t.hits << ',' << fmt(t.p_hat)
        << ',' << fmt(t.ci.lo) << ',' << fmt(t.ci.hi) << "\n";
  return out.str();
}

constexpr const char* kDiagHeader =
    "# mfjump diagnostics v1\nsection,n,param,x,value,lo,hi\n";

}  // namespace

std::string distances_csv(const ChaosReport& r) {
  std::ostringstream out;
  out << "# mfjump distances v1\n";
  out << "n,replica,status,xy,yl,xl,xy_max,x_jumps\n";
  for (const auto& c : r.cells) {
    out << c.n << ',' << c.replica << ','
        << (c.outcome.ok ? "ok" : (c.outcome.skipped ? "skipped" : "failed"));
    if (c.outcome.ok)
      out << ',' << fmt(c.xy) << ',' << fmt(c.yl) << ',' << fmt(c.xl) << ','
          << fmt(c.xy_max) << ',' << c.x_jumps;
    else
      out << ",,,,,";
    out << "\n";
  }
  return out.str();
}

void write_chaos_outputs(const ChaosReport& r, const std::string& dir_s) {
  const fs::path dir(dir_s);
  fs::create_directories(dir / "plotdata");
  write_text(dir / "config.echo", config_echo(r.config));
  write_text(dir / "distances.csv", distances_csv(r));

  // Jump counts of the X-system, one tail threshold at twice the mean of the
  // largest N.
  std::vector<JumpRow> jumps;
  double threshold = 0.0;
  {
    const std::size_t reps = r.config.replicas;
    for (std::size_t a = 0; a < r.config.n_list.size(); ++a) {
      JumpRow row;
      row.n = r.config.n_list[a];
      std::vector<double> per;
      for (std::size_t k = 0; k < reps; ++k) {
        const auto& c = r.cells[a * reps + k];
        if (c.outcome.ok) per.push_back(static_cast<double>(c.x_jumps) / static_cast<double>(c.n));
      }
      row.per_particle = summarize(per);
      jumps.push_back(row);
    }
    threshold = jumps.back().per_particle.mean > 0.0 ? 2.0 * jumps.back().per_particle.mean
                                                     : std::numeric_limits<double>::infinity();
    const std::vector<double> hs{threshold};
    for (std::size_t a = 0; a < jumps.size(); ++a) {
      std::vector<std::size_t> counts;
      for (std::size_t k = 0; k < reps; ++k) {
        const auto& c = r.cells[a * reps + k];
        if (c.outcome.ok) counts.push_back(c.x_jumps);
      }
      if (!counts.empty()) jumps[a].tail = jump_count_stats(counts, jumps[a].n, hs);
    }
  }
  {
    std::ostringstream out;
    out << kDiagHeader;
    for (const auto& j : jumps) {
      out << "jumps," << j.n << ",," << fmt(j.per_particle.se) << ','
          << fmt(j.per_particle.mean) << ",,\n";
      out << tail_rows(j.n, j.tail);
    }
    write_text(dir / "diagnostics.csv", out.str());
  }

  const std::pair<const char*, Summary ChaosRow::*> series[] = {
      {"xy", &ChaosRow::xy}, {"yl", &ChaosRow::yl}, {"xl", &ChaosRow::xl}};
  for (const auto& [name, field] : series) {
    std::ostringstream out;
    out << "# mfjump plotdata v1 series=" << name << "\n# log2N log_error yerr\n";
    for (const auto& row : r.rows) {
      const Summary& s = row.*field;
      if (s.count == 0 || !(s.mean > 0.0)) continue;
      out << fmt(std::log2(static_cast<double>(row.n))) << ' ' << fmt(std::log(s.mean)) << ' '
          << fmt(s.se / s.mean) << "\n";
    }
    write_text(dir / "plotdata" / (std::string(name) + ".dat"), out.str());
  }

  json rep;
  rep["format"] = "mfjump-chaos-report";
  rep["format_version"] = 1;
  rep["manifest"] = manifest(r.config, r.timestamp);
  rep["validation"] = r.validation;
  rep["warnings"] = r.warnings;
  json deltas = json::array();
  for (double d : r.limit.deltas) deltas.push_back(num(d));
  json truncs = json::array();
  for (double d : r.limit.truncations) truncs.push_back(num(d));
  rep["limit"] = {{"source", r.limit.source},
                  {"ensemble_size", r.limit.ensemble_size},
                  {"deltas", deltas},
                  {"truncations", truncs},
                  {"converged", r.limit.converged},
                  {"noise_floor", num(r.limit.noise_floor)}};
  json per_n = json::array();
  for (const auto& row : r.rows)
    per_n.push_back({{"n", row.n},
                     {"xy", summary_json(row.xy)},
                     {"yl", summary_json(row.yl)},
                     {"xl", summary_json(row.xl)}});
  rep["per_n"] = per_n;
  rep["fits"] = {{"xy", fit_json(r.fit_xy)}, {"yl", fit_json(r.fit_yl)}, {"xl", fit_json(r.fit_xl)}};
  json jd = json::array();
  for (const auto& j : jumps) {
    json row = {{"n", j.n}, {"jumps_per_particle", summary_json(j.per_particle)}};
    if (!j.tail.empty())
      row["tail"] = {{"threshold", num(j.tail[0].threshold)},
                     {"p_hat", num(j.tail[0].p_hat)},
                     {"ci", {num(j.tail[0].ci.lo), num(j.tail[0].ci.hi)}}};
    jd.push_back(row);
  }
  rep["diagnostics"] = {{"jump_counts", jd}};
  rep["partial"] = r.partial;
  rep["failures"] = r.failures;
  write_text(dir / "report.json", rep.dump(2) + "\n");
}

void write_diagnostics_outputs(const DiagnosticsReport& r, const std::string& dir_s) {
  const fs::path dir(dir_s);
  fs::create_directories(dir / "plotdata");
  write_text(dir / "config.echo", config_echo(r.config));
  std::ostringstream out;
  out << kDiagHeader;
  json moments = json::array();
  for (const auto& m : r.moments) {
    const auto& s = m.series;
    for (std::size_t k = 0; k < s.times.size(); ++k)
      out << "moment," << m.n << ',' << s.power << ',' << fmt(s.times[k]) << ','
          << fmt(s.values[k]) << ",,\n";
    out << "trend," << m.n << ',' << s.power << ',' << fmt(s.trend.slope) << ','
        << fmt(s.trend.mean) << ',' << fmt(s.trend.ci_lo) << ',' << fmt(s.trend.ci_hi) << "\n";
    moments.push_back({{"n", m.n},
                       {"power", s.power},
                       {"trend_slope", num(s.trend.slope)},
                       {"trend_ci", {num(s.trend.ci_lo), num(s.trend.ci_hi)}},
                       {"mean", num(s.trend.mean)},
                       {"verdict", m.verdict}});
    std::ostringstream pd;
    pd << "# mfjump plotdata v1 series=moment n=" << m.n << " p=" << s.power << "\n# t value\n";
    for (std::size_t k = 0; k < s.times.size(); ++k)
      pd << fmt(s.times[k]) << ' ' << fmt(s.values[k]) << "\n";
    write_text(dir / "plotdata" /
                   ("moment_n" + std::to_string(m.n) + "_p" + std::to_string(s.power) + ".dat"),
               pd.str());
  }
  json jumps = json::array();
  for (const auto& j : r.jumps) {
    out << "jumps," << j.n << ",," << fmt(j.per_particle.se) << ',' << fmt(j.per_particle.mean)
        << ",,\n";
    out << tail_rows(j.n, j.tail);
    json tail = json::array();
    for (const auto& t : j.tail)
      tail.push_back({{"threshold", num(t.threshold)},
                      {"hits", t.hits},
                      {"trials", t.trials},
                      {"p_hat", num(t.p_hat)},
                      {"ci", {num(t.ci.lo), num(t.ci.hi)}}});
    jumps.push_back({{"n", j.n}, {"jumps_per_particle", summary_json(j.per_particle)},
                     {"tail", tail}});
  }
  write_text(dir / "diagnostics.csv", out.str());
  json rep;
  rep["format"] = "mfjump-diagnostics-report";
  rep["format_version"] = 1;
  rep["manifest"] = manifest(r.config, r.timestamp);
  rep["warnings"] = r.warnings;
  rep["moments"] = moments;
  rep["moment_verdict"] = r.moment_verdict;
  rep["jump_counts"] = jumps;
  rep["tail_verdict"] = r.tail_verdict;
  rep["partial"] = r.partial;
  rep["failures"] = r.failures;
  write_text(dir / "report.json", rep.dump(2) + "\n");
}

void write_samples(const std::string& path, std::span<const double> points, int dim) {
  std::ostringstream out;
  out << "# mfjump samples v1 dim=" << dim << "\n";
  const std::size_t d = static_cast<std::size_t>(dim);
  for (std::size_t i = 0; i + d <= points.size(); i += d) {
    for (std::size_t c = 0; c < d; ++c) out << (c ? " " : "") << fmt(points[i + c]);
    out << "\n";
  }
  write_text(path, out.str());
}

std::vector<double> read_samples(const std::string& path, int& dim) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open samples file '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line.rfind("# mfjump samples v1 dim=", 0) != 0)
    throw InvalidInput("'" + path + "': missing '# mfjump samples v1 dim=D' header");
  try {
    dim = std::stoi(line.substr(std::string("# mfjump samples v1 dim=").size()));
  } catch (const std::exception&) {
    throw InvalidInput("'" + path + "': bad dimension in header");
  }
  if (dim < 1) throw InvalidInput("'" + path + "': dimension must be >= 1");
  std::vector<double> out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line[0] == '#') continue;
    for (char& ch : line)
      if (ch == ',') ch = ' ';
    std::istringstream ls(line);
    double v = 0.0;
    int count = 0;
    while (ls >> v) {
      out.push_back(v);
      ++count;
    }
    if (!ls.eof() || count != dim)
      throw InvalidInput("'" + path + "' line " + std::to_string(row) + ": expected " +
                         std::to_string(dim) + " numbers");
  }
  if (out.empty()) throw InvalidInput("'" + path + "': no samples");
  return out;
}

}  // namespace mfjump::harness
