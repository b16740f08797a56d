// Copyright 2026 The mfjump Authors
// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "mfjump/errors.hpp"
#include "mfjump/harness.hpp"

namespace mfjump::harness {

using nlohmann::json;

namespace {

void only_keys(const json& obj, const std::set<std::string>& allowed,
               const std::string& where) {
  if (!obj.is_object()) throw InvalidInput("config: " + where + " must be an object");
  for (const auto& [k, v] : obj.items())
    if (!allowed.count(k))
      throw InvalidInput("config: unknown key '" + k + "' in " + where);
}

double number(const json& v, const std::string& key) {
  if (v.is_null()) return std::numeric_limits<double>::infinity();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  }
  if (!v.is_number()) throw InvalidInput("config: '" + key + "' must be a number");
  return v.get<double>();
}

std::uint64_t unsigned_int(const json& v, const std::string& key) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  throw InvalidInput("config: '" + key + "' must be a non-negative integer");
}

bool boolean(const json& v, const std::string& key) {
  if (!v.is_boolean()) throw InvalidInput("config: '" + key + "' must be true or false");
  return v.get<bool>();
}

std::string text(const json& v, const std::string& key) {
  if (!v.is_string()) throw InvalidInput("config: '" + key + "' must be a string");
  return v.get<std::string>();
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

SimConfig parse_config(const json& input) {
  const json* docp = &input;
  if (input.is_object() && input.contains("manifest")) {
    const auto& m = input.at("manifest");
    if (!m.is_object() || !m.contains("config"))
      throw InvalidInput("config: report manifest has no embedded config");
    docp = &m.at("config");
  }
  const json& doc = *docp;
  only_keys(doc,
            {"schema_version", "model", "n_list", "horizon", "dt", "event_driven",
             "replicas", "ensemble_size", "picard", "seed", "output_dir", "system",
             "ysystem_rate_arg", "init", "scheme", "w1_cap", "flow_file",
             "save_flow", "diagnostics"},
            "the top level");
  if (!doc.contains("schema_version"))
    throw InvalidInput("config: missing 'schema_version'");
  if (unsigned_int(doc.at("schema_version"), "schema_version") != kSchemaVersion)
    throw InvalidInput("config: unsupported schema_version (expected 1)");

  SimConfig c;
  if (doc.contains("model")) {
    const auto& m = doc.at("model");
    only_keys(m, {"id", "params", "collateral_zero"}, "'model'");
    if (m.contains("id")) c.model_id = text(m.at("id"), "model.id");
    if (m.contains("params")) {
      const auto& p = m.at("params");
      if (!p.is_object()) throw InvalidInput("config: model.params must be an object");
      for (const auto& [k, v] : p.items()) c.params[k] = number(v, "model.params." + k);
    }
    if (m.contains("collateral_zero"))
      c.collateral_zero = boolean(m.at("collateral_zero"), "model.collateral_zero");
  }
  if (doc.contains("n_list")) {
    const auto& l = doc.at("n_list");
    if (!l.is_array()) throw InvalidInput("config: 'n_list' must be an array");
    c.n_list.clear();
    for (const auto& v : l) c.n_list.push_back(unsigned_int(v, "n_list"));
  }
  if (doc.contains("horizon")) c.horizon = number(doc.at("horizon"), "horizon");
  if (doc.contains("dt")) c.dt = number(doc.at("dt"), "dt");
  if (doc.contains("event_driven") && !doc.at("event_driven").is_null())
    c.event_driven = boolean(doc.at("event_driven"), "event_driven");
  if (doc.contains("replicas")) c.replicas = unsigned_int(doc.at("replicas"), "replicas");
  if (doc.contains("ensemble_size"))
    c.ensemble_size = unsigned_int(doc.at("ensemble_size"), "ensemble_size");
  if (doc.contains("picard")) {
    const auto& p = doc.at("picard");
    only_keys(p, {"tol", "max_iter", "noise_floor"}, "'picard'");
    if (p.contains("tol")) c.picard.tol = number(p.at("tol"), "picard.tol");
    if (p.contains("max_iter"))
      c.picard.max_iter = static_cast<int>(unsigned_int(p.at("max_iter"), "picard.max_iter"));
    if (p.contains("noise_floor"))
      c.picard.noise_floor = boolean(p.at("noise_floor"), "picard.noise_floor");
  }
  if (doc.contains("seed")) c.seed = unsigned_int(doc.at("seed"), "seed");
  if (doc.contains("output_dir")) c.output_dir = text(doc.at("output_dir"), "output_dir");
  if (doc.contains("system")) c.system = text(doc.at("system"), "system");
  if (doc.contains("ysystem_rate_arg")) {
    const auto s = text(doc.at("ysystem_rate_arg"), "ysystem_rate_arg");
    if (s == "jumper")
      c.y_rate_argument = RateArgument::jumper;
    else if (s == "target")
      c.y_rate_argument = RateArgument::target;
    else
      throw InvalidInput("config: ysystem_rate_arg must be 'jumper' or 'target'");
  }
  if (doc.contains("init")) {
    const auto& i = doc.at("init");
    only_keys(i, {"low", "high"}, "'init'");
    if (i.contains("low")) c.init_low = number(i.at("low"), "init.low");
    if (i.contains("high")) c.init_high = number(i.at("high"), "init.high");
  }
  if (doc.contains("scheme")) {
    const auto& s = doc.at("scheme");
    only_keys(s, {"density_threshold", "max_refinements", "bound_slack", "bound_retries"},
              "'scheme'");
    if (s.contains("density_threshold"))
      c.density_threshold = number(s.at("density_threshold"), "scheme.density_threshold");
    if (s.contains("max_refinements"))
      c.max_refinements =
          static_cast<int>(unsigned_int(s.at("max_refinements"), "scheme.max_refinements"));
    if (s.contains("bound_slack"))
      c.bound_slack = number(s.at("bound_slack"), "scheme.bound_slack");
    if (s.contains("bound_retries"))
      c.bound_retries =
          static_cast<int>(unsigned_int(s.at("bound_retries"), "scheme.bound_retries"));
  }
  if (doc.contains("w1_cap")) c.w1_cap = unsigned_int(doc.at("w1_cap"), "w1_cap");
  if (doc.contains("flow_file")) c.flow_file = text(doc.at("flow_file"), "flow_file");
  if (doc.contains("save_flow")) c.save_flow = boolean(doc.at("save_flow"), "save_flow");
  if (doc.contains("diagnostics")) {
    const auto& d = doc.at("diagnostics");
    only_keys(d, {"moments", "jump_counts", "powers", "thresholds"}, "'diagnostics'");
    if (d.contains("moments")) c.diagnostics.moments = boolean(d.at("moments"), "diagnostics.moments");
    if (d.contains("jump_counts"))
      c.diagnostics.jump_counts = boolean(d.at("jump_counts"), "diagnostics.jump_counts");
    if (d.contains("powers")) {
      c.diagnostics.powers.clear();
      for (const auto& v : d.at("powers"))
        c.diagnostics.powers.push_back(static_cast<int>(unsigned_int(v, "diagnostics.powers")));
    }
    if (d.contains("thresholds")) {
      c.diagnostics.thresholds.clear();
      for (const auto& v : d.at("thresholds"))
        c.diagnostics.thresholds.push_back(number(v, "diagnostics.thresholds"));
    }
  }
  check_config(c);
  return c;
}

SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("config: cannot open '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidInput("config: '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

json to_json(const SimConfig& c) {
  json params = json::object();
  for (const auto& [k, v] : c.params) params[k] = v;
  json j;
  j["schema_version"] = kSchemaVersion;
  j["model"] = {{"id", c.model_id}, {"params", params}, {"collateral_zero", c.collateral_zero}};
  j["n_list"] = c.n_list;
  j["horizon"] = c.horizon;
  j["dt"] = c.dt;
  j["event_driven"] = c.event_driven ? json(*c.event_driven) : json(nullptr);
  j["replicas"] = c.replicas;
  j["ensemble_size"] = c.ensemble_size;
  j["picard"] = {{"tol", finite_or_null(c.picard.tol)},
                 {"max_iter", c.picard.max_iter},
                 {"noise_floor", c.picard.noise_floor}};
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["system"] = c.system;
  j["ysystem_rate_arg"] =
      c.y_rate_argument == RateArgument::jumper ? "jumper" : "target";
  j["init"] = {{"low", c.init_low}, {"high", c.init_high}};
  j["scheme"] = {{"density_threshold", c.density_threshold},
                 {"max_refinements", c.max_refinements},
                 {"bound_slack", c.bound_slack},
                 {"bound_retries", c.bound_retries}};
  j["w1_cap"] = c.w1_cap;
  j["flow_file"] = c.flow_file;
  j["save_flow"] = c.save_flow;
  j["diagnostics"] = {{"moments", c.diagnostics.moments},
                      {"jump_counts", c.diagnostics.jump_counts},
                      {"powers", c.diagnostics.powers},
                      {"thresholds", c.diagnostics.thresholds}};
  return j;
}

void check_config(const SimConfig& c) {
  if (!(c.horizon > 0.0) || !std::isfinite(c.horizon))
    throw InvalidInput("config: horizon must be > 0");
  if (!(c.dt > 0.0) || !std::isfinite(c.dt)) throw InvalidInput("config: dt must be > 0");
  if (c.n_list.empty()) throw InvalidInput("config: n_list must not be empty");
  for (std::size_t k = 0; k < c.n_list.size(); ++k) {
    if (c.n_list[k] == 0) throw InvalidInput("config: every N must be >= 1");
    if (k > 0 && c.n_list[k] <= c.n_list[k - 1])
      throw InvalidInput("config: n_list must be strictly increasing");
  }
  if (c.replicas == 0) throw InvalidInput("config: replicas must be >= 1");
  if (!(c.picard.tol > 0.0)) throw InvalidInput("config: picard.tol must be > 0");
  if (c.picard.max_iter < 1) throw InvalidInput("config: picard.max_iter must be >= 1");
  if (c.system != "X" && c.system != "Y" && c.system != "limit")
    throw InvalidInput("config: system must be X, Y or limit");
  if (!(c.init_high >= c.init_low)) throw InvalidInput("config: init.low > init.high");
  if (!(c.density_threshold > 0.0))
    throw InvalidInput("config: scheme.density_threshold must be > 0");
  if (!(c.bound_slack >= 0.0)) throw InvalidInput("config: scheme.bound_slack must be >= 0");
  if (c.w1_cap < 1) throw InvalidInput("config: w1_cap must be >= 1");
  for (int p : c.diagnostics.powers)
    if (p < 1 || p > 4) throw InvalidInput("config: diagnostics.powers must lie in 1..4");
  for (double h : c.diagnostics.thresholds)
    if (!(h > 0.0)) throw InvalidInput("config: diagnostics.thresholds must be > 0");
  const double q = c.horizon / c.dt;
  if (std::abs(q - std::round(q)) > 1e-9 * std::max(1.0, q))
    throw InvalidInput("config: horizon / dt must be an integer");
}

ModelSpec build_spec(const SimConfig& c) {
  BuildOptions o;
  o.collateral_zero = c.collateral_zero;
  return build_model(c.model_id, c.params, o);
}

bool uses_event_driven(const SimConfig& c, const ModelSpec& spec) {
  if (c.event_driven) return *c.event_driven;
  return spec.model_class == ModelClass::superlinear_rate &&
         spec.supports_event_driven() && static_cast<bool>(spec.rate_envelope);
}

LimitConfig limit_config(const SimConfig& c, const ModelSpec& spec) {
  LimitConfig l;
  l.sim.horizon = c.horizon;
  l.sim.dt = c.dt;
  l.sim.event_driven = uses_event_driven(c, spec);
  l.sim.y_rate_argument = c.y_rate_argument;
  l.sim.density_threshold = c.density_threshold;
  l.sim.max_refinements = c.max_refinements;
  l.sim.bound_slack = c.bound_slack;
  l.init_low = c.init_low;
  l.init_high = c.init_high;
  l.w1_cap = c.w1_cap;
  l.noise_floor = c.picard.noise_floor;
  return l;
}

std::size_t ensemble_size(const SimConfig& c) {
  if (c.ensemble_size > 0) return c.ensemble_size;
  return 16 * c.n_list.back();
}

}  // namespace mfjump::harness
