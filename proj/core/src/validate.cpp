// Copyright 2026 The mfjump Authors
// SPDX-License-Identifier: Apache-2.0
#include "mfjump/validate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mfjump/drivers.hpp"
#include "mfjump/errors.hpp"
#include "mfjump/metrics.hpp"

namespace mfjump {

namespace {

constexpr std::uint64_t kProbeSalt = 0x2545f4914f6cdd1dULL;
constexpr double kAbsTol = 1e-12;

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double diff_norm(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(),
                     [](double x) { return std::isfinite(x); });
}

struct Probe {
  std::vector<double> x, y, alpha, gamma;
  int kind = 0;  // 0 near pair, 1 far pair, 2 measure pair, 3 joint
};

Probe make_probe(const ProbeConfig& cfg, int d, std::size_t p) {
  const StreamState s(mix64(mix64(cfg.seed ^ kProbeSalt) ^ (p + kGolden)));
  std::uint64_t c = 0;
  auto coord = [&] { return cfg.radius * (2.0 * s.uniform_at(c++) - 1.0); };
  const std::size_t du = static_cast<std::size_t>(d);
  const std::size_t m = std::max<std::size_t>(cfg.measure_size, 1);
  Probe pr;
  pr.kind = static_cast<int>(p % 4);
  pr.x.resize(du);
  for (auto& v : pr.x) v = coord();
  pr.alpha.resize(m * du);
  for (auto& v : pr.alpha) v = coord();
  switch (pr.kind) {
    case 0: {
      std::vector<double> dir(du);
      for (std::size_t k = 0; k < du; ++k) dir[k] = s.normal_at(1000 + k);
      const double n = std::max(norm(dir), 1e-300);
      pr.y = pr.x;
      for (std::size_t k = 0; k < du; ++k) pr.y[k] += cfg.fd_step * dir[k] / n;
      pr.gamma = pr.alpha;
      break;
    }
    case 1:
      pr.y.resize(du);
      for (auto& v : pr.y) v = coord();
      pr.gamma = pr.alpha;
      break;
    case 2:
      pr.y = pr.x;
      pr.gamma.resize(m * du);
      for (auto& v : pr.gamma) v = coord();
      break;
    default:
      pr.y.resize(du);
      for (auto& v : pr.y) v = coord();
      pr.gamma.resize(m * du);
      for (auto& v : pr.gamma) v = coord();
      break;
  }
  return pr;
}

Witness witness_of(const Probe& pr, double lhs, double rhs) {
  return Witness{pr.x, pr.y, pr.alpha, pr.gamma, 0.0, lhs, rhs, lhs - rhs};
}

/// Tracks one inequality lhs <= rhs across probes.
struct Tracker {
  ConditionResult result;
  bool any = false;
  double worst_margin = -std::numeric_limits<double>::infinity();

  Tracker(std::string name, std::string inequality,
          std::optional<double> declared) {
    result.name = std::move(name);
    result.inequality = std::move(inequality);
    result.declared = declared;
  }
  void observe(const Probe& pr, double lhs, double rhs, double rel_margin) {
    any = true;
    const double slack = rel_margin * std::abs(rhs) + kAbsTol;
    if (lhs > rhs + slack) {
      const double m = lhs - rhs;
      if (!result.witness || m > worst_margin) {
        result.witness = witness_of(pr, lhs, rhs);
        worst_margin = m;
      }
    }
  }
  ConditionResult finish(std::optional<double> estimate = std::nullopt) {
    result.estimate = estimate;
    if (result.witness) {
      result.verdict = Verdict::fail;
    } else if (!any) {
      result.verdict = Verdict::indeterminate;
      if (result.note.empty()) result.note = "no probe could be evaluated";
    } else {
      result.verdict = Verdict::pass;
      if (result.note.empty()) result.note = "no violation found";
    }
    return result;
  }
};

ConditionResult undeclared(const std::string& name,
                           const std::string& inequality,
                           const std::string& what) {
  ConditionResult r;
  r.name = name;
  r.inequality = inequality;
  r.verdict = Verdict::indeterminate;
  r.note = what + " not declared by the model";
  return r;
}

struct Coeffs {
  std::vector<double> drift, diffusion;
  double rate = 0.0;
};

class Evaluator {
 public:
  explicit Evaluator(const ModelSpec& spec) : spec_(spec) {
    d_ = static_cast<std::size_t>(spec.dims.d);
    d1_ = static_cast<std::size_t>(spec.dims.d1);
  }

  Coeffs at(std::span<const double> x, const EmpiricalMeasure& mu) const {
    Coeffs c;
    c.drift.assign(d_, std::numeric_limits<double>::quiet_NaN());
    spec_.drift(x, mu, c.drift);
    c.diffusion.assign(d_ * d1_, 0.0);
    if (spec_.has_diffusion()) {
      std::fill(c.diffusion.begin(), c.diffusion.end(),
                std::numeric_limits<double>::quiet_NaN());
      spec_.diffusion(x, mu, c.diffusion);
    }
    c.rate = spec_.rate(x, mu);
    if (!all_finite(c.drift) || !all_finite(c.diffusion) ||
        !std::isfinite(c.rate))
      throw std::domain_error("coefficient returned a non-finite value");
    return c;
  }

  std::vector<double> main_jump(std::span<const double> x,
                                const EmpiricalMeasure& mu, double h) const {
    std::vector<double> out(d_, std::numeric_limits<double>::quiet_NaN());
    spec_.main_jump(x, mu, h, out);
    if (!all_finite(out))
      throw std::domain_error("main jump returned a non-finite value");
    return out;
  }

  /// <mu, lambda(., mu) E[Theta(., x, mu)]>.
  std::vector<double> collateral_drift(std::span<const double> x,
                                       const EmpiricalMeasure& mu) const {
    std::vector<double> out(d_, 0.0), tmp(d_);
    if (spec_.collateral_is_zero()) return out;
    for (std::size_t j = 0; j < mu.size(); ++j) {
      const double lam = spec_.rate(mu.point(j), mu);
      spec_.expected_collateral(mu.point(j), x, mu, tmp);
      for (std::size_t c = 0; c < d_; ++c) out[c] += lam * tmp[c];
    }
    for (auto& v : out) v /= static_cast<double>(mu.size());
    if (!all_finite(out))
      throw std::domain_error("collateral drift is non-finite");
    return out;
  }

  /// L1 distance between the thinned main-jump integrands at (x, a), (y, g).
  double main_jump_l1(std::span<const double> x, const EmpiricalMeasure& a,
                      double lx, std::span<const double> y,
                      const EmpiricalMeasure& g, double ly) const {
    const double* nodes = UnitQuadrature::nodes();
    const double* weights = UnitQuadrature::weights();
    double acc = 0.0;
    for (int q = 0; q < UnitQuadrature::kNodes; ++q) {
      const auto px = main_jump(x, a, nodes[q]);
      const auto py = main_jump(y, g, nodes[q]);
      const double common = std::min(lx, ly) * diff_norm(px, py);
      const double extra = lx > ly ? (lx - ly) * norm(px) : (ly - lx) * norm(py);
      acc += weights[q] * (common + extra);
    }
    return acc;
  }

 private:
  const ModelSpec& spec_;
  std::size_t d_ = 1, d1_ = 1;
};

double b_derivative(const AssumptionMeta& meta, double r, double step) {
  if (meta.b_prime) return meta.b_prime(r);
  const double hstep = step * std::max(1.0, r);
  const double lo = std::max(r - hstep, 0.0);
  return (meta.b(r + hstep) - meta.b(lo)) / (r + hstep - lo);
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  std::vector<double> g(n);
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < n; ++i)
    g[i] = std::exp(a + (b - a) * static_cast<double>(i) /
                            static_cast<double>(n - 1));
  return g;
}

void superlinear_checks(const ModelSpec& spec, const ProbeConfig& cfg,
                        AssumptionReport& rep) {
  const auto& m = spec.meta;
  {
    const std::string ineq = "K * gamma * E||V|| < 1";
    if (!m.gamma || !m.mean_norm_v) {
      rep.conditions.push_back(
          undeclared("gamma_constraint", ineq, "gamma or E||V||"));
    } else {
      ConditionResult r;
      r.name = "gamma_constraint";
      r.inequality = ineq;
      r.declared = m.gamma_factor;
      const double lhs = m.gamma_factor * *m.gamma * *m.mean_norm_v;
      r.estimate = lhs;
      if (lhs < 1.0) {
        r.verdict = Verdict::pass;
        r.note = "exact check on declared constants";
      } else {
        r.verdict = Verdict::fail;
        Witness w;
        w.lhs = lhs;
        w.rhs = 1.0;
        w.margin = lhs - 1.0;
        r.witness = w;
        std::ostringstream os;
        os << m.gamma_factor << " * " << *m.gamma << " * " << *m.mean_norm_v
           << " = " << lhs << " >= 1";
        r.note = os.str();
      }
      if (m.gamma_factor != 5.0)
        r.note += "; factor K differs from 5, which violates the assumption as "
                  "stated";
      rep.conditions.push_back(r);
    }
  }
  const auto grid = log_grid(1e-3, 1e3, 241);
  {
    const std::string ineq = "b'(r) <= gamma * b(r) + c on r in [1e-3, 1e3]";
    if (!m.b || !m.gamma || !m.c) {
      rep.conditions.push_back(undeclared("b_growth", ineq, "b, gamma or c"));
    } else {
      ConditionResult r;
      r.name = "b_growth";
      r.inequality = ineq;
      r.verdict = Verdict::pass;
      double worst = -std::numeric_limits<double>::infinity();
      for (double rr : grid) {
        const double lhs = b_derivative(m, rr, cfg.fd_step);
        const double rhs = *m.gamma * m.b(rr) + *m.c;
        if (!std::isfinite(lhs) || !std::isfinite(rhs)) {
          r.verdict = Verdict::indeterminate;
          r.note = "non-finite b or b' at r = " + std::to_string(rr);
          break;
        }
        if (lhs > rhs + cfg.margin * std::abs(rhs) + kAbsTol &&
            lhs - rhs > worst) {
          worst = lhs - rhs;
          Witness w;
          w.r = rr;
          w.lhs = lhs;
          w.rhs = rhs;
          w.margin = lhs - rhs;
          r.witness = w;
          r.verdict = Verdict::fail;
        }
      }
      if (r.verdict == Verdict::pass) r.note = "no violation on 241 radii";
      rep.conditions.push_back(r);
    }
  }
  {
    const std::string ineq = "b(r) > 0 and b'(r) >= 0";
    if (!m.b) {
      rep.conditions.push_back(undeclared("b_positive_nondecreasing", ineq, "b"));
    } else {
      ConditionResult r;
      r.name = "b_positive_nondecreasing";
      r.inequality = ineq;
      r.verdict = Verdict::pass;
      for (double rr : grid) {
        const double b = m.b(rr);
        const double bp = b_derivative(m, rr, cfg.fd_step);
        if (!(b > 0.0) || bp < -cfg.margin * std::max(1.0, b)) {
          Witness w;
          w.r = rr;
          w.lhs = b;
          w.rhs = bp;
          r.witness = w;
          r.verdict = Verdict::fail;
          r.note = "b(r) or b'(r) out of range at the witness radius";
          break;
        }
      }
      rep.conditions.push_back(r);
    }
  }
}

}  // namespace

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass:
      return "pass";
    case Verdict::fail:
      return "fail";
    case Verdict::indeterminate:
      return "indeterminate";
  }
  return "unknown";
}

Verdict AssumptionReport::overall() const {
  bool indeterminate = false;
  for (const auto& c : conditions) {
    if (c.verdict == Verdict::fail) return Verdict::fail;
    if (c.verdict == Verdict::indeterminate) indeterminate = true;
  }
  return indeterminate ? Verdict::indeterminate : Verdict::pass;
}

const ConditionResult* AssumptionReport::find(const std::string& name) const {
  for (const auto& c : conditions)
    if (c.name == name) return &c;
  return nullptr;
}

AssumptionReport validate_model(const ModelSpec& spec,
                                const ProbeConfig& probe) {
  if (probe.budget == 0) throw InvalidInput("validate_model: budget must be > 0");
  if (!(probe.radius > 0.0) || !(probe.fd_step > 0.0))
    throw InvalidInput("validate_model: radius and fd_step must be > 0");
  if (spec.dims.d < 1 || spec.dims.d1 < 1)
    throw InvalidInput("validate_model: dimensions must be >= 1");
  if (!spec.drift || !spec.rate || !spec.main_jump)
    throw InvalidInput("validate_model: drift, rate and main jump are required");

  AssumptionReport rep;
  rep.model = spec.name;
  rep.model_class = spec.model_class;
  rep.probe = probe;
  const auto& meta = spec.meta;
  const int d = spec.dims.d;
  const Evaluator ev(spec);

  ConditionResult finite;
  finite.name = "coefficients_finite";
  finite.inequality = "all coefficients finite and fully written";
  finite.verdict = Verdict::pass;

  Tracker rate_nonneg("rate_nonnegative", "lambda(x, mu) >= 0", 0.0);

  const bool lip_class = spec.model_class == ModelClass::lipschitz;
  const bool convex_class = spec.model_class == ModelClass::convex_potential;
  const bool jump_checks = lip_class || convex_class;

  Tracker li("Li", "max(|F(x,a)-F(y,g)|, |s(x,a)-s(y,g)|) <= L (|x-y| + W1(a,g))",
             meta.lipschitz);
  const std::optional<double> jump_l =
      meta.jump_lipschitz ? meta.jump_lipschitz : meta.lipschitz;
  Tracker l1_main("L1_main",
                  "int |psi(x,a,h)1(u<=l(x,a)) - psi(y,g,h)1(u<=l(y,g))| du dh "
                  "<= L (|x-y| + W1(a,g))",
                  jump_l);
  Tracker l1_coll("L1_collateral",
                  "|<a, l E[Theta(., x, a)]> - <g, l E[Theta(., y, g)]>| <= L "
                  "(|x-y| + W1(a,g))",
                  jump_l);
  Tracker i2("I2", "|Theta(x, y, a, h1, h2)| <= declared bound",
             meta.collateral_bound);
  Tracker convexity("U_convex", "(x-y).(grad U(x) - grad U(y)) >= 0", 0.0);
  Tracker decomposition("drift_decomposition",
                        "F(x,a) = -grad U(x) + b(x,a)", 0.0);
  Tracker b_lip("b_lipschitz", "|b(x,a) - b(y,g)| <= L_b (|x-y| + W1(a,g))",
                meta.interaction_lipschitz);
  Tracker b_bound("b_bounded", "|b(x,a)| <= declared bound",
                  meta.interaction_bound);
  Tracker ld("LD", "|s(x,a) - s(y,g)| <= L (|x-y| + W1(a,g))",
             meta.diffusion_lipschitz);
  Tracker h_bound("h_bounded", "|lambda(x) - b(|x|)| <= H", meta.h_bound);
  Tracker v_bound("V_bounded", "|Theta(x, y, a, h1, h2)| <= sup|V|",
                  meta.sup_norm_v);
  Tracker u_bound("U_bounded", "|x + psi(x, a, h)| <= sup|U|", meta.sup_norm_u);

  auto& est = rep.estimates;
  const double* nodes = UnitQuadrature::nodes();
  std::vector<double> theta(static_cast<std::size_t>(d));

  for (std::size_t p = 0; p < probe.budget; ++p) {
    const Probe pr = make_probe(probe, d, p);
    rep.probes_used = p + 1;
    try {
      const EmpiricalMeasure a(pr.alpha, d);
      const EmpiricalMeasure g(pr.gamma, d);
      const double dx = diff_norm(pr.x, pr.y);
      const double w1 = (pr.kind >= 2) ? w1_empirical(pr.alpha, pr.gamma, d)
                                       : 0.0;
      const double base = dx + w1;
      const Coeffs cx = ev.at(pr.x, a);
      const Coeffs cy = ev.at(pr.y, g);
      rate_nonneg.observe(pr, -cx.rate, 0.0, 0.0);
      rate_nonneg.observe(pr, -cy.rate, 0.0, 0.0);

      const double dF = diff_norm(cx.drift, cy.drift);
      const double dS = diff_norm(cx.diffusion, cy.diffusion);
      if (base > 0.0) {
        if (pr.kind <= 1) {
          est.drift_x = std::max(est.drift_x, dF / dx);
          est.diffusion_x = std::max(est.diffusion_x, dS / dx);
        } else if (pr.kind == 2 && w1 > 0.0) {
          est.drift_mu = std::max(est.drift_mu, dF / w1);
          est.diffusion_mu = std::max(est.diffusion_mu, dS / w1);
        }
      }

      if (lip_class && meta.lipschitz)
        li.observe(pr, std::max(dF, dS), *meta.lipschitz * base, probe.margin);

      if (jump_checks) {
        const double lhs =
            ev.main_jump_l1(pr.x, a, cx.rate, pr.y, g, cy.rate);
        if (base > 0.0) est.main_jump = std::max(est.main_jump, lhs / base);
        if (jump_l) l1_main.observe(pr, lhs, *jump_l * base, probe.margin);
        const auto gx = ev.collateral_drift(pr.x, a);
        const auto gy = ev.collateral_drift(pr.y, g);
        const double lc = diff_norm(gx, gy);
        if (base > 0.0)
          est.collateral_drift = std::max(est.collateral_drift, lc / base);
        if (jump_l) l1_coll.observe(pr, lc, *jump_l * base, probe.margin);
      }

      if (!spec.collateral_is_zero()) {
        for (int q = 0; q < UnitQuadrature::kNodes; ++q) {
          const double h1 = nodes[q];
          const double h2 = nodes[(q * 3 + static_cast<int>(p)) %
                                  UnitQuadrature::kNodes];
          spec.collateral_jump(pr.x, pr.y, a, h1, h2, theta);
          if (!all_finite(theta))
            throw std::domain_error("collateral jump is non-finite");
          if (jump_checks && meta.collateral_bound)
            i2.observe(pr, norm(theta), *meta.collateral_bound, probe.margin);
          if (spec.model_class == ModelClass::superlinear_rate &&
              meta.sup_norm_v)
            v_bound.observe(pr, norm(theta), *meta.sup_norm_v, probe.margin);
        }
      }

      if (convex_class) {
        if (meta.potential_gradient) {
          std::vector<double> gx(static_cast<std::size_t>(d)),
              gy(static_cast<std::size_t>(d));
          meta.potential_gradient(pr.x, gx);
          meta.potential_gradient(pr.y, gy);
          double dot = 0.0;
          for (int c = 0; c < d; ++c) dot += (pr.x[c] - pr.y[c]) * (gx[c] - gy[c]);
          convexity.observe(pr, -dot, 0.0, 0.0);
          if (meta.interaction) {
            std::vector<double> bx(static_cast<std::size_t>(d)),
                by(static_cast<std::size_t>(d));
            meta.interaction(pr.x, a, bx);
            meta.interaction(pr.y, g, by);
            double mismatch = 0.0;
            for (int c = 0; c < d; ++c)
              mismatch = std::max(
                  mismatch, std::abs(cx.drift[c] - (-gx[c] + bx[c])) /
                                (1.0 + std::abs(cx.drift[c])));
            decomposition.observe(pr, mismatch, 1e-9, 0.0);
            if (meta.interaction_lipschitz)
              b_lip.observe(pr, diff_norm(bx, by),
                            *meta.interaction_lipschitz * base, probe.margin);
            if (meta.interaction_bound)
              b_bound.observe(pr, norm(bx), *meta.interaction_bound,
                              probe.margin);
          }
        }
        if (meta.diffusion_lipschitz)
          ld.observe(pr, dS, *meta.diffusion_lipschitz * base, probe.margin);
      }

      if (spec.model_class == ModelClass::superlinear_rate) {
        if (meta.b && meta.h_bound)
          h_bound.observe(pr, std::abs(cx.rate - meta.b(norm(pr.x))),
                          *meta.h_bound, probe.margin);
        if (meta.sup_norm_u) {
          for (int q = 0; q < UnitQuadrature::kNodes; ++q) {
            auto jump = ev.main_jump(pr.x, a, nodes[q]);
            for (int c = 0; c < d; ++c) jump[c] += pr.x[c];
            u_bound.observe(pr, norm(jump), *meta.sup_norm_u, probe.margin);
          }
        }
      }
    } catch (const std::exception& e) {
      if (finite.verdict == Verdict::pass) {
        finite.verdict = Verdict::indeterminate;
        finite.witness = witness_of(pr, 0.0, 0.0);
        finite.note = std::string("evaluation failed: ") + e.what();
      }
    }
  }

  rep.conditions.push_back(finite);
  rep.conditions.push_back(rate_nonneg.finish());

  if (lip_class) {
    if (meta.lipschitz)
      rep.conditions.push_back(
          li.finish(std::max({est.drift_x, est.drift_mu, est.diffusion_x,
                              est.diffusion_mu})));
    else
      rep.conditions.push_back(undeclared("Li", li.result.inequality, "L"));
  }
  if (convex_class) {
    if (!meta.potential_gradient || !meta.interaction) {
      rep.conditions.push_back(
          undeclared("U_convex", convexity.result.inequality, "grad U or b"));
    } else {
      rep.conditions.push_back(convexity.finish());
      rep.conditions.push_back(decomposition.finish());
      if (meta.interaction_lipschitz)
        rep.conditions.push_back(b_lip.finish());
      else
        rep.conditions.push_back(
            undeclared("b_lipschitz", b_lip.result.inequality, "L_b"));
      if (meta.interaction_bound) {
        auto r = b_bound.finish();
        r.note += "; sup over measures probed only on empirical measures "
                  "inside the probe radius";
        rep.conditions.push_back(r);
      } else {
        rep.conditions.push_back(
            undeclared("b_bounded", b_bound.result.inequality, "bound on b"));
      }
    }
    if (!spec.has_diffusion()) {
      ConditionResult r;
      r.name = "LD";
      r.inequality = ld.result.inequality;
      r.verdict = Verdict::pass;
      r.note = "no diffusion";
      rep.conditions.push_back(r);
    } else if (meta.diffusion_lipschitz) {
      rep.conditions.push_back(ld.finish());
    } else {
      rep.conditions.push_back(undeclared("LD", ld.result.inequality, "L"));
    }
    rep.notes.push_back(
        "the bound sup over all probability measures of b(x, .) is checked "
        "only over empirical measures within the probe radius");
  }
  if (jump_checks) {
    if (jump_l) {
      rep.conditions.push_back(l1_main.finish(est.main_jump));
      rep.conditions.push_back(l1_coll.finish(est.collateral_drift));
    } else {
      rep.conditions.push_back(
          undeclared("L1_main", l1_main.result.inequality, "L"));
      rep.conditions.push_back(
          undeclared("L1_collateral", l1_coll.result.inequality, "L"));
    }
    if (spec.collateral_is_zero()) {
      ConditionResult r;
      r.name = "I2";
      r.inequality = i2.result.inequality;
      r.verdict = Verdict::pass;
      r.note = "collateral jumps are zero";
      rep.conditions.push_back(r);
    } else if (meta.collateral_bound) {
      rep.conditions.push_back(i2.finish());
    } else {
      rep.conditions.push_back(
          undeclared("I2", i2.result.inequality, "collateral bound"));
    }
  }
  if (spec.model_class == ModelClass::superlinear_rate) {
    superlinear_checks(spec, probe, rep);
    if (meta.b && meta.h_bound)
      rep.conditions.push_back(h_bound.finish());
    else
      rep.conditions.push_back(
          undeclared("h_bounded", h_bound.result.inequality, "b or H"));
    if (spec.collateral_is_zero()) {
      ConditionResult r;
      r.name = "V_bounded";
      r.inequality = v_bound.result.inequality;
      r.verdict = Verdict::pass;
      r.note = "collateral jumps are zero";
      rep.conditions.push_back(r);
    } else if (meta.sup_norm_v) {
      rep.conditions.push_back(v_bound.finish());
    } else {
      rep.conditions.push_back(
          undeclared("V_bounded", v_bound.result.inequality, "sup|V|"));
    }
    if (meta.sup_norm_u)
      rep.conditions.push_back(u_bound.finish());
    else
      rep.conditions.push_back(
          undeclared("U_bounded", u_bound.result.inequality, "sup|U|"));
  }
  rep.notes.push_back(
      "verdicts are probabilistic: pass means no violation was found among "
      "the sampled probes");
  return rep;
}

std::string format_report(const AssumptionReport& report) {
  std::ostringstream os;
  os.precision(6);
  os << "model: " << report.model << " (" << to_string(report.model_class)
     << ")\n";
  os << "probes: " << report.probes_used << " (radius " << report.probe.radius
     << ", seed " << report.probe.seed << ")\n";
  for (const auto& c : report.conditions) {
    os << "  [" << to_string(c.verdict) << "] " << c.name << ": "
       << c.inequality;
    if (c.declared) os << "; declared " << *c.declared;
    if (c.estimate) os << "; estimate " << *c.estimate;
    if (!c.note.empty()) os << "; " << c.note;
    os << "\n";
    if (c.witness) {
      const auto& w = *c.witness;
      os << "      witness: lhs " << w.lhs << " rhs " << w.rhs << " margin "
         << w.margin;
      if (!w.x.empty()) {
        os << " x=(";
        for (std::size_t i = 0; i < w.x.size(); ++i)
          os << (i ? "," : "") << w.x[i];
        os << ") y=(";
        for (std::size_t i = 0; i < w.y.size(); ++i)
          os << (i ? "," : "") << w.y[i];
        os << ")";
      } else {
        os << " r=" << w.r;
      }
      os << "\n";
    }
  }
  const auto& e = report.estimates;
  os << "estimates: Lip_x(F) " << e.drift_x << ", Lip_mu(F) " << e.drift_mu
     << ", Lip_x(sigma) " << e.diffusion_x << ", Lip_mu(sigma) "
     << e.diffusion_mu << ", L1 main " << e.main_jump << ", L1 collateral "
     << e.collateral_drift << "\n";
  for (const auto& n : report.notes) os << "note: " << n << "\n";
  os << "overall: " << to_string(report.overall()) << "\n";
  return os.str();
}

}  // namespace mfjump
