// Copyright 2026 The mfjump Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "mfjump/drivers.hpp"
#include "mfjump/model.hpp"
#include "mfjump/path_record.hpp"

namespace mfjump {

/// X: the particle system with simultaneous jumps. Y: the intermediate
/// system whose collateral jumps are replaced by their mean drift. limit:
/// independent copies driven by an external measure flow.
enum class SystemKind { X, Y, limit };
const char* to_string(SystemKind k);

/// Whose rate multiplies the collateral drift of the Y-system:
/// jumper = lambda(Y_j) (default), target = lambda(Y_i).
enum class RateArgument { jumper, target };

/// Law flow that drives limit copies. Coefficients on grid cell
/// [t_k, t_k+1) use the data of index k.
class FlowField {
 public:
  virtual ~FlowField() = default;
  virtual const std::vector<double>& grid_times() const = 0;
  virtual const EmpiricalMeasure& measure(std::size_t k) const = 0;
  /// <mu_k, lambda E[Theta(., x)]>, truncated where the model requires.
  virtual void collateral_drift(std::size_t k, PointView x,
                                PointOut out) const = 0;
};

struct SimOptions {
  double horizon = 1.0;
  /// Base step of the time-stepped scheme; output grid spacing of both
  /// schemes. horizon / dt must be an integer.
  double dt = 0.01;
  bool event_driven = false;
  RateArgument y_rate_argument = RateArgument::jumper;
  /// A step is halved by Brownian bridging while max_i lambda_i * dt
  /// exceeds this.
  double density_threshold = 1.0;
  int max_refinements = 16;
  /// Relative and absolute radius slack of the event-driven rate bounds.
  double bound_slack = 0.05;
};

/// Hooks into the time-stepped scheme. Each (possibly refined) interval
/// [t0, t1] reports its start state, every accepted main jump, and the
/// drift and noise increments applied at its end.
class StepObserver {
 public:
  virtual ~StepObserver() = default;
  virtual void on_interval_begin(double /*t0*/,
                                 std::span<const double> /*positions*/) {}
  virtual void on_jump(double /*t*/, std::size_t /*jumper*/,
                       std::span<const double> /*positions_after*/) {}
  virtual void on_interval_end(double /*t0*/, double /*t1*/,
                               std::span<const double> /*before_drift*/,
                               std::span<const double> /*drift*/,
                               std::span<const double> /*noise*/) {}
};

struct SystemState {
  double t = 0.0;
  std::uint64_t step = 0;  // completed base steps
  int dim = 1;
  std::vector<double> positions;  // n x dim, row-major
  std::vector<std::uint64_t> stream_ids;
  std::vector<PoissonStream> poisson;
  std::vector<JumpLogEntry> jump_log;

  std::size_t size() const { return stream_ids.size(); }
  std::span<const double> position(std::size_t i) const {
    return {positions.data() + i * static_cast<std::size_t>(dim),
            static_cast<std::size_t>(dim)};
  }
};

/// Fresh state at t = 0. Stream ids default to 0..n-1.
SystemState make_state(const DriverBundle& drivers,
                       std::vector<double> positions, int dim,
                       std::vector<std::uint64_t> stream_ids = {});

/// Initial positions uniform on [low, high]^d, read from each particle's
/// init stream (so coupled systems start from the same points).
std::vector<double> sample_initial(const DriverBundle& drivers, int dim,
                                   double low, double high,
                                   std::span<const std::uint64_t> stream_ids);

/// Advances the state by one base step of the time-stepped scheme. Drift
/// and diffusion use the state and measure at the start of each interval
/// and are applied at its end; main jumps inside the interval are processed
/// at their exact times in time order, with the measure rebuilt after each.
void step_system(SystemKind kind, SystemState& state, const ModelSpec& spec,
                 double dt, const DriverBundle& drivers,
                 const SimOptions& options = {},
                 const FlowField* flow = nullptr,
                 StepObserver* observer = nullptr);

inline void step_X(SystemState& s, const ModelSpec& spec, double dt,
                   const DriverBundle& drivers, const SimOptions& o = {}) {
  step_system(SystemKind::X, s, spec, dt, drivers, o);
}
inline void step_Y(SystemState& s, const ModelSpec& spec, double dt,
                   const DriverBundle& drivers, const SimOptions& o = {}) {
  step_system(SystemKind::Y, s, spec, dt, drivers, o);
}

/// Applies one main jump of `jumper` to an X-system configuration: the
/// jumper moves by psi(x_i, mu, h1) and every j != i by
/// Theta(x_i, x_j, mu, h1, h2[j]) / N, all evaluated at the pre-jump state.
/// Returns |psi|.
double apply_x_jump(const ModelSpec& spec, std::span<double> positions,
                    int dim, std::size_t jumper, double h1,
                    std::span<const double> h2);

/// Full path records of one system on the grid k * dt, k = 0..T/dt. With
/// `event_driven` the exact integrator for affine drift without diffusion is
/// used (InvalidInput if the model does not support it).
PathRecordSet simulate(SystemKind kind, const ModelSpec& spec,
                       std::span<const double> initial,
                       const SimOptions& options, const DriverBundle& drivers,
                       std::span<const std::uint64_t> stream_ids = {},
                       const FlowField* flow = nullptr,
                       StepObserver* observer = nullptr);

/// Test function on R^{d x N} (flat, row-major). An empty Hessian means the
/// function is affine.
struct TestFunction {
  std::function<double(std::span<const double>)> value;
  std::function<void(std::span<const double>, std::span<double>)> gradient;
  std::function<void(std::span<const double>, std::span<double>)> hessian;
};

struct GeneratorValue {
  double value = 0.0;
  double error_estimate = 0.0;
  bool converged = true;
};

/// L^N phi(x): drift and diffusion terms from the derivatives of phi plus
/// sum_i lambda(x_i) E[phi(x + Delta_i) - phi(x)], with the mark expectation
/// done by tensor Gauss-Legendre quadrature (8 vs 4 nodes give the error
/// estimate) or, for large N, by a fixed Monte Carlo rule.
GeneratorValue generator_apply(const ModelSpec& spec, const TestFunction& phi,
                               std::span<const double> x, double tol = 1e-8);

}  // namespace mfjump
