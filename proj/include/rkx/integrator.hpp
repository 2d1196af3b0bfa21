#pragma once

// Fixed-step and adaptive integration with an embedded pair.

#include "rkx/executor.hpp"
#include "rkx/method.hpp"
#include "rkx/schedule.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rkx {

using State = std::vector<double>;

struct IVP {
  std::string name;
  std::size_t dim = 0;
  RhsFunction f;
  State y0;
  double t0 = 0;
  double T = 1;
  /// Reference value of y(T), if one is available.
  std::function<State()> reference;
};

inline double max_norm_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

inline bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// ---------------------------------------------------------------- controller

enum class ControllerMode { I, PI };

struct ControllerConfig {
  double epsilon = 1e-6;
  double kappa = 0.9;
  std::optional<double> alpha;  ///< default 0.7 / p_hat
  double kappa_min = 0.2;
  double kappa_max = 5.0;
  std::optional<double> h0;     ///< default (T - t0) / 100
  ControllerMode mode = ControllerMode::I;
  std::optional<double> beta1;  ///< default 0.7 / p_hat
  std::optional<double> beta2;  ///< default 0.4 / p_hat

  void validate() const {
    if (!(epsilon > 0)) throw std::invalid_argument("controller: epsilon must be positive");
    if (!(kappa > 0 && kappa < 1)) throw std::invalid_argument("controller: kappa must lie in (0,1)");
    if (!(kappa_min > 0 && kappa_min < 1 && kappa_max > 1))
      throw std::invalid_argument("controller: need 0 < kappa_min < 1 < kappa_max");
    if (h0 && !(*h0 > 0)) throw std::invalid_argument("controller: h0 must be positive");
  }
};

struct ControlDecision {
  bool accepted = false;
  double h_next = 0;
};

/// Accept iff delta <= epsilon; h_next = clamp(kappa h (eps/delta)^alpha,
/// kappa_min h, kappa_max h). In PI mode with a previous accepted error the
/// accepted-step proposal is kappa h (eps/delta)^beta1 (prev/eps)^beta2.
inline ControlDecision control_step(const ControllerConfig& cfg, double h, double delta, int p_hat,
                                    std::optional<double> prev_delta = std::nullopt) {
  if (p_hat < 1) throw std::invalid_argument("controller needs an embedded order >= 1");
  ControlDecision d;
  d.accepted = delta <= cfg.epsilon;
  double factor;
  if (delta <= 0) {
    factor = cfg.kappa_max;
  } else if (cfg.mode == ControllerMode::PI && d.accepted && prev_delta && *prev_delta > 0) {
    const double b1 = cfg.beta1.value_or(0.7 / p_hat);
    const double b2 = cfg.beta2.value_or(0.4 / p_hat);
    factor = cfg.kappa * std::pow(cfg.epsilon / delta, b1) * std::pow(*prev_delta / cfg.epsilon, b2);
  } else {
    const double alpha = cfg.alpha.value_or(0.7 / p_hat);
    factor = cfg.kappa * std::pow(cfg.epsilon / delta, alpha);
  }
  d.h_next = h * std::clamp(factor, cfg.kappa_min, cfg.kappa_max);
  return d;
}

// ------------------------------------------------------------------ stepping

struct ExecutorConfig {
  enum class Kind { serial, parallel } kind = Kind::serial;
  std::size_t workers = 1;
  bool trace = false;
};

/// Reusable per-method stepping machinery (program, buffers, executor).
class Stepper {
 public:
  Stepper(const EmbeddedMethod& m, std::size_t dim, const ExecutorConfig& ex = {})
      : method_(m), program_(m.tableau), buffers_(m.stages(), dim), dim_(dim) {
    if (ex.kind == ExecutorConfig::Kind::parallel) {
      if (ex.workers < 1) throw std::invalid_argument("parallel executor needs at least one worker");
      executor_ = std::make_unique<ParallelExecutor>(program_, m.graph, build_schedule(m, ex.workers), ex.trace);
    } else {
      executor_ = std::make_unique<SerialExecutor>(program_, ex.trace);
    }
  }

  /// y_next = y + h sum b_i K_i and y_hat likewise, accumulated in stage order.
  void step(const RhsFunction& f, std::span<const double> y, double h, std::span<double> y_next,
            std::span<double> y_hat) {
    executor_->evaluate(f, y, h, buffers_);
    for (std::size_t k = 0; k < dim_; ++k) {
      double acc = 0, acc_hat = 0;
      for (std::size_t i = 0; i < program_.s; ++i) {
        const double Kik = buffers_.K(i)[k];
        if (program_.b[i] != 0) acc += program_.b[i] * Kik;
        if (program_.b_hat[i] != 0) acc_hat += program_.b_hat[i] * Kik;
      }
      y_next[k] = y[k] + h * acc;
      y_hat[k] = y[k] + h * acc_hat;
    }
  }

  [[nodiscard]] const Executor& executor() const { return *executor_; }
  [[nodiscard]] const EmbeddedMethod& method() const { return method_; }

 private:
  const EmbeddedMethod& method_;
  StageProgram program_;
  StepBuffers buffers_;
  std::size_t dim_;
  std::unique_ptr<Executor> executor_;
};

/// One serial step of a bare tableau: (y_next, y_hat).
inline std::pair<State, State> rk_step(const Tableau& t, const RhsFunction& f, const State& y, double h) {
  StageProgram prog(t);
  StepBuffers buf(t.stages(), y.size());
  SerialExecutor ex(prog);
  ex.evaluate(f, y, h, buf);
  State out(y.size()), hat(y.size());
  for (std::size_t k = 0; k < y.size(); ++k) {
    double acc = 0, acc_hat = 0;
    for (std::size_t i = 0; i < prog.s; ++i) {
      if (prog.b[i] != 0) acc += prog.b[i] * buf.K(i)[k];
      if (prog.b_hat[i] != 0) acc_hat += prog.b_hat[i] * buf.K(i)[k];
    }
    out[k] = y[k] + h * acc;
    hat[k] = y[k] + h * acc_hat;
  }
  return {std::move(out), std::move(hat)};
}

// --------------------------------------------------------------- integration

enum class RunStatus { ok, step_underflow, non_finite, max_steps };

inline const char* status_name(RunStatus s) {
  switch (s) {
    case RunStatus::ok: return "ok";
    case RunStatus::step_underflow: return "step_underflow";
    case RunStatus::non_finite: return "non_finite";
    case RunStatus::max_steps: return "max_steps";
  }
  return "?";
}

struct RunRecord {
  std::size_t steps_accepted = 0;
  std::size_t steps_rejected = 0;
  std::size_t f_evals = 0;
  std::size_t f_evals_seq = 0;
  double wall_time = 0;
  double t_final = 0;
  State final_state;
  std::optional<double> final_error;
  RunStatus status = RunStatus::ok;
  std::string message;
};

struct TrajectoryPoint {
  double t;
  State y;
};

struct RunResult {
  RunRecord record;
  std::vector<TrajectoryPoint> trajectory;  ///< accepted steps, when requested
};

struct IntegrateOptions {
  ExecutorConfig executor;
  bool keep_trajectory = false;
  std::optional<double> fixed_step;  ///< controller off, constant h (last step clipped)
  std::size_t max_steps = 50'000'000;
};

inline RunResult integrate(const EmbeddedMethod& m, const IVP& ivp, const ControllerConfig& cfg,
                           const IntegrateOptions& opt = {}) {
  if (!(ivp.T > ivp.t0)) throw std::invalid_argument("integrate: need T > t0");
  if (ivp.y0.size() != ivp.dim) throw std::invalid_argument("integrate: y0 has the wrong dimension");
  const bool adaptive = !opt.fixed_step;
  if (adaptive) {
    cfg.validate();
    if (m.tableau.embedded_order() < 1)
      throw std::invalid_argument(m.label() + ": adaptive stepping needs an embedded solution");
  } else if (!(*opt.fixed_step > 0)) {
    throw std::invalid_argument("integrate: fixed step must be positive");
  }

  Stepper stepper(m, ivp.dim, opt.executor);
  const std::size_t s = m.stages();
  const std::size_t s_seq = seq_stages(m.graph);
  const int p_hat = m.tableau.embedded_order();
  const double eps = std::numeric_limits<double>::epsilon();

  RunResult out;
  auto& rec = out.record;
  State y = ivp.y0, y_next(ivp.dim), y_hat(ivp.dim);
  double t = ivp.t0;
  double h = adaptive ? cfg.h0.value_or((ivp.T - ivp.t0) / 100) : *opt.fixed_step;
  std::optional<double> prev_delta;
  if (opt.keep_trajectory) out.trajectory.push_back({t, y});

  const auto started = std::chrono::steady_clock::now();
  while (t < ivp.T) {
    if (rec.steps_accepted + rec.steps_rejected >= opt.max_steps) {
      rec.status = RunStatus::max_steps;
      rec.message = "step budget exhausted at t=" + std::to_string(t);
      break;
    }
    if (!(h > 100 * eps * std::max(std::abs(t), std::abs(ivp.T)))) {
      rec.status = RunStatus::step_underflow;
      rec.message = "time step size driven to zero at t=" + std::to_string(t);
      break;
    }
    bool clipped = false;
    double h_try = h;
    // A sliver shorter than 1e-9 h left by rounding is folded into this step.
    if (t + h_try >= ivp.T || ivp.T - (t + h_try) < 1e-9 * h_try) {
      h_try = ivp.T - t;
      clipped = true;
    }
    stepper.step(ivp.f, y, h_try, y_next, y_hat);

    if (!all_finite(y_next) || !all_finite(y_hat)) {
      ++rec.steps_rejected;
      if (!adaptive) {
        rec.status = RunStatus::non_finite;
        rec.message = "non-finite stage value at t=" + std::to_string(t);
        break;
      }
      h = h_try * cfg.kappa_min;
      continue;
    }

    bool accept = true;
    if (adaptive) {
      const double delta = max_norm_diff(y_next, y_hat);
      const auto d = control_step(cfg, h_try, delta, p_hat, clipped ? std::nullopt : prev_delta);
      accept = d.accepted;
      if (accept) {
        if (!clipped) {
          prev_delta = delta;
          h = d.h_next;
        } else {
          h = std::max(h, d.h_next);
        }
      } else {
        h = d.h_next;
      }
    }
    if (!accept) {
      ++rec.steps_rejected;
      continue;
    }
    ++rec.steps_accepted;
    y.swap(y_next);
    t = clipped ? ivp.T : t + h_try;
    if (opt.keep_trajectory) out.trajectory.push_back({t, y});
  }
  rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  const auto total = rec.steps_accepted + rec.steps_rejected;
  rec.f_evals = total * s;
  rec.f_evals_seq = total * s_seq;
  rec.t_final = t;
  rec.final_state = y;
  if (rec.status == RunStatus::ok && ivp.reference) rec.final_error = max_norm_diff(y, ivp.reference());
  return out;
}

}  // namespace rkx
