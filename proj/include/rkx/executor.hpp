#pragma once

// Stage evaluation for one Runge-Kutta step in double precision.
//
// Both executors compute stage i with the same code:
//   acc_k = sum_{j ascending} a_ij K_jk,  Y_ik = y_k + h acc_k,  K_i = f(Y_i)
// and the two output combinations run on the calling thread in stage order,
// so results do not depend on which worker evaluated what.

#include "rkx/method.hpp"
#include "rkx/schedule.hpp"

#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace rkx {

/// Autonomous right-hand side: writes f(y) into dy. Must be safe to call
/// concurrently on distinct arguments when used with the parallel executor.
using RhsFunction = std::function<void(std::span<const double> y, std::span<double> dy)>;

/// Tableau coefficients rounded to double, A stored by rows without zeros.
struct StageProgram {
  std::size_t s = 0;
  std::vector<std::vector<std::pair<std::size_t, double>>> rows;
  std::vector<double> b, b_hat;

  explicit StageProgram(const Tableau& t) : s(t.stages()), rows(t.stages()) {
    for (std::size_t i = 0; i < s; ++i)
      for (std::size_t j = 0; j < i; ++j)
        if (!t.a(i, j).is_zero()) rows[i].emplace_back(j, t.a(i, j).to_double());
    for (const auto& x : t.b()) b.push_back(x.to_double());
    for (const auto& x : t.b_hat()) b_hat.push_back(x.to_double());
  }
};

/// One entry per stage evaluation when tracing is on. Tickets come from a
/// shared counter: `begin` is drawn after the inputs were observed complete,
/// `end` after K_i was written.
struct TraceEvent {
  std::size_t stage = 0;
  std::size_t worker = 0;
  std::uint64_t begin = 0;
  std::uint64_t end = 0;
};

/// Empty string when every stage ran once and after all its predecessors.
inline std::string validate_trace(const StageGraph& g, const std::vector<TraceEvent>& trace) {
  const auto s = g.stages();
  std::vector<const TraceEvent*> by_stage(s, nullptr);
  for (const auto& e : trace) {
    if (e.stage >= s) return "trace names unknown stage " + std::to_string(e.stage);
    if (by_stage[e.stage]) return "stage " + std::to_string(e.stage) + " ran twice";
    by_stage[e.stage] = &e;
  }
  for (std::size_t i = 0; i < s; ++i) {
    if (!by_stage[i]) return "stage " + std::to_string(i) + " never ran";
    for (auto j : g.predecessors(i))
      if (by_stage[j]->end >= by_stage[i]->begin)
        return "stage " + std::to_string(i) + " started before predecessor " + std::to_string(j) + " finished";
  }
  return {};
}

class StepBuffers {
 public:
  StepBuffers(std::size_t s, std::size_t dim) : dim_(dim), Y_(s * dim), K_(s * dim) {}
  std::span<double> Y(std::size_t i) { return {Y_.data() + i * dim_, dim_}; }
  std::span<double> K(std::size_t i) { return {K_.data() + i * dim_, dim_}; }
  [[nodiscard]] std::span<const double> K(std::size_t i) const { return {K_.data() + i * dim_, dim_}; }
  [[nodiscard]] std::size_t dim() const { return dim_; }

 private:
  std::size_t dim_;
  std::vector<double> Y_, K_;
};

namespace detail {

inline void compute_stage(const StageProgram& prog, const RhsFunction& f, std::span<const double> y, double h,
                          StepBuffers& buf, std::size_t i) {
  auto Y = buf.Y(i);
  const auto dim = buf.dim();
  const auto& row = prog.rows[i];
  for (std::size_t k = 0; k < dim; ++k) {
    double acc = 0;
    for (const auto& [j, a] : row) acc += a * buf.K(j)[k];
    Y[k] = y[k] + h * acc;
  }
  f(Y, buf.K(i));
}

}  // namespace detail

class Executor {
 public:
  virtual ~Executor() = default;
  /// Fills K_1..K_s for the step from y with size h.
  virtual void evaluate(const RhsFunction& f, std::span<const double> y, double h, StepBuffers& buf) = 0;
  [[nodiscard]] virtual std::size_t workers() const = 0;
  /// Trace of the most recent step (empty unless tracing was requested).
  [[nodiscard]] virtual const std::vector<TraceEvent>& trace() const = 0;
};

class SerialExecutor final : public Executor {
 public:
  explicit SerialExecutor(const StageProgram& prog, bool trace = false) : prog_(prog), tracing_(trace) {}

  void evaluate(const RhsFunction& f, std::span<const double> y, double h, StepBuffers& buf) override {
    trace_.clear();
    std::uint64_t ticket = 0;
    for (std::size_t i = 0; i < prog_.s; ++i) {
      const auto begin = ticket++;
      detail::compute_stage(prog_, f, y, h, buf, i);
      if (tracing_) trace_.push_back({i, 0, begin, ticket++});
    }
  }
  [[nodiscard]] std::size_t workers() const override { return 1; }
  [[nodiscard]] const std::vector<TraceEvent>& trace() const override { return trace_; }

 private:
  const StageProgram& prog_;
  bool tracing_;
  std::vector<TraceEvent> trace_;
};

/// Persistent worker threads following a static Schedule. The calling thread
/// acts as worker 0. Stage completion is published through per-stage epoch
/// flags, so a waiting worker blocks only on the stages it reads.
class ParallelExecutor final : public Executor {
 public:
  ParallelExecutor(const StageProgram& prog, const StageGraph& graph, Schedule schedule, bool trace = false)
      : prog_(prog), graph_(graph), schedule_(std::move(schedule)), tracing_(trace), done_(prog.s) {
    if (schedule_.lanes.empty()) throw std::invalid_argument("parallel executor needs at least one worker");
    for (auto& d : done_) d.store(0, std::memory_order_relaxed);
    for (std::size_t w = 1; w < schedule_.lanes.size(); ++w) threads_.emplace_back([this, w] { worker_loop(w); });
  }

  ~ParallelExecutor() override {
    stop_.store(true, std::memory_order_release);
    epoch_.fetch_add(1, std::memory_order_acq_rel);
    epoch_.notify_all();
    for (auto& t : threads_) t.join();
  }

  ParallelExecutor(const ParallelExecutor&) = delete;
  ParallelExecutor& operator=(const ParallelExecutor&) = delete;

  void evaluate(const RhsFunction& f, std::span<const double> y, double h, StepBuffers& buf) override {
    f_ = &f;
    y_ = y;
    h_ = h;
    buf_ = &buf;
    error_ = nullptr;
    ticket_.store(0, std::memory_order_relaxed);
    trace_.clear();
    finished_.store(0, std::memory_order_relaxed);
    const auto e = epoch_.fetch_add(1, std::memory_order_acq_rel) + 1;
    epoch_.notify_all();
    run_lane(0, e);
    const auto others = static_cast<std::uint64_t>(threads_.size());
    for (auto got = finished_.load(std::memory_order_acquire); got != others;
         got = finished_.load(std::memory_order_acquire))
      finished_.wait(got, std::memory_order_acquire);
    if (error_) std::rethrow_exception(error_);
  }

  [[nodiscard]] std::size_t workers() const override { return schedule_.lanes.size(); }
  [[nodiscard]] const std::vector<TraceEvent>& trace() const override { return trace_; }
  [[nodiscard]] const Schedule& schedule() const { return schedule_; }

 private:
  void worker_loop(std::size_t w) {
    std::uint64_t seen = 0;
    for (;;) {
      auto e = epoch_.load(std::memory_order_acquire);
      while (e == seen) {
        epoch_.wait(e, std::memory_order_acquire);
        e = epoch_.load(std::memory_order_acquire);
      }
      seen = e;
      if (stop_.load(std::memory_order_acquire)) return;
      run_lane(w, e);
      finished_.fetch_add(1, std::memory_order_acq_rel);
      finished_.notify_all();
    }
  }

  void run_lane(std::size_t w, std::uint64_t e) {
    bool failed = false;
    for (auto i : schedule_.lanes[w]) {
      for (auto j : graph_.predecessors(i)) {
        for (auto v = done_[j].load(std::memory_order_acquire); v != e; v = done_[j].load(std::memory_order_acquire))
          done_[j].wait(v, std::memory_order_acquire);
      }
      // After a failure the remaining stages are only marked done so that
      // nobody waits forever; the step is rethrown by the coordinator.
      if (!failed) {
        const auto begin = ticket_.fetch_add(1, std::memory_order_acq_rel);
        try {
          detail::compute_stage(prog_, *f_, y_, h_, *buf_, i);
        } catch (...) {
          failed = true;
          std::lock_guard lock(mutex_);
          if (!error_) error_ = std::current_exception();
        }
        const auto end = ticket_.fetch_add(1, std::memory_order_acq_rel);
        if (tracing_) {
          std::lock_guard lock(mutex_);
          trace_.push_back({i, w, begin, end});
        }
      }
      done_[i].store(e, std::memory_order_release);
      done_[i].notify_all();
    }
  }

  const StageProgram& prog_;
  const StageGraph& graph_;
  Schedule schedule_;
  bool tracing_;

  std::vector<std::atomic<std::uint64_t>> done_;
  std::atomic<std::uint64_t> epoch_{0};
  std::atomic<std::uint64_t> finished_{0};
  std::atomic<std::uint64_t> ticket_{0};
  std::atomic<bool> stop_{false};
  std::vector<std::thread> threads_;

  const RhsFunction* f_ = nullptr;
  std::span<const double> y_;
  double h_ = 0;
  StepBuffers* buf_ = nullptr;
  std::mutex mutex_;
  std::exception_ptr error_;
  std::vector<TraceEvent> trace_;
};

}  // namespace rkx
