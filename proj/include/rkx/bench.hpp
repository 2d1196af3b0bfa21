#pragma once

// Work-precision sweeps and the CSV schemas of `rkx analyze` and `rkx bench`.

#include "rkx/analysis.hpp"
#include "rkx/csv.hpp"
#include "rkx/integrator.hpp"
#include "rkx/method_spec.hpp"
#include "rkx/problems.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace rkx {

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// ------------------------------------------------------------------ analyze

inline const std::vector<std::string>& analysis_columns() {
  static const std::vector<std::string> cols{"label", "s",      "s_seq", "S",   "P",           "P_lower", "E",
                                             "I_real", "I_imag", "C_p1",  "eta", "eta_parallel", "defect"};
  return cols;
}

inline std::vector<std::string> analysis_fields(const AnalysisRow& r) {
  const auto& par = r.parallel;
  return {r.label,
          std::to_string(par.s),
          std::to_string(par.s_seq),
          csv::format(to_double(par.S)),
          std::to_string(par.P),
          std::to_string(par.P_lower),
          csv::format(to_double(par.E)),
          csv::format(r.stability.I_real),
          csv::format(r.stability.I_imag),
          csv::format(r.accuracy.C_p1),
          csv::format(r.accuracy.eta),
          csv::format(r.accuracy.eta_parallel),
          r.defect ? std::to_string(*r.defect) : std::string()};
}

// -------------------------------------------------------------------- bench

struct SweepPlan {
  std::vector<std::string> methods;
  std::string problem = "sb1";
  std::vector<double> tolerances{1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9, 1e-10, 1e-11};
  ExecutorConfig::Kind executor = ExecutorConfig::Kind::serial;
  std::vector<std::size_t> workers{1};
  int repetitions = 3;
  std::uint64_t seed = 1;
  ControllerMode mode = ControllerMode::I;
  std::filesystem::path tableau_dir = default_tableau_dir();
  std::filesystem::path reference_cache;  ///< empty: in-memory only

  void validate() const {
    if (methods.empty()) throw UsageError("bench needs at least one method");
    if (tolerances.empty()) throw UsageError("bench needs at least one tolerance");
    for (std::size_t k = 0; k < tolerances.size(); ++k) {
      if (!(tolerances[k] > 0)) throw UsageError("tolerances must be positive");
      if (k && !(tolerances[k] < tolerances[k - 1])) throw UsageError("tolerance ladder must be strictly decreasing");
    }
    if (repetitions < 1) throw UsageError("repetitions must be >= 1");
    if (workers.empty()) throw UsageError("bench needs at least one worker count");
    for (auto w : workers)
      if (w < 1) throw UsageError("worker counts must be >= 1");
  }

  /// Everything that determines the numerical columns, in a fixed format.
  [[nodiscard]] std::string canonical() const {
    std::string out = "problem=" + problem + ";seed=" + std::to_string(seed) + ";methods=";
    for (const auto& m : methods) out += m + ",";
    out += ";tol=";
    char buf[40];
    for (double t : tolerances) {
      std::snprintf(buf, sizeof buf, "%a,", t);
      out += buf;
    }
    out += ";executor=" + std::string(executor == ExecutorConfig::Kind::serial ? "serial" : "parallel");
    out += ";workers=";
    for (auto w : workers) out += std::to_string(w) + ",";
    out += ";reps=" + std::to_string(repetitions);
    out += ";mode=" + std::string(mode == ControllerMode::I ? "I" : "PI");
    return out;
  }
};

struct BenchRow {
  std::string method, problem;
  double tol = 0;
  std::optional<double> error;
  std::size_t f_evals = 0, f_evals_seq = 0, steps_accepted = 0, steps_rejected = 0;
  double wall_time = 0;
  std::size_t workers = 1;
  std::string status = "ok";
  std::optional<double> speedup;
  /// "" for the loosest tolerance, otherwise "ok", or "violation" when the
  /// error did not drop or the cost did not rise versus the previous one.
  std::string trend;
};

inline const std::vector<std::string>& bench_columns() {
  static const std::vector<std::string> cols{"method",   "problem",        "tol",           "error",    "f_evals",
                                             "f_evals_seq", "steps_accepted", "steps_rejected", "wall_time", "workers",
                                             "status",   "speedup",        "trend"};
  return cols;
}

inline std::vector<std::string> bench_fields(const BenchRow& r) {
  return {r.method,
          r.problem,
          csv::format(r.tol),
          csv::format(r.error),
          std::to_string(r.f_evals),
          std::to_string(r.f_evals_seq),
          std::to_string(r.steps_accepted),
          std::to_string(r.steps_rejected),
          csv::format(r.wall_time),
          std::to_string(r.workers),
          r.status,
          csv::format(r.speedup),
          r.trend};
}

inline std::string config_hash(const SweepPlan& plan) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(plan.canonical())));
  return buf;
}

inline std::string provenance_line(const SweepPlan& plan) {
  return "# rkx bench seed=" + std::to_string(plan.seed) + " config=" + config_hash(plan) + " " + plan.canonical();
}

namespace detail {

inline void mark_trends(std::vector<BenchRow>& rows) {
  std::map<std::pair<std::string, std::size_t>, const BenchRow*> last;
  for (auto& r : rows) {
    if (r.status != "ok" || !r.error) {
      r.trend = "failed";
      continue;
    }
    const auto key = std::make_pair(r.method, r.workers);
    if (auto it = last.find(key); it != last.end()) {
      const auto& prev = *it->second;
      r.trend = (*r.error < *prev.error && r.f_evals >= prev.f_evals) ? "ok" : "violation";
    }
    last[key] = &r;
  }
}

inline void mark_speedups(std::vector<BenchRow>& rows) {
  std::map<std::pair<std::string, double>, double> base;
  for (const auto& r : rows)
    if (r.workers == 1 && r.status == "ok") base[{r.method, r.tol}] = r.wall_time;
  for (auto& r : rows)
    if (auto it = base.find({r.method, r.tol}); it != base.end() && r.status == "ok" && r.wall_time > 0)
      r.speedup = it->second / r.wall_time;
}

}  // namespace detail

/// One row per (method, workers, tol). Cells that fail to build or integrate
/// become rows with a non-"ok" status; the sweep carries on.
inline std::vector<BenchRow> run_bench(const SweepPlan& plan) {
  plan.validate();
  auto problem = problem_by_name(plan.problem, plan.seed);
  attach_reference(problem, plan.reference_cache);

  std::vector<BenchRow> rows;
  for (const auto& sel : plan.methods) {
    std::optional<EmbeddedMethod> method;
    std::string build_error;
    try {
      method = build_method(sel, plan.tableau_dir);
    } catch (const std::exception& e) {
      build_error = e.what();
    }
    for (auto w : plan.workers) {
      for (double tol : plan.tolerances) {
        BenchRow row;
        row.method = method ? method->label() : sel;
        row.problem = problem.name;
        row.tol = tol;
        row.workers = w;
        if (!method) {
          row.status = "build_error";
          rows.push_back(row);
          continue;
        }
        ControllerConfig cfg;
        cfg.epsilon = tol;
        cfg.mode = plan.mode;
        IntegrateOptions opt;
        opt.executor.kind = plan.executor;
        opt.executor.workers = w;
        std::vector<double> times;
        try {
          for (int rep = 0; rep < plan.repetitions; ++rep) {
            const auto run = integrate(*method, problem.ivp, cfg, opt);
            times.push_back(run.record.wall_time);
            if (rep > 0) continue;
            const auto& rec = run.record;
            row.error = rec.final_error;
            row.f_evals = rec.f_evals;
            row.f_evals_seq = rec.f_evals_seq;
            row.steps_accepted = rec.steps_accepted;
            row.steps_rejected = rec.steps_rejected;
            row.status = status_name(rec.status);
            if (rec.status != RunStatus::ok) break;
          }
        } catch (const std::exception& e) {
          row.status = "exception";
          row.error.reset();
        }
        std::sort(times.begin(), times.end());
        if (!times.empty()) row.wall_time = times[times.size() / 2];
        rows.push_back(row);
      }
    }
  }
  detail::mark_trends(rows);
  detail::mark_speedups(rows);
  return rows;
}

inline void write_bench_csv(std::ostream& out, const SweepPlan& plan, const std::vector<BenchRow>& rows) {
  out << provenance_line(plan) << '\n';
  csv::write_row(out, bench_columns());
  for (const auto& r : rows) csv::write_row(out, bench_fields(r));
}

}  // namespace rkx
