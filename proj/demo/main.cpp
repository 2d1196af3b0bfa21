// Builds a few parallel-stage pairs, prints their analysis, then integrates
// the Arenstorf orbit over one period with each of them.

#include "rkx/rkx.hpp"

#include <cstdio>
#include <string>

int main() {
  auto problem = rkx::problem_by_name("sb1", 1);
  rkx::attach_reference(problem, {});

  std::printf("%-28s %3s %5s %3s %7s %8s\n", "method", "s", "s_seq", "P", "I_imag", "eta");
  const char* selectors[] = {"ex-euler:6", "ex-midpoint:8", "dc:6", "dc:6:0:chebyshev", "bs5"};
  for (const char* sel : selectors) {
    const auto m = rkx::build_method(sel, rkx::default_tableau_dir());
    const auto row = rkx::analyze_method(m);
    std::printf("%-28s %3zu %5zu %3zu %7.3f %8.4f\n", row.label.c_str(), row.parallel.s, row.parallel.s_seq,
                row.parallel.P, row.stability.I_imag, row.accuracy.eta.value_or(0.0));
  }

  std::printf("\n%-28s %10s %8s %8s %6s %s\n", "method", "error", "f_evals", "f_seq", "rej", "status");
  rkx::ControllerConfig cfg;
  cfg.epsilon = 1e-9;
  rkx::IntegrateOptions opt;
  opt.executor.kind = rkx::ExecutorConfig::Kind::parallel;
  opt.executor.workers = 2;
  for (const char* sel : selectors) {
    const auto m = rkx::build_method(sel, rkx::default_tableau_dir());
    const auto rec = rkx::integrate(m, problem.ivp, cfg, opt).record;
    std::printf("%-28s %10.2e %8zu %8zu %6zu %s\n", m.label().c_str(), rec.final_error.value_or(-1.0), rec.f_evals,
                rec.f_evals_seq, rec.steps_rejected, rkx::status_name(rec.status));
  }
}
