// Acceptance run: one PASS/FAIL (or WARN for the hardware-dependent speedup)
// line per criterion. Exit status is nonzero iff some line is FAIL.

#include "rkx/rkx.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace {

using namespace rkx;

enum class Verdict { pass, fail, warn };

struct Outcome {
  Verdict verdict = Verdict::pass;
  std::string detail;
};

struct Notes {
  std::ostringstream text;
  bool ok = true;
  void check(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      text << " [" << what << "]";
    }
  }
  Outcome done(const std::string& summary) {
    return {ok ? Verdict::pass : Verdict::fail, ok ? summary : "mismatch:" + text.str()};
  }
};

std::string fmt(double v, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

// ---------------------------------------------------------------- criteria

Outcome stage_counts() {
  Notes n;
  int checked = 0;
  for (int p : {4, 6, 8, 10, 12}) {
    const auto e = build_ex_euler(p).stages();
    const auto d0 = build_dc_euler(p, 0).stages();
    const auto d1 = build_dc_euler(p, 1).stages();
    n.check(e == static_cast<std::size_t>((p * p - p + 2) / 2), "ex-euler(" + std::to_string(p) + ") s=" + std::to_string(e));
    n.check(d0 == static_cast<std::size_t>((p - 1) * (p - 1) + 1), "dc0(" + std::to_string(p) + ") s=" + std::to_string(d0));
    n.check(d1 == static_cast<std::size_t>(p * (p - 1)), "dc1(" + std::to_string(p) + ") s=" + std::to_string(d1));
    checked += 3;
  }
  for (int p : {4, 6, 8, 10, 12, 14, 18}) {
    const auto m = build_ex_midpoint(p).stages();
    n.check(m == static_cast<std::size_t>((p * p + 4) / 4), "ex-midpoint(" + std::to_string(p) + ") s=" + std::to_string(m));
    ++checked;
  }
  return n.done(std::to_string(checked) + " tableaus, all stage counts exact");
}

Outcome seq_stage_counts() {
  Notes n;
  for (int p : {4, 6, 8, 10, 12}) {
    const auto ps = std::to_string(p);
    n.check(seq_stages(build_ex_euler(p).graph) == static_cast<std::size_t>(p), "ex-euler " + ps);
    n.check(seq_stages(build_dc_euler(p, 0).graph) == static_cast<std::size_t>(2 * (p - 1)), "dc0 " + ps);
    const auto d1 = build_dc_euler(p, 1);
    n.check(seq_stages(d1.graph) == d1.stages(), "dc1 " + ps);
    const auto half = build_dc_euler(p, Rational(1, 2));
    n.check(seq_stages(half.graph) == half.stages(), "dc1/2 " + ps);
  }
  for (int p : {4, 6, 8, 10, 12, 14, 18})
    n.check(seq_stages(build_ex_midpoint(p).graph) == static_cast<std::size_t>(p), "ex-midpoint " + std::to_string(p));
  return n.done("s_seq = p (extrapolation), 2(p-1) (dc theta=0), s (dc theta!=0)");
}

Outcome parallel_table() {
  Notes n;
  const int ps[] = {6, 10, 14, 18};
  const double S[] = {1.67, 2.60, 3.57, 4.56};
  const std::size_t P[] = {2, 3, 4, 5};
  const double E[] = {0.83, 0.87, 0.89, 0.91};
  std::string got;
  for (int k = 0; k < 4; ++k) {
    const auto r = parallel_metrics(build_ex_midpoint(ps[k]));
    const double s = to_double(r.S), e = to_double(r.E);
    const auto tag = "p=" + std::to_string(ps[k]);
    n.check(std::abs(s - S[k]) <= 0.005, tag + " S=" + fmt(s));
    n.check(r.P == P[k], tag + " P=" + std::to_string(r.P));
    n.check(std::abs(e - E[k]) <= 0.005, tag + " E=" + fmt(e));
    got += " " + tag + ":" + fmt(s, 3) + "/" + std::to_string(r.P) + "/" + fmt(e, 3);
  }
  return n.done("S/P/E" + got);
}

Outcome order_verification() {
  Notes n;
  auto sharp = [&](const EmbeddedMethod& m, int p, int p_hat, double tol) {
    OrderChecker checker(m.tableau);
    const auto v = checker.verify(WeightSet::principal, tol, p + 1);
    const auto e = checker.verify(WeightSet::embedded, tol, p_hat);
    n.check(v.order == p, m.label() + " order " + std::to_string(v.order));
    n.check(e.order >= p_hat, m.label() + " embedded " + std::to_string(e.order));
  };
  int count = 0;
  for (int p = 2; p <= 8; ++p, ++count) {
    BuildOptions opt;
    opt.verify_up_to = p + 1;
    sharp(build_ex_euler(p, opt), p, p - 1, 0);
  }
  for (int p = 4; p <= 10; p += 2, ++count) {
    BuildOptions opt;
    opt.verify_up_to = p + 1;
    sharp(build_ex_midpoint(p, opt), p, p - 2, 0);
  }
  for (int p = 3; p <= 6; ++p) {
    BuildOptions opt;
    opt.verify_up_to = p + 1;
    for (const Rational& theta : {Rational(0), Rational(1, 2), Rational(1)}) {
      sharp(build_dc_euler(p, theta, NodeFamily::equispaced, opt), p, p - 1, 0);
      ++count;
    }
    sharp(build_dc_euler(p, 0, NodeFamily::chebyshev_lobatto, opt), p, p - 1, 1e-13);
    ++count;
  }
  return n.done(std::to_string(count) + " methods: exact (chebyshev to 1e-13) order p, order p+1 fails");
}

Outcome tree_counts() {
  Notes n;
  const auto& f = Forest::up_to(10);
  n.check(f.cumulative_count(4) == 8, "order 4: " + std::to_string(f.cumulative_count(4)));
  n.check(f.cumulative_count(10) == 1205, "order 10: " + std::to_string(f.cumulative_count(10)));
  return n.done("cumulative conditions 8 (order 4), 1205 (order 10)");
}

Outcome taylor_identity() {
  Notes n;
  int count = 0;
  for (int p = 2; p <= 12; ++p) {
    std::vector<EmbeddedMethod> ms{build_ex_euler(p)};
    if (p % 2 == 0 && p >= 4) ms.push_back(build_ex_midpoint(p));
    for (const auto& m : ms) {
      const auto r = stability_polynomial(m.tableau);
      const auto t = taylor_polynomial(p);
      bool eq = r.exact && r.coeffs.size() == t.coeffs.size();
      for (std::size_t k = 0; eq && k < r.coeffs.size(); ++k) eq = r.coeffs[k].rational() == t.coeffs[k].rational();
      n.check(eq, m.label());
      ++count;
    }
  }
  return n.done(std::to_string(count) + " polynomials equal sum_{k<=p} z^k/k! exactly");
}

Outcome imaginary_intervals() {
  Notes n;
  std::string got;
  const int ords[] = {4, 7, 8, 11};
  const double ex[] = {2.83, 1.76, 3.40, 1.70};
  const double dc[] = {2.93, 1.82, 3.52, 1.75};
  for (int k = 0; k < 4; ++k) {
    const double a = imag_interval(stability_polynomial(build_ex_euler(ords[k]).tableau)).value();
    const double b = imag_interval(stability_polynomial(build_dc_euler(ords[k], 0).tableau)).value();
    n.check(std::abs(a - ex[k]) <= 0.005, "ex " + std::to_string(ords[k]) + "=" + fmt(a));
    n.check(std::abs(b - dc[k]) <= 0.01, "dc " + std::to_string(ords[k]) + "=" + fmt(b));
    got += " " + std::to_string(ords[k]) + ":" + fmt(a, 3) + "/" + fmt(b, 3);
    if (ords[k] % 2 == 0) {
      const double c = imag_interval(stability_polynomial(build_ex_midpoint(ords[k]).tableau)).value();
      n.check(std::abs(c - ex[k]) <= 0.005, "ex-mid " + std::to_string(ords[k]) + "=" + fmt(c));
    }
  }
  for (int p : {5, 6, 9, 10}) {
    const double a = imag_interval(stability_polynomial(build_ex_euler(p).tableau)).value();
    const double b = imag_interval(stability_polynomial(build_dc_euler(p, 0).tableau)).value();
    n.check(a == 0, "ex " + std::to_string(p) + "=" + fmt(a));
    n.check(b == 0, "dc " + std::to_string(p) + "=" + fmt(b));
  }
  return n.done("ex/dc" + got + "; orders 5,6,9,10 -> 0");
}

/// Fixed-step convergence on the B1 system over [0,1]. The slope is the
/// least-squares fit of log(error) against log(h) over the five smallest
/// steps whose error is still above 1e-11, i.e. the asymptotic range just
/// above the roundoff floor.
struct SlopeFit {
  double slope = 0;
  std::size_t points = 0;
  double h_min = 0, h_max = 0;
};

IVP convergence_problem() {
  auto ivp = b1().ivp;
  ivp.T = 1;
  return ivp;
}

const State& convergence_reference() {
  static const State ref = [] {
    IntegrateOptions opt;
    opt.fixed_step = 1.0 / 256;
    return integrate(build_ex_midpoint(12), convergence_problem(), {}, opt).record.final_state;
  }();
  return ref;
}

SlopeFit convergence_slope(const EmbeddedMethod& m) {
  const auto ivp = convergence_problem();
  const auto& exact = convergence_reference();
  std::vector<double> lx, ly;
  int last_n = 0;
  for (int k = 0; k <= 48; ++k) {
    const int N = static_cast<int>(std::lround(std::pow(2.0, k / 4.0)));
    if (N == last_n) continue;
    last_n = N;
    IntegrateOptions opt;
    opt.fixed_step = 1.0 / N;
    const auto run = integrate(m, ivp, {}, opt);
    if (run.record.status != RunStatus::ok) continue;
    const double err = max_norm_diff(run.record.final_state, exact);
    if (err <= 1e-11) break;
    lx.push_back(std::log(1.0 / N));
    ly.push_back(std::log(err));
  }
  const std::size_t keep = std::min<std::size_t>(5, lx.size());
  lx.erase(lx.begin(), lx.end() - static_cast<std::ptrdiff_t>(keep));
  ly.erase(ly.begin(), ly.end() - static_cast<std::ptrdiff_t>(keep));
  SlopeFit fit;
  fit.points = keep;
  if (keep < 3) return fit;
  fit.h_max = std::exp(lx.front());
  fit.h_min = std::exp(lx.back());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < keep; ++i) mx += lx[i], my += ly[i];
  mx /= keep;
  my /= keep;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < keep; ++i) sxy += (lx[i] - mx) * (ly[i] - my), sxx += (lx[i] - mx) * (lx[i] - mx);
  fit.slope = sxy / sxx;
  return fit;
}

Outcome convergence() {
  Notes n;
  std::vector<EmbeddedMethod> ms;
  for (int p = 2; p <= 10; ++p) ms.push_back(build_ex_euler(p));
  for (int p = 4; p <= 10; p += 2) ms.push_back(build_ex_midpoint(p));
  for (int p = 3; p <= 10; ++p) {
    ms.push_back(build_dc_euler(p, 0));
    ms.push_back(build_dc_euler(p, 1));
  }
  for (int p = 3; p <= 6; ++p) ms.push_back(build_dc_euler(p, 0, NodeFamily::chebyshev_lobatto));
  std::size_t within = 0;
  for (const auto& m : ms) {
    const auto fit = convergence_slope(m);
    const bool ok = fit.points >= 3 && std::abs(fit.slope - m.order()) <= 0.25;
    within += ok;
    n.check(ok, m.label() + " slope " + fmt(fit.slope) + " (" + std::to_string(fit.points) + " pts, h " +
                    fmt(fit.h_max, 2) + ".." + fmt(fit.h_min, 2) + ")");
  }
  if (n.ok) return n.done(std::to_string(ms.size()) + " methods on b1 over [0,1], all slopes within p +- 0.25");
  return {Verdict::fail, std::to_string(within) + "/" + std::to_string(ms.size()) + " within p +- 0.25;" + n.text.str()};
}

Outcome controller() {
  Notes n;
  ControllerConfig cfg;
  auto rel = [](double a, double b) { return std::abs(a / b - 1); };
  const auto a = control_step(cfg, 0.1, 1e-8, 7);
  const auto r = control_step(cfg, 0.1, 1e-4, 7);
  const auto c = control_step(cfg, 0.1, 1e-40, 7);
  n.check(a.accepted && rel(a.h_next, 0.09 * std::pow(100.0, 0.1)) <= 1e-12, "accept example " + fmt(a.h_next, 8));
  n.check(!r.accepted && rel(r.h_next, 0.09 * std::pow(0.01, 0.1)) <= 1e-12, "reject example " + fmt(r.h_next, 8));
  n.check(c.accepted && rel(c.h_next, 0.5) <= 1e-12, "kappa_max example " + fmt(c.h_next, 8));
  for (int p_hat = 1; p_hat <= 11; ++p_hat)
    for (double delta = 1.01e-6; delta < 1e6; delta *= 3.7) {
      const auto d = control_step(cfg, 1.0, delta, p_hat);
      n.check(!d.accepted && d.h_next < 1.0, "rejected step did not shrink");
    }
  // Clamp engages exactly where the raw factor crosses the bounds.
  const int p_hat = 5;
  const double alpha = 0.7 / p_hat;
  const double at_max = cfg.epsilon / std::pow(cfg.kappa_max / cfg.kappa, 1 / alpha);
  const double at_min = cfg.epsilon / std::pow(cfg.kappa_min / cfg.kappa, 1 / alpha);
  n.check(control_step(cfg, 1, at_max * 0.999, p_hat).h_next == cfg.kappa_max, "no clamp below delta*");
  n.check(control_step(cfg, 1, at_max * 1.001, p_hat).h_next < cfg.kappa_max, "clamped above delta*");
  n.check(control_step(cfg, 1, at_min * 1.001, p_hat).h_next == cfg.kappa_min, "no min clamp");
  n.check(control_step(cfg, 1, at_min * 0.999, p_hat).h_next > cfg.kappa_min, "min clamp too early");
  return n.done("h_next " + fmt(a.h_next, 6) + " / " + fmt(r.h_next, 6) + " / " + fmt(c.h_next, 6) +
                "; rejections shrink; clamps at kappa_min, kappa_max");
}

Outcome executor_equivalence() {
  Notes n;
  const auto m = build_ex_midpoint(8);
  const auto prob = sb1();
  ControllerConfig cfg;
  cfg.epsilon = 1e-8;
  IntegrateOptions serial;
  serial.keep_trajectory = true;
  std::size_t steps = 0;
  for (std::size_t w : {2, 3, 4}) {
    auto par = serial;
    par.executor = {ExecutorConfig::Kind::parallel, w, false};
    const auto a = integrate(m, prob.ivp, cfg, serial);
    const auto b = integrate(m, prob.ivp, cfg, par);
    bool same = a.trajectory.size() == b.trajectory.size();
    for (std::size_t k = 0; same && k < a.trajectory.size(); ++k)
      same = a.trajectory[k].t == b.trajectory[k].t && a.trajectory[k].y == b.trajectory[k].y;
    n.check(same, std::to_string(w) + " workers differ");
    steps = a.trajectory.size() - 1;
  }
  return n.done("sb1, ex-midpoint(8), eps=1e-8: " + std::to_string(steps) +
                " accepted steps bitwise identical for 2, 3, 4 workers");
}

Outcome speedup() {
  const auto m = build_ex_midpoint(10);
  const auto prob = problem_by_name("nbody:100");
  ControllerConfig cfg;
  cfg.epsilon = 1e-8;
  auto timed = [&](std::size_t workers) {
    IntegrateOptions opt;
    opt.executor = {ExecutorConfig::Kind::parallel, workers, false};
    std::vector<double> t;
    for (int rep = 0; rep < 3; ++rep) t.push_back(integrate(m, prob.ivp, cfg, opt).record.wall_time);
    std::sort(t.begin(), t.end());
    return t[1];
  };
  const double t1 = timed(1), t3 = timed(3);
  const double s = t1 / t3, theory = to_double(parallel_metrics(m).S);
  const auto cores = std::thread::hardware_concurrency();
  const std::string detail = "nbody:100, ex-midpoint(10), 3 workers: " + fmt(s, 3) + "x of theory " + fmt(theory, 3) +
                             " (" + fmt(100 * s / theory, 3) + "%), " + std::to_string(cores) + " hardware threads";
  return {s >= 0.75 * theory ? Verdict::pass : Verdict::warn, detail};
}

Outcome dc_defect() {
  Notes n;
  std::string got;
  for (int p : {4, 6, 8}) {
    const auto d = embedded_defect(build_dc_euler(p, 0));
    n.check(d >= 1 && d <= 3, "p=" + std::to_string(p) + " defect " + std::to_string(d));
    got += " p=" + std::to_string(p) + ":" + std::to_string(d);
  }
  return n.done("order-p conditions missed by the embedded weights:" + got);
}

Outcome ranking() {
  Notes n;
  struct Entry {
    std::string label;
    double eta, per_stage;
  };
  std::vector<Entry> es;
  for (const auto& m : {build_ex_euler(8), build_ex_midpoint(8), build_dc_euler(8, 0)}) {
    const auto acc = accuracy_report(m);
    const double ir = real_interval(stability_polynomial(m.tableau)).value();
    es.push_back({m.label(), acc.eta.value_or(0), ir / static_cast<double>(m.stages())});
  }
  auto order_by = [&](auto key) {
    std::vector<std::size_t> idx{0, 1, 2};
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return key(es[a]) > key(es[b]); });
    return idx;
  };
  const auto by_eta = order_by([](const Entry& e) { return e.eta; });
  const auto by_int = order_by([](const Entry& e) { return e.per_stage; });
  n.check(by_eta == by_int, "orderings differ");
  std::string got;
  for (auto i : by_eta) got += " " + es[i].label + "(eta " + fmt(es[i].eta, 3) + ", I_real/s " + fmt(es[i].per_stage, 3) + ")";
  return n.done("same order:" + got);
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"stage-counts", stage_counts},
      {"seq-stage-counts", seq_stage_counts},
      {"parallel-metrics", parallel_table},
      {"order-verification", order_verification},
      {"tree-counts", tree_counts},
      {"taylor-identity", taylor_identity},
      {"imaginary-intervals", imaginary_intervals},
      {"convergence", convergence},
      {"controller", controller},
      {"executor-equivalence", executor_equivalence},
      {"speedup", speedup},
      {"dc-defect", dc_defect},
      {"ranking", ranking},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    const auto started = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {Verdict::fail, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    const char* tag = o.verdict == Verdict::pass ? "PASS" : o.verdict == Verdict::warn ? "WARN" : "FAIL";
    if (o.verdict == Verdict::fail) ++failures;
    std::printf("%s %-22s %s (%.1fs)\n", tag, name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
