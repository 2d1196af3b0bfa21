#pragma once

// Per-method figures of merit: stage parallelism, stability intervals,
// principal error norm, accuracy efficiency and the embedded defect.

#include "rkx/method.hpp"
#include "rkx/order_conditions.hpp"
#include "rkx/schedule.hpp"
#include "rkx/stability.hpp"
#include "rkx/stage_graph.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

namespace rkx {

struct ParallelReport {
  std::size_t s = 0;
  std::size_t s_seq = 0;
  Rational S = 1;
  std::size_t P = 1;
  /// Lower end of the processor range. Equal to P when P is known to be
  /// minimal; for arbitrary tableaus only ceil(S) <= P_min <= P is claimed.
  std::size_t P_lower = 1;
  Rational E = 1;
};

inline std::size_t ceil_div(const Rational& x) {
  const Integer n = numerator(x), d = denominator(x);
  return static_cast<std::size_t>(Integer((n + d - 1) / d).convert_to<unsigned long long>());
}

inline ParallelReport parallel_metrics(const EmbeddedMethod& m) {
  ParallelReport r;
  r.s = m.stages();
  r.s_seq = seq_stages(m.graph);
  r.S = Rational(static_cast<long>(r.s), static_cast<long>(r.s_seq));
  const auto lower = ceil_div(r.S);
  r.P_lower = lower;

  auto achieves = [&](std::size_t w) { return build_schedule(m, w).output_time == r.s_seq; };
  if (r.s_seq == r.s) {
    r.P = 1;
  } else if (is_extrapolation(m)) {
    const auto bins = detail::first_fit_decreasing(detail::chain_lengths(m), r.s_seq - 1);
    if (bins.empty()) throw std::logic_error(m.label() + ": a chain is longer than the critical path");
    r.P = bins.size();
    if (!achieves(r.P)) throw std::logic_error(m.label() + ": chain packing misses the critical path");
  } else if (m.family == Family::dc_euler) {
    std::size_t widest = 1;
    for (const auto& row : m.groups) widest = std::max(widest, row.size());
    r.P = widest;
    if (!achieves(r.P)) {
      r.P = lower;
      while (r.P < r.s && !achieves(r.P)) ++r.P;
    }
  } else {
    r.P = lower;
    while (r.P < r.s && !achieves(r.P)) ++r.P;
  }
  if (r.P < lower) throw std::logic_error(m.label() + ": processor count below ceil(S)");
  if (is_extrapolation(m) || m.family == Family::dc_euler || r.P == lower) r.P_lower = r.P;
  r.E = r.S / static_cast<long>(r.P);
  return r;
}

/// (sum over order-(p+1) trees of the squared residual)^{1/2}, from exact
/// residuals when the tableau is exact. Empty when p+1 exceeds the forest.
inline std::optional<double> principal_error_norm(const Tableau& t,
                                                  ResidualConvention conv = ResidualConvention::plain) {
  const int q = t.order() + 1;
  if (q > kMaxTreeOrder) return std::nullopt;
  OrderChecker checker(t);
  if (t.is_exact()) {
    Rational sum = 0;
    for (const auto& r : checker.residuals(q, WeightSet::principal, conv)) sum += r.value.rational() * r.value.rational();
    return std::sqrt(to_double(sum));
  }
  HighFloat sum = 0;
  for (const auto& r : checker.residuals(q, WeightSet::principal, conv)) sum += r.value.high() * r.value.high();
  return sqrt(sum).convert_to<double>();
}

/// eta = (1/s) (1/C)^{1/(p+1)}; throws when C = 0 (order not sharp).
inline double accuracy_efficiency(std::size_t s, int p, double C) {
  if (!(C > 0)) throw std::domain_error("accuracy efficiency needs a positive principal error norm");
  return std::pow(1.0 / C, 1.0 / (p + 1)) / static_cast<double>(s);
}

struct AccuracyReport {
  std::optional<double> C_p1;
  std::optional<double> eta;
  std::optional<double> eta_parallel;
};

inline AccuracyReport accuracy_report(const EmbeddedMethod& m) {
  AccuracyReport a;
  a.C_p1 = principal_error_norm(m.tableau);
  if (a.C_p1 && *a.C_p1 > 0) {
    a.eta = accuracy_efficiency(m.stages(), m.order(), *a.C_p1);
    a.eta_parallel = *a.eta * static_cast<double>(m.stages()) / static_cast<double>(seq_stages(m.graph));
  }
  return a;
}

/// Number of order-p trees whose condition the embedded weights miss.
inline std::size_t embedded_defect(const EmbeddedMethod& m, double tol = kDefaultOrderTolerance) {
  const int p = m.order();
  if (p > kMaxTreeOrder) throw std::out_of_range("embedded defect needs p <= " + std::to_string(kMaxTreeOrder));
  OrderChecker checker(m.tableau);
  return checker.violations(p, WeightSet::embedded, tol);
}

struct AnalysisRow {
  std::string label;
  ParallelReport parallel;
  StabilityReport stability;
  AccuracyReport accuracy;
  std::optional<std::size_t> defect;
};

inline AnalysisRow analyze_method(const EmbeddedMethod& m) {
  AnalysisRow row;
  row.label = m.label();
  row.parallel = parallel_metrics(m);
  row.stability = stability_report(stability_polynomial(m.tableau));
  row.accuracy = accuracy_report(m);
  if (m.order() <= kMaxTreeOrder) row.defect = embedded_defect(m);
  return row;
}

}  // namespace rkx
