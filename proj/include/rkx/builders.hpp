#pragma once

// Extrapolation and deferred-correction methods written out as explicit
// embedded Runge-Kutta pairs.
//
// Each builder executes its algorithm symbolically: every intermediate value
// is kept as y_n + h * sum_j w_j f(Y_j), a new stage is opened whenever the
// algorithm evaluates f at such a value, and the final combinations give b
// and b_hat. Stages are numbered in the algorithm's literal evaluation order.

#include "rkx/method.hpp"
#include "rkx/numeric.hpp"
#include "rkx/order_conditions.hpp"
#include "rkx/stage_graph.hpp"
#include "rkx/tableau.hpp"

#include <boost/math/constants/constants.hpp>

#include <algorithm>
#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace rkx {

class BuildError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct BuildOptions {
  /// Order conditions are checked up to this tree order before returning
  /// (sharpness is checked too whenever p+1 fits under the cap).
  int verify_up_to = 8;
  /// DC with theta = 0: drop the final sweep's stages, which y_{n+1} never reads.
  bool prune_final_sweep = true;
};

/// Step numbers n_k = k, k = 1..count.
inline std::vector<int> harmonic_sequence(int count) {
  if (count < 1) throw BuildError("harmonic sequence needs at least one entry");
  std::vector<int> n(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) n[static_cast<std::size_t>(k)] = k + 1;
  return n;
}

/// Aitken-Neville extrapolation written as weights on T_{11}..T_{r1}.
/// Returns table[j][k] (0-based, k <= j) = weights of T_{j+1,k+1}. With
/// `exponent` = 1 the error expansion is in h, with 2 in h^2.
inline std::vector<std::vector<std::vector<Rational>>> extrapolation_weights(const std::vector<int>& steps,
                                                                             int exponent) {
  const std::size_t r = steps.size();
  std::vector<std::vector<std::vector<Rational>>> table(r);
  for (std::size_t j = 0; j < r; ++j) {
    table[j].resize(j + 1);
    table[j][0].assign(r, Rational(0));
    table[j][0][j] = 1;
  }
  for (std::size_t k = 1; k < r; ++k) {
    for (std::size_t j = k; j < r; ++j) {
      Rational ratio(steps[j], steps[j - k]);
      Rational power = 1;
      for (int e = 0; e < exponent; ++e) power *= ratio;
      const Rational denom = power - 1;
      auto& out = table[j][k];
      out.resize(r);
      for (std::size_t i = 0; i < r; ++i)
        out[i] = table[j][k - 1][i] + (table[j][k - 1][i] - table[j - 1][k - 1][i]) / denom;
    }
  }
  return table;
}

namespace detail {

/// Accumulates stages during symbolic execution.
class StageRecorder {
 public:
  using Combination = std::vector<Coefficient>;  // weights on f(Y_j); implicit y_n

  std::size_t add_stage(const Combination& value, std::string label) {
    std::vector<Coefficient> row(rows_.size());
    for (std::size_t j = 0; j < std::min(value.size(), row.size()); ++j) row[j] = value[j];
    for (std::size_t j = row.size(); j < value.size(); ++j)
      if (!value[j].is_zero()) throw std::logic_error("stage depends on a later stage");
    rows_.push_back(std::move(row));
    labels_.push_back(std::move(label));
    return rows_.size() - 1;
  }

  static void axpy(Combination& dst, const Coefficient& alpha, const Combination& x) {
    if (dst.size() < x.size()) dst.resize(x.size());
    for (std::size_t j = 0; j < x.size(); ++j)
      if (!x[j].is_zero()) dst[j] += alpha * x[j];
  }

  static void add_f(Combination& dst, std::size_t stage, const Coefficient& alpha) {
    if (dst.size() <= stage) dst.resize(stage + 1);
    dst[stage] += alpha;
  }

  [[nodiscard]] std::size_t size() const { return rows_.size(); }

  Combination pad(Combination v) const {
    v.resize(rows_.size());
    return v;
  }

  std::vector<std::vector<Coefficient>> take_rows() { return std::move(rows_); }
  std::vector<std::string> take_labels() { return std::move(labels_); }

 private:
  std::vector<std::vector<Coefficient>> rows_;
  std::vector<std::string> labels_;
};

inline std::string tree_text(std::size_t tree) {
  const auto& t = Forest::up_to(kMaxTreeOrder)[tree];
  std::ostringstream out;
  out << "tree #" << tree << " (order " << t.order << ", levels";
  for (int l : t.levels) out << ' ' << l;
  out << ')';
  return out.str();
}

/// Checks that `w` satisfies `want` orders (or all up to the cap). With
/// `sharp`, order want+1 must fail whenever it is under the cap.
inline OrderVerification expect_order(OrderChecker& checker, WeightSet w, int want, int cap, double tol,
                                      const std::string& label, bool sharp = true) {
  cap = std::clamp(cap, 1, kMaxTreeOrder);
  const int limit = std::min(want + 1, cap);
  auto v = checker.verify(w, tol, limit);
  const bool ok = sharp && want + 1 <= cap ? (v.order == want) : (v.order >= std::min(want, cap));
  if (!ok) {
    std::ostringstream msg;
    msg << label << ": " << (w == WeightSet::principal ? "principal" : "embedded") << " weights verify to order "
        << v.order << ", expected " << want;
    if (v.first_violation) msg << "; failing " << tree_text(v.first_violation->tree);
    throw BuildError(msg.str());
  }
  return v;
}

inline EmbeddedMethod finish(std::string label, StageRecorder& rec, StageRecorder::Combination b,
                             StageRecorder::Combination b_hat, int p, int p_hat, Family family,
                             std::vector<std::vector<std::size_t>> groups, const BuildOptions& opt,
                             double tol = kDefaultOrderTolerance) {
  b = rec.pad(std::move(b));
  b_hat = rec.pad(std::move(b_hat));
  auto labels = rec.take_labels();
  Tableau tab(label, rec.take_rows(), std::move(b), std::move(b_hat), p, p_hat);
  OrderChecker checker(tab);
  auto pv = expect_order(checker, WeightSet::principal, p, opt.verify_up_to, tol, label);
  // The embedded weights may beat their nominal order (dc(3,theta=1) does).
  auto ev = expect_order(checker, WeightSet::embedded, p_hat, opt.verify_up_to, tol, label, false);
  StageGraph graph = build_stage_graph(tab, std::move(labels));
  return EmbeddedMethod{std::move(tab), std::move(graph), family, std::nullopt, std::move(groups),
                        std::move(pv), std::move(ev)};
}

}  // namespace detail

/// Explicit Euler extrapolation of order p with the harmonic sequence.
/// s = (p^2 - p + 2)/2; the embedded solution is T_{p-1,p-1}.
inline EmbeddedMethod build_ex_euler(int p, const BuildOptions& opt = {}) {
  if (p < 2 || p > 12) throw BuildError("ex-euler order must be in 2..12 (got " + std::to_string(p) + ")");
  detail::StageRecorder rec;
  using Comb = detail::StageRecorder::Combination;
  const std::size_t root = rec.add_stage({}, "y_n");
  const auto steps = harmonic_sequence(p);

  std::vector<Comb> first_order(static_cast<std::size_t>(p));
  std::vector<std::vector<std::size_t>> chains(static_cast<std::size_t>(p));
  for (int k = 1; k <= p; ++k) {
    Comb y;  // Y_{k0} = y_n
    const Coefficient dt(Rational(1, k));
    std::size_t last = root;
    for (int j = 1; j <= k; ++j) {
      if (j > 1) {
        last = rec.add_stage(y, "T_{" + std::to_string(k) + "1} substep " + std::to_string(j - 1));
        chains[static_cast<std::size_t>(k - 1)].push_back(last);
      }
      detail::StageRecorder::add_f(y, last, dt);
    }
    first_order[static_cast<std::size_t>(k - 1)] = std::move(y);
  }

  const auto weights = extrapolation_weights(steps, 1);
  auto combine = [&](const std::vector<Rational>& w) {
    Comb out;
    for (std::size_t k = 0; k < w.size(); ++k)
      if (w[k] != 0) detail::StageRecorder::axpy(out, Coefficient(w[k]), first_order[k]);
    return out;
  };
  const auto up = static_cast<std::size_t>(p - 1);
  Comb b = combine(weights[up][up]);
  Comb b_hat = combine(weights[up - 1][up - 1]);
  return detail::finish("ex-euler(" + std::to_string(p) + ")", rec, std::move(b), std::move(b_hat), p, p - 1,
                        Family::ex_euler, std::move(chains), opt);
}

/// Explicit midpoint (Gragg) extrapolation of even order p, r = p/2 chains.
/// s = (p^2 + 4)/4; the embedded solution is T_{r-1,r-1} of order p - 2.
inline EmbeddedMethod build_ex_midpoint(int p, const BuildOptions& opt = {}) {
  if (p % 2 != 0) throw BuildError("ex-midpoint requires an even order (got " + std::to_string(p) + ")");
  if (p < 4 || p > 18) throw BuildError("ex-midpoint order must be in 4..18 (got " + std::to_string(p) + ")");
  detail::StageRecorder rec;
  using Comb = detail::StageRecorder::Combination;
  const std::size_t root = rec.add_stage({}, "y_n");
  const int r = p / 2;
  const auto steps = harmonic_sequence(r);

  std::vector<Comb> second_order(static_cast<std::size_t>(r));
  std::vector<std::vector<std::size_t>> chains(static_cast<std::size_t>(r));
  for (int k = 1; k <= r; ++k) {
    std::vector<Comb> y(static_cast<std::size_t>(2 * k + 1));
    std::vector<std::size_t> f_at(static_cast<std::size_t>(2 * k), root);
    detail::StageRecorder::add_f(y[1], root, Coefficient(Rational(1, 2 * k)));
    for (int j = 2; j <= 2 * k; ++j) {
      const auto prev = static_cast<std::size_t>(j - 1);
      f_at[prev] = rec.add_stage(y[prev], "T_{" + std::to_string(k) + "1} substep " + std::to_string(j - 1));
      chains[static_cast<std::size_t>(k - 1)].push_back(f_at[prev]);
      auto& dst = y[static_cast<std::size_t>(j)];
      dst = y[static_cast<std::size_t>(j - 2)];
      detail::StageRecorder::add_f(dst, f_at[prev], Coefficient(Rational(1, k)));
    }
    second_order[static_cast<std::size_t>(k - 1)] = std::move(y.back());
  }

  const auto weights = extrapolation_weights(steps, 2);
  auto combine = [&](const std::vector<Rational>& w) {
    Comb out;
    for (std::size_t k = 0; k < w.size(); ++k)
      if (w[k] != 0) detail::StageRecorder::axpy(out, Coefficient(w[k]), second_order[k]);
    return out;
  };
  const auto up = static_cast<std::size_t>(r - 1);
  Comb b = combine(weights[up][up]);
  Comb b_hat = combine(weights[up - 1][up - 1]);
  return detail::finish("ex-midpoint(" + std::to_string(p) + ")", rec, std::move(b), std::move(b_hat), p, p - 2,
                        Family::ex_midpoint, std::move(chains), opt);
}

namespace detail {

/// Coefficients (ascending powers) of the Lagrange basis polynomial l_m.
template <class Scalar>
std::vector<Scalar> lagrange_basis(const std::vector<Scalar>& nodes, std::size_t m) {
  std::vector<Scalar> poly{Scalar(1)};
  Scalar denom = 1;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (k == m) continue;
    std::vector<Scalar> next(poly.size() + 1, Scalar(0));
    for (std::size_t i = 0; i < poly.size(); ++i) {
      next[i + 1] += poly[i];
      next[i] -= poly[i] * nodes[k];
    }
    poly = std::move(next);
    denom *= nodes[m] - nodes[k];
  }
  for (auto& v : poly) v /= denom;
  return poly;
}

template <class Scalar>
std::vector<std::vector<Scalar>> integration_matrix(const std::vector<Scalar>& nodes) {
  const std::size_t p = nodes.size();
  std::vector<std::vector<Scalar>> out(p, std::vector<Scalar>(p - 1, Scalar(0)));
  for (std::size_t m = 0; m < p; ++m) {
    const auto poly = lagrange_basis(nodes, m);
    auto antiderivative = [&](const Scalar& x) {
      Scalar acc = 0;
      for (std::size_t i = poly.size(); i-- > 0;) acc = acc * x + poly[i] / Scalar(static_cast<long>(i + 1));
      return Scalar(acc * x);
    };
    for (std::size_t j = 0; j + 1 < p; ++j) out[m][j] = antiderivative(nodes[j + 1]) - antiderivative(nodes[j]);
  }
  return out;
}

}  // namespace detail

/// Substep nodes on [0,1] with c_1 = 0 and c_p = 1. Equispaced nodes are
/// exact; Chebyshev-Lobatto nodes (1 - cos(pi (j-1)/(p-1)))/2 are computed in
/// HighFloat with the endpoints and the centre kept exact.
inline std::vector<Coefficient> dc_nodes(int p, NodeFamily family) {
  std::vector<Coefficient> c(static_cast<std::size_t>(p));
  for (int j = 0; j < p; ++j) {
    auto& cj = c[static_cast<std::size_t>(j)];
    if (family == NodeFamily::equispaced || j == 0 || j == p - 1 || 2 * j == p - 1) {
      cj = Coefficient(Rational(j, p - 1));
    } else {
      const HighFloat pi = boost::math::constants::pi<HighFloat>();
      const HighFloat angle = pi * j / (p - 1);
      cj = Coefficient::inexact(HighFloat((1 - cos(angle)) / 2));
    }
  }
  return c;
}

/// Assembles a validated DCConfig (nodes plus integration matrix).
inline DCConfig make_dc_config(int p, Rational theta, NodeFamily family = NodeFamily::equispaced) {
  if (p < 3 || p > 12) throw BuildError("dc order must be in 3..12 (got " + std::to_string(p) + ")");
  if (theta < 0 || theta > 1) throw BuildError("dc theta must lie in [0,1] (got " + theta.str() + ")");
  DCConfig cfg;
  cfg.order = p;
  cfg.theta = theta;
  cfg.nodes = family;
  cfg.c_nodes = dc_nodes(p, family);
  bool exact = std::all_of(cfg.c_nodes.begin(), cfg.c_nodes.end(), [](const auto& x) { return x.is_exact(); });
  if (exact) {
    std::vector<Rational> n;
    for (const auto& x : cfg.c_nodes) n.push_back(x.rational());
    for (auto& row : detail::integration_matrix(n)) {
      cfg.integration.emplace_back();
      for (auto& v : row) cfg.integration.back().emplace_back(v);
    }
  } else {
    std::vector<HighFloat> n;
    for (const auto& x : cfg.c_nodes) n.push_back(x.high());
    for (auto& row : detail::integration_matrix(n)) {
      cfg.integration.emplace_back();
      for (auto& v : row) cfg.integration.back().push_back(Coefficient::inexact(v));
    }
  }
  return cfg;
}

/// Throws BuildError unless nodes increase strictly from 0 to 1 and every
/// column of the integration matrix integrates the constant 1 exactly.
inline void validate_dc_config(const DCConfig& cfg) {
  const auto p = static_cast<std::size_t>(cfg.order);
  if (cfg.order < 3 || cfg.order > 12) throw BuildError("dc order must be in 3..12");
  if (cfg.theta < 0 || cfg.theta > 1) throw BuildError("dc theta must lie in [0,1]");
  if (cfg.c_nodes.size() != p) throw BuildError("dc config: need p nodes");
  if (!cfg.c_nodes.front().is_zero() || !(cfg.c_nodes.back() - Coefficient(1)).is_zero())
    throw BuildError("dc config: nodes must start at 0 and end at 1");
  for (std::size_t j = 0; j + 1 < p; ++j)
    if ((cfg.c_nodes[j + 1] - cfg.c_nodes[j]).sign() <= 0) throw BuildError("dc config: nodes must increase");
  if (cfg.integration.size() != p) throw BuildError("dc config: integration matrix needs p rows");
  for (const auto& row : cfg.integration)
    if (row.size() != p - 1) throw BuildError("dc config: integration matrix needs p-1 columns");
  for (std::size_t j = 0; j + 1 < p; ++j) {
    Coefficient sum;
    for (std::size_t m = 0; m < p; ++m) sum += cfg.integration[m][j];
    const Coefficient width = cfg.c_nodes[j + 1] - cfg.c_nodes[j];
    const Coefficient diff = sum - width;
    const bool ok = diff.is_exact() ? diff.is_zero() : abs(diff.high()) <= HighFloat("1e-30");
    if (!ok) throw BuildError("dc config: integration matrix column " + std::to_string(j + 1) +
                              " does not integrate constants exactly");
  }
}

/// Explicit-Euler spectral deferred correction of order p (p-1 correction
/// sweeps over p nodes). The correction update is
///   Y_{kj} = Y_{k,j-1} + h theta (f(Y_{k,j-1}) - f(Y_{k-1,j-1}))
///            + h sum_m M[m][j] f(Y_{k-1,m}).
/// y_{n+1} = Y_{p,p-1}, embedded Y_{p-1,p-1}. s = p(p-1), or (p-1)^2 + 1 for
/// theta = 0 with the final sweep pruned.
inline EmbeddedMethod build_dc_euler(const DCConfig& cfg, const BuildOptions& opt = {}) {
  validate_dc_config(cfg);
  const int p = cfg.order;
  const auto P = static_cast<std::size_t>(p);
  const bool theta_zero = cfg.theta == 0;
  const Coefficient theta(cfg.theta);

  detail::StageRecorder rec;
  using Comb = detail::StageRecorder::Combination;
  const std::size_t root = rec.add_stage({}, "y_n");
  auto name = [](int k, std::size_t j) { return "Y_{" + std::to_string(k) + "," + std::to_string(j) + "}"; };

  // value[k][j] and the stage holding f(Y_{kj}) (root for j = 0).
  std::vector<std::vector<Comb>> value(P + 1, std::vector<Comb>(P));
  std::vector<std::vector<std::size_t>> stage(P + 1, std::vector<std::size_t>(P, root));
  std::vector<std::vector<std::size_t>> sweeps;

  sweeps.emplace_back();
  for (std::size_t j = 1; j < P; ++j) {
    value[1][j] = value[1][j - 1];
    detail::StageRecorder::add_f(value[1][j], stage[1][j - 1], cfg.c_nodes[j] - cfg.c_nodes[j - 1]);
    stage[1][j] = rec.add_stage(value[1][j], name(1, j));
    sweeps.back().push_back(stage[1][j]);
  }

  for (int k = 2; k <= p; ++k) {
    const auto K = static_cast<std::size_t>(k);
    const bool last = k == p;
    sweeps.emplace_back();
    for (std::size_t j = 1; j < P; ++j) {
      auto& y = value[K][j];
      y = value[K][j - 1];
      if (!theta_zero) {
        detail::StageRecorder::add_f(y, stage[K][j - 1], theta);
        detail::StageRecorder::add_f(y, stage[K - 1][j - 1], -theta);
      }
      for (std::size_t m = 0; m < P; ++m) detail::StageRecorder::add_f(y, stage[K - 1][m], cfg.integration[m][j - 1]);
      // The final sweep only needs f at Y_{p,1..p-2}, and only when theta != 0.
      const bool needed = !last || (j + 1 < P && (!theta_zero || !opt.prune_final_sweep));
      if (needed) {
        stage[K][j] = rec.add_stage(y, name(k, j));
        sweeps.back().push_back(stage[K][j]);
      }
    }
    if (sweeps.back().empty()) sweeps.pop_back();
  }

  Comb b = value[P][P - 1];
  Comb b_hat = value[P - 1][P - 1];
  std::string label = "dc(" + std::to_string(p) + ",theta=" + cfg.theta.str() + "," + node_family_name(cfg.nodes);
  if (theta_zero && !opt.prune_final_sweep) label += ",unpruned";
  label += ")";
  auto m = detail::finish(std::move(label), rec, std::move(b), std::move(b_hat), p, p - 1, Family::dc_euler,
                          std::move(sweeps), opt);
  m.dc = cfg;
  return m;
}

inline EmbeddedMethod build_dc_euler(int p, Rational theta, NodeFamily nodes = NodeFamily::equispaced,
                                     const BuildOptions& opt = {}) {
  return build_dc_euler(make_dc_config(p, std::move(theta), nodes), opt);
}

/// Stage counts predicted for each family.
inline std::size_t expected_stages(Family f, int p, bool theta_zero = true) {
  const auto q = static_cast<std::size_t>(p);
  switch (f) {
    case Family::ex_euler: return (q * q - q + 2) / 2;
    case Family::ex_midpoint: return (q * q + 4) / 4;
    case Family::dc_euler: return theta_zero ? (q - 1) * (q - 1) + 1 : q * (q - 1);
    case Family::reference: break;
  }
  throw std::invalid_argument("no stage-count formula for reference pairs");
}

}  // namespace rkx
