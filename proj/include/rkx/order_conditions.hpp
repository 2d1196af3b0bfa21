#pragma once

// Order-condition residuals b . Phi(t) - 1/gamma(t) over rooted trees.
//
// Phi(leaf) = 1 and Phi([t1,...,tm]) = prod_k A Phi(tk) componentwise. Exact
// tableaus are evaluated in Rational; anything inexact in HighFloat, where a
// residual counts as zero when |r| <= tol * (sum_i |b_i Phi_i| + 1/gamma).

#include "rkx/numeric.hpp"
#include "rkx/tableau.hpp"
#include "rkx/trees.hpp"

#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

namespace rkx {

/// Plain: b.Phi - 1/gamma. SymmetryWeighted: (b.Phi - 1/gamma) / sigma.
enum class ResidualConvention { plain, symmetry_weighted };

inline constexpr double kDefaultOrderTolerance = 1e-13;

struct TreeResidual {
  std::size_t tree;  ///< index into Forest::up_to(kMaxTreeOrder)
  Coefficient value;
};

struct OrderVerification {
  int order = 0;        ///< largest q with every residual of order <= q vanishing
  bool capped = false;  ///< all conditions up to kMaxTreeOrder hold: order is ">= 12"
  std::optional<TreeResidual> first_violation;  ///< a nonzero residual at order+1
};

namespace detail {

template <class Scalar>
class ElementaryWeightTable {
 public:
  explicit ElementaryWeightTable(const Tableau& t) : s_(t.stages()) {
    rows_.resize(s_);
    for (std::size_t i = 0; i < s_; ++i)
      for (std::size_t j = 0; j < i; ++j)
        if (!t.a(i, j).is_zero()) rows_[i].push_back({j, ScalarTraits<Scalar>::from(t.a(i, j))});
    for (auto w : {WeightSet::principal, WeightSet::embedded}) {
      auto& dst = weights_[w == WeightSet::principal ? 0 : 1];
      for (const auto& x : t.weights(w)) dst.push_back(ScalarTraits<Scalar>::from(x));
    }
  }

  const std::vector<Scalar>& phi(std::size_t tree) {
    ensure(tree);
    return phi_[tree];
  }

  const std::vector<Scalar>& weights(WeightSet w) const { return weights_[w == WeightSet::principal ? 0 : 1]; }

 private:
  void ensure(std::size_t tree) {
    const auto& forest = Forest::up_to(kMaxTreeOrder);
    while (phi_.size() <= tree) {
      const auto& t = forest[phi_.size()];
      std::vector<Scalar> v(s_, Scalar(1));
      for (auto child : t.children) {
        const auto& ac = a_phi_[child];
        for (std::size_t i = 0; i < s_; ++i) v[i] *= ac[i];
      }
      std::vector<Scalar> av(s_, Scalar(0));
      for (std::size_t i = 0; i < s_; ++i)
        for (const auto& [j, a] : rows_[i]) av[i] += a * v[j];
      phi_.push_back(std::move(v));
      a_phi_.push_back(std::move(av));
    }
  }

  struct Entry {
    std::size_t col;
    Scalar value;
  };
  std::size_t s_;
  std::vector<std::vector<Entry>> rows_;
  std::vector<Scalar> weights_[2];
  std::vector<std::vector<Scalar>> phi_;
  std::vector<std::vector<Scalar>> a_phi_;
};

}  // namespace detail

/// Evaluates residuals of one tableau, caching the elementary weights so
/// that repeated queries (both weight sets, successive orders) share work.
class OrderChecker {
 public:
  explicit OrderChecker(const Tableau& t) : exact_(t.is_exact()), table_(make_table(t)) {}

  [[nodiscard]] bool exact() const noexcept { return exact_; }

  /// Residuals for every tree of exactly order q, in forest order.
  std::vector<TreeResidual> residuals(int q, WeightSet w = WeightSet::principal,
                                      ResidualConvention conv = ResidualConvention::plain) {
    check_order(q);
    std::vector<TreeResidual> out;
    const auto& forest = Forest::up_to(kMaxTreeOrder);
    auto [first, last] = forest.range(q);
    for (std::size_t k = first; k < last; ++k) {
      Coefficient r = std::visit([&](auto& tab) { return residual(tab, k, w); }, table_);
      if (conv == ResidualConvention::symmetry_weighted) r /= Coefficient(Rational(forest[k].sigma));
      out.push_back({k, std::move(r)});
    }
    return out;
  }

  /// Whether the residual for `tree` counts as zero (exactly, or to the
  /// scaled tolerance for inexact tableaus).
  bool satisfied(std::size_t tree, WeightSet w, double tol = kDefaultOrderTolerance) {
    return std::visit([&](auto& tab) { return holds(tab, tree, w, tol); }, table_);
  }

  /// Number of order-q trees whose condition fails.
  std::size_t violations(int q, WeightSet w, double tol = kDefaultOrderTolerance) {
    check_order(q);
    auto [first, last] = Forest::up_to(kMaxTreeOrder).range(q);
    std::size_t n = 0;
    for (std::size_t k = first; k < last; ++k)
      if (!satisfied(k, w, tol)) ++n;
    return n;
  }

  OrderVerification verify(WeightSet w, double tol = kDefaultOrderTolerance, int max_order = kMaxTreeOrder) {
    check_order(max_order);
    OrderVerification out;
    const auto& forest = Forest::up_to(kMaxTreeOrder);
    for (int q = 1; q <= max_order; ++q) {
      auto [first, last] = forest.range(q);
      for (std::size_t k = first; k < last; ++k) {
        if (!satisfied(k, w, tol)) {
          Coefficient r = std::visit([&](auto& tab) { return residual(tab, k, w); }, table_);
          out.first_violation = TreeResidual{k, std::move(r)};
          return out;
        }
      }
      out.order = q;
    }
    out.capped = true;
    return out;
  }

 private:
  static void check_order(int q) {
    if (q < 1 || q > kMaxTreeOrder)
      throw std::out_of_range("order-condition order must be in 1.." + std::to_string(kMaxTreeOrder));
  }

  template <class Scalar>
  static Scalar dot(detail::ElementaryWeightTable<Scalar>& tab, std::size_t tree, WeightSet w) {
    const auto& phi = tab.phi(tree);
    const auto& b = tab.weights(w);
    Scalar acc = 0;
    for (std::size_t i = 0; i < phi.size(); ++i) acc += b[i] * phi[i];
    return acc;
  }

  template <class Scalar>
  static Coefficient residual(detail::ElementaryWeightTable<Scalar>& tab, std::size_t tree, WeightSet w) {
    const auto& t = Forest::up_to(kMaxTreeOrder)[tree];
    Scalar r = dot(tab, tree, w) - Scalar(Rational(1, t.gamma));
    return ScalarTraits<Scalar>::wrap(r);
  }

  static bool holds(detail::ElementaryWeightTable<Rational>& tab, std::size_t tree, WeightSet w, double) {
    const auto& t = Forest::up_to(kMaxTreeOrder)[tree];
    return dot(tab, tree, w) == Rational(1, t.gamma);
  }

  static bool holds(detail::ElementaryWeightTable<HighFloat>& tab, std::size_t tree, WeightSet w, double tol) {
    const auto& t = Forest::up_to(kMaxTreeOrder)[tree];
    const auto& phi = tab.phi(tree);
    const auto& b = tab.weights(w);
    HighFloat acc = 0, scale = 0;
    for (std::size_t i = 0; i < phi.size(); ++i) {
      const HighFloat term = b[i] * phi[i];
      acc += term;
      scale += abs(term);
    }
    const HighFloat inv_gamma = to_high(Rational(1, t.gamma));
    return abs(acc - inv_gamma) <= HighFloat(tol) * (scale + inv_gamma);
  }

  using Table = std::variant<detail::ElementaryWeightTable<Rational>, detail::ElementaryWeightTable<HighFloat>>;

  static Table make_table(const Tableau& t) {
    if (t.is_exact()) return Table(std::in_place_index<0>, t);
    return Table(std::in_place_index<1>, t);
  }

  bool exact_;
  Table table_;
};

/// Residuals of every order-q tree for the chosen weights.
inline std::vector<TreeResidual> order_residuals(const Tableau& t, int q, WeightSet w = WeightSet::principal,
                                                 ResidualConvention conv = ResidualConvention::plain) {
  OrderChecker checker(t);
  return checker.residuals(q, w, conv);
}

inline OrderVerification verify_order(const Tableau& t, WeightSet w = WeightSet::principal,
                                      double tol = kDefaultOrderTolerance) {
  OrderChecker checker(t);
  return checker.verify(w, tol);
}

}  // namespace rkx
