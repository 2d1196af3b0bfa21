#pragma once

// Rooted trees indexing the Runge-Kutta order conditions.
//
// Trees are identified by their canonical level sequence: the root has level
// 1 and the children's subsequences (levels shifted by one) are concatenated
// in lexicographically decreasing order, which makes the whole sequence
// lexicographically maximal over all orderings. Within one order the forest
// is sorted by decreasing level sequence (the tall tree first).

#include "rkx/numeric.hpp"

#include <algorithm>
#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

namespace rkx {

inline constexpr int kMaxTreeOrder = 12;

struct RootedTree {
  int order = 1;
  /// Indices into the forest, sorted ascending (so equal subtrees are adjacent).
  std::vector<std::size_t> children;
  std::vector<int> levels;
  Integer gamma = 1;  ///< density
  Integer sigma = 1;  ///< symmetry
};

/// All rooted trees up to some order, shared and immutable once built.
class Forest {
 public:
  /// Shared forest containing every tree of order <= q_max. Tree indices
  /// are stable: the trees of order <= q come first in every forest.
  static const Forest& up_to(int q_max) {
    if (q_max < 1 || q_max > kMaxTreeOrder)
      throw std::out_of_range("tree order must be in 1.." + std::to_string(kMaxTreeOrder));
    static const Forest full(kMaxTreeOrder);
    return full;
  }

  [[nodiscard]] int max_order() const noexcept { return max_order_; }
  [[nodiscard]] const std::vector<RootedTree>& trees() const noexcept { return trees_; }
  [[nodiscard]] const RootedTree& operator[](std::size_t i) const { return trees_[i]; }

  /// Indices [first, last) of the trees of exactly order q.
  [[nodiscard]] std::pair<std::size_t, std::size_t> range(int q) const {
    return {offsets_.at(static_cast<std::size_t>(q - 1)), offsets_.at(static_cast<std::size_t>(q))};
  }
  [[nodiscard]] std::size_t count(int q) const {
    auto [a, b] = range(q);
    return b - a;
  }
  [[nodiscard]] std::size_t cumulative_count(int q) const { return offsets_.at(static_cast<std::size_t>(q)); }

 private:
  explicit Forest(int q_max) : max_order_(q_max) {
    offsets_.push_back(0);
    RootedTree leaf;
    leaf.levels = {1};
    trees_.push_back(leaf);
    offsets_.push_back(1);

    for (int n = 2; n <= q_max; ++n) {
      std::vector<RootedTree> fresh;
      std::vector<std::size_t> picked;
      // Multisets of existing trees (indices non-increasing) with total order n-1.
      auto recurse = [&](auto& self, int remaining, std::size_t max_index) -> void {
        if (remaining == 0) {
          fresh.push_back(make_tree(picked));
          return;
        }
        for (std::size_t idx = max_index + 1; idx-- > 0;) {
          const int q = trees_[idx].order;
          if (q > remaining) continue;
          picked.push_back(idx);
          self(self, remaining - q, idx);
          picked.pop_back();
        }
      };
      recurse(recurse, n - 1, trees_.size() - 1);
      std::sort(fresh.begin(), fresh.end(),
                [](const RootedTree& a, const RootedTree& b) { return a.levels > b.levels; });
      trees_.insert(trees_.end(), fresh.begin(), fresh.end());
      offsets_.push_back(trees_.size());
    }
  }

  RootedTree make_tree(std::vector<std::size_t> kids) const {
    RootedTree t;
    std::sort(kids.begin(), kids.end());
    t.children = kids;
    t.order = 1;
    for (auto k : kids) t.order += trees_[k].order;

    std::vector<const std::vector<int>*> subs;
    for (auto k : kids) subs.push_back(&trees_[k].levels);
    std::sort(subs.begin(), subs.end(), [](const auto* a, const auto* b) { return *a > *b; });
    t.levels = {1};
    for (const auto* sub : subs)
      for (int l : *sub) t.levels.push_back(l + 1);

    t.gamma = t.order;
    for (auto k : kids) t.gamma *= trees_[k].gamma;
    t.sigma = 1;
    for (std::size_t i = 0; i < kids.size();) {
      std::size_t j = i;
      while (j < kids.size() && kids[j] == kids[i]) ++j;
      const auto mult = static_cast<unsigned long>(j - i);
      Integer fact = 1;
      for (unsigned long m = 2; m <= mult; ++m) fact *= m;
      Integer pow = 1;
      for (unsigned long m = 0; m < mult; ++m) pow *= trees_[kids[i]].sigma;
      t.sigma *= pow * fact;
      i = j;
    }
    return t;
  }

  int max_order_;
  std::vector<RootedTree> trees_;
  std::vector<std::size_t> offsets_;
};

/// All trees of order <= q_max in forest order (by order, then decreasing
/// canonical level sequence).
inline std::vector<RootedTree> enumerate_trees(int q_max) {
  if (q_max < 1 || q_max > kMaxTreeOrder)
    throw std::out_of_range("enumerate_trees: q_max must be in 1.." + std::to_string(kMaxTreeOrder));
  const auto& forest = Forest::up_to(q_max);
  const auto n = forest.cumulative_count(q_max);
  return {forest.trees().begin(), forest.trees().begin() + static_cast<std::ptrdiff_t>(n)};
}

}  // namespace rkx
