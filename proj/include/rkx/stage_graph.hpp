#pragma once

// Stage dependency graph G(A): node i < s is stage i, node s is the new
// solution y_{n+1}. Edge j -> i whenever stage i reads f(Y_j), i.e.
// A[i][j] != 0 (or b[j] != 0 for the output node).

#include "rkx/tableau.hpp"

#include <algorithm>
#include <cstddef>
#include <queue>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rkx {

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class StageGraph {
 public:
  /// Graph over `stages` evaluation nodes plus the output node.
  StageGraph(std::size_t stages, std::vector<std::pair<std::size_t, std::size_t>> edges,
             std::vector<std::string> labels = {})
      : stages_(stages), preds_(stages + 1), succs_(stages + 1), labels_(std::move(labels)) {
    for (auto [from, to] : edges) {
      if (from > stages_ || to > stages_) throw GraphError("edge endpoint out of range");
      if (from == stages_) throw GraphError("output node cannot have successors");
      preds_[to].push_back(from);
      succs_[from].push_back(to);
    }
    for (auto& v : preds_) std::sort(v.begin(), v.end()), v.erase(std::unique(v.begin(), v.end()), v.end());
    for (auto& v : succs_) std::sort(v.begin(), v.end()), v.erase(std::unique(v.begin(), v.end()), v.end());
    labels_.resize(stages_ + 1);
    for (std::size_t i = 0; i < stages_; ++i)
      if (labels_[i].empty()) labels_[i] = "stage " + std::to_string(i + 1);
    labels_[stages_] = "y_{n+1}";
  }

  [[nodiscard]] std::size_t stages() const noexcept { return stages_; }
  [[nodiscard]] std::size_t node_count() const noexcept { return stages_ + 1; }
  [[nodiscard]] std::size_t output() const noexcept { return stages_; }
  [[nodiscard]] const std::vector<std::size_t>& predecessors(std::size_t n) const { return preds_.at(n); }
  [[nodiscard]] const std::vector<std::size_t>& successors(std::size_t n) const { return succs_.at(n); }
  [[nodiscard]] const std::string& label(std::size_t n) const { return labels_.at(n); }
  [[nodiscard]] std::size_t edge_count() const {
    std::size_t e = 0;
    for (const auto& p : preds_) e += p.size();
    return e;
  }

  /// Kahn order of all nodes; throws GraphError on a cycle.
  [[nodiscard]] std::vector<std::size_t> topological_order() const {
    std::vector<std::size_t> indeg(node_count());
    for (std::size_t n = 0; n < node_count(); ++n) indeg[n] = preds_[n].size();
    std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
    for (std::size_t n = 0; n < node_count(); ++n)
      if (indeg[n] == 0) ready.push(n);
    std::vector<std::size_t> order;
    while (!ready.empty()) {
      const auto n = ready.top();
      ready.pop();
      order.push_back(n);
      for (auto m : succs_[n])
        if (--indeg[m] == 0) ready.push(m);
    }
    if (order.size() != node_count()) throw GraphError("stage graph has a cycle");
    return order;
  }

  /// Number of evaluation nodes on the longest path ending at each node
  /// (the output node contributes nothing).
  [[nodiscard]] std::vector<std::size_t> depth() const {
    std::vector<std::size_t> d(node_count(), 0);
    for (auto n : topological_order()) {
      std::size_t best = 0;
      for (auto p : preds_[n]) best = std::max(best, d[p]);
      d[n] = best + (n == stages_ ? 0 : 1);
    }
    return d;
  }

  /// Evaluation nodes on the longest path from each node to the output,
  /// counting the node itself.
  [[nodiscard]] std::vector<std::size_t> height() const {
    auto order = topological_order();
    std::vector<std::size_t> h(node_count(), 0);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const auto n = *it;
      std::size_t best = 0;
      for (auto m : succs_[n]) best = std::max(best, h[m]);
      h[n] = best + (n == stages_ ? 0 : 1);
    }
    return h;
  }

  /// Nodes from which the output is reachable, i.e. stages that matter for y_{n+1}.
  [[nodiscard]] std::vector<bool> live() const {
    std::vector<bool> alive(node_count(), false);
    alive[stages_] = true;
    auto order = topological_order();
    for (auto it = order.rbegin(); it != order.rend(); ++it)
      for (auto m : succs_[*it])
        if (alive[m]) alive[*it] = true;
    return alive;
  }

 private:
  std::size_t stages_;
  std::vector<std::vector<std::size_t>> preds_;
  std::vector<std::vector<std::size_t>> succs_;
  std::vector<std::string> labels_;
};

inline StageGraph build_stage_graph(const Tableau& t, std::vector<std::string> labels = {}) {
  const auto s = t.stages();
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (!t.a(i, j).is_zero()) edges.emplace_back(j, i);
  for (std::size_t j = 0; j < s; ++j)
    if (!t.b()[j].is_zero()) edges.emplace_back(j, s);
  return StageGraph(s, std::move(edges), std::move(labels));
}

/// Longest dependency chain, in function evaluations, ending at y_{n+1}.
/// For the methods built here node 1 is the unique source, so this is the
/// longest path from node 1 to node s+1.
inline std::size_t seq_stages(const StageGraph& g) { return g.depth()[g.output()]; }

}  // namespace rkx
