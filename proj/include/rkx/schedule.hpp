#pragma once

// Static assignment of stage evaluations to workers. Time is counted in
// function evaluations (unit cost); combining stages is treated as free.
//
// Extrapolation methods are scheduled by packing whole chains onto workers
// (the shared first stage goes to worker 0). Anything else gets
// highest-level-first list scheduling on the stage graph.

#include "rkx/method.hpp"
#include "rkx/stage_graph.hpp"

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace rkx {

struct Schedule {
  std::size_t workers = 1;
  /// Stages executed by each worker, in order.
  std::vector<std::vector<std::size_t>> lanes;
  /// Time slot in which each stage starts (a stage occupies one slot).
  std::vector<std::size_t> start;
  std::size_t makespan = 0;
  /// Slot by which every stage y_{n+1} reads has finished. Differs from the
  /// makespan only when some stage feeds the embedded solution alone.
  std::size_t output_time = 0;
  /// Extrapolation only: chain numbers (1-based, as in T_{k1}) per worker.
  std::vector<std::vector<std::size_t>> chains;
};

namespace detail {

/// First-fit decreasing: item indices per bin, or empty if some item exceeds
/// the capacity.
inline std::vector<std::vector<std::size_t>> first_fit_decreasing(const std::vector<std::size_t>& sizes,
                                                                  std::size_t capacity) {
  std::vector<std::size_t> order(sizes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return sizes[a] > sizes[b]; });
  std::vector<std::vector<std::size_t>> bins;
  std::vector<std::size_t> load;
  for (auto i : order) {
    if (sizes[i] == 0) continue;
    if (sizes[i] > capacity) return {};
    std::size_t b = 0;
    while (b < bins.size() && load[b] + sizes[i] > capacity) ++b;
    if (b == bins.size()) {
      bins.emplace_back();
      load.push_back(0);
    }
    bins[b].push_back(i);
    load[b] += sizes[i];
  }
  return bins;
}

/// Longest processing time first onto a fixed number of bins.
inline std::vector<std::vector<std::size_t>> longest_first(const std::vector<std::size_t>& sizes, std::size_t bins_n) {
  std::vector<std::size_t> order(sizes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return sizes[a] > sizes[b]; });
  std::vector<std::vector<std::size_t>> bins(bins_n);
  std::vector<std::size_t> load(bins_n, 0);
  for (auto i : order) {
    if (sizes[i] == 0) continue;
    const auto b = static_cast<std::size_t>(std::min_element(load.begin(), load.end()) - load.begin());
    bins[b].push_back(i);
    load[b] += sizes[i];
  }
  return bins;
}

/// Replays the lanes with unit-time stages: each stage starts when its lane
/// is free and all predecessors have finished.
inline void simulate(const StageGraph& g, Schedule& sch) {
  const auto s = g.stages();
  std::vector<std::size_t> finish(s, 0);
  std::vector<bool> done(s, false);
  std::vector<std::size_t> pos(sch.lanes.size(), 0), lane_free(sch.lanes.size(), 0);
  sch.start.assign(s, 0);
  std::size_t remaining = 0;
  for (const auto& l : sch.lanes) remaining += l.size();
  if (remaining != s) throw std::logic_error("schedule does not cover every stage exactly once");
  while (remaining > 0) {
    bool progressed = false;
    for (std::size_t w = 0; w < sch.lanes.size(); ++w) {
      if (pos[w] == sch.lanes[w].size()) continue;
      const auto i = sch.lanes[w][pos[w]];
      std::size_t ready = lane_free[w];
      bool ok = true;
      for (auto j : g.predecessors(i)) {
        if (!done[j]) {
          ok = false;
          break;
        }
        ready = std::max(ready, finish[j]);
      }
      if (!ok) continue;
      sch.start[i] = ready;
      finish[i] = ready + 1;
      lane_free[w] = finish[i];
      done[i] = true;
      ++pos[w];
      --remaining;
      progressed = true;
    }
    if (!progressed) throw std::logic_error("schedule lanes deadlock");
  }
  sch.makespan = s == 0 ? 0 : *std::max_element(finish.begin(), finish.end());
  sch.output_time = 0;
  for (auto j : g.predecessors(g.output())) sch.output_time = std::max(sch.output_time, finish[j]);
}

inline Schedule chain_schedule(const EmbeddedMethod& m, const std::vector<std::vector<std::size_t>>& bins,
                               std::size_t workers) {
  Schedule sch;
  sch.workers = workers;
  sch.lanes.assign(workers, {});
  sch.chains.assign(workers, {});
  sch.lanes[0].push_back(0);
  for (std::size_t w = 0; w < bins.size(); ++w)
    for (auto k : bins[w]) {
      sch.chains[w].push_back(k + 1);
      for (auto st : m.groups[k]) sch.lanes[w].push_back(st);
    }
  simulate(m.graph, sch);
  return sch;
}

inline std::vector<std::size_t> chain_lengths(const EmbeddedMethod& m) {
  std::vector<std::size_t> len;
  for (const auto& c : m.groups) len.push_back(c.size());
  return len;
}

}  // namespace detail

inline bool is_extrapolation(const EmbeddedMethod& m) {
  return m.family == Family::ex_euler || m.family == Family::ex_midpoint;
}

/// Highest-level-first list scheduling: at every slot the ready stages with
/// the longest remaining path to y_{n+1} run first.
inline Schedule list_schedule(const StageGraph& g, std::size_t workers) {
  if (workers < 1) throw std::invalid_argument("schedule needs at least one worker");
  const auto s = g.stages();
  const auto h = g.height();
  Schedule sch;
  sch.workers = workers;
  sch.lanes.assign(workers, {});
  std::vector<std::size_t> missing(s);
  for (std::size_t i = 0; i < s; ++i) missing[i] = g.predecessors(i).size();
  std::vector<std::size_t> ready;
  for (std::size_t i = 0; i < s; ++i)
    if (missing[i] == 0) ready.push_back(i);
  std::size_t placed = 0;
  while (placed < s) {
    std::stable_sort(ready.begin(), ready.end(), [&](auto a, auto b) { return h[a] != h[b] ? h[a] > h[b] : a < b; });
    const auto take = std::min(workers, ready.size());
    if (take == 0) throw GraphError("stage graph has a cycle");
    std::vector<std::size_t> now(ready.begin(), ready.begin() + static_cast<std::ptrdiff_t>(take));
    ready.erase(ready.begin(), ready.begin() + static_cast<std::ptrdiff_t>(take));
    for (std::size_t w = 0; w < take; ++w) sch.lanes[w].push_back(now[w]);
    for (auto i : now)
      for (auto j : g.successors(i))
        if (j < s && --missing[j] == 0) ready.push_back(j);
    placed += take;
  }
  detail::simulate(g, sch);
  return sch;
}

/// Schedule for `workers` workers. Extrapolation: chains packed first-fit
/// decreasing into capacity s_seq - 1 when that fits, else balanced.
inline Schedule build_schedule(const EmbeddedMethod& m, std::size_t workers) {
  if (workers < 1) throw std::invalid_argument("schedule needs at least one worker");
  if (!is_extrapolation(m)) return list_schedule(m.graph, workers);
  const auto len = detail::chain_lengths(m);
  const auto cap = seq_stages(m.graph) - 1;
  auto bins = detail::first_fit_decreasing(len, cap);
  if (bins.empty() || bins.size() > workers) bins = detail::longest_first(len, workers);
  return detail::chain_schedule(m, bins, workers);
}

}  // namespace rkx
