#pragma once

#include "rkx/numeric.hpp"
#include "rkx/order_conditions.hpp"
#include "rkx/stage_graph.hpp"
#include "rkx/tableau.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rkx {

enum class Family { ex_euler, ex_midpoint, dc_euler, reference };

inline const char* family_name(Family f) {
  switch (f) {
    case Family::ex_euler: return "ex-euler";
    case Family::ex_midpoint: return "ex-midpoint";
    case Family::dc_euler: return "dc";
    case Family::reference: return "reference";
  }
  return "?";
}

enum class NodeFamily { equispaced, chebyshev_lobatto };

inline const char* node_family_name(NodeFamily n) {
  return n == NodeFamily::equispaced ? "equispaced" : "chebyshev";
}

/// Deferred-correction parameters: substep nodes on [0,1] and the matrix
/// integrating the interpolant through all p nodes over each substep,
/// integration[m][j] = int_{c_j}^{c_{j+1}} l_m(tau) dtau.
struct DCConfig {
  int order = 4;
  Rational theta = 0;
  NodeFamily nodes = NodeFamily::equispaced;
  std::vector<Coefficient> c_nodes;
  std::vector<std::vector<Coefficient>> integration;
};

/// A built pair together with its dependency graph and the stage groups the
/// builder knows about. For extrapolation `groups[k]` is chain k+1 (stages
/// after the shared first evaluation, in order); for deferred correction it
/// is sweep k+1 (prediction first).
struct EmbeddedMethod {
  Tableau tableau;
  StageGraph graph;
  Family family = Family::reference;
  std::optional<DCConfig> dc;
  std::vector<std::vector<std::size_t>> groups;
  OrderVerification principal_check;
  OrderVerification embedded_check;

  [[nodiscard]] const std::string& label() const { return tableau.label(); }
  [[nodiscard]] int order() const { return tableau.order(); }
  [[nodiscard]] std::size_t stages() const { return tableau.stages(); }
};

}  // namespace rkx
