#pragma once

#include "cdg/model.hpp"
#include "cdg/physnet.hpp"

namespace cdg {

inline constexpr int kScenarioNodes = 20;

/// Parents of the 20-node data tree: node 0 is the root with three children,
/// every other internal node has two, so degrees never exceed 3.
std::vector<int> scenario_parents();
EdgeList scenario_tree_edges();

/// Root P(x=0) = 0.7; every child copies its parent's value with probability 0.7.
TreeModel scenario_model();

struct Scenario {
  TreeModel model;
  PhysicalNetwork network;
};

Scenario builtin_scenario(double kappa = 1.0);

}  // namespace cdg
