#include "cdg/scenario.hpp"

namespace cdg {

std::vector<int> scenario_parents() {
  std::vector<int> parent(kScenarioNodes, -1);
  for (int k = 1; k <= 3; ++k) parent[k] = 0;
  for (int k = 4; k < kScenarioNodes; ++k) parent[k] = 1 + (k - 4) / 2;
  return parent;
}

EdgeList scenario_tree_edges() {
  const auto parent = scenario_parents();
  EdgeList edges;
  for (int k = 1; k < kScenarioNodes; ++k) edges.emplace_back(parent[k], k);
  return canonical(std::move(edges));
}

TreeModel scenario_model() {
  Joint2 bsc;
  bsc << 0.7, 0.3, 0.3, 0.7;
  std::vector<Joint2> cond(kScenarioNodes, bsc);
  return TreeModel::from_conditionals(scenario_parents(), Marginal2(0.7, 0.3), cond);
}

Scenario builtin_scenario(double kappa) {
  return {scenario_model(), line_network(kScenarioNodes, kappa)};
}

}  // namespace cdg
