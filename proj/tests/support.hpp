#pragma once

#include "cdg/learn.hpp"
#include "cdg/model.hpp"
#include "cdg/physnet.hpp"
#include "cdg/tree.hpp"

#include <random>
#include <vector>

namespace cdg::testing {

inline std::vector<int> random_parents(int d, std::mt19937_64& rng) {
  // Random labelled tree via a uniform Prüfer sequence, then rooted at 0.
  std::vector<int> parent(static_cast<std::size_t>(d), -1);
  if (d == 1) return parent;
  EdgeList edges;
  if (d == 2) {
    edges.emplace_back(0, 1);
  } else {
    std::vector<int> seq(static_cast<std::size_t>(d - 2));
    for (auto& s : seq) s = static_cast<int>(rng() % static_cast<std::uint64_t>(d));
    edges = prufer_decode(seq, d);
  }
  const auto adj = adjacency(d, edges);
  std::vector<int> stack{0};
  std::vector<char> seen(static_cast<std::size_t>(d), 0);
  seen[0] = 1;
  while (!stack.empty()) {
    const int x = stack.back();
    stack.pop_back();
    for (int y : adj[x])
      if (!seen[y]) {
        seen[y] = 1;
        parent[y] = x;
        stack.push_back(y);
      }
  }
  return parent;
}

inline TreeModel random_model(int d, std::mt19937_64& rng, double lo = 0.05, double hi = 0.95) {
  auto u = [&] { return lo + (hi - lo) * uniform01(rng); };
  std::vector<Joint2> cond(static_cast<std::size_t>(d));
  for (auto& c : cond) {
    const double a = u(), b = u();
    c << a, 1.0 - a, b, 1.0 - b;
  }
  const double r = u();
  return TreeModel::from_conditionals(random_parents(d, rng), Marginal2(r, 1.0 - r), cond);
}

inline CostMatrix random_costs(int d, std::mt19937_64& rng, double lo = 0.05, double hi = 1.0) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) c(i, j) = c(j, i) = lo + (hi - lo) * uniform01(rng);
  return CostMatrix(c);
}

inline Eigen::MatrixXd random_mi(int d, std::mt19937_64& rng, double hi = 0.3) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) m(i, j) = m(j, i) = hi * uniform01(rng);
  return m;
}

inline std::vector<std::uint8_t> bits(std::uint64_t code, int d) {
  // x[0] is the most significant bit, so increasing codes are lexicographic.
  std::vector<std::uint8_t> x(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) x[i] = static_cast<std::uint8_t>((code >> (d - 1 - i)) & 1);
  return x;
}

inline EdgeList path_edges(int d) {
  EdgeList e;
  for (int i = 0; i + 1 < d; ++i) e.emplace_back(i, i + 1);
  return e;
}

inline EdgeList star_edges(int d) {
  EdgeList e;
  for (int i = 1; i < d; ++i) e.emplace_back(0, i);
  return e;
}

}  // namespace cdg::testing
