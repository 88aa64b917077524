#include "cdg/learn.hpp"

#include "cdg/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

namespace cdg {

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Async: return "async";
    case Algorithm::Sync: return "sync";
    case Algorithm::BruteAsync: return "brute-async";
    case Algorithm::BruteSync: return "brute-sync";
  }
  return "?";
}

Algorithm parse_algorithm(const std::string& s) {
  if (s == "async") return Algorithm::Async;
  if (s == "sync") return Algorithm::Sync;
  if (s == "brute-async") return Algorithm::BruteAsync;
  if (s == "brute-sync") return Algorithm::BruteSync;
  throw Error("unknown algorithm '" + s + "'");
}

std::string to_string(CostMode m) { return m == CostMode::Async ? "async" : "sync"; }

CostMode parse_cost_mode(const std::string& s) {
  if (s == "async") return CostMode::Async;
  if (s == "sync") return CostMode::Sync;
  throw Error("unknown mode '" + s + "'");
}

CostMode cost_mode(Algorithm a) {
  return (a == Algorithm::Async || a == Algorithm::BruteAsync) ? CostMode::Async : CostMode::Sync;
}

WeightedCandidateGraph::WeightedCandidateGraph(Eigen::MatrixXd mutual_information, CostMatrix costs)
    : mi_(std::move(mutual_information)), costs_(std::move(costs)) {
  if (mi_.rows() != mi_.cols() || mi_.rows() != costs_.d())
    throw Error("candidate graph: MI and cost matrices must be d x d");
  if (!mi_.allFinite() || (mi_.array() < 0.0).any())
    throw Error("candidate graph: mutual information must be finite and non-negative");
}

WeightedCandidateGraph::WeightedCandidateGraph(const PairwiseMarginals& marginals,
                                               const CostMatrix& costs)
    : WeightedCandidateGraph(mutual_information_matrix(marginals), costs) {}

WeightedCandidateGraph::WeightedCandidateGraph(const PairwiseStats& stats, const CostMatrix& costs)
    : WeightedCandidateGraph(empirical_marginals(stats), costs) {}

Eigen::MatrixXd WeightedCandidateGraph::async_weights(double gamma) const {
  Eigen::MatrixXd w = mi_ - 2.0 * gamma * costs_.matrix();
  w.diagonal().setZero();
  return w;
}

namespace {

void require_gamma(double gamma) {
  if (!std::isfinite(gamma) || gamma < 0.0) throw Error("gamma must be finite and >= 0");
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[std::max(a, b)] = std::min(a, b);
    return true;
  }
};

// Sorts edges and carries their weights along.
void sort_with_weights(LearnedTree& t) {
  std::vector<std::size_t> idx(t.edges.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return t.edges[a] < t.edges[b]; });
  EdgeList e;
  std::vector<double> w;
  for (auto k : idx) {
    e.push_back(t.edges[k]);
    w.push_back(t.weights[k]);
  }
  t.edges = std::move(e);
  t.weights = std::move(w);
}

}  // namespace

LearnedTree async_learn(const WeightedCandidateGraph& graph, double gamma) {
  require_gamma(gamma);
  const int d = graph.d();
  struct Cand {
    double w;
    Edge e;
  };
  std::vector<Cand> cands;
  cands.reserve(static_cast<std::size_t>(d) * (d - 1) / 2);
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j)
      cands.push_back({graph.mi(i, j) - 2.0 * gamma * graph.cost(i, j), Edge(i, j)});
  std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.w != b.w) return a.w > b.w;
    return a.e < b.e;
  });
  LearnedTree t;
  t.algorithm = Algorithm::Async;
  t.gamma = gamma;
  UnionFind uf(d);
  for (const auto& c : cands) {
    if (static_cast<int>(t.edges.size()) == d - 1) break;
    if (uf.unite(c.e.u, c.e.v)) {
      t.edges.push_back(c.e);
      t.weights.push_back(c.w);
    }
  }
  sort_with_weights(t);
  t.diameter = tree_diameter(d, t.edges);
  return t;
}

LearnedTree async_learn(const PairwiseStats& stats, const CostMatrix& costs, double gamma) {
  return async_learn(WeightedCandidateGraph(stats, costs), gamma);
}

SyncTrajectory sync_trajectory(const WeightedCandidateGraph& graph, double gamma, double beta) {
  require_gamma(gamma);
  if (!std::isfinite(beta) || beta < 0.0) throw Error("beta must be finite and >= 0");
  const int d = graph.d();
  SyncTrajectory out;
  LearnedTree& t = out.result;
  t.algorithm = Algorithm::Sync;
  t.gamma = gamma;
  t.beta = beta;
  if (d < 2) return out;

  auto pick = [](const std::vector<SyncCandidate>& cands) {
    const SyncCandidate* best = &cands.front();
    for (const auto& c : cands)
      if (c.weight > best->weight || (c.weight == best->weight && c.edge < best->edge)) best = &c;
    return *best;
  };

  // First edge: plain I_e - 2 gamma c_e over all pairs.
  {
    SyncStep step;
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) {
        SyncCandidate c{Edge(i, j), graph.mi(i, j), 2.0 * gamma * graph.cost(i, j), 0.0};
        c.weight = c.mi - c.offset;
        step.candidates.push_back(c);
      }
    const SyncCandidate best = pick(step.candidates);
    step.chosen = best.edge;
    t.edges.push_back(best.edge);
    t.weights.push_back(best.weight);
    out.steps.push_back(std::move(step));
  }

  std::vector<char> in_tree(static_cast<std::size_t>(d), 0);
  in_tree[t.edges[0].u] = in_tree[t.edges[0].v] = 1;
  int diam = 1;
  while (static_cast<int>(t.edges.size()) < d - 1) {
    SyncStep step;
    step.tree = t.edges;
    const auto ecc = eccentricities(d, t.edges);
    const double m = static_cast<double>(t.edges.size());
    double tree_cost = 0.0;
    for (const auto& e : t.edges) tree_cost += 2.0 * gamma * graph.cost(e);
    const double spread = std::sqrt(static_cast<double>(d)) - std::sqrt(m);
    for (int i = 0; i < d; ++i) {
      if (!in_tree[i]) continue;
      for (int j = 0; j < d; ++j) {
        if (in_tree[j]) continue;
        const Edge e(i, j);
        const int grown = std::max(diam, ecc[i] + 1);
        const double c = graph.cost(e);
        const double k_e = static_cast<double>(grown - diam) * tree_cost;
        SyncCandidate cand{e, graph.mi(e), 0.0, 0.0};
        cand.offset = 2.0 * gamma * grown * c + beta * (d / m) * k_e + 2.0 * gamma * spread * c;
        cand.weight = cand.mi - cand.offset;
        step.candidates.push_back(cand);
      }
    }
    std::sort(step.candidates.begin(), step.candidates.end(),
              [](const SyncCandidate& a, const SyncCandidate& b) { return a.edge < b.edge; });
    const SyncCandidate best = pick(step.candidates);
    step.chosen = best.edge;
    const int attach = in_tree[best.edge.u] ? best.edge.u : best.edge.v;
    diam = std::max(diam, ecc[attach] + 1);
    in_tree[best.edge.u] = in_tree[best.edge.v] = 1;
    t.edges.push_back(best.edge);
    t.weights.push_back(best.weight);
    out.steps.push_back(std::move(step));
  }
  sort_with_weights(t);
  t.diameter = tree_diameter(d, t.edges);
  return out;
}

LearnedTree sync_learn(const WeightedCandidateGraph& graph, double gamma, double beta) {
  return sync_trajectory(graph, gamma, beta).result;
}

LearnedTree sync_learn(const PairwiseStats& stats, const CostMatrix& costs, double gamma,
                       double beta) {
  return sync_learn(WeightedCandidateGraph(stats, costs), gamma, beta);
}

namespace {

// Enumerates all spanning trees and keeps the best score; exact ties go to the
// lexicographically smallest sorted edge list. `bound(sumI, sumC)` is an upper
// bound on the score that lets the diameter computation be skipped.
template <typename Score, typename Bound>
EdgeList enumerate_best(const WeightedCandidateGraph& graph, int max_nodes, Score score,
                        Bound bound) {
  const int d = graph.d();
  if (d > max_nodes) throw Error("brute force limited to d <= " + std::to_string(max_nodes));
  std::vector<double> mi(static_cast<std::size_t>(d * d)), cost(static_cast<std::size_t>(d * d));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      mi[i * d + j] = graph.mi(i, j);
      cost[i * d + j] = i == j ? 0.0 : graph.cost(i, j);
    }
  double best = -std::numeric_limits<double>::infinity();
  EdgeList best_edges;
  EdgeList scratch;
  for_each_spanning_tree(d, [&](std::span<const Edge> edges) {
    double si = 0.0, sc = 0.0;
    for (const auto& e : edges) {
      si += mi[e.u * d + e.v];
      sc += cost[e.u * d + e.v];
    }
    if (bound(si, sc) < best) return;
    const double s = score(si, sc, edges);
    if (s < best) return;
    scratch.assign(edges.begin(), edges.end());
    std::sort(scratch.begin(), scratch.end());
    if (s > best || scratch < best_edges) {
      best = s;
      best_edges = scratch;
    }
  });
  return best_edges;
}

LearnedTree finish(const WeightedCandidateGraph& graph, EdgeList edges, Algorithm algo,
                   double gamma) {
  LearnedTree t;
  t.algorithm = algo;
  t.gamma = gamma;
  t.edges = std::move(edges);
  t.diameter = tree_diameter(graph.d(), t.edges);
  for (const auto& e : t.edges) {
    const double scale = algo == Algorithm::BruteAsync ? 1.0 : t.diameter;
    t.weights.push_back(graph.mi(e) - 2.0 * gamma * scale * graph.cost(e));
  }
  return t;
}

}  // namespace

LearnedTree brute_force_async_opt(const WeightedCandidateGraph& graph, double gamma) {
  require_gamma(gamma);
  auto score = [&](double si, double sc, std::span<const Edge>) { return si - 2.0 * gamma * sc; };
  auto bound = [](double, double) { return std::numeric_limits<double>::infinity(); };
  return finish(graph, enumerate_best(graph, kMaxBruteForceNodes, score, bound),
                Algorithm::BruteAsync, gamma);
}

LearnedTree detail::brute_force_sync(const WeightedCandidateGraph& graph, double gamma,
                                     int max_nodes) {
  require_gamma(gamma);
  const int d = graph.d();
  auto score = [&](double si, double sc, std::span<const Edge> edges) {
    const int diam = d <= detail::kMaxFastNodes ? detail::fast_tree_diameter(d, edges.data()) : 0;
    return si - 2.0 * gamma * diam * sc;
  };
  // Every tree on d >= 3 nodes has diameter >= 2.
  const double min_diam = d >= 3 ? 2.0 : (d == 2 ? 1.0 : 0.0);
  auto bound = [&](double si, double sc) { return si - 2.0 * gamma * min_diam * sc; };
  return finish(graph, enumerate_best(graph, max_nodes, score, bound), Algorithm::BruteSync,
                gamma);
}

LearnedTree brute_force_sync_opt(const WeightedCandidateGraph& graph, double gamma) {
  return detail::brute_force_sync(graph, gamma, kMaxBruteForceNodes);
}

LearnedTree brute_force_sync_opt(const PairwiseStats& stats, const CostMatrix& costs,
                                 double gamma) {
  return brute_force_sync_opt(WeightedCandidateGraph(stats, costs), gamma);
}

double objective_value(const EdgeList& tree, const WeightedCandidateGraph& graph, double gamma,
                       CostMode mode) {
  require_spanning_tree(graph.d(), tree, "objective_value");
  double si = 0.0, sc = 0.0, sa = 0.0;
  for (const auto& e : tree) {
    si += graph.mi(e);
    sc += graph.cost(e);
    sa += graph.mi(e) - 2.0 * gamma * graph.cost(e);
  }
  if (mode == CostMode::Async) return sa;
  return si - 2.0 * gamma * tree_diameter(graph.d(), tree) * sc;
}

}  // namespace cdg
