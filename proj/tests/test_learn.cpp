#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "cdg/learn.hpp"
#include "cdg/scenario.hpp"
#include "support.hpp"

#include <cmath>

using namespace cdg;
using namespace cdg::testing;

namespace {

WeightedCandidateGraph scenario_graph(double kappa) {
  const Scenario sc = builtin_scenario(kappa);
  return WeightedCandidateGraph(exact_pairwise_marginals(sc.model), all_pairs_costs(sc.network));
}

// Exhaustive argmax by plain scoring of every tree (no pruning), for checking the learners.
EdgeList enumerate_argmax(const WeightedCandidateGraph& g, double gamma, CostMode mode) {
  double best = -1e300;
  EdgeList arg;
  for_each_spanning_tree(g.d(), [&](std::span<const Edge> e) {
    EdgeList t = canonical(EdgeList(e.begin(), e.end()));
    const double v = objective_value(t, g, gamma, mode);
    if (v > best + 1e-12 || (std::abs(v - best) <= 1e-12 && t < arg)) {
      best = v;
      arg = t;
    }
  });
  return arg;
}

WeightedCandidateGraph crafted_d4() {
  Eigen::MatrixXd mi = Eigen::MatrixXd::Zero(4, 4);
  auto set = [&](int i, int j, double v) { mi(i, j) = mi(j, i) = v; };
  set(0, 1, 0.5);
  set(1, 2, 0.5);
  set(2, 3, 0.5);
  set(0, 2, 0.45);
  set(0, 3, 0.45);
  set(1, 3, 0.1);
  Eigen::MatrixXd c = Eigen::MatrixXd::Constant(4, 4, 0.1);
  c.diagonal().setZero();
  return WeightedCandidateGraph(mi, CostMatrix(c));
}

}  // namespace

TEST_CASE("async_learn: scenario structure snapshots") {
  const WeightedCandidateGraph g = scenario_graph(1.0);
  const LearnedTree t0 = async_learn(g, 0.0);
  CHECK(t0.edges == scenario_tree_edges());
  CHECK(t0.diameter == 6);
  CHECK(async_learn(g, 4.0).edges == path_edges(20));
}

TEST_CASE("sync_learn: scenario structure snapshots") {
  const WeightedCandidateGraph g = scenario_graph(1.0);
  const LearnedTree t0 = sync_learn(g, 0.0, 1.0);
  CHECK(t0.edges == scenario_tree_edges());
  const LearnedTree t4 = sync_learn(g, 4.0, 1.0);
  CHECK(is_spanning_tree(20, t4.edges));
  CHECK(t4.diameter < t0.diameter);
  CHECK(t4.beta.value() == 1.0);
}

TEST_CASE("learners: d = 2 returns the single edge") {
  Eigen::MatrixXd mi = Eigen::MatrixXd::Zero(2, 2);
  mi(0, 1) = mi(1, 0) = 0.2;
  Eigen::MatrixXd c(2, 2);
  c << 0, 5, 5, 0;
  const WeightedCandidateGraph g(mi, CostMatrix(c));
  for (double gamma : {0.0, 1.0, 100.0}) {
    for (const LearnedTree& t : {async_learn(g, gamma), sync_learn(g, gamma, 3.0),
                                 brute_force_async_opt(g, gamma), brute_force_sync_opt(g, gamma)}) {
      CHECK(t.edges == EdgeList{Edge(0, 1)});
      CHECK(t.diameter == 1);
    }
  }
}

TEST_CASE("brute_force_sync_opt: crafted four-node instance") {
  // Stars have diameter 2, paths 3. With gamma = 1 and unit 0.1 costs the
  // star centred at node 2 scores 1.45 - 4*0.3 = 0.25, the best of the 16 trees.
  const WeightedCandidateGraph g = crafted_d4();
  const LearnedTree t = brute_force_sync_opt(g, 1.0);
  CHECK(t.edges == EdgeList{Edge(0, 2), Edge(1, 2), Edge(2, 3)});
  CHECK(objective_value(t.edges, g, 1.0, CostMode::Sync) == doctest::Approx(0.25).epsilon(1e-13));
  CHECK(t.diameter == 2);
  // Without costs the heaviest path wins.
  CHECK(brute_force_sync_opt(g, 0.0).edges == path_edges(4));
}

TEST_CASE("brute force: gamma = 0 coincides with Chow-Liu") {
  std::mt19937_64 rng(41);
  for (int rep = 0; rep < 10; ++rep) {
    const int d = 3 + static_cast<int>(rng() % 5);
    const WeightedCandidateGraph g(random_mi(d, rng), random_costs(d, rng));
    CHECK(brute_force_sync_opt(g, 0.0).edges == async_learn(g, 0.0).edges);
    CHECK(brute_force_async_opt(g, 0.0).edges == async_learn(g, 0.0).edges);
  }
  Eigen::MatrixXd mi = Eigen::MatrixXd::Zero(10, 10);
  Eigen::MatrixXd c = Eigen::MatrixXd::Ones(10, 10);
  c.diagonal().setZero();
  CHECK_THROWS_AS(brute_force_sync_opt(WeightedCandidateGraph(mi, CostMatrix(c)), 0.0), Error);
}

TEST_CASE("async_learn equals exhaustive maximizer on random instances") {
  std::mt19937_64 rng(42);
  for (int rep = 0; rep < 40; ++rep) {
    const int d = 2 + static_cast<int>(rng() % 6);
    const WeightedCandidateGraph g(random_mi(d, rng), random_costs(d, rng));
    const double gamma = 0.3 * uniform01(rng);
    const LearnedTree t = async_learn(g, gamma);
    CHECK(t.edges == enumerate_argmax(g, gamma, CostMode::Async));
    CHECK(t.edges == brute_force_async_opt(g, gamma).edges);
  }
}

TEST_CASE("brute_force_sync_opt dominates sync_learn and matches plain enumeration") {
  std::mt19937_64 rng(43);
  for (int rep = 0; rep < 20; ++rep) {
    const int d = 3 + static_cast<int>(rng() % 5);
    const WeightedCandidateGraph g(random_mi(d, rng), random_costs(d, rng));
    const double gamma = 0.2 * uniform01(rng);
    const LearnedTree b = brute_force_sync_opt(g, gamma);
    const LearnedTree s = sync_learn(g, gamma, 1.0);
    CHECK(objective_value(b.edges, g, gamma, CostMode::Sync) >=
          objective_value(s.edges, g, gamma, CostMode::Sync) - 1e-12);
    CHECK(objective_value(b.edges, g, gamma, CostMode::Sync) ==
          doctest::Approx(objective_value(enumerate_argmax(g, gamma, CostMode::Sync), g, gamma,
                                          CostMode::Sync)).epsilon(1e-12));
  }
}

TEST_CASE("objective_value: gamma = 0 and linear shift") {
  std::mt19937_64 rng(44);
  const WeightedCandidateGraph g(random_mi(6, rng), random_costs(6, rng));
  const EdgeList t = star_edges(6);
  double si = 0, sc = 0;
  for (const auto& e : t) {
    si += g.mi(e);
    sc += g.cost(e);
  }
  CHECK(objective_value(t, g, 0.0, CostMode::Async) == doctest::Approx(si).epsilon(1e-14));
  CHECK(objective_value(t, g, 0.0, CostMode::Sync) == doctest::Approx(si).epsilon(1e-14));
  CHECK(objective_value(t, g, 0.7, CostMode::Async) == doctest::Approx(si - 1.4 * sc).epsilon(1e-13));
  CHECK(objective_value(t, g, 0.7, CostMode::Sync) == doctest::Approx(si - 2.8 * sc).epsilon(1e-13));
  CHECK_THROWS_AS(objective_value(path_edges(5), g, 0.0, CostMode::Async), Error);
}

TEST_CASE("property: async_learn invariant under a constant MI shift") {
  std::mt19937_64 rng(45);
  for (int rep = 0; rep < 20; ++rep) {
    const int d = 3 + static_cast<int>(rng() % 10);
    const Eigen::MatrixXd mi = random_mi(d, rng);
    const CostMatrix c = random_costs(d, rng);
    Eigen::MatrixXd shifted = mi.array() + 0.5;
    shifted.diagonal().setZero();
    CHECK(async_learn(WeightedCandidateGraph(mi, c), 0.1).edges ==
          async_learn(WeightedCandidateGraph(shifted, c), 0.1).edges);
  }
}

TEST_CASE("property: large gamma yields the minimum-cost spanning tree") {
  std::mt19937_64 rng(46);
  for (int rep = 0; rep < 10; ++rep) {
    const int d = 3 + static_cast<int>(rng() % 5);
    const WeightedCandidateGraph g(random_mi(d, rng), random_costs(d, rng));
    double best = 1e300;
    EdgeList arg;
    for_each_spanning_tree(d, [&](std::span<const Edge> e) {
      const double c = g.costs().total(e);
      if (c < best) {
        best = c;
        arg = canonical(EdgeList(e.begin(), e.end()));
      }
    });
    CHECK(async_learn(g, 1e6).edges == arg);
  }
}

TEST_CASE("sync_trajectory: weights recomputed from scratch") {
  std::mt19937_64 rng(47);
  for (int rep = 0; rep < 20; ++rep) {
    const int d = 2 + static_cast<int>(rng() % 12);
    const WeightedCandidateGraph g(random_mi(d, rng), random_costs(d, rng));
    const double gamma = 0.3 * uniform01(rng), beta = 2 * uniform01(rng);
    const SyncTrajectory tr = sync_trajectory(g, gamma, beta);
    CHECK(tr.steps.size() == static_cast<std::size_t>(d - 1));
    CHECK(is_spanning_tree(d, tr.result.edges));
    for (std::size_t t = 0; t < tr.steps.size(); ++t) {
      const SyncStep& st = tr.steps[t];
      CHECK(st.tree.size() == t);
      double best = -1e300;
      for (const auto& c : st.candidates) {
        double w;
        if (t == 0) {
          w = g.mi(c.edge) - 2 * gamma * g.cost(c.edge);
        } else {
          EdgeList grown = st.tree;
          grown.push_back(c.edge);
          // Diameter of the partial trees, counted over their own edges.
          const int diam_t = tree_diameter(std::span<const Edge>(st.tree));
          const int diam_g = tree_diameter(std::span<const Edge>(grown));
          double sum = 0;
          for (const auto& e : st.tree) sum += 2 * gamma * g.cost(e);
          const double m = static_cast<double>(st.tree.size());
          const double k_e = (diam_g - diam_t) * sum;
          const double dd = std::sqrt(double(d)) * (1 - std::sqrt(m) / std::sqrt(double(d)));
          w = g.mi(c.edge) - 2 * gamma * diam_g * g.cost(c.edge) - beta * (d / m) * k_e -
              2 * gamma * dd * g.cost(c.edge);
        }
        CHECK(c.weight == doctest::Approx(w).epsilon(1e-12));
        CHECK(c.mi - c.offset == c.weight);
        best = std::max(best, c.weight);
      }
      for (const auto& c : st.candidates)
        if (c.edge == st.chosen) CHECK(c.weight == best);
    }
  }
}
