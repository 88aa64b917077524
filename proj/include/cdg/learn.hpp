#pragma once

#include "cdg/common.hpp"
#include "cdg/model.hpp"
#include "cdg/physnet.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace cdg {

enum class Algorithm { Async, Sync, BruteAsync, BruteSync };
enum class CostMode { Async, Sync };

std::string to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& s);
std::string to_string(CostMode m);
CostMode parse_cost_mode(const std::string& s);
/// The protocol whose cost an algorithm optimizes.
CostMode cost_mode(Algorithm a);

struct LearnedTree {
  EdgeList edges;  // canonical, sorted
  Algorithm algorithm = Algorithm::Async;
  double gamma = 0.0;
  std::optional<double> beta;
  std::vector<double> weights;  // weight of edges[k] when it was chosen
  int diameter = 0;
};

/// Complete graph over d nodes carrying I_e and c_e for every pair.
class WeightedCandidateGraph {
 public:
  WeightedCandidateGraph(Eigen::MatrixXd mutual_information, CostMatrix costs);
  WeightedCandidateGraph(const PairwiseMarginals& marginals, const CostMatrix& costs);
  WeightedCandidateGraph(const PairwiseStats& stats, const CostMatrix& costs);

  int d() const { return static_cast<int>(mi_.rows()); }
  double mi(int i, int j) const { return mi_(i, j); }
  double mi(const Edge& e) const { return mi_(e.u, e.v); }
  double cost(int i, int j) const { return costs_(i, j); }
  double cost(const Edge& e) const { return costs_(e); }
  const Eigen::MatrixXd& mi_matrix() const { return mi_; }
  const CostMatrix& costs() const { return costs_; }

  /// w_e = I_e - 2 gamma c_e.
  Eigen::MatrixXd async_weights(double gamma) const;

 private:
  Eigen::MatrixXd mi_;
  CostMatrix costs_;
};

/// Maximum weight spanning tree under w_e = I_e - 2 gamma c_e (Kruskal, ties
/// to the lexicographically smallest pair).
LearnedTree async_learn(const WeightedCandidateGraph& graph, double gamma);
LearnedTree async_learn(const PairwiseStats& stats, const CostMatrix& costs, double gamma);

/// One candidate edge at a greedy step: its weight is mi - offset, where the
/// offset is the sample-independent cost part.
struct SyncCandidate {
  Edge edge;
  double mi = 0.0;
  double offset = 0.0;
  double weight = 0.0;
};

struct SyncStep {
  EdgeList tree;  // E_S before this step's selection
  Edge chosen;
  std::vector<SyncCandidate> candidates;
};

struct SyncTrajectory {
  std::vector<SyncStep> steps;
  LearnedTree result;
};

/// Greedy diameter-aware construction; records every step's candidate set.
SyncTrajectory sync_trajectory(const WeightedCandidateGraph& graph, double gamma, double beta);
LearnedTree sync_learn(const WeightedCandidateGraph& graph, double gamma, double beta = 1.0);
LearnedTree sync_learn(const PairwiseStats& stats, const CostMatrix& costs, double gamma,
                       double beta = 1.0);

inline constexpr int kMaxBruteForceNodes = 9;

/// Exhaustive maximizers over all d^(d-2) spanning trees (d <= 9).
LearnedTree brute_force_async_opt(const WeightedCandidateGraph& graph, double gamma);
LearnedTree brute_force_sync_opt(const WeightedCandidateGraph& graph, double gamma);
LearnedTree brute_force_sync_opt(const PairwiseStats& stats, const CostMatrix& costs, double gamma);

/// Sum of I_e - 2 gamma c_e (async) or sum I_e - 2 gamma diam(T) sum c_e (sync).
double objective_value(const EdgeList& tree, const WeightedCandidateGraph& graph, double gamma,
                       CostMode mode);

namespace detail {
/// Sync-objective enumeration with an explicit node cap.
LearnedTree brute_force_sync(const WeightedCandidateGraph& graph, double gamma, int max_nodes);
}  // namespace detail

}  // namespace cdg
