#pragma once

#include "cdg/common.hpp"
#include "cdg/model.hpp"
#include "cdg/physnet.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace cdg {

using Assignment = std::vector<std::uint8_t>;

/// Log-domain potentials on a tree: log psi_i = log Q_i and
/// log psi_ij = log Q_ij - log Q_i - log Q_j (0/0 cells count as -inf).
struct Potentials {
  int d = 0;
  EdgeList edges;                       // sorted; defines the inference tree
  std::vector<Eigen::Vector2d> node;    // log psi_i
  std::vector<Eigen::Matrix2d> edge;    // log psi_ij, rows index edges[k].u
};

Potentials make_potentials(const PairwiseMarginals& marginals, const EdgeList& tree);
Potentials make_potentials(const TreeModel& model);

enum class Protocol { Async, Sync };
std::string to_string(Protocol p);
Protocol parse_protocol(const std::string& s);

struct DirectedMessage {
  int from = 0;
  int to = 0;
  Eigen::Vector2d value;  // probabilities, sums to 1
};

struct InferenceResult {
  Assignment assignment;
  std::int64_t messages_sent = 0;
  double total_cost = 0.0;
  int iterations = 0;  // passes (async) or flooding rounds (sync)
  Protocol protocol = Protocol::Async;
  std::vector<DirectedMessage> messages;  // final message on each directed edge
  double max_normalization_error = 0.0;   // worst |sum - 1| over every update
};

/// Leaves-to-root then root-to-leaves schedule, rooted at node 0.
InferenceResult max_product_async(const Potentials& potentials, const CostMatrix& costs);

/// Every node sends to every neighbour in each of diam(tree) rounds.
InferenceResult max_product_sync(const Potentials& potentials, const CostMatrix& costs);
/// Same with an explicit round count (may stop before convergence).
InferenceResult max_product_sync(const Potentials& potentials, const CostMatrix& costs, int rounds);

/// sum_e 2 c_e, correctly rounded.
double async_protocol_cost(const EdgeList& tree, const CostMatrix& costs);
/// 2 diam(T) sum_e c_e, correctly rounded.
double sync_protocol_cost(const EdgeList& tree, const CostMatrix& costs);
std::int64_t async_message_count(int d);
std::int64_t sync_message_count(int d, int diameter);

inline constexpr int kMaxBruteForceMapNodes = 20;

/// Exhaustive argmax of the joint; ties go to the lexicographically smallest x.
Assignment brute_force_map(const TreeModel& model);

/// MAP under the tree distribution that matches `marginals` on `tree`.
Assignment map_estimate(const PairwiseMarginals& marginals, const EdgeList& tree);

/// Fraction of trials whose MAP on `learned_tree`, refit from n fresh samples,
/// differs from the MAP of the true model.
double map_error_probability(const TreeModel& true_model, const EdgeList& learned_tree,
                             Eigen::Index n, int trials, std::uint64_t seed);

}  // namespace cdg
