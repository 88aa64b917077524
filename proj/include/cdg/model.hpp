#pragma once

#include "cdg/common.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace cdg {

/// Tree-structured distribution over {0,1}^d, stored as node and edge
/// marginals. Immutable after construction; the constructor enforces the
/// invariants (spanning tree, normalization, marginal consistency).
/// Edge joint rows index the smaller endpoint (Edge::u).
class TreeModel {
 public:
  TreeModel(int d, EdgeList edges, std::vector<Marginal2> node_marginals,
            std::vector<Joint2> edge_marginals);

  /// Root marginal plus per-node conditionals P(child | parent), parent[root] = -1.
  /// conditional[c](a, b) = P(x_c = b | x_parent = a).
  static TreeModel from_conditionals(const std::vector<int>& parent, const Marginal2& root,
                                     const std::vector<Joint2>& conditional);

  int d() const { return d_; }
  const EdgeList& edges() const { return edges_; }
  const Marginal2& node_marginal(int i) const { return nodes_[i]; }
  const std::vector<Marginal2>& node_marginals() const { return nodes_; }
  /// Joint of edges()[k]; rows index the smaller endpoint.
  const Joint2& edge_marginal(std::size_t k) const { return joints_[k]; }
  const std::vector<Joint2>& edge_marginals() const { return joints_; }
  /// Joint of an edge of the model, oriented so rows index `a`.
  Joint2 edge_joint(int a, int b) const;

 private:
  int d_;
  EdgeList edges_;
  std::vector<Marginal2> nodes_;
  std::vector<Joint2> joints_;
};

/// n x d matrix of binary samples.
class SampleSet {
 public:
  using Matrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

  explicit SampleSet(Matrix data);

  Eigen::Index n() const { return data_.rows(); }
  int d() const { return static_cast<int>(data_.cols()); }
  const Matrix& data() const { return data_; }

  friend bool operator==(const SampleSet& a, const SampleSet& b) { return a.data_ == b.data_; }

 private:
  Matrix data_;
};

/// Exact pair and node counts of a SampleSet.
class PairwiseStats {
 public:
  explicit PairwiseStats(const SampleSet& samples);

  std::int64_t n() const { return n_; }
  int d() const { return static_cast<int>(ones_.size()); }
  /// counts(a, b) = #{samples : x_i = a, x_j = b}.
  Eigen::Matrix<std::int64_t, 2, 2> pair_counts(int i, int j) const;
  Eigen::Matrix<std::int64_t, 2, 1> node_counts(int i) const;
  Joint2 joint(int i, int j) const;

 private:
  std::int64_t n_;
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1> ones_;
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> both_;
};

/// Node marginals and all pairwise joints, empirical or exact. This is what
/// the structure learners and the potential builder consume.
class PairwiseMarginals {
 public:
  PairwiseMarginals(std::vector<Marginal2> nodes, std::vector<Joint2> pairs);

  int d() const { return static_cast<int>(nodes_.size()); }
  const Marginal2& node(int i) const { return nodes_[i]; }
  /// Rows index x_i, columns x_j. joint(i, i) is diagonal.
  const Joint2& joint(int i, int j) const { return pairs_[static_cast<std::size_t>(i) * d() + j]; }

 private:
  std::vector<Marginal2> nodes_;
  std::vector<Joint2> pairs_;
};

PairwiseStats empirical_stats(const SampleSet& samples);
PairwiseMarginals empirical_marginals(const PairwiseStats& stats);
/// Exact pairwise marginals of every node pair, by propagating conditionals
/// along tree paths.
PairwiseMarginals exact_pairwise_marginals(const TreeModel& model);

/// Exact joint over up to 4 nodes; entry index has nodes[0] as the most
/// significant bit.
Eigen::VectorXd subset_joint(const TreeModel& model, std::span<const int> nodes);

double joint_probability(const TreeModel& model, std::span<const std::uint8_t> x);
/// Natural log of joint_probability; -inf for impossible assignments.
double log_joint_probability(const TreeModel& model, std::span<const std::uint8_t> x);

/// n ancestral draws rooted at node 0, deterministic in seed.
SampleSet sample(const TreeModel& model, Eigen::Index n, std::uint64_t seed);

inline constexpr double kNormalizationTolerance = 1e-9;

/// Mutual information (nats) of a joint table over X x Y; 0 ln 0 := 0.
template <typename Derived>
typename Derived::Scalar mutual_information(const Eigen::MatrixBase<Derived>& joint) {
  using Scalar = typename Derived::Scalar;
  using std::abs;
  using std::log;
  if (abs(joint.sum() - Scalar(1)) > Scalar(kNormalizationTolerance))
    throw Error("mutual_information: joint does not sum to 1");
  if ((joint.array() < Scalar(0)).any()) throw Error("mutual_information: negative entry");
  const auto rows = joint.rowwise().sum().eval();
  const auto cols = joint.colwise().sum().eval();
  Scalar mi(0);
  for (Eigen::Index a = 0; a < joint.rows(); ++a)
    for (Eigen::Index b = 0; b < joint.cols(); ++b) {
      const Scalar p = joint(a, b);
      if (p > Scalar(0)) mi += p * log(p / (rows(a) * cols(b)));
    }
  return mi < Scalar(0) ? Scalar(0) : mi;
}

/// KL(p || q) in nats; +inf when p has mass outside the support of q.
template <typename DerivedP, typename DerivedQ>
typename DerivedP::Scalar kl_divergence(const Eigen::MatrixBase<DerivedP>& p,
                                        const Eigen::MatrixBase<DerivedQ>& q) {
  using Scalar = typename DerivedP::Scalar;
  using std::log;
  Scalar kl(0);
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    const Scalar pk = p.reshaped()(k);
    if (pk <= Scalar(0)) continue;
    const Scalar qk = q.reshaped()(k);
    if (qk <= Scalar(0)) return std::numeric_limits<Scalar>::infinity();
    kl += pk * log(pk / qk);
  }
  return kl;
}

/// Exact mutual information between the endpoints of a k-hop chain of
/// symmetric binary edges with joint 1/4 +- delta/2 per edge.
double path_mutual_information(double delta, int k);

/// MI of a symmetric binary joint with correlation rho = P(equal) - P(differ).
double symmetric_binary_mi(double rho);

/// d x d matrix of pairwise mutual informations (zero diagonal).
Eigen::MatrixXd mutual_information_matrix(const PairwiseMarginals& marginals);

}  // namespace cdg
