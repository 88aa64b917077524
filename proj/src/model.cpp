#include "cdg/model.hpp"

#include "cdg/tree.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <random>
#include <string>

namespace cdg {

namespace {

constexpr double kNodeSumTolerance = 1e-12;

void check_distribution(const Eigen::Ref<const Eigen::MatrixXd>& p, double tol, const std::string& what) {
  if ((p.array() < 0.0).any() || !p.allFinite()) throw Error(what + ": negative or non-finite entry");
  if (std::abs(p.sum() - 1.0) > tol) throw Error(what + ": does not sum to 1");
}

// Rows of P(x_b | x_a) from the joint with rows indexing a.
Joint2 conditional_from_joint(const Joint2& joint) {
  Joint2 cond;
  for (int a = 0; a < 2; ++a) {
    const double row = joint.row(a).sum();
    if (row > 0.0) {
      cond.row(a) = joint.row(a) / row;
    } else {
      cond.row(a).setConstant(0.5);
    }
  }
  return cond;
}

struct RootedTree {
  std::vector<int> order;   // BFS order from root 0
  std::vector<int> parent;  // -1 at the root
};

RootedTree root_at_zero(int d, const EdgeList& edges) {
  const auto adj = adjacency(d, edges);
  RootedTree rt;
  rt.parent.assign(static_cast<std::size_t>(d), -1);
  std::vector<char> seen(static_cast<std::size_t>(d), 0);
  rt.order.push_back(0);
  seen[0] = 1;
  for (std::size_t h = 0; h < rt.order.size(); ++h) {
    const int x = rt.order[h];
    for (int y : adj[x]) {
      if (!seen[y]) {
        seen[y] = 1;
        rt.parent[y] = x;
        rt.order.push_back(y);
      }
    }
  }
  return rt;
}

}  // namespace

TreeModel::TreeModel(int d, EdgeList edges, std::vector<Marginal2> node_marginals,
                     std::vector<Joint2> edge_marginals)
    : d_(d) {
  if (d < 1) throw Error("TreeModel: d must be positive");
  if (static_cast<int>(node_marginals.size()) != d) throw Error("TreeModel: need d node marginals");
  if (edge_marginals.size() != edges.size()) throw Error("TreeModel: need one joint per edge");
  require_spanning_tree(d, edges, "TreeModel");
  for (int i = 0; i < d; ++i)
    check_distribution(node_marginals[i], kNodeSumTolerance, "TreeModel node marginal " + std::to_string(i));

  std::vector<std::pair<Edge, Joint2>> items;
  items.reserve(edges.size());
  for (std::size_t k = 0; k < edges.size(); ++k) {
    items.emplace_back(edges[k], edge_marginals[k]);
  }
  std::sort(items.begin(), items.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [e, j] : items) {
    const std::string name = "TreeModel edge joint (" + std::to_string(e.u) + "," + std::to_string(e.v) + ")";
    check_distribution(j, kNormalizationTolerance, name);
    if ((j.rowwise().sum() - node_marginals[e.u]).cwiseAbs().maxCoeff() > kNormalizationTolerance ||
        (j.colwise().sum().transpose() - node_marginals[e.v]).cwiseAbs().maxCoeff() > kNormalizationTolerance)
      throw Error(name + ": inconsistent with node marginals");
    edges_.push_back(e);
    joints_.push_back(j);
  }
  nodes_ = std::move(node_marginals);
}

TreeModel TreeModel::from_conditionals(const std::vector<int>& parent, const Marginal2& root,
                                       const std::vector<Joint2>& conditional) {
  const int d = static_cast<int>(parent.size());
  if (static_cast<int>(conditional.size()) != d) throw Error("from_conditionals: size mismatch");
  EdgeList edges;
  int root_node = -1;
  for (int c = 0; c < d; ++c) {
    if (parent[c] < 0) {
      if (root_node >= 0) throw Error("from_conditionals: multiple roots");
      root_node = c;
    } else {
      edges.emplace_back(parent[c], c);
    }
  }
  if (root_node < 0) throw Error("from_conditionals: no root");
  require_spanning_tree(d, edges, "from_conditionals");

  std::vector<std::vector<int>> children(static_cast<std::size_t>(d));
  for (int c = 0; c < d; ++c)
    if (parent[c] >= 0) children[parent[c]].push_back(c);

  std::vector<Marginal2> nodes(static_cast<std::size_t>(d));
  std::vector<Joint2> joints(static_cast<std::size_t>(d));
  nodes[root_node] = root;
  std::queue<int> q;
  q.push(root_node);
  while (!q.empty()) {
    const int p = q.front();
    q.pop();
    for (int c : children[p]) {
      const Joint2& cond = conditional[c];
      if ((cond.rowwise().sum().array() - 1.0).abs().maxCoeff() > kNormalizationTolerance)
        throw Error("from_conditionals: conditional rows must sum to 1");
      joints[c] = nodes[p].asDiagonal() * cond;
      nodes[c] = joints[c].colwise().sum().transpose();
      nodes[c](1) = 1.0 - nodes[c](0);
      q.push(c);
    }
  }
  std::vector<Joint2> edge_joints;
  EdgeList oriented;
  for (int c = 0; c < d; ++c)
    if (parent[c] >= 0) {
      oriented.emplace_back(parent[c], c);
      edge_joints.push_back(parent[c] < c ? joints[c] : Joint2(joints[c].transpose()));
    }
  return TreeModel(d, oriented, nodes, edge_joints);
}

Joint2 TreeModel::edge_joint(int a, int b) const {
  const Edge key(a, b);
  const auto it = std::lower_bound(edges_.begin(), edges_.end(), key);
  if (it == edges_.end() || *it != key) throw Error("edge_joint: not an edge of the model");
  const Joint2& j = joints_[static_cast<std::size_t>(it - edges_.begin())];
  return a < b ? j : Joint2(j.transpose());
}

SampleSet::SampleSet(Matrix data) : data_(std::move(data)) {
  if (data_.rows() < 1) throw Error("SampleSet: need at least one sample");
  if (data_.cols() < 1) throw Error("SampleSet: need at least one variable");
  if ((data_.array() > 1).any()) throw Error("SampleSet: entries must be 0 or 1");
}

PairwiseStats::PairwiseStats(const SampleSet& samples) : n_(samples.n()) {
  // Counts fit exactly in doubles for any realistic n (< 2^53).
  const Eigen::MatrixXd x = samples.data().cast<double>();
  ones_ = x.colwise().sum().transpose().cast<std::int64_t>();
  const Eigen::MatrixXd both = x.transpose() * x;
  both_ = both.array().round().matrix().cast<std::int64_t>();
}

Eigen::Matrix<std::int64_t, 2, 2> PairwiseStats::pair_counts(int i, int j) const {
  const std::int64_t c11 = both_(i, j);
  Eigen::Matrix<std::int64_t, 2, 2> c;
  c(1, 1) = c11;
  c(1, 0) = ones_(i) - c11;
  c(0, 1) = ones_(j) - c11;
  c(0, 0) = n_ - ones_(i) - ones_(j) + c11;
  return c;
}

Eigen::Matrix<std::int64_t, 2, 1> PairwiseStats::node_counts(int i) const {
  return {n_ - ones_(i), ones_(i)};
}

Joint2 PairwiseStats::joint(int i, int j) const {
  return pair_counts(i, j).cast<double>() / static_cast<double>(n_);
}

PairwiseMarginals::PairwiseMarginals(std::vector<Marginal2> nodes, std::vector<Joint2> pairs)
    : nodes_(std::move(nodes)), pairs_(std::move(pairs)) {
  if (pairs_.size() != nodes_.size() * nodes_.size())
    throw Error("PairwiseMarginals: need d*d pair joints");
}

PairwiseStats empirical_stats(const SampleSet& samples) { return PairwiseStats(samples); }

PairwiseMarginals empirical_marginals(const PairwiseStats& stats) {
  const int d = stats.d();
  const double n = static_cast<double>(stats.n());
  std::vector<Marginal2> nodes(static_cast<std::size_t>(d));
  std::vector<Joint2> pairs(static_cast<std::size_t>(d) * d);
  for (int i = 0; i < d; ++i) {
    nodes[i] = stats.node_counts(i).cast<double>() / n;
    for (int j = 0; j < d; ++j) pairs[static_cast<std::size_t>(i) * d + j] = stats.joint(i, j);
  }
  return PairwiseMarginals(std::move(nodes), std::move(pairs));
}

PairwiseMarginals exact_pairwise_marginals(const TreeModel& model) {
  const int d = model.d();
  const auto adj = adjacency(d, model.edges());
  std::vector<Joint2> pairs(static_cast<std::size_t>(d) * d, Joint2::Zero());
  for (int i = 0; i < d; ++i) {
    auto at = [&](int j) -> Joint2& { return pairs[static_cast<std::size_t>(i) * d + j]; };
    at(i) = model.node_marginal(i).asDiagonal();
    std::vector<char> seen(static_cast<std::size_t>(d), 0);
    std::vector<int> stack{i};
    seen[i] = 1;
    while (!stack.empty()) {
      const int k = stack.back();
      stack.pop_back();
      for (int c : adj[k]) {
        if (seen[c]) continue;
        seen[c] = 1;
        at(c) = at(k) * conditional_from_joint(model.edge_joint(k, c));
        stack.push_back(c);
      }
    }
  }
  return PairwiseMarginals(model.node_marginals(), std::move(pairs));
}

Eigen::VectorXd subset_joint(const TreeModel& model, std::span<const int> nodes) {
  const int d = model.d();
  const int k = static_cast<int>(nodes.size());
  if (k < 1 || k > 4) throw Error("subset_joint: supports 1 to 4 nodes");
  for (int a = 0; a < k; ++a) {
    if (nodes[a] < 0 || nodes[a] >= d) throw Error("subset_joint: node out of range");
    for (int b = 0; b < a; ++b)
      if (nodes[a] == nodes[b]) throw Error("subset_joint: nodes must be distinct");
  }
  const RootedTree rt = root_at_zero(d, model.edges());
  std::vector<Joint2> cond(static_cast<std::size_t>(d), Joint2::Identity());
  for (int c = 0; c < d; ++c)
    if (rt.parent[c] >= 0) cond[c] = conditional_from_joint(model.edge_joint(rt.parent[c], c));

  Eigen::VectorXd out(1 << k);
  std::vector<Marginal2> up(static_cast<std::size_t>(d));
  for (int code = 0; code < (1 << k); ++code) {
    for (int x = 0; x < d; ++x) up[x].setOnes();
    for (int a = 0; a < k; ++a) {
      const int bit = (code >> (k - 1 - a)) & 1;
      up[nodes[a]](1 - bit) = 0.0;
    }
    for (auto it = rt.order.rbegin(); it != rt.order.rend(); ++it) {
      const int c = *it;
      const int p = rt.parent[c];
      if (p < 0) continue;
      up[p] = up[p].cwiseProduct(cond[c] * up[c]);
    }
    out(code) = model.node_marginal(0).dot(up[0]);
  }
  return out;
}

namespace {

void check_assignment(const TreeModel& model, std::span<const std::uint8_t> x) {
  if (static_cast<int>(x.size()) != model.d()) throw Error("assignment length does not match model");
  for (auto v : x)
    if (v > 1) throw Error("assignment entries must be 0 or 1");
}

}  // namespace

double joint_probability(const TreeModel& model, std::span<const std::uint8_t> x) {
  check_assignment(model, x);
  double p = 1.0;
  for (int i = 0; i < model.d(); ++i) p *= model.node_marginal(i)(x[i]);
  for (std::size_t k = 0; k < model.edges().size(); ++k) {
    const Edge& e = model.edges()[k];
    const double num = model.edge_marginal(k)(x[e.u], x[e.v]);
    const double den = model.node_marginal(e.u)(x[e.u]) * model.node_marginal(e.v)(x[e.v]);
    if (den == 0.0) {
      if (num != 0.0) throw Error("joint_probability: model inconsistency (zero marginal, nonzero joint)");
      return 0.0;
    }
    p *= num / den;
  }
  return p;
}

double log_joint_probability(const TreeModel& model, std::span<const std::uint8_t> x) {
  const double p = joint_probability(model, x);
  if (p == 0.0) return -std::numeric_limits<double>::infinity();
  double lp = 0.0;
  for (int i = 0; i < model.d(); ++i) lp += std::log(model.node_marginal(i)(x[i]));
  for (std::size_t k = 0; k < model.edges().size(); ++k) {
    const Edge& e = model.edges()[k];
    lp += std::log(model.edge_marginal(k)(x[e.u], x[e.v])) - std::log(model.node_marginal(e.u)(x[e.u])) -
          std::log(model.node_marginal(e.v)(x[e.v]));
  }
  return lp;
}

SampleSet sample(const TreeModel& model, Eigen::Index n, std::uint64_t seed) {
  if (n < 1) throw Error("sample: n must be at least 1");
  const int d = model.d();
  const RootedTree rt = root_at_zero(d, model.edges());
  std::vector<Joint2> cond(static_cast<std::size_t>(d));
  for (int c = 0; c < d; ++c)
    if (rt.parent[c] >= 0) cond[c] = conditional_from_joint(model.edge_joint(rt.parent[c], c));
  const double root_p0 = model.node_marginal(0)(0);

  std::mt19937_64 rng(seed);
  SampleSet::Matrix data(n, d);
  std::vector<std::uint8_t> x(static_cast<std::size_t>(d));
  for (Eigen::Index s = 0; s < n; ++s) {
    for (int c : rt.order) {
      const double p0 = rt.parent[c] < 0 ? root_p0 : cond[c](x[rt.parent[c]], 0);
      x[c] = uniform01(rng) < p0 ? 0 : 1;
      data(s, c) = x[c];
    }
  }
  return SampleSet(std::move(data));
}

double symmetric_binary_mi(double rho) {
  if (!(rho >= -1.0 && rho <= 1.0)) throw Error("symmetric_binary_mi: rho must lie in [-1, 1]");
  const double m = 0.5 * rho;
  auto term = [](double w, double arg) { return w > 0.0 ? w * std::log1p(arg) : 0.0; };
  return term(0.5 + m, 2.0 * m) + term(0.5 - m, -2.0 * m);
}

double path_mutual_information(double delta, int k) {
  if (!(delta > 0.0 && delta < 0.5)) throw Error("path_mutual_information: delta must lie in (0, 1/2)");
  if (k < 1) throw Error("path_mutual_information: k must be at least 1");
  // m_k = 2^(k-1) delta^k, correlation of the composed channel is 2 m_k.
  const double m = std::ldexp(std::pow(delta, k), k - 1);
  return symmetric_binary_mi(2.0 * m);
}

Eigen::MatrixXd mutual_information_matrix(const PairwiseMarginals& marginals) {
  const int d = marginals.d();
  Eigen::MatrixXd mi = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) mi(i, j) = mi(j, i) = mutual_information(marginals.joint(i, j));
  return mi;
}

}  // namespace cdg
