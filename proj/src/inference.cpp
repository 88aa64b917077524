#include "cdg/inference.hpp"

#include "cdg/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cdg {

std::string to_string(Protocol p) { return p == Protocol::Async ? "async" : "sync"; }

Protocol parse_protocol(const std::string& s) {
  if (s == "async") return Protocol::Async;
  if (s == "sync") return Protocol::Sync;
  throw Error("unknown protocol '" + s + "'");
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_log(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

}  // namespace

Potentials make_potentials(const PairwiseMarginals& marginals, const EdgeList& tree) {
  Potentials pot;
  pot.d = marginals.d();
  pot.edges = canonical(tree);
  require_spanning_tree(pot.d, pot.edges, "make_potentials");
  for (int i = 0; i < pot.d; ++i) {
    const Marginal2& q = marginals.node(i);
    pot.node.emplace_back(safe_log(q(0)), safe_log(q(1)));
  }
  for (const auto& e : pot.edges) {
    const Joint2& j = marginals.joint(e.u, e.v);
    Eigen::Matrix2d lp;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        lp(a, b) = j(a, b) > 0.0 ? std::log(j(a, b)) - pot.node[e.u](a) - pot.node[e.v](b) : kNegInf;
    pot.edge.push_back(lp);
  }
  return pot;
}

Potentials make_potentials(const TreeModel& model) {
  return make_potentials(exact_pairwise_marginals(model), model.edges());
}

namespace {

// Directed-edge bookkeeping shared by both schedules. Message slots are
// indexed 2k (u -> v) and 2k+1 (v -> u) for edge k.
class MessageGraph {
 public:
  explicit MessageGraph(const Potentials& pot) : pot_(pot) {
    if (static_cast<int>(pot.node.size()) != pot.d || pot.edge.size() != pot.edges.size())
      throw Error("potentials: size mismatch");
    require_spanning_tree(pot.d, pot.edges, "max-product");
    nbrs_.resize(static_cast<std::size_t>(pot.d));
    for (std::size_t k = 0; k < pot.edges.size(); ++k) {
      const Edge& e = pot.edges[k];
      nbrs_[e.u].push_back({e.v, static_cast<int>(k)});
      nbrs_[e.v].push_back({e.u, static_cast<int>(k)});
    }
  }

  struct Nbr {
    int node;
    int edge;
  };

  int d() const { return pot_.d; }
  const std::vector<Nbr>& nbrs(int i) const { return nbrs_[i]; }
  static int slot(const Edge& e, int from) { return from == e.u ? 0 : 1; }
  int slot_of(int edge, int from) const { return 2 * edge + slot(pot_.edges[edge], from); }

  // log psi_ij(x_from, x_to).
  double edge_log(int edge, int from, int xf, int xt) const {
    const Edge& e = pot_.edges[edge];
    return from == e.u ? pot_.edge[edge](xf, xt) : pot_.edge[edge](xt, xf);
  }

  // New message from -> to given the current log messages, normalized with
  // log-sum-exp so the probabilities sum to 1.
  Eigen::Vector2d compute(int from, int edge, const std::vector<Eigen::Vector2d>& msgs,
                          double& norm_error) const {
    Eigen::Vector2d belief = pot_.node[from];
    for (const auto& nb : nbrs_[from])
      if (nb.edge != edge) belief += msgs[slot_of(nb.edge, nb.node)];
    Eigen::Vector2d out;
    for (int xt = 0; xt < 2; ++xt)
      out(xt) = std::max(belief(0) + edge_log(edge, from, 0, xt), belief(1) + edge_log(edge, from, 1, xt));
    const double hi = out.maxCoeff();
    if (hi == kNegInf) throw Error("max-product: all-zero message (inconsistent potentials)");
    const double lse = hi + std::log(std::exp(out(0) - hi) + std::exp(out(1) - hi));
    out.array() -= lse;
    norm_error = std::max(norm_error, std::abs(std::exp(out(0)) + std::exp(out(1)) - 1.0));
    return out;
  }

  // Consistent decode from node 0 down through the converged messages. Each
  // node maximizes its local term given its parent's value; ties go to 0.
  Assignment decode(const std::vector<Eigen::Vector2d>& msgs) const {
    const int d = pot_.d;
    Assignment x(static_cast<std::size_t>(d), 0);
    std::vector<int> parent(static_cast<std::size_t>(d), -1), pedge(static_cast<std::size_t>(d), -1);
    std::vector<int> order{0};
    std::vector<char> seen(static_cast<std::size_t>(d), 0);
    seen[0] = 1;
    for (std::size_t h = 0; h < order.size(); ++h) {
      const int i = order[h];
      for (const auto& nb : nbrs_[i])
        if (!seen[nb.node]) {
          seen[nb.node] = 1;
          parent[nb.node] = i;
          pedge[nb.node] = nb.edge;
          order.push_back(nb.node);
        }
    }
    for (int i : order) {
      Eigen::Vector2d score = pot_.node[i];
      for (const auto& nb : nbrs_[i])
        if (nb.node != parent[i]) score += msgs[slot_of(nb.edge, nb.node)];
      if (parent[i] >= 0)
        for (int xi = 0; xi < 2; ++xi) score(xi) += edge_log(pedge[i], parent[i], x[parent[i]], xi);
      x[i] = score(1) > score(0) ? 1 : 0;
    }
    return x;
  }

  std::vector<DirectedMessage> export_messages(const std::vector<Eigen::Vector2d>& msgs) const {
    std::vector<DirectedMessage> out;
    for (std::size_t k = 0; k < pot_.edges.size(); ++k) {
      const Edge& e = pot_.edges[k];
      out.push_back({e.u, e.v, msgs[2 * k].array().exp().matrix()});
      out.push_back({e.v, e.u, msgs[2 * k + 1].array().exp().matrix()});
    }
    return out;
  }

  const Potentials& potentials() const { return pot_; }

 private:
  const Potentials& pot_;
  std::vector<std::vector<Nbr>> nbrs_;
};

std::vector<Eigen::Vector2d> uniform_messages(std::size_t edges) {
  return std::vector<Eigen::Vector2d>(2 * edges, Eigen::Vector2d::Constant(std::log(0.5)));
}

}  // namespace

InferenceResult max_product_async(const Potentials& potentials, const CostMatrix& costs) {
  const MessageGraph g(potentials);
  const int d = g.d();
  if (costs.d() != d) throw Error("max-product: cost matrix size mismatch");
  InferenceResult r;
  r.protocol = Protocol::Async;
  r.iterations = 2;
  auto msgs = uniform_messages(potentials.edges.size());
  ExactSum cost;

  // Depth-first post-order from root 0.
  std::vector<int> parent(static_cast<std::size_t>(d), -1), pedge(static_cast<std::size_t>(d), -1);
  std::vector<int> post, stack{0};
  std::vector<char> seen(static_cast<std::size_t>(d), 0);
  std::vector<int> pre;
  seen[0] = 1;
  while (!stack.empty()) {
    const int i = stack.back();
    stack.pop_back();
    pre.push_back(i);
    const auto& nb = g.nbrs(i);
    for (auto it = nb.rbegin(); it != nb.rend(); ++it)
      if (!seen[it->node]) {
        seen[it->node] = 1;
        parent[it->node] = i;
        pedge[it->node] = it->edge;
        stack.push_back(it->node);
      }
  }
  post.assign(pre.rbegin(), pre.rend());

  auto send = [&](int from, int to, int edge) {
    msgs[g.slot_of(edge, from)] = g.compute(from, edge, msgs, r.max_normalization_error);
    cost.add(costs(from, to));
    ++r.messages_sent;
  };
  // A reversed pre-order visits every child before its parent.
  for (int i : post)
    if (parent[i] >= 0) send(i, parent[i], pedge[i]);
  for (int i : pre)
    if (parent[i] >= 0) send(parent[i], i, pedge[i]);

  r.assignment = g.decode(msgs);
  r.messages = g.export_messages(msgs);
  r.total_cost = cost.value();
  return r;
}

InferenceResult max_product_sync(const Potentials& potentials, const CostMatrix& costs, int rounds) {
  const MessageGraph g(potentials);
  if (costs.d() != g.d()) throw Error("max-product: cost matrix size mismatch");
  if (rounds < 0) throw Error("max-product: rounds must be non-negative");
  InferenceResult r;
  r.protocol = Protocol::Sync;
  r.iterations = rounds;
  auto msgs = uniform_messages(potentials.edges.size());
  auto next = msgs;
  ExactSum cost;
  for (int t = 0; t < rounds; ++t) {
    for (std::size_t k = 0; k < potentials.edges.size(); ++k) {
      const Edge& e = potentials.edges[k];
      const int edge = static_cast<int>(k);
      next[2 * k] = g.compute(e.u, edge, msgs, r.max_normalization_error);
      next[2 * k + 1] = g.compute(e.v, edge, msgs, r.max_normalization_error);
      cost.add(costs(e));
      cost.add(costs(e));
      r.messages_sent += 2;
    }
    std::swap(msgs, next);
  }
  r.assignment = g.decode(msgs);
  r.messages = g.export_messages(msgs);
  r.total_cost = cost.value();
  return r;
}

InferenceResult max_product_sync(const Potentials& potentials, const CostMatrix& costs) {
  const int diam = potentials.d > 1 ? tree_diameter(potentials.d, potentials.edges) : 0;
  return max_product_sync(potentials, costs, diam);
}

double async_protocol_cost(const EdgeList& tree, const CostMatrix& costs) {
  ExactSum s;
  for (const auto& e : tree) s.add_product(2.0, costs(e));
  return s.value();
}

double sync_protocol_cost(const EdgeList& tree, const CostMatrix& costs) {
  const int d = static_cast<int>(tree.size()) + 1;
  const int diam = d > 1 ? tree_diameter(d, tree) : 0;
  ExactSum s;
  for (const auto& e : tree) s.add_product(2.0 * diam, costs(e));
  return s.value();
}

std::int64_t async_message_count(int d) { return 2 * static_cast<std::int64_t>(d - 1); }

std::int64_t sync_message_count(int d, int diameter) {
  return 2 * static_cast<std::int64_t>(d - 1) * diameter;
}

Assignment brute_force_map(const TreeModel& model) {
  const int d = model.d();
  if (d > kMaxBruteForceMapNodes)
    throw Error("brute_force_map: limited to d <= " + std::to_string(kMaxBruteForceMapNodes));
  // Code bit (d-1-i) holds x_i, so codes increase lexicographically and the
  // first strict maximum wins ties.
  Assignment x(static_cast<std::size_t>(d)), best;
  double best_lp = kNegInf;
  for (std::uint64_t code = 0; code < (std::uint64_t{1} << d); ++code) {
    for (int i = 0; i < d; ++i) x[i] = static_cast<std::uint8_t>((code >> (d - 1 - i)) & 1);
    const double lp = log_joint_probability(model, x);
    if (best.empty() || lp > best_lp) {
      best_lp = lp;
      best = x;
    }
  }
  return best;
}

Assignment map_estimate(const PairwiseMarginals& marginals, const EdgeList& tree) {
  const Potentials pot = make_potentials(marginals, tree);
  const MessageGraph g(pot);
  auto msgs = uniform_messages(pot.edges.size());
  double norm = 0.0;
  // Upward pass only; decode needs messages toward the root.
  std::vector<int> parent(static_cast<std::size_t>(pot.d), -1), pedge(static_cast<std::size_t>(pot.d), -1);
  std::vector<int> order{0};
  std::vector<char> seen(static_cast<std::size_t>(pot.d), 0);
  seen[0] = 1;
  for (std::size_t h = 0; h < order.size(); ++h)
    for (const auto& nb : g.nbrs(order[h]))
      if (!seen[nb.node]) {
        seen[nb.node] = 1;
        parent[nb.node] = order[h];
        pedge[nb.node] = nb.edge;
        order.push_back(nb.node);
      }
  for (auto it = order.rbegin(); it != order.rend(); ++it)
    if (parent[*it] >= 0) msgs[g.slot_of(pedge[*it], *it)] = g.compute(*it, pedge[*it], msgs, norm);
  return g.decode(msgs);
}

double map_error_probability(const TreeModel& true_model, const EdgeList& learned_tree,
                             Eigen::Index n, int trials, std::uint64_t seed) {
  if (trials < 1) throw Error("map_error_probability: trials must be at least 1");
  const Assignment truth = map_estimate(exact_pairwise_marginals(true_model), true_model.edges());
  int errors = 0;
  for (int t = 0; t < trials; ++t) {
    const SampleSet s = sample(true_model, n, derive_seed(seed, static_cast<std::uint64_t>(t)));
    if (map_estimate(empirical_marginals(empirical_stats(s)), learned_tree) != truth) ++errors;
  }
  return static_cast<double>(errors) / trials;
}

}  // namespace cdg
