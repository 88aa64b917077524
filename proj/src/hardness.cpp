#include "cdg/hardness.hpp"

#include "cdg/learn.hpp"
#include "cdg/model.hpp"
#include "cdg/tree.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <cstdint>
#include <sstream>

namespace cdg {

void validate(const X3CInstance& inst) {
  if (inst.s < 1) throw Error("X3C: s must be at least 1");
  if (inst.subsets.empty()) throw Error("X3C: need at least one subset");
  for (const auto& t : inst.subsets) {
    for (int e : t)
      if (e < 1 || e > 3 * inst.s) throw Error("X3C: element out of range 1.." + std::to_string(3 * inst.s));
    if (t[0] == t[1] || t[0] == t[2] || t[1] == t[2]) throw Error("X3C: subset elements must be distinct");
  }
}

std::string GadgetInstance::label(int node) const {
  if (node < 3 * s) return "X" + std::to_string(node + 1);
  if (node < 3 * s + q) return "Y" + std::to_string(node - 3 * s + 1);
  return "Z" + std::to_string(node - 3 * s - q);
}

GadgetInstance build_gadget(const X3CInstance& inst) {
  validate(inst);
  GadgetInstance g;
  g.s = inst.s;
  g.q = static_cast<int>(inst.subsets.size());
  g.d = 3 * g.s + g.q + 3;
  g.delta = (g.alpha1 - g.alpha2) / std::sqrt(4.0 * (3 * g.s + g.q));
  for (int k = 1; k <= 4; ++k) g.path_mi[k - 1] = path_mutual_information(g.delta, k);
  g.kappa = 9.0 / 8.0 * g.s * g.I(1);
  const double I1 = g.I(1), I2 = g.I(2), I3 = g.I(3);
  const int d = g.d;
  g.mi = Eigen::MatrixXd::Zero(d, d);
  g.cost = Eigen::MatrixXd::Zero(d, d);
  g.type = Eigen::MatrixXi::Zero(d, d);

  // Supergraph membership and the designated tree: each element hangs off the
  // lowest-index subset that contains it; uncovered elements get no such edge.
  std::vector<std::vector<char>> in_subset(static_cast<std::size_t>(g.q),
                                           std::vector<char>(static_cast<std::size_t>(3 * g.s), 0));
  std::vector<int> tree_parent(static_cast<std::size_t>(3 * g.s), -1);
  for (int j = 0; j < g.q; ++j)
    for (int e : inst.subsets[j]) {
      in_subset[j][e - 1] = 1;
      if (tree_parent[e - 1] < 0) tree_parent[e - 1] = j;
    }
  for (int i = 0; i < 3 * g.s; ++i)
    if (tree_parent[i] >= 0) g.designated_tree.emplace_back(g.x(i + 1), g.y(tree_parent[i] + 1));
  for (int j = 1; j <= g.q; ++j) g.designated_tree.emplace_back(g.y(j), g.z(0));
  g.designated_tree.emplace_back(g.z(0), g.z(1));
  g.designated_tree.emplace_back(g.z(1), g.z(2));
  g.designated_tree = canonical(g.designated_tree);

  const double rho1 = 2.0 * g.delta;  // correlation across one delta edge
  const double rho_z = 0.8;           // P(equal) = 0.9 on the Z edges
  auto set = [&](int a, int b, GadgetEdgeType t, double mi, double c) {
    g.type(a, b) = g.type(b, a) = static_cast<int>(t);
    g.mi(a, b) = g.mi(b, a) = mi;
    g.cost(a, b) = g.cost(b, a) = c;
  };
  using T = GadgetEdgeType;
  for (int i = 1; i <= 3 * g.s; ++i) {
    for (int j = 1; j <= g.q; ++j) {
      if (tree_parent[i - 1] == j - 1)
        set(g.x(i), g.y(j), T::T1, I1, I1);
      else if (in_subset[j - 1][i - 1])
        set(g.x(i), g.y(j), T::T2, I3, 0.75 * I1 + 0.25 * I3);
      else
        set(g.x(i), g.y(j), T::T3, I3, 1.25 * I1 + 0.25 * I2 + 0.25 * I3);
    }
    for (int k = i + 1; k <= 3 * g.s; ++k) set(g.x(i), g.x(k), T::T7, I2, 11.0 / 8.0 * I1 + 0.25 * I2);
    set(g.x(i), g.z(0), T::T6, I2, 11.0 / 8.0 * I1 + 0.25 * I2);
    set(g.x(i), g.z(1), T::T9, symmetric_binary_mi(rho_z * rho1 * rho1), g.kappa);
    set(g.x(i), g.z(2), T::T9, symmetric_binary_mi(rho_z * rho_z * rho1 * rho1), 2.0 * g.kappa);
  }
  for (int j = 1; j <= g.q; ++j) {
    for (int k = j + 1; k <= g.q; ++k) set(g.y(j), g.y(k), T::T4, I2, 0.75 * I1 + 0.25 * I2);
    set(g.y(j), g.z(0), T::T5, I1, 1.5 * I1);
    set(g.y(j), g.z(1), T::T9, symmetric_binary_mi(rho_z * rho1), g.kappa);
    set(g.y(j), g.z(2), T::T9, symmetric_binary_mi(rho_z * rho_z * rho1), 2.0 * g.kappa);
  }
  set(g.z(0), g.z(1), T::T8, g.alpha1, g.kappa);
  set(g.z(1), g.z(2), T::T8, g.alpha1, g.kappa);
  set(g.z(0), g.z(2), T::T9, g.alpha2, 2.0 * g.kappa);
  return g;
}

std::optional<std::vector<int>> x3c_solve(const X3CInstance& inst) {
  validate(inst);
  const int q = static_cast<int>(inst.subsets.size());
  if (q > 20) throw Error("x3c_brute_force: limited to q <= 20");
  if (inst.s > 21) throw Error("x3c_brute_force: limited to s <= 21");
  const std::uint64_t all = (std::uint64_t{1} << (3 * inst.s)) - 1;
  std::vector<std::uint64_t> mask(static_cast<std::size_t>(q), 0);
  for (int j = 0; j < q; ++j)
    for (int e : inst.subsets[j]) mask[j] |= std::uint64_t{1} << (e - 1);
  for (std::uint32_t pick = 0; pick < (std::uint32_t{1} << q); ++pick) {
    if (std::popcount(pick) != inst.s) continue;
    std::uint64_t covered = 0;
    bool disjoint = true;
    for (int j = 0; j < q && disjoint; ++j)
      if (pick >> j & 1) {
        disjoint = (covered & mask[j]) == 0;
        covered |= mask[j];
      }
    if (disjoint && covered == all) {
      std::vector<int> cover;
      for (int j = 0; j < q; ++j)
        if (pick >> j & 1) cover.push_back(j);
      return cover;
    }
  }
  return std::nullopt;
}

bool x3c_brute_force(const X3CInstance& inst) { return x3c_solve(inst).has_value(); }

EdgeList cover_tree(const GadgetInstance& g, const X3CInstance& inst, const std::vector<int>& cover) {
  if (cover.empty()) throw Error("cover_tree: empty cover");
  EdgeList t{Edge(g.z(0), g.z(1)), Edge(g.z(1), g.z(2))};
  std::vector<char> chosen(static_cast<std::size_t>(g.q), 0);
  for (int j : cover) {
    chosen[j] = 1;
    t.emplace_back(g.y(j + 1), g.z(0));
    for (int e : inst.subsets[j]) t.emplace_back(g.x(e), g.y(j + 1));
  }
  for (int j = 0; j < g.q; ++j)
    if (!chosen[j]) t.emplace_back(g.y(j + 1), g.y(cover.front() + 1));
  t = canonical(std::move(t));
  require_spanning_tree(g.d, t, "cover_tree");
  return t;
}

ValueOrdering check_value_ordering(const GadgetInstance& g) {
  const double v[] = {g.alpha1, g.alpha2, g.kappa, g.I(1), g.I(2), g.I(3)};
  const char* names[] = {"alpha1", "alpha2", "kappa", "I1", "I2", "I3"};
  ValueOrdering o;
  o.holds = true;
  std::ostringstream os;
  os.precision(6);
  for (int k = 0; k + 1 < 6; ++k) {
    if (!(v[k] > v[k + 1])) {
      o.holds = false;
      os << names[k] << "=" << v[k] << " <= " << names[k + 1] << "=" << v[k + 1] << "; ";
    }
  }
  o.detail = o.holds ? "alpha1 > alpha2 > kappa > I1 > I2 > I3" : os.str();
  return o;
}

double triangle_violation(const Eigen::MatrixXd& cost) {
  const auto d = cost.rows();
  double worst = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      for (Eigen::Index k = 0; k < d; ++k)
        if (i != j && j != k && i != k) worst = std::max(worst, cost(i, k) - cost(i, j) - cost(j, k));
  return worst;
}

LemmaVerdict verify_lemma1(const X3CInstance& inst) {
  const GadgetInstance g = build_gadget(inst);
  if (g.d > kMaxLemmaNodes) throw Error("verify_lemma1: limited to d <= " + std::to_string(kMaxLemmaNodes));
  LemmaVerdict v;
  v.ordering = check_value_ordering(g);
  const auto cover = x3c_solve(inst);
  v.x3c_solvable = cover.has_value();
  // gamma = 1/2 makes 2 gamma c = c, so the sync objective is sum I - diam sum c.
  const WeightedCandidateGraph graph(g.mi, CostMatrix(g.cost));
  const LearnedTree best = detail::brute_force_sync(graph, 0.5, kMaxLemmaNodes);
  v.opt_tree = best.edges;
  v.opt_diameter = best.diameter;
  v.opt_objective = objective_value(best.edges, graph, 0.5, CostMode::Sync);
  v.formula_objective = 2.0 * g.alpha1 - (11.0 * g.s + 3.0 * g.q) * g.I(1) - 8.0 * g.kappa;
  v.diameter4_and_formula =
      v.opt_diameter == 4 && std::abs(v.opt_objective - v.formula_objective) <= kLemmaTolerance;
  v.lemma_holds = v.x3c_solvable == v.diameter4_and_formula;
  if (cover)
    v.cover_tree_objective = objective_value(cover_tree(g, inst, *cover), graph, 0.5, CostMode::Sync);
  return v;
}

}  // namespace cdg
