#include "cdg/physnet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace cdg {

PhysicalNetwork::PhysicalNetwork(int d, std::vector<Link> links) : d_(d), links_(std::move(links)) {
  if (d < 1) throw Error("PhysicalNetwork: d must be positive");
  for (const auto& l : links_) {
    if (l.edge.u < 0 || l.edge.v >= d || l.edge.u == l.edge.v) throw Error("PhysicalNetwork: bad link endpoint");
    if (!(l.cost > 0.0) || !std::isfinite(l.cost)) throw Error("PhysicalNetwork: link costs must be positive");
  }
  std::sort(links_.begin(), links_.end(), [](const Link& a, const Link& b) { return a.edge < b.edge; });
}

bool PhysicalNetwork::connected() const {
  std::vector<int> parent(static_cast<std::size_t>(d_));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  int components = d_;
  for (const auto& l : links_) {
    const int a = find(l.edge.u), b = find(l.edge.v);
    if (a != b) {
      parent[a] = b;
      --components;
    }
  }
  return components == 1;
}

PhysicalNetwork PhysicalNetwork::scaled(double factor) const {
  if (!(factor > 0.0)) throw Error("PhysicalNetwork::scaled: factor must be positive");
  auto links = links_;
  for (auto& l : links) l.cost *= factor;
  return PhysicalNetwork(d_, std::move(links));
}

CostMatrix::CostMatrix(Eigen::MatrixXd costs) : costs_(std::move(costs)) {
  if (costs_.rows() != costs_.cols() || costs_.rows() < 1) throw Error("CostMatrix: must be square");
  for (Eigen::Index i = 0; i < costs_.rows(); ++i) {
    if (costs_(i, i) != 0.0) throw Error("CostMatrix: diagonal must be zero");
    for (Eigen::Index j = 0; j < costs_.cols(); ++j) {
      if (i != j && !(costs_(i, j) > 0.0 && std::isfinite(costs_(i, j))))
        throw Error("CostMatrix: off-diagonal costs must be positive and finite");
      if (costs_(i, j) != costs_(j, i)) throw Error("CostMatrix: must be symmetric");
    }
  }
}

double CostMatrix::total(std::span<const Edge> edges) const {
  double s = 0.0;
  for (const auto& e : edges) s += costs_(e.u, e.v);
  return s;
}

CostMatrix all_pairs_costs(const PhysicalNetwork& net) {
  if (!net.connected()) throw Error("all_pairs_costs: physical network is disconnected");
  const int d = net.d();
  const double inf = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd dist = Eigen::MatrixXd::Constant(d, d, inf);
  dist.diagonal().setZero();
  for (const auto& l : net.links()) {
    double& c = dist(l.edge.u, l.edge.v);
    c = std::min(c, l.cost);
    dist(l.edge.v, l.edge.u) = c;
  }
  for (int k = 0; k < d; ++k)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        if (dist(i, k) + dist(k, j) < dist(i, j)) dist(i, j) = dist(i, k) + dist(k, j);
  // Floyd-Warshall can leave the two triangles differing in the last bit.
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) dist(j, i) = dist(i, j) = std::min(dist(i, j), dist(j, i));
  return CostMatrix(std::move(dist));
}

PhysicalNetwork line_network(int d, double kappa) {
  if (d < 2) throw Error("line_network: d must be at least 2");
  if (!(kappa > 0.0)) throw Error("line_network: kappa must be positive");
  std::vector<Link> links;
  for (int i = 1; i < d; ++i) {  // 1-based link (i, i+1)
    double factor = std::pow(1.1, i);
    if (i == 1) factor = 4.0;
    if (i == 3) factor = 2.0;
    if (i == 6) factor = 0.1;
    links.push_back({Edge(i - 1, i), kappa * factor});
  }
  return PhysicalNetwork(d, std::move(links));
}

}  // namespace cdg
