#pragma once

#include "cdg/common.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace cdg {

struct Link {
  Edge edge;
  double cost = 0.0;  // cost of one message over this link
};

/// Physical connectivity graph. Link costs must be positive; connectivity is
/// checked when the all-pairs costs are computed.
class PhysicalNetwork {
 public:
  PhysicalNetwork(int d, std::vector<Link> links);

  int d() const { return d_; }
  const std::vector<Link>& links() const { return links_; }
  bool connected() const;

  /// Every link cost multiplied by factor (> 0).
  PhysicalNetwork scaled(double factor) const;

 private:
  int d_;
  std::vector<Link> links_;
};

/// Symmetric per-message cost c_{i,j} between every node pair, zero diagonal.
class CostMatrix {
 public:
  explicit CostMatrix(Eigen::MatrixXd costs);

  int d() const { return static_cast<int>(costs_.rows()); }
  double operator()(int i, int j) const { return costs_(i, j); }
  double operator()(const Edge& e) const { return costs_(e.u, e.v); }
  const Eigen::MatrixXd& matrix() const { return costs_; }

  /// Sum of c_e over the edge set.
  double total(std::span<const Edge> edges) const;

 private:
  Eigen::MatrixXd costs_;
};

/// Shortest-path (summed link cost) distances; throws if disconnected.
CostMatrix all_pairs_costs(const PhysicalNetwork& net);

/// Line on d nodes with c_{i,i+1} = kappa * 1.1^i in 1-based labels, except
/// c_{1,2} = 4 kappa, c_{3,4} = 2 kappa and c_{6,7} = 0.1 kappa.
PhysicalNetwork line_network(int d, double kappa);

}  // namespace cdg
