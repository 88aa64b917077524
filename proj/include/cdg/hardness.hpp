#pragma once

#include "cdg/common.hpp"
#include "cdg/physnet.hpp"

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace cdg {

/// Exact cover by 3-sets: elements 1..3s, subsets are triples of them.
struct X3CInstance {
  int s = 0;
  std::vector<std::array<int, 3>> subsets;
};

/// Throws unless s >= 1, q >= 1 and every triple has 3 distinct elements in 1..3s.
void validate(const X3CInstance& inst);

enum class GadgetEdgeType { T1 = 1, T2, T3, T4, T5, T6, T7, T8, T9 };

inline constexpr double kAlpha1 = 0.368;
inline constexpr double kAlpha2 = 0.237;

/// Reduction gadget on d = 3s + q + 3 nodes. Node order: X_1..X_3s, then
/// Y_1..Y_q, then Z0, Z1, Z2. Costs are already folded with gamma (gamma = 1/2).
struct GadgetInstance {
  int s = 0;
  int q = 0;
  int d = 0;
  double delta = 0.0;
  double kappa = 0.0;
  double alpha1 = kAlpha1;
  double alpha2 = kAlpha2;
  std::array<double, 4> path_mi{};  // I_1..I_4
  Eigen::MatrixXd mi;
  Eigen::MatrixXd cost;
  Eigen::MatrixXi type;  // GadgetEdgeType as int, 0 on the diagonal
  EdgeList designated_tree;

  int x(int i) const { return i - 1; }           // 1-based element
  int y(int j) const { return 3 * s + j - 1; }   // 1-based subset
  int z(int k) const { return 3 * s + q + k; }   // k = 0, 1, 2
  std::string label(int node) const;
  double I(int k) const { return path_mi[static_cast<std::size_t>(k - 1)]; }
};

GadgetInstance build_gadget(const X3CInstance& inst);

/// Exhaustive search over sub-collections (q <= 20).
bool x3c_brute_force(const X3CInstance& inst);
/// First exact cover in subset-mask order, as 0-based subset indices.
std::optional<std::vector<int>> x3c_solve(const X3CInstance& inst);

/// Diameter-4 tree built from an exact cover: cover subsets hang off Z0 and
/// carry their elements, other subsets hang off the first cover subset.
EdgeList cover_tree(const GadgetInstance& g, const X3CInstance& inst, const std::vector<int>& cover);

struct ValueOrdering {
  bool holds = false;  // alpha1 > alpha2 > kappa > I1 > I2 > I3
  std::string detail;
};
ValueOrdering check_value_ordering(const GadgetInstance& g);

/// Worst violation of c_ij + c_jk >= c_ik over all triples (<= 0 means it holds).
double triangle_violation(const Eigen::MatrixXd& cost);

inline constexpr int kMaxLemmaNodes = 10;

struct LemmaVerdict {
  bool x3c_solvable = false;
  int opt_diameter = 0;
  double opt_objective = 0.0;
  double formula_objective = 0.0;  // 2 alpha1 - (11 s + 3 q) I1 - 8 kappa
  bool diameter4_and_formula = false;
  bool lemma_holds = false;
  ValueOrdering ordering;
  EdgeList opt_tree;
  // Objective of cover_tree for the first exact cover, when one exists.
  std::optional<double> cover_tree_objective;
};

inline constexpr double kLemmaTolerance = 1e-9;

/// Brute-force X3C and max over spanning trees of sum I - diam(T) sum c (d <= 10).
LemmaVerdict verify_lemma1(const X3CInstance& inst);

}  // namespace cdg
