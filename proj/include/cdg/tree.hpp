#pragma once

#include "cdg/common.hpp"

#include <span>
#include <vector>

namespace cdg {

using Adjacency = std::vector<std::vector<int>>;

Adjacency adjacency(int d, std::span<const Edge> edges);

/// Connected, acyclic and covering all d nodes.
bool is_spanning_tree(int d, std::span<const Edge> edges);

/// Throws Error naming `what` unless `edges` is a spanning tree on d nodes.
void require_spanning_tree(int d, std::span<const Edge> edges, const char* what);

/// Edge count of the longest path (double BFS). The one-argument form takes
/// any tree over the nodes its edges touch.
int tree_diameter(std::span<const Edge> edges);
int tree_diameter(int d, std::span<const Edge> edges);

/// Longest-path length from every node within the connected component that
/// contains `edges` (nodes outside the component get -1).
std::vector<int> eccentricities(int d, std::span<const Edge> edges);

/// Decodes a Prüfer sequence of length d-2 into the d-1 tree edges.
EdgeList prufer_decode(std::span<const int> sequence, int d);

namespace detail {

// Diameter of a spanning tree on d <= kMaxFastNodes nodes, no validation.
inline constexpr int kMaxFastNodes = 32;
int fast_tree_diameter(int d, const Edge* edges);
void fast_prufer_decode(const int* sequence, int d, Edge* out);

}  // namespace detail

/// Calls visit(std::span<const Edge>) once for each of the d^(d-2) labelled
/// spanning trees, in lexicographic order of their Prüfer sequences.
template <typename Visitor>
void for_each_spanning_tree(int d, Visitor&& visit) {
  if (d < 1 || d > detail::kMaxFastNodes) throw Error("for_each_spanning_tree: unsupported d");
  Edge edges[detail::kMaxFastNodes];
  if (d == 1) {
    visit(std::span<const Edge>(edges, 0));
    return;
  }
  if (d == 2) {
    edges[0] = Edge(0, 1);
    visit(std::span<const Edge>(edges, 1));
    return;
  }
  const int len = d - 2;
  int seq[detail::kMaxFastNodes] = {};
  while (true) {
    detail::fast_prufer_decode(seq, d, edges);
    visit(std::span<const Edge>(edges, static_cast<std::size_t>(d - 1)));
    int k = len - 1;
    while (k >= 0 && ++seq[k] == d) seq[k--] = 0;
    if (k < 0) break;
  }
}

}  // namespace cdg
