#include "cdg/tree.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <string>

namespace cdg {

Adjacency adjacency(int d, std::span<const Edge> edges) {
  Adjacency adj(static_cast<std::size_t>(d));
  for (const auto& e : edges) {
    if (e.u < 0 || e.v >= d || e.u == e.v) throw Error("edge endpoint out of range");
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
  }
  for (auto& nb : adj) std::sort(nb.begin(), nb.end());
  return adj;
}

namespace {

// BFS distances from `source`; -1 for unreachable nodes.
std::vector<int> bfs(const Adjacency& adj, int source) {
  std::vector<int> dist(adj.size(), -1);
  std::queue<int> q;
  dist[source] = 0;
  q.push(source);
  while (!q.empty()) {
    const int x = q.front();
    q.pop();
    for (int y : adj[x]) {
      if (dist[y] < 0) {
        dist[y] = dist[x] + 1;
        q.push(y);
      }
    }
  }
  return dist;
}

int farthest(const std::vector<int>& dist) {
  return static_cast<int>(std::max_element(dist.begin(), dist.end()) - dist.begin());
}

}  // namespace

bool is_spanning_tree(int d, std::span<const Edge> edges) {
  if (d < 1 || static_cast<int>(edges.size()) != d - 1) return false;
  std::vector<int> parent(static_cast<std::size_t>(d));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& e : edges) {
    if (e.u < 0 || e.v < 0 || e.u >= d || e.v >= d || e.u == e.v) return false;
    const int a = find(e.u), b = find(e.v);
    if (a == b) return false;
    parent[a] = b;
  }
  return true;
}

void require_spanning_tree(int d, std::span<const Edge> edges, const char* what) {
  if (!is_spanning_tree(d, edges))
    throw Error(std::string(what) + ": edge set is not a spanning tree on " + std::to_string(d) +
                " nodes");
}

int tree_diameter(std::span<const Edge> edges) {
  // Relabel the touched nodes densely so partial trees with arbitrary labels work.
  std::vector<int> labels;
  for (const auto& e : edges) {
    labels.push_back(e.u);
    labels.push_back(e.v);
  }
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  auto index = [&](int x) {
    return static_cast<int>(std::lower_bound(labels.begin(), labels.end(), x) - labels.begin());
  };
  EdgeList dense;
  for (const auto& e : edges) dense.emplace_back(index(e.u), index(e.v));
  return tree_diameter(std::max<int>(1, static_cast<int>(labels.size())), dense);
}

int tree_diameter(int d, std::span<const Edge> edges) {
  require_spanning_tree(d, edges, "tree_diameter");
  if (d == 1) return 0;
  const auto adj = adjacency(d, edges);
  const int a = farthest(bfs(adj, 0));
  const auto far = bfs(adj, a);
  return far[farthest(far)];
}

std::vector<int> eccentricities(int d, std::span<const Edge> edges) {
  std::vector<int> ecc(static_cast<std::size_t>(d), -1);
  if (edges.empty()) return ecc;
  const auto adj = adjacency(d, edges);
  // In a tree the eccentricity of x is max(dist(x,a), dist(x,b)) for the two
  // endpoints a, b of any diameter path.
  const auto d0 = bfs(adj, edges.front().u);
  const int a = farthest(d0);
  const auto da = bfs(adj, a);
  const int b = farthest(da);
  const auto db = bfs(adj, b);
  for (int x = 0; x < d; ++x)
    if (da[x] >= 0) ecc[x] = std::max(da[x], db[x]);
  return ecc;
}

EdgeList prufer_decode(std::span<const int> sequence, int d) {
  if (d < 2 || static_cast<int>(sequence.size()) != d - 2)
    throw Error("prufer_decode: sequence length must be d-2");
  for (int s : sequence)
    if (s < 0 || s >= d) throw Error("prufer_decode: label out of range");
  if (d > detail::kMaxFastNodes) throw Error("prufer_decode: d too large");
  Edge out[detail::kMaxFastNodes];
  if (d == 2) {
    out[0] = Edge(0, 1);
  } else {
    detail::fast_prufer_decode(sequence.data(), d, out);
  }
  return canonical(EdgeList(out, out + d - 1));
}

namespace detail {

void fast_prufer_decode(const int* seq, int d, Edge* out) {
  int degree[kMaxFastNodes];
  for (int i = 0; i < d; ++i) degree[i] = 1;
  for (int i = 0; i < d - 2; ++i) ++degree[seq[i]];
  // Linear-time decode: `ptr` scans for the smallest leaf, `leaf` follows
  // nodes that become leaves below it.
  int ptr = 0;
  while (degree[ptr] != 1) ++ptr;
  int leaf = ptr;
  for (int i = 0; i < d - 2; ++i) {
    const int v = seq[i];
    out[i] = Edge(leaf, v);
    if (--degree[v] == 1 && v < ptr) {
      leaf = v;
    } else {
      ++ptr;
      while (degree[ptr] != 1) ++ptr;
      leaf = ptr;
    }
  }
  out[d - 2] = Edge(leaf, d - 1);
}

int fast_tree_diameter(int d, const Edge* edges) {
  if (d <= 1) return 0;
  int head[kMaxFastNodes];
  int next[2 * kMaxFastNodes];
  int to[2 * kMaxFastNodes];
  for (int i = 0; i < d; ++i) head[i] = -1;
  for (int k = 0; k < d - 1; ++k) {
    to[2 * k] = edges[k].v;
    next[2 * k] = head[edges[k].u];
    head[edges[k].u] = 2 * k;
    to[2 * k + 1] = edges[k].u;
    next[2 * k + 1] = head[edges[k].v];
    head[edges[k].v] = 2 * k + 1;
  }
  int dist[kMaxFastNodes];
  int queue[kMaxFastNodes];
  auto sweep = [&](int s, int& far) {
    for (int i = 0; i < d; ++i) dist[i] = -1;
    int qh = 0, qt = 0;
    queue[qt++] = s;
    dist[s] = 0;
    far = s;
    while (qh < qt) {
      const int x = queue[qh++];
      if (dist[x] > dist[far]) far = x;
      for (int a = head[x]; a >= 0; a = next[a]) {
        const int y = to[a];
        if (dist[y] < 0) {
          dist[y] = dist[x] + 1;
          queue[qt++] = y;
        }
      }
    }
    return dist[far];
  };
  int a = 0, b = 0;
  sweep(0, a);
  return sweep(a, b);
}

}  // namespace detail

}  // namespace cdg
