#pragma once

#include <algorithm>
#include <utility>
#include <vector>

namespace fcgrow::detail {

// Tarjan's algorithm over an edge list. Returns the component index of each
// node; components are numbered in reverse topological order.
inline std::vector<int> scc_ids(int node_count,
                                const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::vector<int>> succ(node_count);
  for (auto [u, v] : edges) succ[u].push_back(v);

  std::vector<int> index(node_count, -1), low(node_count, 0), comp(node_count, -1);
  std::vector<char> on_stack(node_count, 0);
  std::vector<int> stack;
  int counter = 0, ncomp = 0;

  // Iterative DFS: frames of (node, next successor position).
  std::vector<std::pair<int, std::size_t>> frames;
  for (int root = 0; root < node_count; ++root) {
    if (index[root] != -1) continue;
    frames.push_back({root, 0});
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!frames.empty()) {
      auto& [u, pos] = frames.back();
      if (pos < succ[u].size()) {
        int v = succ[u][pos++];
        if (index[v] == -1) {
          index[v] = low[v] = counter++;
          stack.push_back(v);
          on_stack[v] = 1;
          frames.push_back({v, 0});
        } else if (on_stack[v]) {
          low[u] = std::min(low[u], index[v]);
        }
        continue;
      }
      int done = u;
      frames.pop_back();
      if (!frames.empty()) {
        int parent = frames.back().first;
        low[parent] = std::min(low[parent], low[done]);
      }
      if (low[done] == index[done]) {
        int w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp[w] = ncomp;
        } while (w != done);
        ++ncomp;
      }
    }
  }
  return comp;
}

inline bool is_acyclic(int node_count, const std::vector<std::pair<int, int>>& edges) {
  auto comp = scc_ids(node_count, edges);
  for (auto [u, v] : edges)
    if (comp[u] == comp[v]) return false;
  return true;
}

inline std::vector<char> reachable(int node_count,
                                   const std::vector<std::pair<int, int>>& edges,
                                   const std::vector<int>& sources) {
  std::vector<std::vector<int>> succ(node_count);
  for (auto [u, v] : edges) succ[u].push_back(v);
  std::vector<char> seen(node_count, 0);
  std::vector<int> work;
  for (int s : sources)
    if (!seen[s]) {
      seen[s] = 1;
      work.push_back(s);
    }
  while (!work.empty()) {
    int u = work.back();
    work.pop_back();
    for (int v : succ[u])
      if (!seen[v]) {
        seen[v] = 1;
        work.push_back(v);
      }
  }
  return seen;
}

}  // namespace fcgrow::detail
