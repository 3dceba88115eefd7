#pragma once

#include <vector>

namespace fatseg {

/// Dinic max-flow on a small directed graph with real capacities.
class MaxFlow {
 public:
  explicit MaxFlow(int nodes);

  /// Adds u->v with capacity `cap` and v->u with capacity `reverse_cap`.
  void add_edge(int u, int v, double cap, double reverse_cap = 0.0);

  double solve(int source, int sink);

  /// After solve(): true when `v` is reachable from the source in the residual graph.
  bool source_side(int v) const { return reach_[static_cast<std::size_t>(v)] != 0; }

 private:
  struct Arc {
    int to;
    int rev;
    double cap;
  };

  bool bfs(int s, int t);
  double dfs(int v, int t, double pushed);

  std::vector<std::vector<Arc>> adj_;
  std::vector<int> level_;
  std::vector<std::size_t> it_;
  std::vector<char> reach_;
};

}  // namespace fatseg
