#include "fatseg/maxflow.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <stdexcept>

namespace fatseg {
namespace {
constexpr double kEps = 1e-12;
}

MaxFlow::MaxFlow(int nodes) : adj_(static_cast<std::size_t>(nodes)) {
  if (nodes < 2) throw std::invalid_argument("MaxFlow: need at least two nodes");
}

void MaxFlow::add_edge(int u, int v, double cap, double reverse_cap) {
  if (cap < 0.0 || reverse_cap < 0.0) throw std::invalid_argument("MaxFlow: negative capacity");
  auto& au = adj_[static_cast<std::size_t>(u)];
  auto& av = adj_[static_cast<std::size_t>(v)];
  au.push_back({v, static_cast<int>(av.size()), cap});
  av.push_back({u, static_cast<int>(au.size()) - 1, reverse_cap});
}

bool MaxFlow::bfs(int s, int t) {
  level_.assign(adj_.size(), -1);
  std::deque<int> q{s};
  level_[static_cast<std::size_t>(s)] = 0;
  while (!q.empty()) {
    const int v = q.front();
    q.pop_front();
    for (const Arc& a : adj_[static_cast<std::size_t>(v)]) {
      if (a.cap > kEps && level_[static_cast<std::size_t>(a.to)] < 0) {
        level_[static_cast<std::size_t>(a.to)] = level_[static_cast<std::size_t>(v)] + 1;
        q.push_back(a.to);
      }
    }
  }
  return level_[static_cast<std::size_t>(t)] >= 0;
}

double MaxFlow::dfs(int v, int t, double pushed) {
  if (v == t) return pushed;
  auto& arcs = adj_[static_cast<std::size_t>(v)];
  for (std::size_t& i = it_[static_cast<std::size_t>(v)]; i < arcs.size(); ++i) {
    Arc& a = arcs[i];
    if (a.cap <= kEps || level_[static_cast<std::size_t>(a.to)] != level_[static_cast<std::size_t>(v)] + 1) continue;
    const double got = dfs(a.to, t, std::min(pushed, a.cap));
    if (got > 0.0) {
      a.cap -= got;
      adj_[static_cast<std::size_t>(a.to)][static_cast<std::size_t>(a.rev)].cap += got;
      return got;
    }
  }
  return 0.0;
}

double MaxFlow::solve(int source, int sink) {
  double flow = 0.0;
  while (bfs(source, sink)) {
    it_.assign(adj_.size(), 0);
    while (true) {
      const double f = dfs(source, sink, std::numeric_limits<double>::infinity());
      if (f <= 0.0) break;
      flow += f;
    }
  }
  // bfs() left the residual reachability in level_.
  reach_.assign(adj_.size(), 0);
  for (std::size_t v = 0; v < adj_.size(); ++v) reach_[v] = level_[v] >= 0 ? 1 : 0;
  return flow;
}

}  // namespace fatseg
