#include "dflow/maxflow.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace dflow {
namespace {
constexpr double kEps = 1e-12;
}

MaxFlow::MaxFlow(std::size_t nodes) : adj_(nodes) {}

std::size_t MaxFlow::add_node() {
  adj_.emplace_back();
  return adj_.size() - 1;
}

std::size_t MaxFlow::add_arc(std::size_t from, std::size_t to, double capacity) {
  adj_[from].push_back({to, adj_[to].size(), capacity, capacity});
  adj_[to].push_back({from, adj_[from].size() - 1, 0.0, 0.0});
  arcs_.emplace_back(from, adj_[from].size() - 1);
  return arcs_.size() - 1;
}

bool MaxFlow::bfs(std::size_t s, std::size_t t) {
  level_.assign(adj_.size(), -1);
  std::deque<std::size_t> queue{s};
  level_[s] = 0;
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    for (const Arc& a : adj_[v]) {
      if (a.cap > kEps && level_[a.to] < 0) {
        level_[a.to] = level_[v] + 1;
        queue.push_back(a.to);
      }
    }
  }
  return level_[t] >= 0;
}

double MaxFlow::dfs(std::size_t v, std::size_t t, double pushed) {
  if (v == t) return pushed;
  for (std::size_t& i = next_[v]; i < adj_[v].size(); ++i) {
    Arc& a = adj_[v][i];
    if (a.cap <= kEps || level_[a.to] != level_[v] + 1) continue;
    const double got = dfs(a.to, t, std::min(pushed, a.cap));
    if (got > kEps) {
      if (std::isfinite(a.cap)) a.cap -= got;
      adj_[a.to][a.rev].cap += got;
      return got;
    }
  }
  return 0.0;
}

double MaxFlow::solve(std::size_t source, std::size_t sink) {
  double total = 0.0;
  while (bfs(source, sink)) {
    next_.assign(adj_.size(), 0);
    while (true) {
      const double got = dfs(source, sink, std::numeric_limits<double>::infinity());
      if (got <= kEps) break;
      if (std::isinf(got)) return got;
      total += got;
    }
  }
  return total;
}

double MaxFlow::flow_on(std::size_t arc) const {
  const auto [v, i] = arcs_[arc];
  const Arc& a = adj_[v][i];
  return std::isinf(a.original) ? adj_[a.to][a.rev].cap : a.original - a.cap;
}

}  // namespace dflow
