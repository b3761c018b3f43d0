#pragma once

#include <cstddef>
#include <vector>

namespace dflow {

/// Dinic's blocking-flow max-flow on real capacities.
class MaxFlow {
 public:
  explicit MaxFlow(std::size_t nodes);

  std::size_t add_node();
  /// Adds an arc and returns its index; capacity may be +inf.
  std::size_t add_arc(std::size_t from, std::size_t to, double capacity);

  double solve(std::size_t source, std::size_t sink);
  double flow_on(std::size_t arc) const;
  std::size_t num_nodes() const { return adj_.size(); }

 private:
  struct Arc {
    std::size_t to;
    std::size_t rev;
    double cap;
    double original;
  };

  bool bfs(std::size_t s, std::size_t t);
  double dfs(std::size_t v, std::size_t t, double pushed);

  std::vector<std::vector<Arc>> adj_;
  std::vector<std::pair<std::size_t, std::size_t>> arcs_;
  std::vector<int> level_;
  std::vector<std::size_t> next_;
};

}  // namespace dflow
