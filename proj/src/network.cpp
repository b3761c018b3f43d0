#include "dflow/network.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>

#include "dflow/errors.hpp"

namespace dflow {

std::optional<std::size_t> Network::vertex_index(const std::string& name) const {
  auto it = std::find(vertices.begin(), vertices.end(), name);
  if (it == vertices.end()) return std::nullopt;
  return static_cast<std::size_t>(it - vertices.begin());
}

std::optional<std::size_t> Network::edge_index(const std::string& id) const {
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (edges[i].id == id) return i;
  }
  return std::nullopt;
}

namespace {

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }
bool nonnegative_finite(double v) { return std::isfinite(v) && v >= 0.0; }

// Reachability over declared edges only; dangling edges are ignored.
std::vector<bool> reach(const Network& net, std::size_t start, bool forward) {
  std::vector<bool> seen(net.vertices.size(), false);
  std::vector<std::size_t> stack{start};
  seen[start] = true;
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    for (const Edge& e : net.edges) {
      auto from = net.vertex_index(forward ? e.tail : e.head);
      auto to = net.vertex_index(forward ? e.head : e.tail);
      if (!from || !to || *from != v || seen[*to]) continue;
      seen[*to] = true;
      stack.push_back(*to);
    }
  }
  return seen;
}

}  // namespace

ValidationReport validate(const Network& net) {
  ValidationReport report;
  auto& bad = report.violations;

  std::set<std::string> names;
  for (const auto& v : net.vertices) {
    if (!names.insert(v).second) bad.push_back("duplicate vertex '" + v + "'");
  }
  const auto s = net.vertex_index(net.source);
  const auto t = net.vertex_index(net.sink);
  if (!s) bad.push_back("source '" + net.source + "' is not a declared vertex");
  if (!t) bad.push_back("sink '" + net.sink + "' is not a declared vertex");
  if (s && t && *s == *t) bad.push_back("source and sink must differ");
  if (!positive_finite(net.inflow_rate)) bad.push_back("inflow rate must be positive");
  if (!positive_finite(net.deadline)) bad.push_back("deadline must be positive");

  std::set<std::string> ids;
  for (const Edge& e : net.edges) {
    const std::string tag = "edge '" + e.id + "': ";
    if (!ids.insert(e.id).second) bad.push_back(tag + "duplicate edge id");
    if (!net.vertex_index(e.tail)) bad.push_back(tag + "tail '" + e.tail + "' is not declared");
    if (!net.vertex_index(e.head)) bad.push_back(tag + "head '" + e.head + "' is not declared");
    if (!positive_finite(e.capacity)) bad.push_back(tag + "capacity must be positive");
    if (!nonnegative_finite(e.transit)) bad.push_back(tag + "transit must be nonnegative");
    if (!nonnegative_finite(e.cost)) bad.push_back(tag + "cost must be nonnegative");
  }

  if (s && t && *s != *t) {
    const auto from_s = reach(net, *s, true);
    const auto to_t = reach(net, *t, false);
    if (!from_s[*t]) bad.push_back("sink is not reachable from the source");
    for (std::size_t v = 0; v < net.vertices.size(); ++v) {
      if (!from_s[v] || !to_t[v]) {
        report.prunable.push_back(net.vertices[v]);
        report.warnings.push_back("vertex '" + net.vertices[v] +
                                  "' lies on no s-t path and is pruned");
      }
    }
  }
  return report;
}

Network validated(const Network& net) {
  ValidationReport report = validate(net);
  if (!report.ok()) {
    std::string msg = "invalid network:";
    for (const auto& v : report.violations) msg += " " + v + ";";
    throw InvalidNetwork(msg);
  }
  if (report.prunable.empty()) return net;
  std::set<std::string> drop(report.prunable.begin(), report.prunable.end());
  Network out = net;
  out.vertices.clear();
  for (const auto& v : net.vertices) {
    if (!drop.count(v)) out.vertices.push_back(v);
  }
  out.edges.clear();
  for (const Edge& e : net.edges) {
    if (!drop.count(e.tail) && !drop.count(e.head)) out.edges.push_back(e);
  }
  return out;
}

std::vector<Path> enumerate_paths(const Network& net, std::size_t limit) {
  const auto s = net.vertex_index(net.source);
  const auto t = net.vertex_index(net.sink);
  if (!s || !t) throw InvalidNetwork("source or sink is not declared");

  const std::size_t n = net.vertices.size();
  std::vector<std::vector<std::size_t>> out_edges(n);
  std::vector<std::size_t> heads(net.edges.size());
  for (std::size_t i = 0; i < net.edges.size(); ++i) {
    auto tail = net.vertex_index(net.edges[i].tail);
    auto head = net.vertex_index(net.edges[i].head);
    if (!tail || !head) continue;
    out_edges[*tail].push_back(i);
    heads[i] = *head;
  }

  std::vector<Path> paths;
  std::vector<bool> on_path(n, false);
  Path current;
  current.vertices.push_back(*s);
  on_path[*s] = true;

  std::function<void(std::size_t)> dfs = [&](std::size_t v) {
    if (v == *t) {
      if (paths.size() >= limit) {
        throw PathExplosion("more than " + std::to_string(limit) + " s-t paths");
      }
      paths.push_back(current);
      return;
    }
    for (std::size_t e : out_edges[v]) {
      const std::size_t w = heads[e];
      if (on_path[w]) continue;
      on_path[w] = true;
      current.edges.push_back(e);
      current.vertices.push_back(w);
      dfs(w);
      current.edges.pop_back();
      current.vertices.pop_back();
      on_path[w] = false;
    }
  };
  dfs(*s);

  for (Path& p : paths) {
    p.cost = 0.0;
    p.transit = 0.0;
    p.bottleneck = std::numeric_limits<double>::infinity();
    for (std::size_t e : p.edges) {
      p.cost += net.edges[e].cost;
      p.transit += net.edges[e].transit;
      p.bottleneck = std::min(p.bottleneck, net.edges[e].capacity);
    }
  }
  std::stable_sort(paths.begin(), paths.end(), [&](const Path& a, const Path& b) {
    if (a.cost != b.cost) return a.cost < b.cost;
    return std::lexicographical_compare(
        a.edges.begin(), a.edges.end(), b.edges.begin(), b.edges.end(),
        [&](std::size_t x, std::size_t y) { return net.edges[x].id < net.edges[y].id; });
  });
  return paths;
}

std::string path_label(const Network& net, const Path& path) {
  std::string label;
  for (std::size_t i = 0; i < path.edges.size(); ++i) {
    if (i > 0) label += '>';
    label += net.edges[path.edges[i]].id;
  }
  return label;
}

std::optional<Path> path_from_label(const Network& net, const std::string& label) {
  for (const Path& p : enumerate_paths(net)) {
    if (path_label(net, p) == label) return p;
  }
  return std::nullopt;
}

bool is_parallel_path(const Network& net, std::size_t limit) {
  std::vector<int> uses(net.edges.size(), 0);
  for (const Path& p : enumerate_paths(net, limit)) {
    for (std::size_t e : p.edges) {
      if (++uses[e] > 1) return false;
    }
  }
  return true;
}

bool is_parallel_links(const Network& net) {
  return std::all_of(net.edges.begin(), net.edges.end(), [&](const Edge& e) {
    return e.tail == net.source && e.head == net.sink;
  });
}

Network reduce_to_parallel_links(const Network& net, std::size_t limit) {
  if (!is_parallel_path(net, limit)) {
    throw NotParallelPath("network has an edge shared by two s-t paths");
  }
  Network out;
  out.vertices = {net.source, net.sink};
  out.source = net.source;
  out.sink = net.sink;
  out.inflow_rate = net.inflow_rate;
  out.deadline = net.deadline;
  for (const Path& p : enumerate_paths(net, limit)) {
    out.edges.push_back({path_label(net, p), net.source, net.sink, p.transit,
                         p.bottleneck, p.cost});
  }
  return out;
}

std::vector<Link> links_in_cost_order(const Network& net) {
  if (!is_parallel_links(net)) {
    throw NotParallelLinks("every edge must run from source to sink");
  }
  std::vector<Link> links;
  for (const Path& p : enumerate_paths(net)) {
    const Edge& e = net.edges[p.edges.front()];
    links.push_back({e.transit, e.capacity, e.cost});
  }
  return links;
}

}  // namespace dflow
