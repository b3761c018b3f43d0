#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace dflow {

struct Edge {
  std::string id;
  std::string tail;
  std::string head;
  double transit = 0.0;   // tau_e >= 0
  double capacity = 1.0;  // nu_e > 0
  double cost = 0.0;      // c_e >= 0
};

/// Single-commodity network with constant inflow rate at the source and a
/// global deadline. Edges are identified by id; parallel edges are allowed.
struct Network {
  std::vector<std::string> vertices;
  std::vector<Edge> edges;
  std::string source;
  std::string sink;
  double inflow_rate = 1.0;  // u
  double deadline = 1.0;     // D

  /// Index of a vertex name, or nullopt when it is not declared.
  std::optional<std::size_t> vertex_index(const std::string& name) const;
  std::optional<std::size_t> edge_index(const std::string& id) const;
};

struct ValidationReport {
  std::vector<std::string> violations;
  std::vector<std::string> warnings;
  /// Vertices that lie on no s-t path; they are removed by `validated`.
  std::vector<std::string> prunable;

  bool ok() const { return violations.empty(); }
};

ValidationReport validate(const Network& network);

/// Validates and prunes vertices (and their edges) that lie on no s-t path.
/// Throws InvalidNetwork listing every violation.
Network validated(const Network& network);

/// A simple s-t path. `edges` and `vertices` hold indices into the network;
/// vertices.size() == edges.size() + 1 and vertices.front() is the source.
struct Path {
  std::vector<std::size_t> edges;
  std::vector<std::size_t> vertices;
  double cost = 0.0;        // sum of edge costs
  double transit = 0.0;     // sum of edge transit times
  double bottleneck = 0.0;  // min edge capacity
};

inline constexpr std::size_t kDefaultPathLimit = 4096;

/// All simple s-t paths ordered by cost; ties are broken by comparing the
/// edge-id sequences lexicographically. Throws PathExplosion past `limit`.
std::vector<Path> enumerate_paths(const Network& network,
                                  std::size_t limit = kDefaultPathLimit);

/// Edge ids of the path joined by '>'.
std::string path_label(const Network& network, const Path& path);

/// Resolves a label produced by path_label back into a path.
std::optional<Path> path_from_label(const Network& network, const std::string& label);

/// True iff no edge lies on two distinct s-t paths.
bool is_parallel_path(const Network& network, std::size_t limit = kDefaultPathLimit);
bool is_parallel_links(const Network& network);

/// Replaces every s-t path by one s->t link with the summed transit, the
/// bottleneck capacity and the summed cost. Link ids are the path labels.
/// Throws NotParallelPath.
Network reduce_to_parallel_links(const Network& network,
                                 std::size_t limit = kDefaultPathLimit);

/// Parallel link description used by the closed-form routines.
struct Link {
  double transit = 0.0;
  double capacity = 1.0;
  double cost = 0.0;
};

/// Links of a parallel link network in path (cost) order.
std::vector<Link> links_in_cost_order(const Network& network);

}  // namespace dflow
