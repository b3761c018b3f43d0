#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "dflow/network.hpp"

namespace dflow {

/// Counter-based SplitMix64: draw i of a stream is the SplitMix64 finalizer
/// applied to seed + (i+1) * 0x9E3779B97F4A7C15, so every draw can be
/// recomputed from (seed, i) alone.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t at(std::uint64_t counter) const;
  std::uint64_t next() { return at(counter_++); }
  /// Uniform in [0, 1) from the top 53 bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

/// k series blocks, each two parallel edges (upper: transit 1, cost 0;
/// lower: transit 0, cost 2^(k-i)) followed by one edge with transit 0.
/// Unit capacities, u = 1, D = k + 2. Throws DomainError for k < 1.
Network gen_series_parallel(int k);

/// k links with transit 0, capacity 1/k and costs 1..k; u = D = 1.
Network gen_equal_links(int k);

/// Upper link (transit 0, capacity eps, cost 0) and lower link (transit
/// 1 - eps, capacity 1 - eps, cost 1); u = D = 1. Requires 0 < eps < 1.
Network gen_two_link_eps(double eps);

struct RandomParallelOptions {
  double inflow_rate = 1.0;
  double deadline = 1.0;
  /// Draw transit times so that every link receives flow in the layered
  /// Nash flow.
  bool flow_carrying = false;
  /// Rescale capacities so that they sum to at most the inflow rate.
  bool capacity_within_rate = false;
  bool zero_transit = false;
};

/// k links with capacity in (0, 1] (relative to u), transit in [0, D) and
/// costs 1..k.
Network gen_random_parallel(int k, std::uint64_t seed, const RandomParallelOptions& options = {});

struct RandomDagOptions {
  double inflow_rate = 1.0;
  double deadline = 2.0;
};

/// n vertices v0..v(n-1) joined by a backbone path plus m - n + 1 random
/// forward edges. Edge j costs 2^j so all path costs differ.
/// Throws DomainError unless 2 <= n and n - 1 <= m <= 40.
Network gen_random_dag(int n, int m, std::uint64_t seed, const RandomDagOptions& options = {});

struct FamilySpec {
  std::string family;  // series_parallel_k, equal_links_k, two_link_eps, random_parallel, random_dag
  std::map<std::string, double> params;
  std::uint64_t seed = 0;
};

/// Builds the instance described by `spec`. Throws DomainError for unknown
/// families or missing parameters.
Network generate(const FamilySpec& spec);

/// {"family": ..., "params": {...}, "seed": ...} as JSON text.
std::string meta_json(const FamilySpec& spec);

}  // namespace dflow
