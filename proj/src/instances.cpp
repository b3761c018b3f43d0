#include "dflow/instances.hpp"

#include <algorithm>
#include <cmath>

#include "dflow/errors.hpp"
#include <json.hpp>

namespace dflow {

std::uint64_t CounterRng::at(std::uint64_t counter) const {
  std::uint64_t z = seed_ + (counter + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Network gen_series_parallel(int k) {
  if (k < 1) throw DomainError("series-parallel family needs k >= 1");
  Network net;
  net.source = "s";
  net.sink = "t";
  net.inflow_rate = 1.0;
  net.deadline = k + 2.0;
  net.vertices.push_back("s");
  std::string entry = "s";
  for (int i = 1; i <= k; ++i) {
    const std::string mid = "y" + std::to_string(i);
    const std::string exit = i == k ? "t" : "x" + std::to_string(i);
    net.vertices.push_back(mid);
    net.vertices.push_back(exit);
    const std::string n = std::to_string(i);
    net.edges.push_back({"u" + n, entry, mid, 1.0, 1.0, 0.0});
    net.edges.push_back({"l" + n, entry, mid, 0.0, 1.0, std::ldexp(1.0, k - i)});
    net.edges.push_back({"m" + n, mid, exit, 0.0, 1.0, 0.0});
    entry = exit;
  }
  return net;
}

namespace {

Network two_terminal(double u, double D) {
  Network net;
  net.vertices = {"s", "t"};
  net.source = "s";
  net.sink = "t";
  net.inflow_rate = u;
  net.deadline = D;
  return net;
}

}  // namespace

Network gen_equal_links(int k) {
  if (k < 1) throw DomainError("equal-links family needs k >= 1");
  Network net = two_terminal(1.0, 1.0);
  for (int i = 1; i <= k; ++i) {
    net.edges.push_back({"e" + std::to_string(i), "s", "t", 0.0, 1.0 / k, static_cast<double>(i)});
  }
  return net;
}

Network gen_two_link_eps(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("eps must lie strictly between 0 and 1");
  Network net = two_terminal(1.0, 1.0);
  net.edges.push_back({"upper", "s", "t", 0.0, eps, 0.0});
  net.edges.push_back({"lower", "s", "t", 1.0 - eps, 1.0 - eps, 1.0});
  return net;
}

Network gen_random_parallel(int k, std::uint64_t seed, const RandomParallelOptions& options) {
  if (k < 1) throw DomainError("random parallel family needs k >= 1");
  const double u = options.inflow_rate;
  const double D = options.deadline;
  if (!(u > 0.0) || !(D > 0.0)) throw DomainError("inflow rate and deadline must be positive");
  CounterRng rng(seed);
  Network net = two_terminal(u, D);

  std::vector<double> nu(k);
  for (double& v : nu) v = 1.0 - rng.uniform();
  if (options.capacity_within_rate) {
    double sum = 0.0;
    for (double v : nu) sum += v;
    const double target = 1.0 - rng.uniform();
    for (double& v : nu) v *= target / sum;
  }

  double theta = 0.0;
  for (int i = 0; i < k; ++i) {
    const double draw = rng.uniform();
    double tau = 0.0;
    if (!options.zero_transit) tau = options.flow_carrying ? draw * (D - theta) : draw * D;
    if (tau < D - theta) theta += (D - tau - theta) * std::min(nu[i], 1.0);
    net.edges.push_back({"e" + std::to_string(i + 1), "s", "t", tau, nu[i] * u,
                         static_cast<double>(i + 1)});
  }
  return net;
}

Network gen_random_dag(int n, int m, std::uint64_t seed, const RandomDagOptions& options) {
  if (n < 2) throw DomainError("random DAG needs at least 2 vertices");
  if (m < n - 1 || m > 40) throw DomainError("random DAG needs n - 1 <= m <= 40 edges");
  CounterRng rng(seed);
  Network net;
  for (int i = 0; i < n; ++i) net.vertices.push_back("v" + std::to_string(i));
  net.source = "v0";
  net.sink = "v" + std::to_string(n - 1);
  net.inflow_rate = options.inflow_rate;
  net.deadline = options.deadline;

  const double tau_scale = options.deadline / (n - 1);
  auto add_edge = [&](int a, int b) {
    const int j = static_cast<int>(net.edges.size());
    const double nu = 1.0 - rng.uniform();
    const double tau = rng.uniform() * tau_scale;
    net.edges.push_back({"e" + std::to_string(j + 1), net.vertices[a], net.vertices[b], tau, nu,
                         std::ldexp(1.0, j)});
  };
  for (int i = 0; i + 1 < n; ++i) add_edge(i, i + 1);
  for (int extra = n - 1; extra < m; ++extra) {
    const int a = static_cast<int>(rng.next() % static_cast<std::uint64_t>(n - 1));
    const int b = a + 1 + static_cast<int>(rng.next() % static_cast<std::uint64_t>(n - 1 - a));
    add_edge(a, b);
  }
  return net;
}

namespace {

double param(const FamilySpec& spec, const std::string& name) {
  auto it = spec.params.find(name);
  if (it == spec.params.end()) {
    throw DomainError("family " + spec.family + " needs parameter '" + name + "'");
  }
  return it->second;
}

double param_or(const FamilySpec& spec, const std::string& name, double fallback) {
  auto it = spec.params.find(name);
  return it == spec.params.end() ? fallback : it->second;
}

int int_param(const FamilySpec& spec, const std::string& name) {
  const double v = param(spec, name);
  if (v != std::floor(v) || std::abs(v) > 1e6) {
    throw DomainError("parameter '" + name + "' must be an integer");
  }
  return static_cast<int>(v);
}

}  // namespace

Network generate(const FamilySpec& spec) {
  if (spec.family == "series_parallel_k") return gen_series_parallel(int_param(spec, "k"));
  if (spec.family == "equal_links_k") return gen_equal_links(int_param(spec, "k"));
  if (spec.family == "two_link_eps") return gen_two_link_eps(param(spec, "eps"));
  if (spec.family == "random_parallel") {
    RandomParallelOptions o;
    o.inflow_rate = param_or(spec, "u", 1.0);
    o.deadline = param_or(spec, "D", 1.0);
    o.flow_carrying = param_or(spec, "flow_carrying", 0.0) != 0.0;
    o.capacity_within_rate = param_or(spec, "capacity_within_rate", 0.0) != 0.0;
    o.zero_transit = param_or(spec, "zero_transit", 0.0) != 0.0;
    return gen_random_parallel(int_param(spec, "k"), spec.seed, o);
  }
  if (spec.family == "random_dag") {
    RandomDagOptions o;
    o.inflow_rate = param_or(spec, "u", 1.0);
    o.deadline = param_or(spec, "D", 2.0);
    return gen_random_dag(int_param(spec, "n"), int_param(spec, "m"), spec.seed, o);
  }
  throw DomainError("unknown family '" + spec.family + "'");
}

std::string meta_json(const FamilySpec& spec) {
  nlohmann::ordered_json doc;
  doc["family"] = spec.family;
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  for (const auto& [name, value] : spec.params) params[name] = value;
  doc["params"] = params;
  if (spec.family.rfind("random_", 0) == 0) doc["seed"] = spec.seed;
  return doc.dump();
}

}  // namespace dflow
