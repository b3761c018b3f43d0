#include "dflow/poa.hpp"

#include <algorithm>
#include <cmath>

#include "dflow/dynamics.hpp"
#include "dflow/errors.hpp"
#include "dflow/nash.hpp"
#include "dflow/optimal.hpp"

namespace dflow {

std::string to_string(BoundFlag flag) {
  switch (flag) {
    case BoundFlag::kHolds: return "holds";
    case BoundFlag::kViolated: return "violated";
    case BoundFlag::kNotApplicable: return "n/a";
  }
  return "n/a";
}

namespace {

constexpr double kBoundTol = 1e-9;

BoundFlag flag(bool applicable, double value, double bound) {
  if (!applicable) return BoundFlag::kNotApplicable;
  return value <= bound + kBoundTol ? BoundFlag::kHolds : BoundFlag::kViolated;
}

double ratio(double num, double den) {
  if (den > 0.0) return num / den;
  return num > 0.0 ? kInf : 1.0;
}

}  // namespace

PoaReport analyze(const Network& input, const AnalyzeOptions& options) {
  const Network net = validated(input);
  const double u = net.inflow_rate;
  const double D = net.deadline;
  PoaReport r;
  r.D = D;
  r.parallel_path = is_parallel_path(net);

  if (r.parallel_path) {
    const LayeredFlow flow = layered_nash_parallel(net);
    std::vector<Link> links;
    for (const Path& p : flow.paths) links.push_back({p.transit, p.bottleneck, p.cost});
    r.thetas = flow.thetas;
    r.M_f = u * flow.last_theta();
    r.M_star = max_throughput_parallel(links, u, D).value;
    r.D_star = optimal_deadline_parallel(links, u, r.M_f).value;
    r.equilibrium = "worst-case layered";
    r.optimum_method = to_string(OptMethod::kGreedy);
  } else {
    FixedPointOptions fp;
    fp.tol = options.tol;
    fp.max_iter = options.max_iter;
    const FixedPointResult res = layered_nash_general(net, fp);
    r.thetas = res.flow.thetas;
    r.sweeps = res.sweeps;
    r.M_f = throughput(simulate(net, res.flow));
    const double delta = options.delta.value_or(D / 256.0);
    // The discretized optimum can only undershoot; the equilibrium is a lower bound.
    r.M_star = std::max(time_expanded_max_throughput(net, D, delta).value, r.M_f);
    r.D_star = std::min(time_expanded_min_deadline(net, r.M_f, delta), D);
    r.equilibrium = "a Nash flow";
    r.optimum_method = to_string(OptMethod::kTimeExpanded);
  }

  r.t_poa = ratio(r.M_star, r.M_f);
  r.m_poa = r.M_f > 0.0 ? ratio(D, r.D_star) : (r.M_star > 0.0 ? kInf : 1.0);

  const bool zero_tau = std::all_of(net.edges.begin(), net.edges.end(),
                                    [](const Edge& e) { return e.transit == 0.0; });
  r.t_at_most_2 = flag(r.parallel_path, r.t_poa, 2.0);
  r.t_at_most_e_ratio = flag(r.parallel_path && zero_tau, r.t_poa, kEOverEMinusOne);
  r.m_at_most_e_ratio = flag(r.parallel_path, r.m_poa, kEOverEMinusOne);
  return r;
}

double worst_case_t_poa_zero_tau(int k) {
  if (k < 1) throw DomainError("k must be at least 1");
  const double kk = static_cast<double>(k);
  const double p = std::exp(kk * std::log1p(-1.0 / kk));
  return 1.0 / (1.0 - p);
}

double worst_case_t_poa_general_tau(int k, double nu1) {
  if (k < 2) throw DomainError("k must be at least 2");
  const double km1 = static_cast<double>(k - 1);
  if (!(nu1 > 0.0) || !(nu1 < 1.0 / km1)) {
    throw DomainError("nu1 must lie strictly between 0 and 1/(k-1)");
  }
  const double denom = -std::expm1(km1 * std::log1p(-nu1));
  return km1 * nu1 / denom + 1.0 - km1 * nu1;
}

MpoaDecomposition m_poa_ratio_decomposition(std::span<const Link> links, double u, double D) {
  MpoaDecomposition d;
  d.deadline = D;
  const std::size_t k = links.size();
  std::vector<double> nu(k);
  for (std::size_t j = 0; j < k; ++j) nu[j] = links[j].capacity / u;
  double prod = 1.0;
  for (std::size_t j = 0; j < k; ++j) {
    d.alpha += nu[j];
    prod *= 1.0 - nu[j];
  }
  d.beta = 1.0 - prod;
  for (std::size_t j = 0; j < k; ++j) {
    double later = 1.0;
    for (std::size_t l = j + 1; l < k; ++l) later *= 1.0 - nu[l];
    d.gamma += nu[j] * links[j].transit * (1.0 - later);
  }
  return d;
}

}  // namespace dflow
