#include "dflow/optimal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "dflow/csv.hpp"
#include "dflow/errors.hpp"
#include "dflow/maxflow.hpp"
#include "dflow/pwl.hpp"

namespace dflow {

std::string to_string(OptMethod method) {
  switch (method) {
    case OptMethod::kGreedy: return "greedy";
    case OptMethod::kTimeExpanded: return "time_expanded";
    case OptMethod::kFormula: return "formula";
  }
  return "unknown";
}

OptSolution max_throughput_parallel(std::span<const Link> links, double u, double D) {
  const std::size_t k = links.size();
  std::vector<double> due(k);
  for (std::size_t j = 0; j < k; ++j) due[j] = std::max(D - links[j].transit, 0.0);

  std::vector<std::size_t> by_due(k);
  std::iota(by_due.begin(), by_due.end(), 0);
  std::stable_sort(by_due.begin(), by_due.end(),
                   [&](std::size_t a, std::size_t b) { return due[a] < due[b]; });

  std::vector<double> cuts{0.0};
  for (double d : due) {
    if (d > 0.0) cuts.push_back(d);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  OptSolution sol;
  sol.method = OptMethod::kGreedy;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double a = cuts[c];
    const double b = cuts[c + 1];
    double left = u;
    for (std::size_t j : by_due) {
      if (due[j] <= a || left <= 0.0) continue;
      const double rate = std::min(links[j].capacity, left);
      left -= rate;
      sol.value += rate * (b - a);
      // Extend the previous entry of the same link when the rate carries on.
      auto prev = std::find_if(sol.schedule.rbegin(), sol.schedule.rend(),
                               [&](const ScheduleEntry& e) { return e.link == j; });
      if (prev != sol.schedule.rend() && prev->end == a && prev->rate == rate) {
        prev->end = b;
      } else {
        sol.schedule.push_back({j, a, b, rate});
      }
    }
  }
  return sol;
}

OptSolution optimal_deadline_parallel(std::span<const Link> links, double u, double M) {
  OptSolution sol;
  sol.method = OptMethod::kGreedy;
  if (M <= 0.0) return sol;

  std::vector<std::size_t> by_transit(links.size());
  std::iota(by_transit.begin(), by_transit.end(), 0);
  std::stable_sort(by_transit.begin(), by_transit.end(), [&](std::size_t a, std::size_t b) {
    return links[a].transit < links[b].transit;
  });

  // Throughput grows at rate min(u, capacity of links with tau < D).
  double t = 0.0;
  double mass = 0.0;
  double active = 0.0;
  std::size_t next = 0;
  double deadline = kInf;
  while (true) {
    while (next < by_transit.size() && links[by_transit[next]].transit <= t) {
      active += links[by_transit[next]].capacity;
      ++next;
    }
    const double rate = std::min(u, active);
    const double until = next < by_transit.size() ? links[by_transit[next]].transit : kInf;
    if (rate > 0.0 && mass + rate * (until - t) >= M) {
      deadline = t + (M - mass) / rate;
      break;
    }
    if (std::isinf(until)) break;
    mass += rate * (until - t);
    t = until;
  }
  if (std::isinf(deadline)) {
    sol.value = kInf;
    return sol;
  }
  sol = max_throughput_parallel(links, u, deadline);
  sol.value = deadline;
  return sol;
}

double optimal_deadline_formula(std::span<const Link> links, double M) {
  double nu = 0.0;
  double weighted = 0.0;
  for (const Link& l : links) {
    nu += l.capacity;
    weighted += l.capacity * l.transit;
  }
  return (M + weighted) / nu;
}

namespace {

struct Grid {
  std::size_t steps;
  std::vector<std::size_t> transit_steps;
  std::vector<double> rounding;
};

Grid snap_transits(const Network& net, double delta) {
  Grid g{0, {}, {}};
  for (const Edge& e : net.edges) {
    const double ratio = e.transit / delta;
    double s = std::ceil(ratio - 1e-9);
    if (s < 0.0) s = 0.0;
    g.transit_steps.push_back(static_cast<std::size_t>(s));
    g.rounding.push_back(s * delta - e.transit);
  }
  return g;
}

// Max flow with `steps` layers of width delta.
double solve_layers(const Network& net, const Grid& grid, std::size_t steps, double delta,
                    std::vector<ScheduleEntry>* schedule) {
  const std::size_t V = net.vertices.size();
  const std::size_t s = *net.vertex_index(net.source);
  const std::size_t t = *net.vertex_index(net.sink);
  MaxFlow mf(V * steps + 2);
  const std::size_t S = V * steps;
  const std::size_t T = S + 1;
  auto node = [&](std::size_t v, std::size_t i) { return i * V + v; };
  for (std::size_t i = 0; i < steps; ++i) {
    mf.add_arc(S, node(s, i), net.inflow_rate * delta);
    mf.add_arc(node(t, i), T, kInf);
    if (i + 1 < steps) {
      for (std::size_t v = 0; v < V; ++v) {
        if (v != t) mf.add_arc(node(v, i), node(v, i + 1), kInf);
      }
    }
  }
  struct Placed {
    std::size_t edge;
    std::size_t layer;
    std::size_t arc;
  };
  std::vector<Placed> placed;
  for (std::size_t e = 0; e < net.edges.size(); ++e) {
    const std::size_t a = *net.vertex_index(net.edges[e].tail);
    const std::size_t b = *net.vertex_index(net.edges[e].head);
    const std::size_t shift = grid.transit_steps[e];
    for (std::size_t i = 0; i + shift < steps; ++i) {
      const std::size_t arc =
          mf.add_arc(node(a, i), node(b, i + shift), net.edges[e].capacity * delta);
      placed.push_back({e, i, arc});
    }
  }
  const double value = mf.solve(S, T);
  if (schedule) {
    for (const Placed& p : placed) {
      const double rate = mf.flow_on(p.arc) / delta;
      if (rate <= 1e-12) continue;
      const double a = static_cast<double>(p.layer) * delta;
      auto prev = std::find_if(schedule->rbegin(), schedule->rend(),
                               [&](const ScheduleEntry& x) { return x.link == p.edge; });
      if (prev != schedule->rend() && std::abs(prev->end - a) <= 1e-12 &&
          std::abs(prev->rate - rate) <= 1e-12) {
        prev->end = a + delta;
      } else {
        schedule->push_back({p.edge, a, a + delta, rate});
      }
    }
  }
  return value;
}

}  // namespace

TimeExpandedSolution time_expanded_max_throughput(const Network& network, double D,
                                                  double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw DiscretizationMismatch("step must be positive and finite");
  }
  const double ratio = D / delta;
  const double n = std::round(ratio);
  if (!(std::abs(n * delta - D) <= 1e-9 * std::max(1.0, D)) || n < 1.0) {
    throw DiscretizationMismatch("deadline " + format_number(D) +
                                 " is not a positive multiple of step " + format_number(delta));
  }
  Grid grid = snap_transits(network, delta);
  TimeExpandedSolution sol;
  sol.method = OptMethod::kTimeExpanded;
  sol.delta = delta;
  sol.steps = static_cast<std::size_t>(n);
  sol.value = solve_layers(network, grid, sol.steps, delta, &sol.schedule);
  sol.transit_rounding = grid.rounding;
  return sol;
}

double time_expanded_min_deadline(const Network& network, double M, double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw DiscretizationMismatch("step must be positive and finite");
  }
  if (M <= 0.0) return 0.0;
  const Grid grid = snap_transits(network, delta);
  const double slack = 1e-12 * std::max(1.0, M);
  auto value = [&](std::size_t n) {
    return n == 0 ? 0.0 : solve_layers(network, grid, n, delta, nullptr);
  };

  std::size_t hi = 1;
  double v_hi = value(hi);
  constexpr std::size_t kMaxSteps = std::size_t{1} << 22;
  while (v_hi < M - slack) {
    if (hi >= kMaxSteps) throw DomainError("mass " + format_number(M) + " is not deliverable");
    hi *= 2;
    v_hi = value(hi);
  }
  std::size_t lo = hi / 2;  // value(lo) < M unless lo == 0
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    const double v = value(mid);
    if (v >= M - slack) {
      hi = mid;
      v_hi = v;
    } else {
      lo = mid;
    }
  }
  const double v_lo = value(lo);
  const double frac = v_hi > v_lo ? std::clamp((M - v_lo) / (v_hi - v_lo), 0.0, 1.0) : 1.0;
  return (static_cast<double>(lo) + frac) * delta;
}

void write_schedule_csv(std::ostream& out, const OptSolution& solution,
                        const std::vector<std::string>& names) {
  out << "link,interval_start,interval_end,rate\n";
  for (const ScheduleEntry& e : solution.schedule) {
    const std::string name = e.link < names.size() ? names[e.link] : std::to_string(e.link);
    out << csv_row({name, format_number(e.start), format_number(e.end), format_number(e.rate)});
  }
}

}  // namespace dflow
