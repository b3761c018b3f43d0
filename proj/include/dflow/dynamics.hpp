#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "dflow/network.hpp"
#include "dflow/pwl.hpp"

namespace dflow {

/// Queue state of one edge under the deterministic fluid queuing model.
struct EdgeState {
  StepFunction inflow;        // f_e^+
  StepFunction outflow;       // f_e^-
  MonotonePwl cum_inflow;     // F_e^+
  MonotonePwl cum_outflow;    // F_e^-
  PiecewiseLinear queue;      // z_e, queue mass at the tail
  MonotonePwl exit_time;      // T_e(t) = t + z_e(t)/nu_e + tau_e
};

/// Event-driven queue evolution for a single edge: the queue grows at
/// f^+ - nu while positive, empties at depletion events, and the outflow
/// equals nu while the queue is positive and min(f^+, nu) otherwise.
EdgeState edge_evolve(const StepFunction& inflow, double transit, double capacity);

/// A flow over time given by path inflow rates, with every derived quantity.
struct FlowOverTime {
  std::vector<Path> paths;
  std::vector<StepFunction> path_inflows;    // f_P^+, zero after the horizon
  std::vector<MonotonePwl> path_cumulative;  // integral of f_P^+
  std::vector<EdgeState> edges;              // indexed like network.edges
  /// labels[p][k]: arrival time at the k-th vertex of path p as a function
  /// of the departure time at the source. labels[p][0] is the identity.
  std::vector<std::vector<MonotonePwl>> labels;
  double inflow_rate = 1.0;
  double deadline = 1.0;
  double horizon = 1.0;

  const MonotonePwl& arrival(std::size_t p) const { return labels[p].back(); }
};

struct PropagateOptions {
  double horizon = -1.0;  // <= 0 selects the network deadline
  int max_waves = 100;    // only used on cyclic networks
  double wave_tol = 1e-9;
};

/// Derives edge states and arrival labels from path inflow rates. Acyclic
/// networks are processed in one topological pass; cyclic ones by repeated
/// waves until the exit-time functions are stable.
/// Throws CyclicDependencyUnresolved when the waves do not settle.
FlowOverTime propagate(const Network& network, std::vector<Path> paths,
                       std::vector<StepFunction> path_inflows,
                       const PropagateOptions& options = {});

/// Mass that reaches the sink strictly before `deadline`.
double throughput(const FlowOverTime& flow, double deadline);
inline double throughput(const FlowOverTime& flow) { return throughput(flow, flow.deadline); }

/// Supremum of departure times t such that every particle that departed in
/// [0, t) reaches the sink before the deadline. Particles not routed into any
/// path (total path inflow below u) count as not arriving.
double first_late_particle(const FlowOverTime& flow);

struct NashViolation {
  double theta = 0.0;
  std::size_t used_path = 0;
  std::size_t better_path = 0;
  std::string reason;
};

struct NashReport {
  bool is_nash = true;
  bool cost_monotone = true;       // c(theta) nondecreasing
  bool phases_consistent = true;   // all used paths share one cost
  std::vector<NashViolation> violations;
  /// (theta, c(theta)) at every checked sample with positive inflow;
  /// c = +inf when the used paths arrive late.
  std::vector<std::pair<double, double>> cost_signal;
  std::size_t samples = 0;

  bool ok() const { return is_nash && cost_monotone && phases_consistent; }
};

struct NashCheckOptions {
  /// Slack on the deadline comparison: a deviation only counts when the
  /// alternative arrives before D - tol, and a used path only counts as late
  /// from D + tol on.
  double tol = 1e-7;
  /// Check departures in [0, min(until, horizon)).
  double until = kInf;
  std::size_t max_violations = 64;
};

/// Checks the equilibrium condition at all breakpoints of the inflows and
/// arrival labels plus the midpoints between them, comparing each used path
/// against every path of the flow under the unchanged labels.
NashReport verify_nash(const FlowOverTime& flow, const NashCheckOptions& options = {});

/// Per-edge CSV: edge,interval_start,interval_end,inflow,outflow,queue_start,queue_end.
void write_edge_csv(std::ostream& out, const Network& network, const FlowOverTime& flow);
/// Per-path label samples: path,theta,arrival on `samples` evenly spaced
/// departure times in [0, horizon] plus every label breakpoint.
void write_label_csv(std::ostream& out, const Network& network, const FlowOverTime& flow,
                     std::size_t samples = 65);

}  // namespace dflow
