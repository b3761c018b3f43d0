#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "dflow/dynamics.hpp"
#include "dflow/network.hpp"

namespace dflow {

/// Flow that sends the whole source inflow into paths[i] during
/// [thetas[i], thetas[i+1]). thetas.size() == paths.size() + 1 and thetas is
/// nondecreasing with thetas[0] == 0. When `residual` is set, the inflow
/// after thetas.back() goes to paths[*residual].
struct LayeredFlow {
  std::vector<Path> paths;
  std::vector<double> thetas;
  std::optional<std::size_t> residual;

  double last_theta() const { return thetas.back(); }
  std::vector<StepFunction> path_inflows(double inflow_rate) const;
};

/// Runs the dynamics for a layered flow over `horizon` (deadline if <= 0).
FlowOverTime simulate(const Network& network, const LayeredFlow& flow, double horizon = -1.0);

/// Breakpoints of the layered Nash flow on parallel links sorted by cost.
/// Returns k+1 values starting with 0. Capacities above u act as u.
std::vector<double> layered_thetas_parallel(std::span<const Link> links, double u, double D);

/// Explicit product formula for the same breakpoints. Valid only when every
/// link receives flow; throws AssumptionViolated otherwise.
std::vector<double> closed_form_thetas(std::span<const Link> links, double u, double D);

/// Layered Nash flow of a parallel path network via its path links.
/// Throws NotParallelPath.
LayeredFlow layered_nash_parallel(const Network& network);

struct FixedPointOptions {
  double tol = 1e-9;
  int max_iter = 10000;  // sweeps
  /// Permutation of the cost-ordered path list; ties in cost may be ordered
  /// freely without losing the equilibrium property.
  std::optional<std::vector<std::size_t>> order;
};

struct FixedPointResult {
  LayeredFlow flow;
  int sweeps = 0;
  double last_change = 0.0;
};

/// Layered Nash flow of an arbitrary network by Gauss-Seidel iteration of
/// theta_i <- first departure on P_i that reaches t no earlier than D, read
/// off the current layered flow. After each sweep a Newton step on the layer
/// lengths is tried and accepted once its residual is below tol.
/// Throws NoConvergence with the last iterate.
FixedPointResult layered_nash_general(const Network& network, const FixedPointOptions& options = {});

struct Block {
  std::size_t edge = 0;  // index into network.edges
  double start = 0.0;
  double end = 0.0;
};

/// Every edge carries inflow u on at most one interval.
struct BlockFlow {
  std::vector<Block> blocks;
};

/// Rebuilds a block flow on parallel links into a layered flow by filling
/// edges one at a time in order of block ends, inserting cheaper unused
/// edges first. Throws NotParallelLinks, NotBlockFlow.
LayeredFlow create_layered_flow(const BlockFlow& blocks, const Network& network);

struct LayeredCheck {
  double max_deadline_gap = 0.0;  // max |l_t(theta_i) - D| over flow-carrying paths
  double min_idle_arrival = kInf; // min l_t(theta_i) over paths without flow
  bool ok(double tol, double deadline) const {
    return max_deadline_gap <= tol && min_idle_arrival >= deadline - tol;
  }
};

LayeredCheck check_layered(const FlowOverTime& simulated, const LayeredFlow& flow);

/// Rows path,theta_start,theta_end in layer order; a residual layer ends in inf.
void write_layered_csv(std::ostream& out, const Network& network, const LayeredFlow& flow);
LayeredFlow read_layered_csv(std::istream& in, const Network& network);

}  // namespace dflow
