#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dflow/network.hpp"

namespace dflow {

enum class OptMethod { kGreedy, kTimeExpanded, kFormula };

std::string to_string(OptMethod method);

/// Constant rate `rate` into link `link` (an edge index for time-expanded
/// solutions) on [start, end).
struct ScheduleEntry {
  std::size_t link = 0;
  double start = 0.0;
  double end = 0.0;
  double rate = 0.0;
};

struct OptSolution {
  double value = 0.0;  // M* or D*
  std::vector<ScheduleEntry> schedule;
  OptMethod method = OptMethod::kGreedy;
};

/// Maximum mass deliverable before D on parallel links: links with earlier
/// last useful departure time (D - tau)^+ get the source first.
OptSolution max_throughput_parallel(std::span<const Link> links, double u, double D);

/// Smallest deadline D with max_throughput_parallel(links, u, D) >= M.
/// Returns kInf when M is not deliverable.
OptSolution optimal_deadline_parallel(std::span<const Link> links, double u, double M);

/// (M + sum nu_j tau_j) / sum nu_j: the deadline when every link is active
/// and total capacity does not exceed u.
double optimal_deadline_formula(std::span<const Link> links, double M);

struct TimeExpandedSolution : OptSolution {
  double delta = 0.0;
  std::size_t steps = 0;
  /// Per edge: rounded-up transit minus the original transit.
  std::vector<double> transit_rounding;
};

/// Max flow in the time-expanded network with D/delta layers. Transits are
/// rounded up to whole steps. Throws DiscretizationMismatch when D is not a
/// multiple of delta.
TimeExpandedSolution time_expanded_max_throughput(const Network& network, double D,
                                                  double delta);

/// Smallest deadline on the delta grid (interpolated linearly between grid
/// points) for which the time-expanded throughput reaches M.
/// Throws DomainError when M cannot be delivered.
double time_expanded_min_deadline(const Network& network, double M, double delta);

/// Rows link,interval_start,interval_end,rate; `names` labels the links.
void write_schedule_csv(std::ostream& out, const OptSolution& solution,
                        const std::vector<std::string>& names);

}  // namespace dflow
