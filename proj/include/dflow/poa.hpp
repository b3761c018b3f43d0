#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dflow/network.hpp"

namespace dflow {

inline constexpr double kEOverEMinusOne = 1.5819767068693265;

enum class BoundFlag { kHolds, kViolated, kNotApplicable };

std::string to_string(BoundFlag flag);

struct PoaReport {
  double M_f = 0.0;
  double M_star = 0.0;
  double D = 0.0;
  double D_star = 0.0;
  double t_poa = 1.0;
  double m_poa = 1.0;
  BoundFlag t_at_most_2 = BoundFlag::kNotApplicable;
  BoundFlag t_at_most_e_ratio = BoundFlag::kNotApplicable;  // zero transit times only
  BoundFlag m_at_most_e_ratio = BoundFlag::kNotApplicable;
  bool parallel_path = false;
  /// "worst-case layered" on parallel path networks, "a Nash flow" otherwise.
  std::string equilibrium;
  std::string optimum_method;
  std::vector<double> thetas;
  int sweeps = 0;
};

struct AnalyzeOptions {
  double tol = 1e-9;
  int max_iter = 10000;
  /// Time-expanded step for general networks; D/256 when unset.
  std::optional<double> delta;
};

/// Prices of anarchy of the layered Nash flow against the optimum.
/// Throws NoConvergence when the layered construction does not settle.
PoaReport analyze(const Network& network, const AnalyzeOptions& options = {});

/// 1 / (1 - ((k-1)/k)^k). Throws DomainError for k < 1.
double worst_case_t_poa_zero_tau(int k);

/// (k-1) nu1 / (1 - (1-nu1)^(k-1)) + 1 - (k-1) nu1 for 0 < nu1 < 1/(k-1).
/// Throws DomainError outside that range or for k < 2.
double worst_case_t_poa_general_tau(int k, double nu1);

struct MpoaDecomposition {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double deadline = 0.0;

  double m_poa() const { return alpha * deadline / (beta * deadline + gamma); }
};

/// Capacities are measured relative to u. Meaningful when the capacities sum
/// to at most u and every link carries flow.
MpoaDecomposition m_poa_ratio_decomposition(std::span<const Link> links, double u, double D);

}  // namespace dflow
