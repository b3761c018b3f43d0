#include "dflow/nash.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "dflow/csv.hpp"
#include "dflow/errors.hpp"

namespace dflow {

std::vector<StepFunction> LayeredFlow::path_inflows(double inflow_rate) const {
  std::vector<StepFunction> out;
  out.reserve(paths.size());
  for (std::size_t i = 0; i < paths.size(); ++i) {
    out.push_back(StepFunction::indicator(thetas[i], thetas[i + 1], inflow_rate));
  }
  if (residual) {
    out[*residual] =
        add(out[*residual], StepFunction::indicator(thetas.back(), kInf, inflow_rate));
  }
  return out;
}

FlowOverTime simulate(const Network& network, const LayeredFlow& flow, double horizon) {
  PropagateOptions opts;
  opts.horizon = horizon;
  return propagate(network, flow.paths, flow.path_inflows(network.inflow_rate), opts);
}

namespace {

void require_cost_order(std::span<const Link> links) {
  for (std::size_t i = 1; i < links.size(); ++i) {
    if (links[i].cost < links[i - 1].cost) {
      throw std::invalid_argument("links must be sorted by cost");
    }
  }
}

double fill_rate(const Link& link, double u) { return std::min(link.capacity, u) / u; }

}  // namespace

std::vector<double> layered_thetas_parallel(std::span<const Link> links, double u, double D) {
  require_cost_order(links);
  std::vector<double> thetas{0.0};
  for (const Link& l : links) {
    const double prev = thetas.back();
    if (l.transit >= D - prev) {
      thetas.push_back(prev);
    } else {
      thetas.push_back(prev + (D - l.transit - prev) * fill_rate(l, u));
    }
  }
  return thetas;
}

std::vector<double> closed_form_thetas(std::span<const Link> links, double u, double D) {
  require_cost_order(links);
  const std::size_t k = links.size();
  std::vector<double> nu(k);
  for (std::size_t j = 0; j < k; ++j) nu[j] = fill_rate(links[j], u);

  std::vector<double> thetas{0.0};
  for (std::size_t i = 0; i < k; ++i) {
    if (links[i].transit >= D - thetas.back()) {
      throw AssumptionViolated("link " + std::to_string(i + 1) + " carries no flow");
    }
    double prod = 1.0;
    for (std::size_t j = 0; j <= i; ++j) prod *= 1.0 - nu[j];
    double sum = 0.0;
    for (std::size_t j = 0; j <= i; ++j) {
      double tail = 1.0;
      for (std::size_t l = j + 1; l <= i; ++l) tail *= 1.0 - nu[l];
      sum += links[j].transit * nu[j] * tail;
    }
    thetas.push_back(D * (1.0 - prod) - sum);
  }
  return thetas;
}

LayeredFlow layered_nash_parallel(const Network& network) {
  if (!is_parallel_path(network)) {
    throw NotParallelPath("network has an edge shared by two s-t paths");
  }
  LayeredFlow flow;
  flow.paths = enumerate_paths(network);
  std::vector<Link> links;
  for (const Path& p : flow.paths) links.push_back({p.transit, p.bottleneck, p.cost});
  flow.thetas = layered_thetas_parallel(links, network.inflow_rate, network.deadline);
  return flow;
}

FixedPointResult layered_nash_general(const Network& network, const FixedPointOptions& options) {
  std::vector<Path> all = enumerate_paths(network);
  std::vector<Path> paths;
  if (options.order) {
    if (options.order->size() != all.size()) {
      throw std::invalid_argument("path order must be a permutation of all paths");
    }
    std::vector<bool> seen(all.size(), false);
    for (std::size_t i : *options.order) {
      if (i >= all.size() || seen[i]) {
        throw std::invalid_argument("path order must be a permutation of all paths");
      }
      seen[i] = true;
      paths.push_back(all[i]);
    }
  } else {
    paths = std::move(all);
  }

  const std::size_t k = paths.size();
  const double u = network.inflow_rate;
  const double D = network.deadline;
  std::vector<double> theta(k, 0.0);

  auto prefix_max = [&](const std::vector<double>& th) {
    std::vector<double> bar(k + 1, 0.0);
    for (std::size_t j = 0; j < k; ++j) bar[j + 1] = std::max(bar[j], th[j]);
    return bar;
  };
  auto run = [&](const std::vector<double>& bar) {
    std::vector<StepFunction> inflows;
    inflows.reserve(k);
    for (std::size_t j = 0; j < k; ++j) {
      inflows.push_back(StepFunction::indicator(bar[j], bar[j + 1], u));
    }
    return propagate(network, paths, std::move(inflows));
  };
  // Latest departure on P_i that still arrives before D in the current flow.
  auto g = [&](std::size_t i) {
    const FlowOverTime flow = run(prefix_max(theta));
    return std::min(D, flow.arrival(i).first_reach(D));
  };

  // Layer lengths x >= 0 solve min(x_i, l_t^{P_i}(end of layer i) - D) = 0.
  auto residual = [&](const Eigen::VectorXd& x) {
    std::vector<double> bar(k + 1, 0.0);
    for (std::size_t j = 0; j < k; ++j) bar[j + 1] = bar[j] + x(j);
    const FlowOverTime flow = run(bar);
    Eigen::VectorXd r(k);
    for (std::size_t j = 0; j < k; ++j) {
      r(j) = std::min(x(j), flow.arrival(j)(bar[j + 1]) - D);
    }
    return r;
  };
  auto newton = [&](std::vector<double>& th) {
    const std::vector<double> bar = prefix_max(th);
    Eigen::VectorXd x(k);
    for (std::size_t j = 0; j < k; ++j) x(j) = bar[j + 1] - bar[j];
    Eigen::VectorXd r = residual(x);
    double norm = r.lpNorm<Eigen::Infinity>();
    const double h = 1e-5 * std::max(1.0, D);
    for (int step = 0; step < 20 && norm > options.tol; ++step) {
      Eigen::MatrixXd jac(k, k);
      for (std::size_t j = 0; j < k; ++j) {
        Eigen::VectorXd y = x;
        y(j) += h;
        jac.col(j) = (residual(y) - r) / h;
      }
      const Eigen::VectorXd d = jac.colPivHouseholderQr().solve(-r);
      bool moved = false;
      for (double t = 1.0; t > 1e-4; t *= 0.5) {
        const Eigen::VectorXd y = (x + t * d).cwiseMax(0.0);
        const Eigen::VectorXd ry = residual(y);
        const double ny = ry.lpNorm<Eigen::Infinity>();
        if (ny < (1.0 - 1e-4 * t) * norm) {
          x = y;
          r = ry;
          norm = ny;
          moved = true;
          break;
        }
      }
      if (!moved) break;
    }
    if (norm > options.tol) return false;
    double acc = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      acc += x(j);
      th[j] = acc;
    }
    return true;
  };

  double damping = 1.0;
  double prev_change = kInf;
  int growing = 0;
  FixedPointResult result;
  auto finish = [&](int sweep, double change) {
    result.sweeps = sweep;
    result.last_change = change;
    result.flow.paths = std::move(paths);
    result.flow.thetas = prefix_max(theta);
    return result;
  };
  for (int sweep = 1; sweep <= options.max_iter; ++sweep) {
    double change = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double next = theta[i] + damping * (g(i) - theta[i]);
      change = std::max(change, std::abs(next - theta[i]));
      theta[i] = next;
    }
    if (change <= options.tol) return finish(sweep, change);
    if (sweep >= 2) {
      std::vector<double> polished = theta;
      if (newton(polished)) {
        double moved = 0.0;
        for (std::size_t j = 0; j < k; ++j) moved = std::max(moved, std::abs(polished[j] - theta[j]));
        theta = std::move(polished);
        return finish(sweep, moved);
      }
    }
    growing = change >= prev_change ? growing + 1 : 0;
    if (growing >= 2) damping = 0.5;
    prev_change = change;
  }
  throw NoConvergence("fixed-point iteration did not settle within " +
                          std::to_string(options.max_iter) + " sweeps",
                      theta);
}

LayeredFlow create_layered_flow(const BlockFlow& blocks, const Network& network) {
  if (!is_parallel_links(network)) {
    throw NotParallelLinks("every edge must run from source to sink");
  }
  const std::size_t m = network.edges.size();
  const double u = network.inflow_rate;
  const double D = network.deadline;

  std::vector<std::optional<Block>> block_of(m);
  for (const Block& b : blocks.blocks) {
    if (b.edge >= m) throw NotBlockFlow("block refers to an unknown edge");
    if (!std::isfinite(b.start) || !std::isfinite(b.end) || b.start < 0.0 || b.end < b.start) {
      throw NotBlockFlow("block interval must be finite with 0 <= start <= end");
    }
    if (b.end == b.start) continue;
    if (block_of[b.edge]) throw NotBlockFlow("edge has more than one block");
    block_of[b.edge] = b;
  }
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t c = a + 1; c < m; ++c) {
      if (block_of[a] && block_of[c] && block_of[a]->start < block_of[c]->end &&
          block_of[c]->start < block_of[a]->end) {
        throw NotBlockFlow("blocks overlap");
      }
    }
  }

  auto cheaper = [&](std::size_t a, std::size_t b) {
    if (network.edges[a].cost != network.edges[b].cost) {
      return network.edges[a].cost < network.edges[b].cost;
    }
    return a < b;
  };

  std::vector<std::size_t> S;
  std::vector<std::size_t> U;
  for (std::size_t e = 0; e < m; ++e) (block_of[e] ? S : U).push_back(e);

  LayeredFlow out;
  out.thetas.push_back(0.0);
  double T = 0.0;
  std::vector<std::size_t> processed;
  auto fill_edge = [&](std::size_t e) {
    const Edge& edge = network.edges[e];
    // The edge has no inflow before T, so a particle entering at T meets no queue.
    if (T + edge.transit < D) {
      T = T + (D - T - edge.transit) * std::min(edge.capacity, u) / u;
    }
    processed.push_back(e);
    out.thetas.push_back(T);
  };

  while (!S.empty()) {
    auto it = std::min_element(S.begin(), S.end(), [&](std::size_t a, std::size_t b) {
      if (block_of[a]->end != block_of[b]->end) return block_of[a]->end < block_of[b]->end;
      return a < b;
    });
    const std::size_t e = *it;
    std::vector<std::size_t> V;
    for (std::size_t x : U) {
      if (network.edges[x].cost < network.edges[e].cost) V.push_back(x);
    }
    std::sort(V.begin(), V.end(), cheaper);
    for (std::size_t x : V) {
      fill_edge(x);
      U.erase(std::find(U.begin(), U.end(), x));
    }
    fill_edge(e);
    S.erase(it);
  }
  std::sort(U.begin(), U.end(), cheaper);
  for (std::size_t x : U) fill_edge(x);

  const std::vector<Path> paths = enumerate_paths(network);
  for (std::size_t e : processed) {
    auto p = std::find_if(paths.begin(), paths.end(),
                          [&](const Path& path) { return path.edges.front() == e; });
    out.paths.push_back(*p);
  }
  if (!processed.empty()) out.residual = processed.size() - 1;
  return out;
}

LayeredCheck check_layered(const FlowOverTime& simulated, const LayeredFlow& flow) {
  LayeredCheck check;
  const double D = simulated.deadline;
  for (std::size_t i = 0; i < flow.paths.size(); ++i) {
    const double arrival = simulated.arrival(i)(flow.thetas[i + 1]);
    if (flow.thetas[i] < flow.thetas[i + 1]) {
      check.max_deadline_gap = std::max(check.max_deadline_gap, std::abs(arrival - D));
    } else {
      check.min_idle_arrival = std::min(check.min_idle_arrival, arrival);
    }
  }
  return check;
}

void write_layered_csv(std::ostream& out, const Network& network, const LayeredFlow& flow) {
  out << "path,theta_start,theta_end\n";
  for (std::size_t i = 0; i < flow.paths.size(); ++i) {
    out << csv_row({path_label(network, flow.paths[i]), format_number(flow.thetas[i]),
                    format_number(flow.thetas[i + 1])});
  }
  if (flow.residual) {
    out << csv_row({path_label(network, flow.paths[*flow.residual]),
                    format_number(flow.thetas.back()), "inf"});
  }
}

LayeredFlow read_layered_csv(std::istream& in, const Network& network) {
  LayeredFlow flow;
  std::string line;
  bool header = true;
  std::optional<std::string> residual_label;
  std::vector<std::string> labels;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    if (header) {
      header = false;
      continue;
    }
    const auto fields = parse_csv_line(line);
    if (fields.size() != 3) throw ParseError("layered flow row needs 3 fields: " + line);
    double start;
    double end;
    try {
      start = std::stod(fields[1]);
      end = std::stod(fields[2]);
    } catch (const std::exception&) {
      throw ParseError("bad number in layered flow row: " + line);
    }
    if (std::isinf(end)) {
      residual_label = fields[0];
      continue;
    }
    auto path = path_from_label(network, fields[0]);
    if (!path) throw ParseError("unknown path '" + fields[0] + "'");
    if (flow.thetas.empty()) flow.thetas.push_back(start);
    if (start != flow.thetas.back()) throw ParseError("layers must be contiguous");
    flow.paths.push_back(*path);
    flow.thetas.push_back(end);
    labels.push_back(fields[0]);
  }
  if (flow.thetas.empty()) flow.thetas.push_back(0.0);
  if (residual_label) {
    auto it = std::find(labels.begin(), labels.end(), *residual_label);
    if (it == labels.end()) throw ParseError("residual path is not a layer");
    flow.residual = static_cast<std::size_t>(it - labels.begin());
  }
  return flow;
}

}  // namespace dflow
