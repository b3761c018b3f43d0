#include "dflow/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "dflow/csv.hpp"
#include "dflow/errors.hpp"

namespace dflow {

EdgeState edge_evolve(const StepFunction& inflow, double transit, double capacity) {
  if (!(capacity > 0.0)) throw std::invalid_argument("edge_evolve: capacity must be positive");
  if (!(transit >= 0.0)) throw std::invalid_argument("edge_evolve: transit must be nonnegative");
  if (inflow.min_value() < -1e-12) throw NegativeRate("edge inflow takes a negative value");

  const double nu = capacity;
  std::vector<Point> q{{0.0, 0.0}};
  double q_tail = 0.0;
  std::vector<double> out_starts;
  std::vector<double> out_rates;
  auto emit = [&](double t, double rate) {
    if (!out_rates.empty() && out_rates.back() == rate) return;
    out_starts.push_back(t);
    out_rates.push_back(rate);
  };

  double z = 0.0;
  bool done = false;
  for (std::size_t i = 0; i < inflow.num_pieces() && !done; ++i) {
    const double b = inflow.piece_end(i);
    const double r = std::max(inflow.values()[i], 0.0);
    double t = inflow.piece_start(i);
    while (t < b) {
      if (z > 0.0 && r < nu) {
        // Queue drains until it empties or the piece ends.
        emit(t, nu);
        const double t_empty = t + z / (nu - r);
        if (t_empty < b) {
          z = 0.0;
          t = t_empty;
          q.push_back({t, 0.0});
          continue;
        }
        z = std::max(0.0, z - (nu - r) * (b - t));
        t = b;
        q.push_back({b, z});
      } else if (z > 0.0 || r > nu) {
        emit(t, nu);
        if (std::isinf(b)) {
          q_tail = r - nu;
          done = true;
          break;
        }
        z += (r - nu) * (b - t);
        t = b;
        q.push_back({b, z});
      } else {
        emit(t, r);
        if (std::isinf(b)) {
          done = true;
          break;
        }
        t = b;
        q.push_back({b, 0.0});
      }
    }
  }

  EdgeState st;
  st.inflow = inflow;
  std::vector<double> bps(out_starts.begin() + 1, out_starts.end());
  st.outflow = shift(StepFunction(std::move(bps), out_rates), transit);

  // Drop vertices that do not change the queue slope.
  std::vector<Point> qp;
  for (const Point& p : q) {
    if (!qp.empty() && p.x - qp.back().x <= 0.0) {
      qp.back().y = p.y;
      continue;
    }
    qp.push_back(p);
  }
  st.queue = PiecewiseLinear{qp, q_tail};

  std::vector<Point> tp;
  tp.reserve(qp.size());
  for (const Point& p : qp) tp.push_back({p.x, p.x + p.y / nu + transit});
  st.exit_time = MonotonePwl(std::move(tp), 1.0 + q_tail / nu);
  st.cum_inflow = integrate(inflow);
  st.cum_outflow = integrate(st.outflow);
  return st;
}

namespace {

bool all_zero(const StepFunction& f) {
  return f.num_pieces() == 1 && f.tail() == 0.0;
}

// Topological order of the vertices, or empty when the graph has a cycle.
std::vector<std::size_t> topological_order(const Network& net) {
  const std::size_t n = net.vertices.size();
  std::vector<std::vector<std::size_t>> succ(n);
  std::vector<std::size_t> indeg(n, 0);
  for (const Edge& e : net.edges) {
    const std::size_t a = *net.vertex_index(e.tail);
    const std::size_t b = *net.vertex_index(e.head);
    succ[a].push_back(b);
    ++indeg[b];
  }
  std::vector<std::size_t> order;
  std::vector<std::size_t> ready;
  for (std::size_t v = 0; v < n; ++v) {
    if (indeg[v] == 0) ready.push_back(v);
  }
  while (!ready.empty()) {
    const std::size_t v = ready.back();
    ready.pop_back();
    order.push_back(v);
    for (std::size_t w : succ[v]) {
      if (--indeg[w] == 0) ready.push_back(w);
    }
  }
  if (order.size() != n) order.clear();
  return order;
}

struct Use {
  std::size_t path;
  std::size_t pos;
};

// Inflow into an edge: sum over the paths through it of the path's
// cumulative inflow pulled back through the label at the edge tail.
StepFunction edge_inflow(const std::vector<Use>& uses, const FlowOverTime& flow) {
  MonotonePwl cum = MonotonePwl::constant(0.0);
  bool any = false;
  for (const Use& u : uses) {
    if (all_zero(flow.path_inflows[u.path])) continue;
    const MonotonePwl& label = flow.labels[u.path][u.pos];
    cum = add(cum, compose(flow.path_cumulative[u.path], inverse(label)));
    any = true;
  }
  if (!any) return StepFunction();
  return differentiate(cum);
}

double max_gap(const MonotonePwl& f, const MonotonePwl& g) {
  double gap = 0.0;
  std::vector<double> xs;
  for (const Point& p : f.points()) xs.push_back(p.x);
  for (const Point& p : g.points()) xs.push_back(p.x);
  for (double x : xs) gap = std::max(gap, std::abs(f(x) - g(x)));
  if (f.tail_slope() != g.tail_slope()) gap = kInf;
  return gap;
}

}  // namespace

FlowOverTime propagate(const Network& network, std::vector<Path> paths,
                       std::vector<StepFunction> path_inflows,
                       const PropagateOptions& options) {
  if (paths.size() != path_inflows.size()) {
    throw std::invalid_argument("propagate: one inflow per path required");
  }
  FlowOverTime flow;
  flow.inflow_rate = network.inflow_rate;
  flow.deadline = network.deadline;
  flow.horizon = options.horizon > 0.0 ? options.horizon : network.deadline;
  flow.paths = std::move(paths);
  for (StepFunction& f : path_inflows) {
    if (f.min_value() < -1e-12) throw NegativeRate("path inflow takes a negative value");
    f = truncate(f, flow.horizon);
    flow.path_cumulative.push_back(integrate(f));
  }
  flow.path_inflows = std::move(path_inflows);

  const std::size_t m = network.edges.size();
  std::vector<std::vector<Use>> uses(m);
  for (std::size_t p = 0; p < flow.paths.size(); ++p) {
    const auto& edges = flow.paths[p].edges;
    for (std::size_t k = 0; k < edges.size(); ++k) uses[edges[k]].push_back({p, k});
    flow.labels.emplace_back(edges.size() + 1, MonotonePwl::identity());
  }
  flow.edges.resize(m);

  auto evolve = [&](std::size_t e) {
    const Edge& edge = network.edges[e];
    flow.edges[e] = edge_evolve(edge_inflow(uses[e], flow), edge.transit, edge.capacity);
  };
  auto relabel = [&](std::size_t e) {
    for (const Use& u : uses[e]) {
      flow.labels[u.path][u.pos + 1] =
          compose(flow.edges[e].exit_time, flow.labels[u.path][u.pos]);
    }
  };

  const std::vector<std::size_t> order = topological_order(network);
  if (!order.empty()) {
    std::vector<std::size_t> rank(network.vertices.size());
    for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = i;
    std::vector<std::size_t> edge_order(m);
    for (std::size_t e = 0; e < m; ++e) edge_order[e] = e;
    std::stable_sort(edge_order.begin(), edge_order.end(), [&](std::size_t a, std::size_t b) {
      return rank[*network.vertex_index(network.edges[a].tail)] <
             rank[*network.vertex_index(network.edges[b].tail)];
    });
    for (std::size_t e : edge_order) {
      evolve(e);
      relabel(e);
    }
    return flow;
  }

  // Cyclic network: start from free-flow exit times and repeat full waves.
  for (std::size_t e = 0; e < m; ++e) {
    const Edge& edge = network.edges[e];
    flow.edges[e] = edge_evolve(StepFunction(), edge.transit, edge.capacity);
  }
  for (int wave = 0; wave < options.max_waves; ++wave) {
    for (std::size_t p = 0; p < flow.paths.size(); ++p) {
      const auto& edges = flow.paths[p].edges;
      for (std::size_t k = 0; k < edges.size(); ++k) {
        flow.labels[p][k + 1] = compose(flow.edges[edges[k]].exit_time, flow.labels[p][k]);
      }
    }
    double change = 0.0;
    for (std::size_t e = 0; e < m; ++e) {
      MonotonePwl before = flow.edges[e].exit_time;
      evolve(e);
      change = std::max(change, max_gap(before, flow.edges[e].exit_time));
    }
    if (change <= options.wave_tol) {
      for (std::size_t e = 0; e < m; ++e) relabel(e);
      return flow;
    }
  }
  throw CyclicDependencyUnresolved("edge exit times did not settle within " +
                                   std::to_string(options.max_waves) + " waves");
}

double throughput(const FlowOverTime& flow, double deadline) {
  double total = 0.0;
  for (std::size_t p = 0; p < flow.paths.size(); ++p) {
    const MonotonePwl& cum = flow.path_cumulative[p];
    // Latest departure that still arrives strictly before the deadline.
    const double cut = std::min(flow.arrival(p).first_reach(deadline), flow.horizon);
    total += cum(cut);
  }
  return total;
}

double first_late_particle(const FlowOverTime& flow) {
  const double eps = 1e-12 * std::max(1.0, flow.inflow_rate);
  double theta = flow.horizon;
  StepFunction total;
  for (std::size_t p = 0; p < flow.paths.size(); ++p) {
    const StepFunction& f = flow.path_inflows[p];
    total = add(total, f);
    const double late_from = flow.arrival(p).first_reach(flow.deadline);
    for (std::size_t i = 0; i < f.num_pieces(); ++i) {
      if (f.values()[i] <= eps) continue;
      if (f.piece_end(i) <= late_from) continue;
      theta = std::min(theta, std::max(f.piece_start(i), late_from));
      break;
    }
  }
  for (std::size_t i = 0; i < total.num_pieces(); ++i) {
    if (total.values()[i] < flow.inflow_rate - eps) {
      theta = std::min(theta, total.piece_start(i));
      break;
    }
  }
  return std::max(theta, 0.0);
}

NashReport verify_nash(const FlowOverTime& flow, const NashCheckOptions& options) {
  NashReport report;
  const double end = std::min(options.until, flow.horizon);
  const double D = flow.deadline;
  const double tol = options.tol;
  const double cost_tol = 1e-9;
  const double eps = 1e-12 * std::max(1.0, flow.inflow_rate);
  const std::size_t k = flow.paths.size();

  std::vector<double> cuts{0.0};
  for (std::size_t p = 0; p < k; ++p) {
    for (double b : flow.path_inflows[p].breakpoints()) cuts.push_back(b);
    for (const Point& pt : flow.arrival(p).points()) cuts.push_back(pt.x);
    cuts.push_back(flow.arrival(p).first_reach(D));
  }
  std::vector<double> kept;
  for (double c : cuts) {
    if (c >= 0.0 && c < end) kept.push_back(c);
  }
  std::sort(kept.begin(), kept.end());
  kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
  std::vector<double> samples;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    samples.push_back(kept[i]);
    const double next = i + 1 < kept.size() ? kept[i + 1] : end;
    if (std::isfinite(next)) samples.push_back(0.5 * (kept[i] + next));
  }

  std::vector<double> arrival(k);
  double last_cost = -kInf;
  for (double theta : samples) {
    std::vector<std::size_t> used;
    for (std::size_t p = 0; p < k; ++p) {
      if (flow.path_inflows[p](theta) > eps) used.push_back(p);
      arrival[p] = flow.arrival(p)(theta);
    }
    if (used.empty()) continue;
    ++report.samples;

    double lo = kInf;
    double hi = -kInf;
    for (std::size_t p : used) {
      const double c = arrival[p] < D + tol ? flow.paths[p].cost : kInf;
      lo = std::min(lo, c);
      hi = std::max(hi, c);
      const bool late = arrival[p] >= D + tol;
      for (std::size_t q = 0; q < k; ++q) {
        if (q == p || !(arrival[q] < D - tol)) continue;
        const bool cheaper = flow.paths[q].cost < flow.paths[p].cost - cost_tol;
        if (!late && !cheaper) continue;
        report.is_nash = false;
        if (report.violations.size() < options.max_violations) {
          report.violations.push_back(
              {theta, p, q, late ? "used path arrives late while another is on time"
                                 : "a cheaper path is on time"});
        }
        break;
      }
    }
    if (hi > lo + cost_tol && !(std::isinf(lo) && std::isinf(hi))) {
      report.phases_consistent = false;
    }
    if (hi < last_cost - cost_tol) report.cost_monotone = false;
    last_cost = std::max(last_cost, hi);
    report.cost_signal.emplace_back(theta, hi);
  }
  return report;
}

void write_edge_csv(std::ostream& out, const Network& network, const FlowOverTime& flow) {
  out << "edge,interval_start,interval_end,inflow,outflow,queue_start,queue_end\n";
  for (std::size_t e = 0; e < network.edges.size(); ++e) {
    const EdgeState& st = flow.edges[e];
    std::vector<double> cuts{0.0};
    for (double b : st.inflow.breakpoints()) cuts.push_back(b);
    for (double b : st.outflow.breakpoints()) cuts.push_back(b);
    for (const Point& p : st.queue.points) cuts.push_back(p.x);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    for (std::size_t i = 0; i < cuts.size(); ++i) {
      const double a = cuts[i];
      const double b = i + 1 < cuts.size() ? cuts[i + 1] : kInf;
      double q_end;
      if (std::isfinite(b)) {
        q_end = st.queue(b);
      } else {
        q_end = st.queue.tail_slope > 0.0 ? kInf : st.queue(a);
      }
      out << csv_row({network.edges[e].id, format_number(a), format_number(b),
                      format_number(st.inflow(a)), format_number(st.outflow(a)),
                      format_number(st.queue(a)), format_number(q_end)});
    }
  }
}

void write_label_csv(std::ostream& out, const Network& network, const FlowOverTime& flow,
                     std::size_t samples) {
  out << "path,theta,arrival\n";
  for (std::size_t p = 0; p < flow.paths.size(); ++p) {
    const MonotonePwl& label = flow.arrival(p);
    std::vector<double> xs;
    for (std::size_t i = 0; i < samples; ++i) {
      xs.push_back(samples > 1 ? flow.horizon * static_cast<double>(i) /
                                     static_cast<double>(samples - 1)
                               : 0.0);
    }
    for (const Point& pt : label.points()) {
      if (pt.x >= 0.0 && pt.x <= flow.horizon) xs.push_back(pt.x);
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    const std::string name = path_label(network, flow.paths[p]);
    for (double x : xs) {
      out << csv_row({name, format_number(x), format_number(label(x))});
    }
  }
}

}  // namespace dflow
