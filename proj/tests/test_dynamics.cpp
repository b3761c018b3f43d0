#include <doctest.h>

#include <cmath>
#include <sstream>

#include "dflow/dynamics.hpp"
#include "dflow/errors.hpp"
#include "dflow/instances.hpp"
#include "dflow/nash.hpp"
#include "oracles.hpp"

using namespace dflow;

namespace {

Network single_link(double transit, double capacity, double u, double D) {
  Network net;
  net.vertices = {"s", "t"};
  net.source = "s";
  net.sink = "t";
  net.inflow_rate = u;
  net.deadline = D;
  net.edges = {{"e", "s", "t", transit, capacity, 0.0}};
  return net;
}

FlowOverTime run_layered(const Network& net, std::vector<double> thetas) {
  LayeredFlow f;
  f.paths = enumerate_paths(net);
  f.thetas = std::move(thetas);
  return simulate(net, f);
}

void check_edge_invariants(const EdgeState& st, double transit, double capacity) {
  std::vector<double> ts;
  for (const Point& p : st.queue.points) ts.push_back(p.x);
  for (double b : st.inflow.breakpoints()) ts.push_back(b);
  const std::size_t base = ts.size();
  for (std::size_t i = 0; i < base; ++i) ts.push_back(ts[i] + 0.37);
  for (double t : ts) {
    const double z = st.queue(t);
    CHECK(z >= -1e-12);
    // z(t) = F+(t) - F-(t + tau)
    CHECK(std::abs(z - (st.cum_inflow(t) - st.cum_outflow(t + transit))) <= 1e-9);
    CHECK(st.exit_time(t) == doctest::Approx(t + z / capacity + transit));
    CHECK(st.outflow(t + transit) <= capacity + 1e-12);
    if (z > 1e-9) CHECK(st.outflow(t + transit) == doctest::Approx(capacity));
  }
}

}  // namespace

TEST_SUITE("dynamics") {
  TEST_CASE("critically loaded edge has no queue") {
    EdgeState st = edge_evolve(StepFunction(1.0), 2.0, 1.0);
    CHECK(st.queue.min_value() == 0.0);
    CHECK(st.queue(5.0) == 0.0);
    CHECK(st.outflow(1.9) == 0.0);
    CHECK(st.outflow(2.0) == 1.0);
    CHECK(st.exit_time(3.0) == doctest::Approx(5.0));
    check_edge_invariants(st, 2.0, 1.0);
  }

  TEST_CASE("queue builds and drains") {
    EdgeState st = edge_evolve(StepFunction::indicator(0.0, 1.0, 1.0), 0.0, 0.5);
    CHECK(st.queue(1.0) == doctest::Approx(0.5));
    CHECK(st.queue(2.0) == doctest::Approx(0.0));
    CHECK(st.queue(1.5) == doctest::Approx(0.25));
    CHECK(st.outflow(0.0) == 0.5);
    CHECK(st.outflow(1.99) == 0.5);
    CHECK(st.outflow(2.0) == 0.0);
    check_edge_invariants(st, 0.0, 0.5);
  }

  TEST_CASE("two merging streams queue for one time unit") {
    // Rate 2 on [1, 2) into a unit-capacity edge.
    EdgeState st = edge_evolve(StepFunction::indicator(1.0, 2.0, 2.0), 0.0, 1.0);
    CHECK(st.queue(2.0) == doctest::Approx(1.0));
    CHECK(st.exit_time(2.0) - 2.0 == doctest::Approx(1.0));
    check_edge_invariants(st, 0.0, 1.0);
  }

  TEST_CASE("edge invariants on irregular inflow") {
    StepFunction in({0.5, 1.0, 2.5, 3.0, 4.0}, {0.2, 3.0, 0.0, 1.5, 0.4, 0.0});
    EdgeState st = edge_evolve(in, 0.7, 1.0);
    check_edge_invariants(st, 0.7, 1.0);
    // Conservation over a horizon.
    const double H = 3.2;
    CHECK(st.cum_inflow(H) == doctest::Approx(st.cum_outflow(H + 0.7) + st.queue(H)));
  }

  TEST_CASE("propagate on a single link") {
    Network net = single_link(2.0, 1.0, 1.0, 3.0);
    FlowOverTime f = propagate(net, enumerate_paths(net), {StepFunction(1.0)});
    for (double th : {0.0, 0.4, 1.0}) CHECK(f.arrival(0)(th) == doctest::Approx(th + 2.0));
  }

  TEST_CASE("two-link layered flow ends the cheap layer at the deadline") {
    Network net = gen_two_link_eps(0.3);
    FlowOverTime f = run_layered(net, {0.0, 0.3, 0.3});
    CHECK(f.arrival(0)(0.3) == doctest::Approx(1.0));
  }

  TEST_CASE("series-parallel k=1 layered flow") {
    Network net = gen_series_parallel(1);
    FlowOverTime f = run_layered(net, {0.0, 1.0, 2.0});
    CHECK(f.arrival(0)(1.0) == doctest::Approx(3.0));
    CHECK(f.arrival(1)(2.0) == doctest::Approx(3.0));
    CHECK(throughput(f) == doctest::Approx(2.0));
  }

  TEST_CASE("labels are FIFO and compose along the path") {
    Network net = gen_series_parallel(2);
    FlowOverTime f = run_layered(net, {0.0, 0.5, 1.0, 1.5, 2.0});
    for (std::size_t p = 0; p < f.paths.size(); ++p) {
      for (std::size_t k = 0; k + 1 < f.labels[p].size(); ++k) {
        const std::size_t e = f.paths[p].edges[k];
        for (int i = 0; i <= 40; ++i) {
          const double th = 0.05 * i;
          CHECK(f.labels[p][k + 1](th) ==
                doctest::Approx(f.edges[e].exit_time(f.labels[p][k](th))));
          CHECK(f.labels[p][k + 1](th + 0.05) >= f.labels[p][k + 1](th));
        }
      }
    }
    for (std::size_t e = 0; e < net.edges.size(); ++e) {
      check_edge_invariants(f.edges[e], net.edges[e].transit, net.edges[e].capacity);
    }
  }

  TEST_CASE("throughput") {
    Network one = single_link(0.0, 1.0, 1.0, 1.0);
    CHECK(throughput(propagate(one, enumerate_paths(one), {StepFunction(1.0)})) ==
          doctest::Approx(1.0));
    for (int k : {1, 2}) {
      Network net = gen_series_parallel(k);
      std::vector<double> th{0.0};
      for (int i = 1; i <= (1 << k); ++i) th.push_back(i / std::ldexp(1.0, k - 1));
      CHECK(throughput(run_layered(net, th)) == doctest::Approx(2.0));
    }
    Network eps = gen_two_link_eps(0.5);
    CHECK(throughput(run_layered(eps, {0.0, 0.5, 0.5})) == doctest::Approx(0.5));
  }

  TEST_CASE("first late particle") {
    Network one = single_link(0.0, 1.0, 1.0, 1.0);
    CHECK(first_late_particle(propagate(one, enumerate_paths(one), {StepFunction(1.0)})) ==
          doctest::Approx(1.0));
    Network eps = gen_two_link_eps(0.1);
    CHECK(first_late_particle(run_layered(eps, {0.0, 0.1, 0.1})) == doctest::Approx(0.1));
    Network two = gen_equal_links(2);
    CHECK(first_late_particle(run_layered(two, {0.0, 0.5, 0.75})) == doctest::Approx(0.75));
  }

  TEST_CASE("verify_nash") {
    Network eps = gen_two_link_eps(0.1);
    CHECK(verify_nash(run_layered(eps, {0.0, 0.1, 0.1})).ok());

    std::vector<StepFunction> lower_only{StepFunction(), StepFunction::indicator(0.0, 1.0, 1.0)};
    NashReport bad = verify_nash(propagate(eps, enumerate_paths(eps), lower_only));
    CHECK_FALSE(bad.is_nash);
    REQUIRE_FALSE(bad.violations.empty());
    CHECK(bad.violations.front().theta == 0.0);
    CHECK(bad.violations.front().used_path == 1);
    CHECK(bad.violations.front().better_path == 0);

    Network one = single_link(0.3, 0.5, 1.0, 1.0);
    CHECK(verify_nash(propagate(one, enumerate_paths(one), {StepFunction(0.7)})).ok());
  }

  TEST_CASE("cost signal is nondecreasing on accepted flows") {
    for (int k : {2, 3, 5}) {
      Network net = gen_equal_links(k);
      LayeredFlow lf = layered_nash_parallel(net);
      NashReport rep = verify_nash(simulate(net, lf));
      CHECK(rep.ok());
      for (std::size_t i = 1; i < rep.cost_signal.size(); ++i) {
        CHECK(rep.cost_signal[i].second >= rep.cost_signal[i - 1].second);
      }
    }
  }

  TEST_CASE("packet simulation agrees on throughput") {
    const double dt = 1e-3;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      Network net = gen_random_parallel(1 + static_cast<int>(seed % 5), seed);
      FlowOverTime f = simulate(net, layered_nash_parallel(net));
      auto packets = oracle::packet_simulation(
          net, f.paths, [&](std::size_t p, double t) { return f.path_inflows[p](t); },
          net.deadline, dt);
      const double tol = net.inflow_rate * dt * f.paths.size() + 1e-9;
      CHECK(std::abs(packets.delivered(net.deadline) - throughput(f)) <= tol);
    }
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
      Network net = gen_random_dag(5, 8, seed);
      auto paths = enumerate_paths(net);
      std::vector<StepFunction> in;
      const double w = net.deadline / paths.size();
      for (std::size_t p = 0; p < paths.size(); ++p) {
        in.push_back(StepFunction::indicator(p * w, (p + 1) * w, net.inflow_rate));
      }
      FlowOverTime f = propagate(net, paths, in);
      auto packets = oracle::packet_simulation(
          net, paths, [&](std::size_t p, double t) { return in[p](t); }, net.deadline, dt);
      const double tol = net.inflow_rate * dt * paths.size() * 4 + 1e-9;
      CHECK(std::abs(packets.delivered(net.deadline) - throughput(f)) <= tol);
    }
  }

  TEST_CASE("cyclic networks settle") {
    Network net;
    net.vertices = {"s", "a", "b", "t"};
    net.source = "s";
    net.sink = "t";
    net.deadline = 5.0;
    net.edges = {{"sa", "s", "a", 1.0, 1.0, 0.0}, {"ab", "a", "b", 1.0, 0.5, 0.0},
                 {"ba", "b", "a", 1.0, 1.0, 0.0}, {"bt", "b", "t", 0.0, 1.0, 0.0},
                 {"at", "a", "t", 2.0, 1.0, 5.0}};
    auto paths = enumerate_paths(net);
    std::vector<StepFunction> in(paths.size());
    in[0] = StepFunction::indicator(0.0, 2.0, 1.0);
    FlowOverTime f = propagate(net, paths, in);
    // s-a-b-t: the edge a->b of capacity 1/2 doubles the spacing.
    CHECK(f.arrival(0)(0.0) == doctest::Approx(2.0));
    CHECK(f.arrival(0)(1.0) == doctest::Approx(4.0));
  }

  TEST_CASE("negative path inflow is rejected") {
    Network one = single_link(0.0, 1.0, 1.0, 1.0);
    CHECK_THROWS_AS(propagate(one, enumerate_paths(one), {StepFunction(-1.0)}), NegativeRate);
  }

  TEST_CASE("csv dumps") {
    Network net = gen_series_parallel(1);
    FlowOverTime f = run_layered(net, {0.0, 1.0, 2.0});
    std::ostringstream edges;
    write_edge_csv(edges, net, f);
    CHECK(edges.str().rfind("edge,interval_start,interval_end,inflow,outflow,queue_start,queue_end\n", 0) == 0);
    std::ostringstream labels;
    write_label_csv(labels, net, f);
    CHECK(labels.str().rfind("path,theta,arrival\n", 0) == 0);
  }
}
