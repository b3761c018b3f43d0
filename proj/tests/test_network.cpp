#include <doctest.h>

#include <random>

#include "dflow/dynamics.hpp"
#include "dflow/errors.hpp"
#include "dflow/instance_io.hpp"
#include "dflow/instances.hpp"
#include "dflow/nash.hpp"
#include "dflow/network.hpp"

using namespace dflow;

namespace {

Network single_edge(double transit = 0.0, double capacity = 1.0) {
  Network net;
  net.vertices = {"s", "t"};
  net.source = "s";
  net.sink = "t";
  net.edges = {{"e", "s", "t", transit, capacity, 0.0}};
  return net;
}

bool has(const std::vector<std::string>& v, const std::string& needle) {
  for (const auto& s : v) {
    if (s.find(needle) != std::string::npos) return true;
  }
  return false;
}

// Disjoint chains from s to t; chain j has the given (transit, capacity, cost)
// edges.
Network chains(const std::vector<std::vector<Edge>>& parts, double u, double D) {
  Network net;
  net.vertices = {"s", "t"};
  net.source = "s";
  net.sink = "t";
  net.inflow_rate = u;
  net.deadline = D;
  for (std::size_t j = 0; j < parts.size(); ++j) {
    std::string prev = "s";
    for (std::size_t i = 0; i < parts[j].size(); ++i) {
      const bool last = i + 1 == parts[j].size();
      const std::string next = last ? "t" : "c" + std::to_string(j) + "_" + std::to_string(i);
      if (!last) net.vertices.push_back(next);
      Edge e = parts[j][i];
      e.id = "p" + std::to_string(j) + "e" + std::to_string(i);
      e.tail = prev;
      e.head = next;
      net.edges.push_back(e);
      prev = next;
    }
  }
  return net;
}

}  // namespace

TEST_SUITE("network") {
  TEST_CASE("validate") {
    CHECK(validate(single_edge()).ok());

    Network zero = single_edge(0.0, 0.0);
    ValidationReport r = validate(zero);
    CHECK_FALSE(r.ok());
    CHECK(has(r.violations, "capacity must be positive"));

    CHECK(validate(gen_series_parallel(2)).ok());

    Network bad = single_edge();
    bad.edges[0].transit = -1.0;
    bad.edges[0].cost = -1.0;
    bad.inflow_rate = 0.0;
    bad.deadline = 0.0;
    r = validate(bad);
    CHECK(has(r.violations, "transit must be nonnegative"));
    CHECK(has(r.violations, "cost must be nonnegative"));
    CHECK(has(r.violations, "inflow rate"));
    CHECK(has(r.violations, "deadline"));

    Network dangling = single_edge();
    dangling.edges.push_back({"x", "s", "nowhere", 0.0, 1.0, 0.0});
    CHECK(has(validate(dangling).violations, "not declared"));
  }

  TEST_CASE("validation prunes vertices off every s-t path") {
    Network net = single_edge();
    net.vertices.push_back("dead");
    net.edges.push_back({"d", "s", "dead", 0.0, 1.0, 0.0});
    ValidationReport r = validate(net);
    CHECK(r.ok());
    CHECK(r.prunable == std::vector<std::string>{"dead"});
    Network clean = validated(net);
    CHECK(clean.vertices.size() == 2);
    CHECK(clean.edges.size() == 1);
    CHECK_THROWS_AS(validated(single_edge(0.0, 0.0)), InvalidNetwork);
  }

  TEST_CASE("enumerate paths in cost order") {
    Network eps = gen_two_link_eps(0.3);
    auto paths = enumerate_paths(eps);
    REQUIRE(paths.size() == 2);
    CHECK(eps.edges[paths[0].edges[0]].id == "upper");
    CHECK(eps.edges[paths[1].edges[0]].id == "lower");

    for (int k : {1, 2, 3}) {
      Network sp = gen_series_parallel(k);
      auto p = enumerate_paths(sp);
      CHECK(p.size() == (std::size_t{1} << k));
      CHECK(p.front().cost == 0.0);
      for (std::size_t e : p.front().edges) CHECK(sp.edges[e].id[0] != 'l');
      for (std::size_t i = 1; i < p.size(); ++i) CHECK(p[i - 1].cost <= p[i].cost);
    }

    CHECK(enumerate_paths(single_edge()).size() == 1);
  }

  TEST_CASE("equal costs break ties by edge ids") {
    Network net = single_edge();
    net.edges = {{"b", "s", "t", 0.0, 1.0, 1.0}, {"a", "s", "t", 0.0, 1.0, 1.0}};
    auto p = enumerate_paths(net);
    CHECK(net.edges[p[0].edges[0]].id == "a");
  }

  TEST_CASE("path explosion") {
    CHECK_THROWS_AS(enumerate_paths(gen_series_parallel(4), 8), PathExplosion);
  }

  TEST_CASE("path attributes") {
    Network net = chains({{{"", "", "", 1.0, 2.0, 1.0}, {"", "", "", 2.0, 1.0, 3.0}}}, 1.0, 5.0);
    auto p = enumerate_paths(net);
    REQUIRE(p.size() == 1);
    CHECK(p[0].cost == 4.0);
    CHECK(p[0].transit == 3.0);
    CHECK(p[0].bottleneck == 1.0);
    CHECK(path_label(net, p[0]) == "p0e0>p0e1");
    auto back = path_from_label(net, "p0e0>p0e1");
    REQUIRE(back);
    CHECK(back->edges == p[0].edges);
  }

  TEST_CASE("parallel path detection") {
    CHECK(is_parallel_path(gen_equal_links(4)));
    CHECK_FALSE(is_parallel_path(gen_series_parallel(1)));
    Network series = chains({{{"", "", "", 1.0, 1.0, 0.0}, {"", "", "", 1.0, 1.0, 0.0},
                              {"", "", "", 1.0, 1.0, 0.0}}},
                            1.0, 5.0);
    CHECK(is_parallel_path(series));
    CHECK(is_parallel_links(gen_equal_links(3)));
    CHECK_FALSE(is_parallel_links(series));
  }

  TEST_CASE("reduce to parallel links") {
    Network one = chains({{{"", "", "", 1.0, 2.0, 1.0}, {"", "", "", 2.0, 1.0, 3.0}}}, 1.0, 5.0);
    Network red = reduce_to_parallel_links(one);
    REQUIRE(red.edges.size() == 1);
    CHECK(red.edges[0].transit == 3.0);
    CHECK(red.edges[0].capacity == 1.0);
    CHECK(red.edges[0].cost == 4.0);

    Network links = gen_equal_links(3);
    Network same = reduce_to_parallel_links(links);
    REQUIRE(same.edges.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(same.edges[i].transit == links.edges[i].transit);
      CHECK(same.edges[i].capacity == links.edges[i].capacity);
      CHECK(same.edges[i].cost == links.edges[i].cost);
    }

    CHECK_THROWS_AS(reduce_to_parallel_links(gen_series_parallel(1)), NotParallelPath);
  }

  TEST_CASE("reduction keeps the dynamics of two 2-edge paths") {
    Network net = chains({{{"", "", "", 0.1, 0.6, 0.0}, {"", "", "", 0.2, 0.4, 1.0}},
                          {{"", "", "", 0.0, 0.5, 2.0}, {"", "", "", 0.1, 0.9, 1.0}}},
                         1.0, 2.0);
    Network red = reduce_to_parallel_links(net);
    LayeredFlow reduced = layered_nash_parallel(red);
    LayeredFlow full = layered_nash_parallel(net);
    CHECK(reduced.thetas == full.thetas);
    FlowOverTime sim = simulate(net, full);
    for (std::size_t i = 0; i < full.paths.size(); ++i) {
      if (full.thetas[i + 1] > full.thetas[i]) {
        CHECK(sim.arrival(i)(full.thetas[i + 1]) == doctest::Approx(net.deadline).epsilon(1e-9));
      }
    }
  }

  TEST_CASE("reduction preserves throughput on random parallel path networks") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
      const int paths = 1 + static_cast<int>(rng() % 6);
      std::vector<std::vector<Edge>> parts;
      for (int j = 0; j < paths; ++j) {
        const int len = 1 + static_cast<int>(rng() % 4);
        std::vector<Edge> chain;
        for (int i = 0; i < len; ++i) {
          chain.push_back({"", "", "", 0.3 * U(rng), 0.1 + 0.9 * U(rng), std::ldexp(1.0, j)});
        }
        parts.push_back(chain);
      }
      Network net = chains(parts, 1.0, 2.0);
      Network red = reduce_to_parallel_links(net);
      CHECK(enumerate_paths(red).size() == enumerate_paths(net).size());
      const double on_red = throughput(simulate(red, layered_nash_parallel(red)));
      const double on_full = throughput(simulate(net, layered_nash_parallel(net)));
      CHECK(std::abs(on_red - on_full) <= 1e-6);
    }
  }

  TEST_CASE("instance file round trip") {
    Network net = gen_series_parallel(2);
    Network back = parse_network(dump_network(net, R"({"family":"x"})"));
    CHECK(back.vertices == net.vertices);
    REQUIRE(back.edges.size() == net.edges.size());
    for (std::size_t i = 0; i < net.edges.size(); ++i) {
      CHECK(back.edges[i].id == net.edges[i].id);
      CHECK(back.edges[i].transit == net.edges[i].transit);
      CHECK(back.edges[i].capacity == net.edges[i].capacity);
      CHECK(back.edges[i].cost == net.edges[i].cost);
    }
    CHECK(back.deadline == net.deadline);
  }

  TEST_CASE("instance parser rejects malformed input") {
    CHECK_THROWS_AS(parse_network("{"), ParseError);
    CHECK_THROWS_AS(parse_network(R"({"vertices":["s","t"],"edges":[],"source":"s","sink":"t",
                                      "inflow_rate":1,"deadline":1,"colour":"red"})"),
                    ParseError);
    CHECK_THROWS_AS(parse_network(R"({"vertices":["s","t"],"edges":[{"id":"e","tail":"s",
                                      "head":"t","transit":0,"capacity":1,"cost":0,"x":1}],
                                      "source":"s","sink":"t","inflow_rate":1,"deadline":1})"),
                    ParseError);
    CHECK_THROWS_AS(parse_network(R"({"vertices":["s","t"],"edges":[],"source":"s",
                                      "inflow_rate":1,"deadline":1})"),
                    ParseError);
  }
}
