#include <doctest.h>

#include <cmath>

#include <json.hpp>

#include "dflow/errors.hpp"
#include "dflow/instances.hpp"
#include "dflow/network.hpp"
#include "dflow/poa.hpp"

using namespace dflow;

TEST_SUITE("instances") {
  TEST_CASE("counter-based generator") {
    CounterRng a(5);
    CounterRng b(5);
    for (int i = 0; i < 10; ++i) CHECK(a.next() == b.next());
    CounterRng c(5);
    CHECK(c.at(3) == CounterRng(5).at(3));
    // SplitMix64 of seed 0, first draw.
    CHECK(CounterRng(0).at(0) == 0xE220A8397B1DCDAFull);
    for (int i = 0; i < 100; ++i) {
      const double u = a.uniform();
      CHECK(u >= 0.0);
      CHECK(u < 1.0);
    }
  }

  TEST_CASE("series-parallel family") {
    Network one = gen_series_parallel(1);
    CHECK(one.edges.size() == 3);
    CHECK(one.deadline == 3.0);
    Network two = gen_series_parallel(2);
    CHECK(enumerate_paths(two).size() == 4);
    CHECK(two.deadline == 4.0);
    CHECK(two.edges[1].cost == 2.0);
    CHECK(two.edges[4].cost == 1.0);
    CHECK_THROWS_AS(gen_series_parallel(0), DomainError);
  }

  TEST_CASE("equal-links family") {
    Network one = gen_equal_links(1);
    REQUIRE(one.edges.size() == 1);
    CHECK(one.edges[0].capacity == 1.0);
    CHECK(analyze(gen_equal_links(3)).t_poa == doctest::Approx(27.0 / 19.0));
    CHECK(analyze(gen_equal_links(10)).t_poa == doctest::Approx(1.0 / (1.0 - std::pow(0.9, 10))));
  }

  TEST_CASE("two-link family") {
    CHECK(analyze(gen_two_link_eps(0.5)).t_poa == doctest::Approx(1.5));
    CHECK(analyze(gen_two_link_eps(0.001)).t_poa == doctest::Approx(1.999));
    CHECK_THROWS_AS(gen_two_link_eps(1.0), DomainError);
    CHECK_THROWS_AS(gen_two_link_eps(0.0), DomainError);
  }

  TEST_CASE("random instances are reproducible and valid") {
    Network a = gen_random_parallel(5, 17);
    Network b = gen_random_parallel(5, 17);
    REQUIRE(a.edges.size() == b.edges.size());
    for (std::size_t i = 0; i < a.edges.size(); ++i) {
      CHECK(a.edges[i].transit == b.edges[i].transit);
      CHECK(a.edges[i].capacity == b.edges[i].capacity);
    }
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      Network p = gen_random_parallel(5, seed);
      CHECK(validate(p).ok());
      for (const Edge& e : p.edges) {
        CHECK(e.capacity > 0.0);
        CHECK(e.capacity <= p.inflow_rate);
        CHECK(e.transit < p.deadline);
      }
      Network d = gen_random_dag(6, 9, seed);
      CHECK(validate(d).ok());
      CHECK(d.edges.size() == 9);
      CHECK_FALSE(enumerate_paths(d).empty());
    }
    CHECK_THROWS_AS(gen_random_dag(6, 4, 1), DomainError);
  }

  TEST_CASE("random options") {
    RandomParallelOptions o;
    o.zero_transit = true;
    o.capacity_within_rate = true;
    o.inflow_rate = 2.0;
    Network net = gen_random_parallel(6, 3, o);
    double total = 0.0;
    for (const Edge& e : net.edges) {
      CHECK(e.transit == 0.0);
      total += e.capacity;
    }
    CHECK(total <= 2.0 + 1e-12);
  }

  TEST_CASE("family specs") {
    FamilySpec spec{"series_parallel_k", {{"k", 2}}, 0};
    CHECK(generate(spec).edges.size() == 6);
    auto meta = nlohmann::json::parse(meta_json(spec));
    CHECK(meta["family"] == "series_parallel_k");
    CHECK(meta["params"]["k"] == 2);

    CHECK_THROWS_AS(generate({"no_such_family", {}, 0}), DomainError);
    CHECK_THROWS_AS(generate({"equal_links_k", {}, 0}), DomainError);
    FamilySpec rp{"random_parallel", {{"k", 4}, {"D", 2.0}}, 9};
    CHECK(generate(rp).deadline == 2.0);
  }
}
