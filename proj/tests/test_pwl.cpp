#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "dflow/errors.hpp"
#include "dflow/pwl.hpp"

using namespace dflow;

namespace {

MonotonePwl random_monotone(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> step(0.1, 1.0);
  std::uniform_real_distribution<double> slope(0.2, 3.0);
  std::vector<Point> pts{{0.0, step(rng)}};
  const int n = 1 + static_cast<int>(rng() % 4);
  for (int i = 0; i < n; ++i) {
    const double dx = step(rng);
    pts.push_back({pts.back().x + dx, pts.back().y + slope(rng) * dx});
  }
  return MonotonePwl(pts, slope(rng));
}

}  // namespace

TEST_SUITE("pwl") {
  TEST_CASE("step function canonical form merges equal neighbours") {
    StepFunction f({1.0, 2.0, 3.0}, {1.0, 1.0, 2.0, 2.0});
    CHECK(f.breakpoints() == std::vector<double>{2.0});
    CHECK(f.values() == std::vector<double>{1.0, 2.0});
    CHECK(f(0.5) == 1.0);
    CHECK(f(2.0) == 2.0);
  }

  TEST_CASE("canonical form is unique after splitting pieces") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> bps;
      std::vector<double> vals{static_cast<double>(rng() % 3)};
      double t = 0.0;
      for (int i = 0; i < 5; ++i) {
        t += 0.5 + (rng() % 4) * 0.25;
        bps.push_back(t);
        vals.push_back(static_cast<double>(rng() % 3));
      }
      StepFunction f(bps, vals);
      // Split every piece at its midpoint without changing values.
      std::vector<double> bps2;
      std::vector<double> vals2;
      double prev = 0.0;
      for (std::size_t i = 0; i < bps.size(); ++i) {
        bps2.push_back(0.5 * (prev + bps[i]));
        vals2.push_back(vals[i]);
        bps2.push_back(bps[i]);
        vals2.push_back(vals[i]);
        prev = bps[i];
      }
      vals2.push_back(vals.back());
      CHECK(StepFunction(bps2, vals2) == f);
    }
  }

  TEST_CASE("integrate") {
    MonotonePwl id = integrate(StepFunction(1.0));
    CHECK(id(0.0) == 0.0);
    CHECK(id(3.5) == doctest::Approx(3.5));

    MonotonePwl F = integrate(StepFunction::indicator(0.0, 1.0, 2.0));
    CHECK(F(1.0) == doctest::Approx(2.0));
    CHECK(F(3.0) == doctest::Approx(2.0));

    MonotonePwl G = integrate(StepFunction({1.0, 2.0}, {1.0, 3.0, 0.0}));
    CHECK(G(2.0) == doctest::Approx(4.0));

    CHECK_THROWS_AS(integrate(StepFunction(-1.0)), NegativeRate);
  }

  TEST_CASE("integrate and differentiate round trip") {
    StepFunction r({0.5, 1.5, 4.0}, {2.0, 0.0, 1.25, 0.5});
    CHECK(differentiate(integrate(r)) == r);
  }

  TEST_CASE("compose") {
    MonotonePwl f({{0.0, 0.0}, {1.0, 1.0}, {2.0, 3.0}}, 0.5);
    CHECK(compose(MonotonePwl::identity(), f) == f);

    MonotonePwl shifted = compose(MonotonePwl::affine(1.0, 2.0), MonotonePwl::affine(2.0, 0.0));
    for (double x : {0.0, 0.3, 1.7, 5.0}) CHECK(shifted(x) == doctest::Approx(2.0 * x + 2.0));

    // Two 2-segment functions.
    MonotonePwl outer({{0.0, 0.0}, {1.0, 2.0}}, 1.0);
    MonotonePwl inner({{0.0, 0.0}, {2.0, 1.0}}, 3.0);
    MonotonePwl c = compose(outer, inner);
    for (int i = 0; i <= 400; ++i) {
      const double x = i * 0.01;
      CHECK(c(x) == doctest::Approx(outer(inner(x))).epsilon(1e-12));
    }
    CHECK(c.points().size() <= outer.points().size() + inner.points().size());
  }

  TEST_CASE("compose is associative") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 30; ++trial) {
      MonotonePwl a = random_monotone(rng);
      MonotonePwl b = random_monotone(rng);
      MonotonePwl c = random_monotone(rng);
      MonotonePwl left = compose(compose(a, b), c);
      MonotonePwl right = compose(a, compose(b, c));
      for (int i = 0; i <= 100; ++i) {
        const double x = i * 0.05;
        CHECK(std::abs(left(x) - right(x)) <= 1e-12 * std::max(1.0, std::abs(left(x))));
      }
    }
  }

  TEST_CASE("compose keeps the outer vertex under rounding") {
    // inner(1.501) lands within rounding of outer's vertex at 0.501.
    MonotonePwl outer({{0.0, 0.0}, {0.501, 0.501}}, 0.0);
    MonotonePwl inner({{1.0, 0.0}}, 1.0);
    MonotonePwl c = compose(outer, inverse(MonotonePwl({{0.0, 1.0}}, 1.0)));
    CHECK(c.tail_slope() == 0.0);
    CHECK(c(10.0) == doctest::Approx(0.501));
    CHECK(compose(outer, inner)(5.0) == doctest::Approx(0.501));
  }

  TEST_CASE("inverse") {
    MonotonePwl inv = inverse(MonotonePwl::affine(1.0, 5.0));
    CHECK(inv(7.0) == doctest::Approx(2.0));

    MonotonePwl f({{0.0, 0.0}, {1.0, 1.0}}, 3.0);
    MonotonePwl g = inverse(f);
    CHECK(g.right_slope(0.5) == doctest::Approx(1.0));
    CHECK(g.right_slope(2.0) == doctest::Approx(1.0 / 3.0));

    // Flat segment [1, 2] at height 1 inverts to its left end.
    MonotonePwl flat({{0.0, 0.0}, {1.0, 1.0}, {2.0, 1.0}}, 1.0);
    CHECK(inverse(flat)(1.0) == doctest::Approx(1.0));
  }

  TEST_CASE("inverse undoes strictly increasing functions") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 30; ++trial) {
      MonotonePwl f = random_monotone(rng);
      MonotonePwl g = inverse(f);
      for (int i = 0; i <= 100; ++i) {
        const double x = i * 0.04;
        CHECK(std::abs(g(f(x)) - x) <= 1e-12 * std::max(1.0, x));
      }
    }
  }

  TEST_CASE("scalar operations") {
    CHECK(clamp_below(StepFunction(3.0), 1.0) == StepFunction(1.0));

    StepFunction a = StepFunction::indicator(0.0, 1.0, 2.0);
    StepFunction b = StepFunction::indicator(2.0, 3.0, 5.0);
    StepFunction s = add(a, b);
    CHECK(s(0.5) == 2.0);
    CHECK(s(1.5) == 0.0);
    CHECK(s(2.5) == 5.0);

    StepFunction two({1.0}, {0.5, 3.0});
    StepFunction clamped = clamp_below(two, 2.0);
    for (int i = 0; i < 40; ++i) {
      const double t = i * 0.05;
      CHECK(clamped(t) == std::min(two(t), 2.0));
    }

    StepFunction moved = shift(StepFunction::indicator(0.0, 1.0, 1.0), 2.0);
    CHECK(moved(1.9) == 0.0);
    CHECK(moved(2.0) == 1.0);
    CHECK(moved(3.0) == 0.0);
  }

  TEST_CASE("first reach and jumps") {
    MonotonePwl f({{0.0, 0.0}, {1.0, 1.0}, {1.0, 2.0}}, 1.0);
    CHECK(f(1.0) == 1.0);
    CHECK(f.right_limit(1.0) == 2.0);
    CHECK(f.first_reach(1.5) == 1.0);
    CHECK(f.first_reach(3.0) == doctest::Approx(2.0));
    CHECK(MonotonePwl::constant(1.0).first_reach(2.0) == kInf);
  }

  TEST_CASE("csv dump") {
    std::ostringstream os;
    write_csv(os, StepFunction::indicator(0.0, 1.0, 2.0));
    CHECK(os.str().rfind("interval_start,value\n", 0) == 0);
    std::ostringstream os2;
    write_csv(os2, MonotonePwl::affine(2.0, 1.0));
    CHECK(os2.str().rfind("x,y\n", 0) == 0);
  }
}
