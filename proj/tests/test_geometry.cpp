#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "odlab/geometry.hpp"
#include "odlab/noise.hpp"

using namespace odlab;

TEST_CASE("wrap reduces into [0,1)") {
  CHECK(wrap({1.25}).coords[0] == doctest::Approx(0.25));
  CHECK(wrap({-0.25}).coords[0] == doctest::Approx(0.75));
  CHECK(wrap({0.0}).coords[0] == 0.0);
  CHECK(wrap({17.0}).coords[0] == 0.0);
  // tiny negative values must not round up to exactly 1.0
  const double w = wrap01(-1e-18);
  CHECK(w >= 0.0);
  CHECK(w < 1.0);
  CHECK_THROWS_AS(wrap({std::nan("")}), std::invalid_argument);
  CHECK_THROWS_AS(wrap({1.0 / 0.0}), std::invalid_argument);
}

TEST_CASE("torus distance wrap-around") {
  CHECK(torus_dist(wrap({0.9}), wrap({0.1})) == doctest::Approx(0.2));
  const TorusPoint a = wrap({0.37});
  CHECK(torus_dist(a, a) == 0.0);
  CHECK(torus_dist(wrap({0.0, 0.0}), wrap({0.5, 0.5})) ==
        doctest::Approx(std::sqrt(0.5)));
  CHECK_THROWS_AS(torus_dist(wrap({0.1}), wrap({0.1, 0.2})),
                  std::invalid_argument);
}

TEST_CASE("torus distance bounded by sqrt(d)/2") {
  CounterRng rng(11, 0);
  for (int d = 1; d <= 4; ++d) {
    for (int k = 0; k < 200; ++k) {
      Vec a(d), b(d);
      for (int i = 0; i < d; ++i) {
        a[i] = rng.uniform(k, 2 * i);
        b[i] = rng.uniform(k, 2 * i + 1);
      }
      CHECK(torus_dist(wrap(a), wrap(b)) <= std::sqrt(d) / 2 + 1e-15);
    }
  }
}

TEST_CASE("phase distance is the product metric") {
  PhaseState p(wrap({0.9}), Velocity({1.0}));
  PhaseState q(wrap({0.1}), Velocity({0.0}));
  CHECK(phase_dist(p, q) == doctest::Approx(1.2));
  CHECK(phase_dist(p, p) == 0.0);
  PhaseState r(wrap({0.9}), Velocity({2.0}));
  PhaseState s(wrap({0.9}), Velocity({-1.0}));
  CHECK(phase_dist(r, s) == doctest::Approx(3.0));
}

TEST_CASE("metric axioms on random triples") {
  CounterRng rng(21, 0);
  for (int k = 0; k < 500; ++k) {
    const int d = 1 + k % 3;
    Vec av(d), bv(d), cv(d);
    for (int i = 0; i < d; ++i) {
      av[i] = 4.0 * rng.uniform(k, 3 * i) - 2.0;
      bv[i] = 4.0 * rng.uniform(k, 3 * i + 1) - 2.0;
      cv[i] = 4.0 * rng.uniform(k, 3 * i + 2) - 2.0;
    }
    const TorusPoint a = wrap(av), b = wrap(bv), c = wrap(cv);
    const double ab = torus_dist(a, b);
    const double ba = torus_dist(b, a);
    const double ac = torus_dist(a, c);
    const double cb = torus_dist(c, b);
    CHECK(ab >= 0.0);
    CHECK(ab == ba);
    CHECK(ab <= ac + cb + 1e-12);
  }
}

TEST_CASE("distance invariant under integer shifts of raw input") {
  CounterRng rng(31, 0);
  for (int k = 0; k < 200; ++k) {
    const double x = rng.uniform(k, 0), y = rng.uniform(k, 1);
    const int sx = static_cast<int>(rng.uniform(k, 2) * 7) - 3;
    const int sy = static_cast<int>(rng.uniform(k, 3) * 7) - 3;
    const double base = torus_dist(wrap({x}), wrap({y}));
    CHECK(torus_dist(wrap({x + sx}), wrap({y + sy})) == doctest::Approx(base));
  }
}

TEST_CASE("phase distance dominates the position marginal distance") {
  CounterRng rng(41, 0);
  for (int k = 0; k < 200; ++k) {
    const int d = 1 + k % 2;
    Vec ax(d), bx(d), ay(d), by(d);
    for (int i = 0; i < d; ++i) {
      ax[i] = rng.uniform(k, 4 * i);
      bx[i] = rng.uniform(k, 4 * i + 1);
      ay[i] = rng.normal(k, 4 * i + 2);
      by[i] = rng.normal(k, 4 * i + 3);
    }
    PhaseState p(wrap(ax), Velocity(ay));
    PhaseState q(wrap(bx), Velocity(by));
    CHECK(phase_dist(p, q) >= torus_dist(p.position, q.position) - 1e-15);
  }
}
