#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "odlab/coupling.hpp"
#include "odlab/sde.hpp"
#include "odlab/stats.hpp"
#include "test_models.hpp"

using namespace odlab;
namespace tmod = ::odlab::testmodels;

TEST_CASE("step size rule") {
  CHECK(step_size(2.0) == doctest::Approx(1e-3));
  CHECK(step_size(1000.0) == doctest::Approx(5e-4));
  CHECK(step_size(8.0, 0.1, 0.5) == doctest::Approx(0.0625));
}

TEST_CASE("pure OU contraction when the force and noise vanish") {
  const ModelSpec m = tmod::constant_1d(3.0, 0.0);
  const double h = 0.01;
  PhaseState p(wrap({0.2}), Velocity({1.5}));
  const PhaseState q = langevin_step(m, p, {0.0}, h);
  const double c = std::exp(-m.gamma * h);
  CHECK(q.velocity.coords[0] == doctest::Approx(c * 1.5).epsilon(1e-14));
  // x advances by (h/2)(y_in + y_out)
  CHECK(q.position.coords[0] ==
        doctest::Approx(0.2 + 0.5 * h * (1.5 + c * 1.5)).epsilon(1e-13));
}

TEST_CASE("splitting step matches Euler-Maruyama to O(h^2) for constant force") {
  const ModelSpec base = tmod::constant_1d(1.0, 0.7);
  const PhaseState p(wrap({0.4}), Velocity({0.3}));
  auto gap = [&](double h) {
    LangevinStepper split(base, h, Scheme::ExactOuSplitting);
    LangevinStepper em(base, h, Scheme::EulerMaruyama);
    Vec xs = p.position.coords, ys = p.velocity.coords;
    Vec xe = p.position.coords, ye = p.velocity.coords;
    const Vec xi(1, 0.0);
    split.step(xs.data(), ys.data(), xi.data());
    em.step(xe.data(), ye.data(), xi.data());
    return std::abs(xs[0] - xe[0]) + std::abs(ys[0] - ye[0]);
  };
  const double g1 = gap(1e-3), g2 = gap(5e-4);
  CHECK(g1 / g2 > 3.0);
  CHECK(g1 / g2 < 5.0);
}

TEST_CASE("exact constant-force response of the velocity update") {
  // after n steps: Y_n = c^n Y_0 + (1 - c^n) F / gamma + noise accumulation
  for (double gamma : {2.0, 16.0}) {
    const ModelSpec m = tmod::constant_1d(gamma, 1.3);
    const double h = step_size(gamma);
    LangevinStepper stepper(m, h);
    Vec x{0.1}, y{0.8};
    const Vec xi(1, 0.0);  // deterministic part only
    const int n = 500;
    for (int k = 0; k < n; ++k) stepper.step(x.data(), y.data(), xi.data());
    const double cn = std::exp(-gamma * h * n);
    CHECK(y[0] == doctest::Approx(cn * 0.8 + (1 - cn) * 1.3 / gamma).epsilon(1e-13));
  }
}

TEST_CASE("pathwise decomposition: Y minus A matches the closed form") {
  // constant force, shared noise: |Y_n - c^n Y_0 - (1 - c^n) eta / gamma - A_n|
  // stays at rounding level
  for (double gamma : {2.0, 16.0}) {
    const ModelSpec m = tmod::constant_1d(gamma, 1.0);
    const double t = 1.0;
    const double h = step_size(gamma);
    const auto n = static_cast<std::uint64_t>(std::llround(gamma * t / h));
    for (int path = 0; path < 10; ++path) {
      NoisePath noise(1234 + path, 0, 1, h);
      LangevinStepper stepper(m, h);
      const double c = stepper.ou_decay();
      const double s = stepper.ou_noise();
      Vec x{0.3}, y{1.1}, a{0.0}, xi(1);
      for (std::uint64_t k = 0; k < n; ++k) {
        noise.unit_normal(k, xi.data());
        stepper.step(x.data(), y.data(), xi.data());
        a[0] = c * a[0] + s * xi[0];
      }
      const double cn = std::exp(-gamma * gamma * t);
      const double residual =
          std::abs(y[0] - cn * 1.1 - (1 - cn) * 1.0 / gamma - a[0]);
      CHECK(residual <= 1e-10);
    }
  }
}

TEST_CASE("overdamped step basics") {
  const ModelSpec zero = tmod::constant_1d(2.0, 0.0);
  const TorusPoint z = wrap({0.7});
  CHECK(overdamped_step(zero, z, {0.0}, 0.01).coords[0] == doctest::Approx(0.7));

  const ModelSpec drift = tmod::constant_1d(2.0, 0.5);
  CHECK(overdamped_step(drift, z, {0.0}, 0.01).coords[0] ==
        doctest::Approx(0.705));
  CHECK(overdamped_step(drift, wrap({0.999}), {0.0}, 0.01).coords[0] ==
        doctest::Approx(0.004));
  CHECK_THROWS_AS(overdamped_step(drift, z, {0.0}, 0.0), std::invalid_argument);
}

TEST_CASE("trajectory counting contract and determinism") {
  const ModelSpec m = tmod::equilibrium_1d(4.0);
  IntegratorConfig cfg;
  cfg.h = 1e-3;
  cfg.horizon = 1.0;
  cfg.burn_in_fraction = 0.25;
  cfg.stride = 7;
  const PhaseState init(wrap({0.0}), Velocity({0.0}));
  NoisePath noise(5, 0, 1, cfg.h);
  const auto states = simulate_trajectory(m, cfg, init, noise);
  CHECK(states.size() == 107);  // floor(0.75 * 1000 / 7)

  cfg.horizon = 0.0;
  CHECK(simulate_trajectory(m, cfg, init, noise).empty());

  cfg.horizon = 1.0;
  NoisePath noise2(5, 0, 1, cfg.h);
  const auto states2 = simulate_trajectory(m, cfg, init, noise2);
  REQUIRE(states.size() == states2.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    CHECK(states[i].position.coords[0] == states2[i].position.coords[0]);
    CHECK(states[i].velocity.coords[0] == states2[i].velocity.coords[0]);
  }
}

TEST_CASE("trajectory emits exact macroscopic bin sums") {
  const ModelSpec m = tmod::equilibrium_1d(2.0);
  IntegratorConfig cfg;
  cfg.h = 1e-3;
  cfg.horizon = 0.2;
  const PhaseState init(wrap({0.0}), Velocity({0.0}));
  NoisePath noise(8, 0, 1, cfg.h);
  BinnedNoiseSums bins;
  bins.steps_per_bin = 50;
  simulate_trajectory(m, cfg, init, noise, &bins);
  REQUIRE(bins.bins() == 4);
  Vec manual(4, 0.0);
  double buf[1];
  for (std::uint64_t k = 0; k < 200; ++k) {
    noise.increment(k, buf);
    manual[k / 50] += buf[0];
  }
  for (int b = 0; b < 4; ++b) CHECK(bins.bin(b)[0] == manual[b]);

  bins.steps_per_bin = 33;  // does not divide 200
  CHECK_THROWS_AS(simulate_trajectory(m, cfg, init, noise, &bins),
                  std::invalid_argument);
}

TEST_CASE("stiff stability up to gamma = 128") {
  for (double gamma : {32.0, 128.0}) {
    const ModelSpec m = tmod::mixed_1d(gamma);
    const double h = step_size(gamma);
    IntegratorConfig cfg;
    cfg.h = h;
    cfg.horizon = gamma * 1.0;  // physical horizon gamma * t
    cfg.stride = 1000;
    const PhaseState init(wrap({0.1}), Velocity({0.0}));
    NoisePath noise(17, 0, 1, h);
    const auto states = simulate_trajectory(m, cfg, init, noise);
    REQUIRE(!states.empty());
    double worst = 0.0;
    for (const auto& s : states) {
      worst = std::max(worst, std::abs(s.velocity.coords[0]));
    }
    CHECK(worst < 50.0);
  }
}

TEST_CASE("gradient model: stationary velocity second moment is Tr(Sigma^2)") {
  const ModelSpec m = tmod::equilibrium_1d(2.0);
  IntegratorConfig cfg;
  cfg.h = 1e-3;
  cfg.horizon = 2000.0;
  cfg.burn_in_fraction = 0.05;
  cfg.stride = 200;
  const PhaseState init(wrap({0.0}), Velocity({0.0}));
  NoisePath noise(23, 0, 1, cfg.h);
  const auto states = simulate_trajectory(m, cfg, init, noise);
  REQUIRE(states.size() > 5000);
  std::vector<double> y2;
  y2.reserve(states.size());
  for (const auto& s : states) {
    y2.push_back(s.velocity.coords[0] * s.velocity.coords[0]);
  }
  const double est = mean(y2);
  // batch-means standard error over 20 batches
  const std::size_t batch = y2.size() / 20;
  std::vector<double> bm;
  for (int b = 0; b < 20; ++b) {
    bm.push_back(mean(std::span(y2).subspan(b * batch, batch)));
  }
  const double se = std::sqrt(variance(bm) / 20.0);
  CHECK(std::abs(est - m.sigma.trace_sigma_sq()) < 3 * se + 1e-3);
}

TEST_CASE("moment bound holds for the model matrix") {
  for (double gamma : {2.0, 8.0}) {
    for (const ModelSpec& m :
         {tmod::equilibrium_1d(gamma), tmod::constant_1d(gamma, 1.0),
          tmod::mixed_1d(gamma)}) {
      IntegratorConfig cfg;
      cfg.h = step_size(gamma);
      cfg.horizon = 500.0 * gamma * cfg.h * 10;
      cfg.burn_in_fraction = 0.1;
      cfg.stride = 50;
      PhaseState init(wrap({0.2}), Velocity({0.0}));
      NoisePath noise(31, 0, 1, cfg.h);
      const auto states = simulate_trajectory(m, cfg, init, noise);
      std::vector<double> y2;
      for (const auto& s : states) {
        y2.push_back(s.velocity.coords[0] * s.velocity.coords[0]);
      }
      const double est = mean(y2);
      const double se = std::sqrt(variance(y2) / y2.size()) * 3.0;
      const double bound = 2 * m.sigma.trace_sigma_sq() +
                           std::pow(m.force.sup_norm_bound() / gamma, 2);
      CHECK(est <= bound + 3 * se);
    }
  }
}

TEST_CASE("weak consistency: halving h leaves stationary averages unchanged") {
  const ModelSpec m = tmod::mixed_1d(4.0);
  auto second_moment = [&](double h, std::uint64_t seed) {
    IntegratorConfig cfg;
    cfg.h = h;
    cfg.horizon = 4000.0;
    cfg.burn_in_fraction = 0.05;
    cfg.stride = static_cast<std::uint64_t>(std::llround(0.5 / h));
    PhaseState init(wrap({0.0}), Velocity({0.0}));
    NoisePath noise(seed, 0, 1, h);
    const auto states = simulate_trajectory(m, cfg, init, noise);
    std::vector<double> y2;
    for (const auto& s : states) {
      y2.push_back(s.velocity.coords[0] * s.velocity.coords[0]);
    }
    return std::pair(mean(y2), std::sqrt(variance(y2) / y2.size()));
  };
  const auto [m1, se1] = second_moment(1e-3, 41);
  const auto [m2, se2] = second_moment(5e-4, 43);
  CHECK(std::abs(m1 - m2) < 3 * std::hypot(se1, se2));
}

TEST_CASE("divergence is reported with the step index") {
  // a force bound override cannot save an unstable Euler-Maruyama run with a
  // huge step
  const ModelSpec m = tmod::equilibrium_1d(2.0);
  IntegratorConfig cfg;
  cfg.scheme = Scheme::EulerMaruyama;
  cfg.h = 1.5;  // gamma h > 2: the velocity recursion amplifies by -2 per step
  cfg.horizon = 1.5 * 1500;
  const PhaseState init(wrap({0.26}), Velocity({4.0}));
  NoisePath noise(3, 0, 1, cfg.h);
  CHECK_THROWS_WITH_AS(simulate_trajectory(m, cfg, init, noise),
                       doctest::Contains("step"), std::runtime_error);
}

TEST_CASE("default initial state draws x uniform and y from N(0, Sigma^2)") {
  const ModelSpec m = tmod::equilibrium_2d(2.0);
  std::vector<double> y0, y1, x0;
  for (int r = 0; r < 20000; ++r) {
    CounterRng rng(55, r);
    const PhaseState p = default_initial_state(m, rng);
    x0.push_back(p.position.coords[0]);
    y0.push_back(p.velocity.coords[0]);
    y1.push_back(p.velocity.coords[1]);
  }
  const double n = static_cast<double>(y0.size());
  CHECK(std::abs(mean(x0) - 0.5) < 4 * 0.29 / std::sqrt(n));
  CHECK(std::abs(mean(y0)) < 4 / std::sqrt(n));
  CHECK(std::abs(variance(y0) - m.sigma.sigma_sq()(0, 0)) <
        4 * std::sqrt(2.0 / n) * m.sigma.sigma_sq()(0, 0));
  CHECK(std::abs(variance(y1) - m.sigma.sigma_sq()(1, 1)) <
        4 * std::sqrt(2.0 / n) * m.sigma.sigma_sq()(1, 1));
}
