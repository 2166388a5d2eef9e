#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "odlab/model.hpp"
#include "odlab/noise.hpp"
#include "odlab/sde.hpp"
#include "test_models.hpp"

using namespace odlab;
namespace tmod = ::odlab::testmodels;

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

PhaseState make_state(Vec x, Vec y) {
  return PhaseState(wrap(x), Velocity(std::move(y)));
}
}  // namespace

TEST_CASE("diffusion matrix caches and validation") {
  DiffusionMatrix id = DiffusionMatrix::identity(2);
  CHECK(id.is_identity());
  CHECK(id.trace_sigma_sq() == doctest::Approx(2.0));
  CHECK(id.det_sigma() == doctest::Approx(1.0));

  DiffusionMatrix dg = DiffusionMatrix::diagonal({2.0, 0.5});
  CHECK_FALSE(dg.is_identity());
  CHECK(dg.sigma_sq()(0, 0) == doctest::Approx(4.0));
  CHECK(dg.sigma_inv()(1, 1) == doctest::Approx(2.0));
  CHECK(dg.trace_sigma_sq() == doctest::Approx(4.25));
  CHECK(dg.det_sigma() == doctest::Approx(1.0));

  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 0.5, -0.5, 1.0;
  CHECK_THROWS_AS(DiffusionMatrix{bad}, std::invalid_argument);
  Eigen::MatrixXd neg(2, 2);
  neg << 1.0, 2.0, 2.0, 1.0;  // eigenvalues 3, -1
  CHECK_THROWS_AS(DiffusionMatrix{neg}, std::invalid_argument);

  double in[2] = {1.0, 2.0}, out[2];
  dg.apply_sigma(in, out);
  CHECK(out[0] == doctest::Approx(2.0));
  CHECK(out[1] == doctest::Approx(1.0));
}

TEST_CASE("trig polynomial derivatives match finite differences") {
  TrigPoly u(2, {{{1, 0}, 0.7, -0.2}, {{2, 1}, -0.3, 0.4}, {{0, 0}, 0.5, 0.0}});
  CounterRng rng(3, 0);
  const double eps = 1e-6;
  for (int k = 0; k < 50; ++k) {
    double x[2] = {rng.uniform(k, 0), rng.uniform(k, 1)};
    double g[2];
    u.gradient(x, g);
    Eigen::MatrixXd h;
    u.hessian(x, h);
    for (int i = 0; i < 2; ++i) {
      double xp[2] = {x[0], x[1]}, xm[2] = {x[0], x[1]};
      xp[i] += eps;
      xm[i] -= eps;
      const double fd = (u.value(xp) - u.value(xm)) / (2 * eps);
      CHECK(g[i] == doctest::Approx(fd).epsilon(1e-6));
      double gp[2], gm[2];
      u.gradient(xp, gp);
      u.gradient(xm, gm);
      for (int j = 0; j < 2; ++j) {
        CHECK(h(i, j) == doctest::Approx((gp[j] - gm[j]) / (2 * eps)).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("trig antiderivative differentiates back to the value") {
  TrigPoly u(1, {{{1}, 1.0, 0.5}, {{3}, -0.2, 0.1}, {{0}, 0.7, 0.0}});
  const double eps = 1e-6;
  for (double x : {0.0, 0.13, 0.5, 0.99}) {
    const double fd =
        (u.antiderivative_1d(x + eps) - u.antiderivative_1d(x - eps)) / (2 * eps);
    CHECK(fd == doctest::Approx(u.value(&x)).epsilon(1e-7));
  }
  CHECK(u.antiderivative_1d(0.0) == 0.0);
}

TEST_CASE("force field sup-norm bound dominates on random points") {
  const auto models = {tmod::equilibrium_1d(2), tmod::mixed_1d(2), tmod::equilibrium_2d(2),
                       tmod::mixed_rotational_2d(2)};
  CounterRng rng(17, 0);
  for (const auto& m : models) {
    const double bound = m.force.sup_norm_bound();
    Vec x(m.d), f(m.d);
    for (int k = 0; k < 10000; ++k) {
      for (int i = 0; i < m.d; ++i) x[i] = rng.uniform(k, i);
      m.force.eval(x.data(), f.data());
      double norm = 0.0;
      for (double v : f) norm += v * v;
      CHECK(std::sqrt(norm) <= bound + 1e-12);
    }
  }
}

TEST_CASE("gradient force equals -Sigma^2 grad U") {
  const ModelSpec m = tmod::equilibrium_2d(3);
  CounterRng rng(19, 0);
  for (int k = 0; k < 100; ++k) {
    Vec x = {rng.uniform(k, 0), rng.uniform(k, 1)};
    Vec f(2), g(2);
    m.force.eval(x.data(), f.data());
    m.force.potential().gradient(x.data(), g.data());
    Eigen::Vector2d ge(g[0], g[1]);
    Eigen::Vector2d expect = -m.sigma.sigma_sq() * ge;
    CHECK(f[0] == doctest::Approx(expect[0]).epsilon(1e-12));
    CHECK(f[1] == doctest::Approx(expect[1]).epsilon(1e-12));
  }
}

TEST_CASE("mixed 1d force is the tilted gradient") {
  const ModelSpec m = tmod::mixed_1d(2);
  for (double x : {0.0, 0.2, 0.61, 0.93}) {
    Vec f(1);
    m.force.eval(&x, f.data());
    CHECK(f[0] == doctest::Approx(kTwoPi * std::sin(kTwoPi * x) + 1.0).epsilon(1e-12));
  }
  CHECK(m.force.sup_norm_bound() == doctest::Approx(kTwoPi + 1.0));
  CHECK_FALSE(m.force.tensorizes());
}

TEST_CASE("rotational perturbation certifies non-equilibrium via the Jacobian") {
  const ModelSpec m = tmod::mixed_rotational_2d(2, 0.5);
  double worst_asym = 0.0;
  Eigen::MatrixXd jac;
  for (int i = 0; i < 16; ++i) {
    for (int j = 0; j < 16; ++j) {
      Vec x = {i / 16.0, j / 16.0};
      m.force.jacobian(x.data(), jac);
      worst_asym = std::max(worst_asym, (jac - jac.transpose()).cwiseAbs().maxCoeff());
    }
  }
  CHECK(worst_asym > 0.1);
  CHECK_FALSE(m.force.tensorizes());

  // jacobian itself matches finite differences
  CounterRng rng(23, 0);
  for (int k = 0; k < 20; ++k) {
    Vec x = {rng.uniform(k, 0), rng.uniform(k, 1)};
    m.force.jacobian(x.data(), jac);
    const double eps = 1e-6;
    for (int j = 0; j < 2; ++j) {
      Vec xp = x, xm = x;
      xp[j] += eps;
      xm[j] -= eps;
      Vec fp(2), fm(2);
      m.force.eval(xp.data(), fp.data());
      m.force.eval(xm.data(), fm.data());
      for (int i = 0; i < 2; ++i) {
        CHECK(jac(i, j) == doctest::Approx((fp[i] - fm[i]) / (2 * eps)).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("tensorization detection from the wave vectors") {
  DiffusionMatrix sigma = DiffusionMatrix::identity(2);
  // U depends only on x2, eta along x1: grad U . eta = 0
  TrigPoly u(2, {{{0, 1}, 1.0, 0.0}});
  auto f_ok = ForceField::mixed(u, {0.5, 0.0}, 0.0, TrigPoly(), sigma);
  CHECK(f_ok.tensorizes());
  auto f_bad = ForceField::mixed(u, {0.0, 0.5}, 0.0, TrigPoly(), sigma);
  CHECK_FALSE(f_bad.tensorizes());
  CHECK(ForceField::constant({1.0, 2.0}).tensorizes());
}

TEST_CASE("generator on closed-form test functions") {
  // f = |y|^2 / 2, d = 1, F = 0, gamma = 2, y = 1: Lf = -gamma y^2 + gamma Tr = 0
  const ModelSpec m0 = tmod::constant_1d(2.0, 0.0);
  TestFunction f;
  f.value = [](const PhaseState& p) {
    return 0.5 * p.velocity.coords[0] * p.velocity.coords[0];
  };
  f.grad_x = [](const PhaseState& p) { return Vec{0.0}; };
  f.grad_y = [](const PhaseState& p) { return Vec{p.velocity.coords[0]}; };
  f.hess_y = [](const PhaseState&) {
    return Eigen::MatrixXd::Identity(1, 1).eval();
  };
  CHECK(apply_generator(m0, f, make_state({0.3}, {1.0})) ==
        doctest::Approx(0.0).epsilon(1e-14));

  TestFunction cst;
  cst.value = [](const PhaseState&) { return 3.0; };
  cst.grad_x = [](const PhaseState&) { return Vec{0.0}; };
  cst.grad_y = [](const PhaseState&) { return Vec{0.0}; };
  cst.hess_y = [](const PhaseState&) { return Eigen::MatrixXd::Zero(1, 1).eval(); };
  CHECK(apply_generator(m0, cst, make_state({0.9}, {-2.0})) == 0.0);

  // f = y, F = sin(2 pi x), gamma = 1, x = 1/4, y = 3: Lf = F - gamma y = -2
  DiffusionMatrix id1 = DiffusionMatrix::identity(1);
  TrigPoly usin(1, {{{1}, 1.0 / kTwoPi, 0.0}});  // -U' = sin(2 pi x)... via U = cos/2pi
  ModelSpec msin(ForceField::gradient_trig(usin, id1), id1, 1.0);
  TestFunction fy;
  fy.value = [](const PhaseState& p) { return p.velocity.coords[0]; };
  fy.grad_x = [](const PhaseState&) { return Vec{0.0}; };
  fy.grad_y = [](const PhaseState&) { return Vec{1.0}; };
  fy.hess_y = [](const PhaseState&) { return Eigen::MatrixXd::Zero(1, 1).eval(); };
  CHECK(apply_generator(msin, fy, make_state({0.25}, {3.0})) ==
        doctest::Approx(-2.0).epsilon(1e-12));

  TestFunction missing;
  missing.value = fy.value;
  CHECK_THROWS_AS(apply_generator(msin, missing, make_state({0.0}, {0.0})),
                  std::invalid_argument);
}

TEST_CASE("generator agrees with a finite-difference application") {
  const ModelSpec m = tmod::equilibrium_2d(3.0);
  // smooth test function: trig in x, gaussian-polynomial in y
  auto fval = [](const PhaseState& p) {
    const double x0 = p.position.coords[0], x1 = p.position.coords[1];
    const double y0 = p.velocity.coords[0], y1 = p.velocity.coords[1];
    return std::sin(kTwoPi * x0) * std::cos(kTwoPi * x1) * (1.0 + y0) +
           0.3 * y0 * y1 + 0.1 * y1 * y1 * std::cos(kTwoPi * x0);
  };
  TestFunction exact;
  exact.value = fval;
  const double eps = 1e-5;
  auto perturbed = [&](const PhaseState& p, int coord, bool pos, double e) {
    PhaseState q = p;
    if (pos) {
      q.position.coords[coord] += e;
    } else {
      q.velocity.coords[coord] += e;
    }
    return q;
  };
  exact.grad_x = [&](const PhaseState& p) {
    Vec g(2);
    for (int i = 0; i < 2; ++i) {
      g[i] = (fval(perturbed(p, i, true, eps)) - fval(perturbed(p, i, true, -eps))) /
             (2 * eps);
    }
    return g;
  };
  exact.grad_y = [&](const PhaseState& p) {
    Vec g(2);
    for (int i = 0; i < 2; ++i) {
      g[i] = (fval(perturbed(p, i, false, eps)) -
              fval(perturbed(p, i, false, -eps))) /
             (2 * eps);
    }
    return g;
  };
  exact.hess_y = [&](const PhaseState& p) {
    // wider step: the second difference amplifies rounding by 1/eps^2
    const double he = 1e-4;
    Eigen::MatrixXd h(2, 2);
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        PhaseState pp = perturbed(perturbed(p, i, false, he), j, false, he);
        PhaseState pm = perturbed(perturbed(p, i, false, he), j, false, -he);
        PhaseState mp = perturbed(perturbed(p, i, false, -he), j, false, he);
        PhaseState mm = perturbed(perturbed(p, i, false, -he), j, false, -he);
        h(i, j) = (fval(pp) - fval(pm) - fval(mp) + fval(mm)) / (4 * he * he);
      }
    }
    return h;
  };

  // reference: analytic derivatives
  TestFunction ana = exact;
  ana.grad_x = [](const PhaseState& p) {
    const double x0 = p.position.coords[0], x1 = p.position.coords[1];
    const double y0 = p.velocity.coords[0], y1 = p.velocity.coords[1];
    return Vec{kTwoPi * std::cos(kTwoPi * x0) * std::cos(kTwoPi * x1) * (1.0 + y0) -
                   0.1 * kTwoPi * y1 * y1 * std::sin(kTwoPi * x0),
               -kTwoPi * std::sin(kTwoPi * x0) * std::sin(kTwoPi * x1) * (1.0 + y0)};
  };
  ana.grad_y = [](const PhaseState& p) {
    const double x0 = p.position.coords[0], x1 = p.position.coords[1];
    const double y1 = p.velocity.coords[1];
    return Vec{std::sin(kTwoPi * x0) * std::cos(kTwoPi * x1) + 0.3 * y1,
               0.3 * p.velocity.coords[0] + 0.2 * y1 * std::cos(kTwoPi * x0)};
  };
  ana.hess_y = [](const PhaseState& p) {
    Eigen::MatrixXd h(2, 2);
    h << 0.0, 0.3, 0.3, 0.2 * std::cos(kTwoPi * p.position.coords[0]);
    return h;
  };

  CounterRng rng(29, 0);
  for (int k = 0; k < 40; ++k) {
    PhaseState p = make_state({rng.uniform(k, 0), rng.uniform(k, 1)},
                              {2 * rng.normal(k, 2), 2 * rng.normal(k, 3)});
    const double lf_fd = apply_generator(m, exact, p);
    const double lf = apply_generator(m, ana, p);
    CHECK(lf_fd == doctest::Approx(lf).epsilon(1e-6));
  }
}

TEST_CASE("stationarity residual vanishes exactly on the closed forms") {
  CounterRng rng(31, 0);

  // equilibrium: H = U + |Sigma^{-1} y|^2 / 2 with F = -Sigma^2 grad U
  const ModelSpec meq = tmod::equilibrium_2d(2.5);
  const EquilibriumDensity eq = equilibrium_density(meq, 64);
  for (int k = 0; k < 50; ++k) {
    PhaseState p = make_state({rng.uniform(k, 0), rng.uniform(k, 1)},
                              {3 * rng.normal(k, 2), 3 * rng.normal(k, 3)});
    CHECK(std::abs(stationarity_residual(meq, eq.candidate, p)) < 1e-10);
  }

  // space-homogeneous: H = |Sigma^{-1}(y - eta/gamma)|^2 / 2 with F = eta
  const ModelSpec mh = tmod::constant_1d(3.0, 1.5);
  const EquilibriumDensity hh = equilibrium_density(mh, 64);
  for (int k = 0; k < 50; ++k) {
    PhaseState p = make_state({rng.uniform(k, 4)}, {3 * rng.normal(k, 5)});
    CHECK(std::abs(stationarity_residual(mh, hh.candidate, p)) < 1e-10);
  }

  // wrong candidate: H = U + |y|^2/2 under anisotropic Sigma is not stationary
  const ModelSpec bad = tmod::equilibrium_2d(2.0);
  DensityCandidate wrong = eq.candidate;
  wrong.h = [&](const PhaseState& p) {
    double q = 0.0;
    for (double y : p.velocity.coords) q += y * y;
    return bad.force.potential().value(p.position.coords.data()) + 0.5 * q;
  };
  wrong.grad_y = [](const PhaseState& p) { return p.velocity.coords; };
  wrong.hess_y = [](const PhaseState&) {
    return Eigen::MatrixXd::Identity(2, 2).eval();
  };
  const PhaseState probe = make_state({0.2, 0.6}, {1.0, -0.5});
  CHECK(std::abs(stationarity_residual(bad, wrong, probe)) > 0.05);
}

TEST_CASE("density candidate evaluators pass the finite-difference cross-check") {
  const ModelSpec m = tmod::equilibrium_2d(2.0);
  const EquilibriumDensity eq = equilibrium_density(m, 64);
  const PhaseState p = make_state({0.3, 0.8}, {0.7, -1.1});
  CHECK(eq.candidate.fd_consistency(p) < 1e-5);
}

TEST_CASE("residual on a 32^d lattice stays below 1e-8") {
  for (const ModelSpec& m : {tmod::equilibrium_1d(4.0), tmod::equilibrium_2d(3.0)}) {
    const EquilibriumDensity eq = equilibrium_density(m, m.d == 1 ? 512 : 64);
    const int pn = m.d == 1 ? 32 : 8;
    const int vn = m.d == 1 ? 32 : 8;
    const double vspan = 4.0;
    double worst = 0.0;
    const long npos = static_cast<long>(std::pow(pn, m.d));
    const long nvel = static_cast<long>(std::pow(vn, m.d));
    for (long ip = 0; ip < npos; ++ip) {
      PhaseState p;
      p.position.coords.resize(m.d);
      p.velocity.coords.resize(m.d);
      long rem = ip;
      for (int i = 0; i < m.d; ++i) {
        p.position.coords[i] = double(rem % pn) / pn;
        rem /= pn;
      }
      for (long iv = 0; iv < nvel; ++iv) {
        long rv = iv;
        for (int i = 0; i < m.d; ++i) {
          p.velocity.coords[i] = -vspan + 2 * vspan * double(rv % vn) / (vn - 1);
          rv /= vn;
        }
        worst = std::max(worst, std::abs(stationarity_residual(m, eq.candidate, p)));
      }
    }
    CHECK(worst < 1e-8);
  }
}

TEST_CASE("equilibrium normalization against the quadrature oracle") {
  // U = 0: Z = (2 pi)^{d/2} det Sigma
  const ModelSpec flat = tmod::constant_1d(2.0, 0.0);
  CHECK(equilibrium_density(flat, 128).normalization ==
        doctest::Approx(std::sqrt(kTwoPi)).epsilon(1e-12));

  ModelSpec flat2(ForceField::constant({0.0, 0.0}),
                  DiffusionMatrix::diagonal({2.0, 0.5}), 2.0);
  CHECK(equilibrium_density(flat2, 16).normalization ==
        doctest::Approx(kTwoPi * 1.0).epsilon(1e-12));

  // U = cos(2 pi x): int e^{-U} = I_0(1); oracle = 1e6-node trapezoid
  const ModelSpec meq = tmod::equilibrium_1d(4.0);
  double oracle = 0.0;
  const int nodes = 1000000;
  for (int i = 0; i < nodes; ++i) {
    oracle += std::exp(-std::cos(kTwoPi * i / nodes));
  }
  oracle /= nodes;
  CHECK(oracle == doctest::Approx(1.2660658777520084).epsilon(1e-10));
  const double z = equilibrium_density(meq, 4096).normalization;
  CHECK(z / std::sqrt(kTwoPi) == doctest::Approx(oracle).epsilon(1e-10));

  // constant force: the Gaussian factor is centered at eta / gamma
  const ModelSpec mh = tmod::constant_1d(4.0, 1.0);
  const EquilibriumDensity hh = equilibrium_density(mh, 64);
  const PhaseState at_mean = make_state({0.4}, {0.25});
  CHECK(hh.candidate.grad_y(at_mean)[0] == doctest::Approx(0.0).epsilon(1e-14));

  CHECK_THROWS_AS(equilibrium_density(tmod::mixed_1d(2.0)), std::invalid_argument);
  CHECK_THROWS_AS(equilibrium_density(tmod::mixed_rotational_2d(2.0), 32),
                  std::invalid_argument);
}

TEST_CASE("overdamped 1d density: gradient force gives Gibbs") {
  const ModelSpec m = tmod::equilibrium_1d(4.0);
  const TabulatedDensity1d rho = overdamped_density_1d(m, 2048);
  // reference e^{-U}/Z via dense quadrature
  const int nodes = 200000;
  double z = 0.0;
  for (int i = 0; i < nodes; ++i) z += std::exp(-std::cos(kTwoPi * i / nodes));
  z /= nodes;
  double worst = 0.0;
  for (int i = 0; i <= 2048; ++i) {
    const double x = rho.grid[i];
    worst = std::max(worst,
                     std::abs(rho.pdf[i] - std::exp(-std::cos(kTwoPi * x)) / z));
  }
  CHECK(worst < 1e-8);
  CHECK(rho.flux_residual < 1e-8);

  // integrates to one
  double mass = 0.0;
  for (int i = 0; i < 2048; ++i) {
    mass += 0.5 * (rho.pdf[i] + rho.pdf[i + 1]) / 2048;
  }
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("overdamped 1d density: constant force gives the uniform law") {
  const ModelSpec m = tmod::constant_1d(2.0, 1.0);
  const TabulatedDensity1d rho = overdamped_density_1d(m, 512);
  for (int i = 0; i <= 512; ++i) {
    CHECK(rho.pdf[i] == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("overdamped 1d density: tilted force matches an EM histogram oracle") {
  const ModelSpec m = tmod::mixed_1d(4.0);
  const TabulatedDensity1d rho = overdamped_density_1d(m, 2048);

  // the tilted density is neither uniform nor Gibbs
  double dev_uniform = 0.0, dev_gibbs = 0.0;
  const int nodes = 2048;
  double zg = 0.0;
  for (int i = 0; i < nodes; ++i) zg += std::exp(-std::cos(kTwoPi * i / nodes));
  zg /= nodes;
  for (int i = 0; i <= nodes; ++i) {
    dev_uniform = std::max(dev_uniform, std::abs(rho.pdf[i] - 1.0));
    dev_gibbs = std::max(
        dev_gibbs,
        std::abs(rho.pdf[i] - std::exp(-std::cos(kTwoPi * rho.grid[i])) / zg));
  }
  CHECK(dev_uniform > 0.2);
  CHECK(dev_gibbs > 0.05);

  // independent oracle: long-run Euler-Maruyama of the overdamped equation
  const double h = 2e-3;
  NoisePath noise(99, 0, 1, h);
  double z = 0.37;
  Vec db(1), scratch(1);
  const int burn = 20000, n = 10000, stride = 50;
  std::uint64_t k = 0;
  for (int s = 0; s < burn; ++s, ++k) {
    noise.increment(k, db.data());
    overdamped_step_raw(m, &z, db.data(), h, scratch.data());
  }
  std::vector<double> samples(n);
  for (int s = 0; s < n; ++s) {
    for (int j = 0; j < stride; ++j, ++k) {
      noise.increment(k, db.data());
      overdamped_step_raw(m, &z, db.data(), h, scratch.data());
    }
    samples[s] = z;
  }
  // 1d circular W1 between the EM cloud and the density's quantile cloud
  std::vector<double> qc = rho.quantile_cloud(n);
  std::sort(samples.begin(), samples.end());
  double best = 1e300;
  for (int off = 0; off < n; ++off) {
    double tot = 0.0;
    for (int i = 0; i < n; ++i) {
      tot += std::abs(min_image_delta(samples[i], qc[(i + off) % n]));
      if (tot >= best) break;
    }
    best = std::min(best, tot);
  }
  CHECK(best / n < 0.02);
}

TEST_CASE("overdamped 1d density rejects coarse grids") {
  const ModelSpec m = tmod::equilibrium_1d(2.0);
  CHECK_THROWS_AS(overdamped_density_1d(m, 16), std::runtime_error);
  CHECK_THROWS_AS(overdamped_density_1d(m, 100, 1e-6), std::runtime_error);
  CHECK_THROWS_AS(overdamped_density_1d(m, 15), std::invalid_argument);
  CHECK_THROWS_AS(overdamped_density_1d(tmod::equilibrium_2d(2.0), 64),
                  std::invalid_argument);
}

TEST_CASE("quantile cloud inverts the cdf") {
  const ModelSpec m = tmod::equilibrium_1d(4.0);
  const TabulatedDensity1d rho = overdamped_density_1d(m, 1024);
  const auto cloud = rho.quantile_cloud(1000);
  CHECK(cloud.size() == 1000);
  for (double x : cloud) {
    CHECK(x >= 0.0);
    CHECK(x <= 1.0);
  }
  // quantile of the cdf value at a grid point recovers the point
  for (int i = 100; i < 1024; i += 200) {
    CHECK(rho.quantile(rho.cdf[i]) == doctest::Approx(rho.grid[i]).epsilon(1e-6));
  }
}
