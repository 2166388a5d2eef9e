// Canned model configurations shared across the test suites.
#ifndef ODLAB_TESTS_TEST_MODELS_HPP
#define ODLAB_TESTS_TEST_MODELS_HPP

#include "odlab/model.hpp"

namespace odlab::testmodels {

// d = 1, U = cos(2 pi x), Sigma = 1: F = 2 pi sin(2 pi x)
inline ModelSpec equilibrium_1d(double gamma) {
  DiffusionMatrix sigma = DiffusionMatrix::identity(1);
  TrigPoly u(1, {{{1}, 1.0, 0.0}});
  return ModelSpec(ForceField::gradient_trig(u, sigma), sigma, gamma);
}

// d = 1, F = eta, Sigma = 1
inline ModelSpec constant_1d(double gamma, double eta = 1.0) {
  return ModelSpec(ForceField::constant({eta}), DiffusionMatrix::identity(1),
                   gamma);
}

// d = 1, F = 2 pi sin(2 pi x) + 1 (tilted potential, non-equilibrium)
inline ModelSpec mixed_1d(double gamma) {
  DiffusionMatrix sigma = DiffusionMatrix::identity(1);
  TrigPoly u(1, {{{1}, 1.0, 0.0}});
  return ModelSpec(ForceField::mixed(u, {1.0}, 0.0, TrigPoly(), sigma), sigma,
                   gamma);
}

// d = 2, U = cos(2 pi x1) + 0.5 sin(2 pi x2), anisotropic Sigma
inline ModelSpec equilibrium_2d(double gamma) {
  DiffusionMatrix sigma = DiffusionMatrix::diagonal({1.0, 0.7});
  TrigPoly u(2, {{{1, 0}, 1.0, 0.0}, {{0, 1}, 0.0, 0.5}});
  return ModelSpec(ForceField::gradient_trig(u, sigma), sigma, gamma);
}

// d = 2, gradient part plus rotational perturbation tau J grad V
inline ModelSpec mixed_rotational_2d(double gamma, double tau = 0.5) {
  DiffusionMatrix sigma = DiffusionMatrix::identity(2);
  TrigPoly u(2, {{{1, 0}, 0.8, 0.0}});
  TrigPoly v(2, {{{1, 1}, 0.0, 1.0}});
  return ModelSpec(ForceField::mixed(u, {0.0, 0.0}, tau, v, sigma), sigma, gamma);
}

}  // namespace odlab::testmodels

#endif
