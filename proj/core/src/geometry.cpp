#include "odlab/geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace odlab {

double wrap01(double x) {
  double y = x - std::floor(x);
  // floor rounding can land exactly on 1.0 for tiny negative inputs
  if (y >= 1.0) y = 0.0;
  return y;
}

double min_image_delta(double a, double b) {
  double d = a - b;
  d -= std::round(d);
  return d;
}

namespace {

void check_finite(const Vec& v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument(std::string(what) + ": non-finite entry");
    }
  }
}

void check_same_dim(std::size_t a, std::size_t b) {
  if (a != b) {
    throw std::invalid_argument("dimension mismatch: " + std::to_string(a) +
                                " vs " + std::to_string(b));
  }
}

}  // namespace

TorusPoint::TorusPoint(Vec raw) : coords(std::move(raw)) {
  check_finite(coords, "TorusPoint");
  for (double& c : coords) c = wrap01(c);
}

Velocity::Velocity(Vec v) : coords(std::move(v)) {
  check_finite(coords, "Velocity");
}

PhaseState::PhaseState(TorusPoint x, Velocity y)
    : position(std::move(x)), velocity(std::move(y)) {
  check_same_dim(position.dim(), velocity.dim());
}

TorusPoint wrap(const Vec& raw) { return TorusPoint(raw); }

double torus_dist(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    double di = min_image_delta(a[i], b[i]);
    s += di * di;
  }
  return std::sqrt(s);
}

double torus_dist(const TorusPoint& a, const TorusPoint& b) {
  check_same_dim(a.dim(), b.dim());
  return torus_dist(a.coords.data(), b.coords.data(), a.dim());
}

double euclidean_dist(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    double di = a[i] - b[i];
    s += di * di;
  }
  return std::sqrt(s);
}

double phase_dist(const PhaseState& p, const PhaseState& q) {
  check_same_dim(p.dim(), q.dim());
  check_same_dim(p.velocity.dim(), q.velocity.dim());
  return torus_dist(p.position, q.position) +
         euclidean_dist(p.velocity.coords.data(), q.velocity.coords.data(),
                        p.velocity.dim());
}

}  // namespace odlab
