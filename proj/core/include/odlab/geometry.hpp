#ifndef ODLAB_GEOMETRY_HPP
#define ODLAB_GEOMETRY_HPP

#include <cstddef>
#include <vector>

namespace odlab {

using Vec = std::vector<double>;

/// Reduce a scalar coordinate into the canonical torus cell [0, 1).
double wrap01(double x);

/// Signed minimal-image displacement a - b on the unit circle, in [-1/2, 1/2].
double min_image_delta(double a, double b);

/// Point on the unit torus T^d = R^d / Z^d, stored canonically in [0,1)^d.
struct TorusPoint {
  Vec coords;

  TorusPoint() = default;
  /// Wraps the raw vector into the canonical cell. Throws on non-finite input.
  explicit TorusPoint(Vec raw);

  std::size_t dim() const { return coords.size(); }
};

struct Velocity {
  Vec coords;

  Velocity() = default;
  explicit Velocity(Vec v);

  std::size_t dim() const { return coords.size(); }
};

struct PhaseState {
  TorusPoint position;
  Velocity velocity;

  PhaseState() = default;
  PhaseState(TorusPoint x, Velocity y);

  std::size_t dim() const { return position.dim(); }
};

/// Wrap a raw real vector onto the torus.
TorusPoint wrap(const Vec& raw);

/// Image of the Euclidean norm on the torus: the length of the componentwise
/// minimal-image difference. Bounded by sqrt(d)/2.
double torus_dist(const TorusPoint& a, const TorusPoint& b);

/// Raw-array variant for hot loops; both arrays must hold d canonical coords.
double torus_dist(const double* a, const double* b, std::size_t d);

double euclidean_dist(const double* a, const double* b, std::size_t d);

/// Product metric r((x,y),(z,w)) = dist(x,z) + |y-w| on T^d x R^d.
double phase_dist(const PhaseState& p, const PhaseState& q);

}  // namespace odlab

#endif
