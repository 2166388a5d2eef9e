#include "odlab/noise.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace odlab {

namespace {

// SplitMix64 finalizer: a strong 64-bit bijective mixer.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t combine(std::uint64_t h, std::uint64_t w) {
  return mix64(h ^ (w + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(combine(mix64(seed), mix64(stream ^ 0xda3e39cb94b95bdbULL))) {}

std::uint64_t CounterRng::raw(std::uint64_t step, std::uint64_t slot) const {
  return combine(combine(key_, step), slot);
}

double CounterRng::uniform(std::uint64_t step, std::uint32_t slot) const {
  // top 53 bits -> [0, 1)
  return static_cast<double>(raw(step, slot) >> 11) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t step, std::uint32_t slot) const {
  // Box-Muller (cosine branch). Two uniforms per draw, u1 in (0, 1].
  const std::uint64_t s = static_cast<std::uint64_t>(slot) * 2;
  const double u1 =
      (static_cast<double>(raw(step, s) >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = static_cast<double>(raw(step, s + 1) >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t CounterRng::derive(std::uint64_t tag) const {
  return combine(key_, mix64(tag ^ 0xd6e8feb86659fd93ULL));
}

NoisePath::NoisePath(std::uint64_t seed, std::uint64_t stream, int dim,
                     double step)
    : rng_(seed, stream), dim_(dim), step_(step), sqrt_step_(std::sqrt(step)) {
  if (dim < 1) throw std::invalid_argument("NoisePath: dim must be >= 1");
  if (!(step > 0.0)) throw std::invalid_argument("NoisePath: step must be > 0");
}

void NoisePath::unit_normal(std::uint64_t k, double* out) const {
  for (int i = 0; i < dim_; ++i) {
    out[i] = rng_.normal(k, static_cast<std::uint32_t>(i));
  }
}

void NoisePath::increment(std::uint64_t k, double* out) const {
  unit_normal(k, out);
  for (int i = 0; i < dim_; ++i) out[i] *= sqrt_step_;
}

}  // namespace odlab
