#ifndef ODLAB_NOISE_HPP
#define ODLAB_NOISE_HPP

#include <cstdint>
#include <vector>

namespace odlab {

/// Stateless counter-based generator. Every draw is a pure function of
/// (seed, stream, step, slot), so replicas can run in parallel with no
/// stream coordination and any draw can be replayed in a second pass.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  /// Uniform double in [0, 1).
  double uniform(std::uint64_t step, std::uint32_t slot) const;
  /// Standard normal via Box-Muller; deterministic in (step, slot).
  double normal(std::uint64_t step, std::uint32_t slot) const;

  /// Derive a decorrelated child seed (for sub-streams such as bootstrap,
  /// independent velocity draws, pilot runs).
  std::uint64_t derive(std::uint64_t tag) const;

  std::uint64_t raw(std::uint64_t step, std::uint64_t slot) const;

 private:
  std::uint64_t key_;
};

/// Brownian increments dB_k ~ N(0, h I_d), reproducible from (seed, stream).
/// Increments are generated on demand; nothing is stored.
class NoisePath {
 public:
  NoisePath(std::uint64_t seed, std::uint64_t stream, int dim, double step);

  int dim() const { return dim_; }
  double step() const { return step_; }

  /// Unit normals xi_k (the increment is sqrt(h) xi_k). out[dim].
  void unit_normal(std::uint64_t k, double* out) const;
  /// dB_k = sqrt(h) xi_k. out[dim].
  void increment(std::uint64_t k, double* out) const;

  const CounterRng& rng() const { return rng_; }

 private:
  CounterRng rng_;
  int dim_;
  double step_;
  double sqrt_step_;
};

/// Partial sums of Brownian increments over consecutive bins of
/// `steps_per_bin` microsteps. Bin sums equal the literal sum of their
/// constituent increments.
struct BinnedNoiseSums {
  int dim = 0;
  std::uint64_t steps_per_bin = 0;
  std::vector<double> sums;  // row-major bins x dim

  std::uint64_t bins() const {
    return dim ? sums.size() / static_cast<std::uint64_t>(dim) : 0;
  }
  double* bin(std::uint64_t b) { return sums.data() + b * dim; }
  const double* bin(std::uint64_t b) const { return sums.data() + b * dim; }
};

}  // namespace odlab

#endif
