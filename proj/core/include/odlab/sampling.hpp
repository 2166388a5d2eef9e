#ifndef ODLAB_SAMPLING_HPP
#define ODLAB_SAMPLING_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "odlab/model.hpp"
#include "odlab/ot.hpp"
#include "odlab/sde.hpp"

namespace odlab {

enum class Provenance { ThinnedTrajectory, ReplicaTerminal };

struct SamplerConfig {
  double h0 = 1e-3;             // micro step target (physical time, kinetic)
  double gamma_step_cap = 0.5;  // h = min(h0, cap / gamma)
  double burn_in_macro = 10.0;  // discarded macroscopic time
  double target_autocorr = 0.2; // stride adaptation target, lag-1
  Provenance provenance = Provenance::ThinnedTrajectory;
  double replica_horizon_macro = 10.0;  // per-replica run (ReplicaTerminal)
  int pilot_states = 256;
  double overdamped_step = 1e-2;  // macro step cap for the overdamped sampler
  Scheme scheme = Scheme::ExactOuSplitting;
  int threads = 1;
};

struct StationarySample {
  EmpiricalMeasure measure;
  Provenance provenance;
  double ess_estimate = 0.0;
  double stride_time = 0.0;   // time between retained states (physical for
                              // mu_gamma, macroscopic for mu_O positions)
  double burn_in_time = 0.0;
};

/// Empirical sample of the Langevin stationary law mu_gamma on phase space.
/// Default: one long trajectory, burn-in discarded, stride adapted until the
/// lag-1 autocorrelation of every embedded observable (sin / cos of each
/// position coordinate, each velocity coordinate) is below the target.
/// ReplicaTerminal instead returns terminal states of n independent replicas.
/// Deterministic given (model, cfg, seed, n).
StationarySample sample_mu_gamma(const ModelSpec& m, int n,
                                 const SamplerConfig& cfg, std::uint64_t seed);

/// Empirical sample of mu_O x g_Sigma: positions from a long run of the
/// overdamped equation, velocities drawn independently from N(0, Sigma^2) on
/// a decorrelated sub-stream.
StationarySample sample_mu_o_tensor_gauss(const ModelSpec& m, int n,
                                          const SamplerConfig& cfg,
                                          std::uint64_t seed);

struct IndependenceReport {
  /// corr(embedded position component, velocity component); rows are
  /// sin(2 pi x_i), cos(2 pi x_i) interleaved, columns velocity coordinates.
  Eigen::MatrixXd stats;
  double threshold = 0.0;  // 3 / sqrt(n)
  double max_abs_stat = 0.0;
  bool any_exceed = false;
  int n = 0;
};

/// Componentwise position-velocity correlation diagnostic; positions enter
/// through their sin / cos embedding to respect periodicity.
IndependenceReport independence_diagnostic(const StationarySample& s);

// Empirical-measure statistics used by the validators.
double mean_squared_speed(const EmpiricalMeasure& phase);  // E |Y|^2
Eigen::VectorXd velocity_mean(const EmpiricalMeasure& phase);
Eigen::MatrixXd velocity_cov(const EmpiricalMeasure& phase);

/// Persist a sample as CSV with the column order: replica, coordinate, value.
void write_sample_csv(const std::string& path, const EmpiricalMeasure& m);
/// Raw row-major doubles (n * width values), no header.
void write_sample_binary(const std::string& path, const EmpiricalMeasure& m);

}  // namespace odlab

#endif
