#ifndef ODLAB_EXPERIMENTS_HPP
#define ODLAB_EXPERIMENTS_HPP

#include <string>
#include <vector>

#include "odlab/config.hpp"
#include "odlab/coupling.hpp"
#include "odlab/stats.hpp"

namespace odlab {

struct CheckResult {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double bound = 0.0;
  std::string note;
};

struct ValidationReport {
  std::string title;
  std::vector<CheckResult> checks;
  bool all_pass() const;
};

void print_report(const ValidationReport& rep, bool verbose = true);

struct RateRow {
  double gamma = 0.0;
  int n = 0;
  int repetitions = 0;
  double w1_mean = 0.0, w1_se = 0.0;
  double w1_position_mean = 0.0, w1_velocity_mean = 0.0;
  double bias_floor = 0.0;
  std::vector<double> rep_w1, rep_w1_position, rep_w1_velocity;
};

/// Result table of a gamma sweep plus the fitted log-log rate.
struct RateFit {
  std::vector<RateRow> rows;  // sorted by gamma
  double slope = 0.0, intercept = 0.0;
  double slope_ci_lo = 0.0, slope_ci_hi = 0.0;
  int points_used = 0;
  bool largest_gamma_excluded = false;
  std::vector<std::string> warnings;
};

/// For each gamma: sample mu_gamma and mu_O x g_Sigma, estimate the joint
/// phase-space W1 (raw, with the same-law bias floor reported alongside),
/// then fit log W against log gamma. The largest gamma is dropped from the
/// fit, with a warning, when its signal does not clear the bias floor by two
/// standard errors.
RateFit run_rate_sweep(const ExperimentConfig& cfg);

/// rate_sweep.csv, rate_sweep_reps.csv, rate_fit.csv under `dir`.
/// Returns the file paths.
std::vector<std::string> write_rate_csv(const RateFit& fit, const std::string& dir);

/// Equilibrium validator: position marginal vs the quadrature density,
/// velocity moments vs N(0, Sigma^2), position-velocity independence, and the
/// stationarity residual of the closed-form density.
ValidationReport validate_equilibrium(const ExperimentConfig& cfg);

/// Space-homogeneous validator: velocity mean eta / gamma, Gaussian shape,
/// uniform positions, and the W1 estimate against the analytic value.
ValidationReport validate_homogeneous(const ExperimentConfig& cfg);

struct CouplingDiagnostics {
  std::vector<CouplingSummary> rows;
  double e1_slope = 0.0, e2_slope = 0.0, e3_slope = 0.0;
  ValidationReport report;
};

/// Drive the coupling over the configured gamma list and check the proof's
/// quantitative statements: the e2 bound, the A_t covariance, the W-A
/// independence, and the decay of E dist(X_{gamma t}, W_t).
CouplingDiagnostics run_coupling_diagnostics(const ExperimentConfig& cfg);

std::string write_coupling_csv(const CouplingDiagnostics& diag,
                               const std::string& dir);

/// Solver cross-checks: assignment vs factorial brute force (n <= 6), the
/// circular sorted matching vs the assignment solver, the marginal
/// inequality, and Sinkhorn against the exact value.
ValidationReport ot_selftest(std::uint64_t seed);

/// JSON run manifest: config digest, seed, threads, tool version, file list.
void write_manifest(const std::string& path, const std::string& config_text,
                    std::uint64_t seed, int threads,
                    const std::vector<std::string>& files);

/// Median ground cost between two clouds over a deterministic subsample of
/// pairs; the Sinkhorn epsilon is set as a fraction of this.
double median_ground_cost(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                          int pairs, std::uint64_t seed);

}  // namespace odlab

#endif
