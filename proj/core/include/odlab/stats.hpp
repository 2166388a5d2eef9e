#ifndef ODLAB_STATS_HPP
#define ODLAB_STATS_HPP

#include <cstdint>
#include <span>
#include <vector>

namespace odlab {

double mean(std::span<const double> xs);
double variance(std::span<const double> xs);  // unbiased, n >= 2
double pearson_corr(std::span<const double> a, std::span<const double> b);

/// Lag autocorrelation of a scalar series (biased normalization).
double autocorr(std::span<const double> xs, std::size_t lag);

/// Bootstrap standard error of the sample mean (resampling with replacement,
/// deterministic given the seed).
double bootstrap_se_mean(std::span<const double> xs, int resamples,
                         std::uint64_t seed);

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;      // of log(value) vs log(gamma)
  double slope_stderr = 0.0;   // OLS standard error
  std::vector<double> residuals;
};

/// Ordinary least squares of log(values) against log(gammas).
/// Requires >= 3 points and strictly positive values.
LogLogFit fit_loglog(std::span<const double> gammas,
                     std::span<const double> values);

/// Bootstrap confidence interval for the log-log slope when each gamma has
/// several replicate estimates: resample the replicates per gamma, refit.
/// Returns {lo, hi} percentile bounds.
std::pair<double, double> bootstrap_slope_ci(
    std::span<const double> gammas,
    const std::vector<std::vector<double>>& replicate_values, int resamples,
    std::uint64_t seed, double coverage = 0.95);

}  // namespace odlab

#endif
