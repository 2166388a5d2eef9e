#include "odlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "odlab/noise.hpp"

namespace odlab {

double mean(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("mean: empty input");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double variance(std::span<const double> xs) {
  if (xs.size() < 2) throw std::invalid_argument("variance: need n >= 2");
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

double pearson_corr(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw std::invalid_argument("pearson_corr: size mismatch or too short");
  }
  const double ma = mean(a), mb = mean(b);
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

double autocorr(std::span<const double> xs, std::size_t lag) {
  if (xs.size() <= lag + 1) return 0.0;
  const double m = mean(xs);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    den += (xs[i] - m) * (xs[i] - m);
    if (i + lag < xs.size()) num += (xs[i] - m) * (xs[i + lag] - m);
  }
  return den > 0.0 ? num / den : 0.0;
}

double bootstrap_se_mean(std::span<const double> xs, int resamples,
                         std::uint64_t seed) {
  if (xs.empty()) throw std::invalid_argument("bootstrap_se_mean: empty input");
  if (xs.size() == 1) return 0.0;
  CounterRng rng(seed, 0x626f6f74ULL);
  const std::size_t n = xs.size();
  std::vector<double> means(resamples);
  for (int r = 0; r < resamples; ++r) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto j = static_cast<std::size_t>(
          rng.uniform(static_cast<std::uint64_t>(r) * n + i, 0) *
          static_cast<double>(n));
      s += xs[std::min(j, n - 1)];
    }
    means[r] = s / static_cast<double>(n);
  }
  return std::sqrt(variance(means));
}

LogLogFit fit_loglog(std::span<const double> gammas,
                     std::span<const double> values) {
  if (gammas.size() != values.size()) {
    throw std::invalid_argument("fit_loglog: size mismatch");
  }
  if (gammas.size() < 3) throw std::invalid_argument("fit_loglog: need >= 3 points");
  const std::size_t n = gammas.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(gammas[i] > 0.0) || !(values[i] > 0.0)) {
      throw std::invalid_argument("fit_loglog: nonpositive input");
    }
    lx[i] = std::log(gammas[i]);
    ly[i] = std::log(values[i]);
  }
  const double mx = mean(lx), my = mean(ly);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_loglog: degenerate abscissae");

  LogLogFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.residuals.resize(n);
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    fit.residuals[i] = ly[i] - (fit.intercept + fit.slope * lx[i]);
    rss += fit.residuals[i] * fit.residuals[i];
  }
  fit.slope_stderr =
      (n > 2) ? std::sqrt(rss / static_cast<double>(n - 2) / sxx) : 0.0;
  return fit;
}

std::pair<double, double> bootstrap_slope_ci(
    std::span<const double> gammas,
    const std::vector<std::vector<double>>& replicate_values, int resamples,
    std::uint64_t seed, double coverage) {
  if (gammas.size() != replicate_values.size()) {
    throw std::invalid_argument("bootstrap_slope_ci: size mismatch");
  }
  CounterRng rng(seed, 0x736c6f7065ULL);
  std::vector<double> slopes;
  slopes.reserve(resamples);
  std::vector<double> means(gammas.size());
  std::uint64_t ctr = 0;
  for (int r = 0; r < resamples; ++r) {
    for (std::size_t g = 0; g < gammas.size(); ++g) {
      const auto& reps = replicate_values[g];
      if (reps.empty()) throw std::invalid_argument("bootstrap_slope_ci: empty cell");
      double s = 0.0;
      for (std::size_t i = 0; i < reps.size(); ++i) {
        const auto j = static_cast<std::size_t>(
            rng.uniform(ctr++, 0) * static_cast<double>(reps.size()));
        s += reps[std::min(j, reps.size() - 1)];
      }
      means[g] = s / static_cast<double>(reps.size());
    }
    bool positive = true;
    for (double v : means) positive = positive && v > 0.0;
    if (!positive) continue;
    slopes.push_back(fit_loglog(gammas, means).slope);
  }
  if (slopes.size() < 8) {
    throw std::runtime_error("bootstrap_slope_ci: too few valid resamples");
  }
  std::sort(slopes.begin(), slopes.end());
  const double alpha = 0.5 * (1.0 - coverage);
  const auto lo_idx = static_cast<std::size_t>(alpha * (slopes.size() - 1));
  const auto hi_idx = static_cast<std::size_t>((1.0 - alpha) * (slopes.size() - 1));
  return {slopes[lo_idx], slopes[hi_idx]};
}

}  // namespace odlab
