#include "odlab/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "odlab/parallel.hpp"
#include "odlab/stats.hpp"

namespace odlab {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// stream channels inside a replica's slot of the counter space
constexpr std::uint64_t kChannelDynamics = 0;
constexpr std::uint64_t kChannelInit = 1;
constexpr std::uint64_t kChannelVelocity = 2;

// Max |lag-1 autocorrelation| over the embedded observables of a state
// series: sin / cos of each position coordinate and (optionally) each
// velocity coordinate.
double max_embedded_autocorr(const std::vector<Vec>& xs,
                             const std::vector<Vec>& ys, int d) {
  double worst = 0.0;
  std::vector<double> series(xs.size());
  for (int i = 0; i < d; ++i) {
    for (int trig = 0; trig < 2; ++trig) {
      for (std::size_t k = 0; k < xs.size(); ++k) {
        const double v = kTwoPi * xs[k][i];
        series[k] = trig == 0 ? std::sin(v) : std::cos(v);
      }
      worst = std::max(worst, std::abs(autocorr(series, 1)));
    }
    if (!ys.empty()) {
      for (std::size_t k = 0; k < ys.size(); ++k) series[k] = ys[k][i];
      worst = std::max(worst, std::abs(autocorr(series, 1)));
    }
  }
  return worst;
}

struct ThinnedRun {
  std::vector<Vec> xs, ys;
  double stride_time = 0.0;
  double autocorr_lag1 = 0.0;
};

}  // namespace

StationarySample sample_mu_gamma(const ModelSpec& m, int n,
                                 const SamplerConfig& cfg, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_mu_gamma: n >= 1");
  const int d = m.d;
  const double h = step_size(m.gamma, cfg.h0, cfg.gamma_step_cap);

  if (cfg.provenance == Provenance::ReplicaTerminal) {
    const double horizon = std::max(10.0, cfg.replica_horizon_macro * m.gamma);
    const auto steps = static_cast<std::uint64_t>(std::ceil(horizon / h));
    std::vector<PhaseState> states(n);
    parallel_for(static_cast<std::uint64_t>(n), cfg.threads, [&](std::uint64_t r) {
      NoisePath noise(seed, r * 8 + kChannelDynamics, d, h);
      CounterRng init_rng(seed, r * 8 + kChannelInit);
      PhaseState p = default_initial_state(m, init_rng);
      LangevinStepper stepper(m, h, cfg.scheme);
      Vec xi(d);
      for (std::uint64_t k = 0; k < steps; ++k) {
        noise.unit_normal(k, xi.data());
        stepper.step(p.position.coords.data(), p.velocity.coords.data(), xi.data());
      }
      for (int i = 0; i < d; ++i) {
        if (!std::isfinite(p.velocity.coords[i])) {
          throw std::runtime_error("sample_mu_gamma: replica diverged");
        }
      }
      states[r] = std::move(p);
    });
    return StationarySample{EmpiricalMeasure::phase(states),
                            Provenance::ReplicaTerminal, static_cast<double>(n),
                            horizon, horizon};
  }

  // single long trajectory: burn-in, stride pilot, production
  NoisePath noise(seed, kChannelDynamics, d, h);
  CounterRng init_rng(seed, kChannelInit);
  PhaseState p = default_initial_state(m, init_rng);
  LangevinStepper stepper(m, h, cfg.scheme);
  Vec xi(d);
  std::uint64_t k = 0;

  auto advance = [&](std::uint64_t steps) {
    for (std::uint64_t s = 0; s < steps; ++s, ++k) {
      noise.unit_normal(k, xi.data());
      stepper.step(p.position.coords.data(), p.velocity.coords.data(), xi.data());
    }
    for (int i = 0; i < d; ++i) {
      if (!std::isfinite(p.velocity.coords[i])) {
        throw std::runtime_error("sample_mu_gamma: trajectory diverged at step " +
                                 std::to_string(k));
      }
    }
  };

  const double burn_time = std::max(10.0, cfg.burn_in_macro * m.gamma);
  advance(static_cast<std::uint64_t>(std::ceil(burn_time / h)));

  // double the stride until every embedded observable decorrelates
  double stride_time = std::max(2.0 / m.gamma, 16.0 * h);
  const double stride_cap = 32.0 * m.gamma;
  double rho = 1.0;
  while (true) {
    const auto stride_steps =
        static_cast<std::uint64_t>(std::llround(stride_time / h));
    std::vector<Vec> xs(cfg.pilot_states), ys(cfg.pilot_states);
    for (int s = 0; s < cfg.pilot_states; ++s) {
      advance(stride_steps);
      xs[s] = p.position.coords;
      ys[s] = p.velocity.coords;
    }
    rho = max_embedded_autocorr(xs, ys, d);
    if (rho <= cfg.target_autocorr || stride_time >= stride_cap) break;
    stride_time *= 2.0;
  }

  const auto stride_steps = static_cast<std::uint64_t>(std::llround(stride_time / h));
  std::vector<PhaseState> states;
  states.reserve(n);
  std::vector<Vec> xs(n), ys(n);
  for (int s = 0; s < n; ++s) {
    advance(stride_steps);
    PhaseState q;
    q.position.coords = p.position.coords;
    q.velocity.coords = p.velocity.coords;
    xs[s] = p.position.coords;
    ys[s] = p.velocity.coords;
    states.push_back(std::move(q));
  }
  const double rho_prod = n >= 8 ? max_embedded_autocorr(xs, ys, d) : rho;
  const double ess = n * std::max(0.0, 1.0 - rho_prod) / (1.0 + std::abs(rho_prod));

  return StationarySample{EmpiricalMeasure::phase(states),
                          Provenance::ThinnedTrajectory, std::max(1.0, ess),
                          stride_time, burn_time};
}

StationarySample sample_mu_o_tensor_gauss(const ModelSpec& m, int n,
                                          const SamplerConfig& cfg,
                                          std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_mu_o_tensor_gauss: n >= 1");
  const int d = m.d;

  // macro step limited by the force stiffness
  Eigen::MatrixXd jac;
  Vec origin(d, 0.0);
  m.force.jacobian(origin.data(), jac);
  double jac_bound = 0.0;
  {
    // cheap coefficient bound: sample the analytic Jacobian on a coarse grid
    const int probes = 64;
    Vec x(d, 0.0);
    for (int s = 0; s < probes; ++s) {
      for (int i = 0; i < d; ++i) {
        x[i] = static_cast<double>((s * (i + 1)) % probes) / probes;
      }
      m.force.jacobian(x.data(), jac);
      jac_bound = std::max(jac_bound, jac.cwiseAbs().sum());
    }
  }
  const double delta = std::min(cfg.overdamped_step,
                                jac_bound > 0.0 ? 0.25 / jac_bound : 1.0);

  NoisePath noise(seed, kChannelDynamics, d, delta);
  CounterRng init_rng(seed, kChannelInit);
  CounterRng vel_rng(seed, kChannelVelocity);

  Vec z(d);
  for (int i = 0; i < d; ++i) z[i] = init_rng.uniform(0, static_cast<std::uint32_t>(i));
  Vec db(d), scratch(d);
  std::uint64_t k = 0;

  auto advance = [&](std::uint64_t steps) {
    for (std::uint64_t s = 0; s < steps; ++s, ++k) {
      noise.increment(k, db.data());
      overdamped_step_raw(m, z.data(), db.data(), delta, scratch.data());
    }
  };

  advance(static_cast<std::uint64_t>(std::ceil(cfg.burn_in_macro / delta)));

  double stride_time = std::max(8.0 * delta, 0.125);
  const double stride_cap = 64.0;
  std::vector<Vec> no_vel;
  while (true) {
    const auto stride_steps =
        static_cast<std::uint64_t>(std::llround(stride_time / delta));
    std::vector<Vec> xs(cfg.pilot_states);
    for (int s = 0; s < cfg.pilot_states; ++s) {
      advance(stride_steps);
      xs[s] = z;
    }
    const double rho = max_embedded_autocorr(xs, no_vel, d);
    if (rho <= cfg.target_autocorr || stride_time >= stride_cap) break;
    stride_time *= 2.0;
  }

  const auto stride_steps = static_cast<std::uint64_t>(std::llround(stride_time / delta));
  std::vector<double> rows(static_cast<std::size_t>(n) * 2 * d);
  std::vector<Vec> xs(n);
  Vec gauss(d);
  for (int s = 0; s < n; ++s) {
    advance(stride_steps);
    double* row = rows.data() + static_cast<std::size_t>(s) * 2 * d;
    std::copy(z.begin(), z.end(), row);
    for (int i = 0; i < d; ++i) {
      gauss[i] = vel_rng.normal(static_cast<std::uint64_t>(s), static_cast<std::uint32_t>(i));
    }
    m.sigma.apply_sigma(gauss.data(), row + d);
    xs[s] = z;
  }
  const double rho_prod = n >= 8 ? max_embedded_autocorr(xs, no_vel, d) : 0.0;
  const double ess = n * std::max(0.0, 1.0 - rho_prod) / (1.0 + std::abs(rho_prod));

  return StationarySample{EmpiricalMeasure::phase_flat(d, std::move(rows)),
                          Provenance::ThinnedTrajectory, std::max(1.0, ess),
                          stride_time, cfg.burn_in_macro};
}

IndependenceReport independence_diagnostic(const StationarySample& s) {
  const EmpiricalMeasure& em = s.measure;
  if (em.tag() != SpaceTag::Phase) {
    throw std::invalid_argument("independence_diagnostic: phase sample required");
  }
  const int d = em.space_dim();
  const int n = em.size();
  IndependenceReport rep;
  rep.n = n;
  rep.threshold = 3.0 / std::sqrt(static_cast<double>(n));
  rep.stats.resize(2 * d, d);
  std::vector<double> emb(n), vel(n);
  for (int i = 0; i < d; ++i) {
    for (int trig = 0; trig < 2; ++trig) {
      for (int r = 0; r < n; ++r) {
        const double v = kTwoPi * em.point(r)[i];
        emb[r] = trig == 0 ? std::sin(v) : std::cos(v);
      }
      for (int j = 0; j < d; ++j) {
        for (int r = 0; r < n; ++r) vel[r] = em.point(r)[d + j];
        rep.stats(2 * i + trig, j) = pearson_corr(emb, vel);
      }
    }
  }
  rep.max_abs_stat = rep.stats.cwiseAbs().maxCoeff();
  rep.any_exceed = rep.max_abs_stat > rep.threshold;
  return rep;
}

double mean_squared_speed(const EmpiricalMeasure& phase) {
  if (phase.tag() != SpaceTag::Phase) {
    throw std::invalid_argument("mean_squared_speed: phase sample required");
  }
  const int d = phase.space_dim();
  double s = 0.0;
  for (int r = 0; r < phase.size(); ++r) {
    const double* y = phase.point(r) + d;
    for (int i = 0; i < d; ++i) s += y[i] * y[i];
  }
  return s / phase.size();
}

Eigen::VectorXd velocity_mean(const EmpiricalMeasure& phase) {
  if (phase.tag() != SpaceTag::Phase) {
    throw std::invalid_argument("velocity_mean: phase sample required");
  }
  const int d = phase.space_dim();
  Eigen::VectorXd m = Eigen::VectorXd::Zero(d);
  for (int r = 0; r < phase.size(); ++r) {
    for (int i = 0; i < d; ++i) m[i] += phase.point(r)[d + i];
  }
  return m / phase.size();
}

Eigen::MatrixXd velocity_cov(const EmpiricalMeasure& phase) {
  const int d = phase.space_dim();
  const Eigen::VectorXd m = velocity_mean(phase);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(d, d);
  for (int r = 0; r < phase.size(); ++r) {
    Eigen::VectorXd y(d);
    for (int i = 0; i < d; ++i) y[i] = phase.point(r)[d + i];
    c += (y - m) * (y - m).transpose();
  }
  return c / std::max(1, phase.size() - 1);
}

void write_sample_csv(const std::string& path, const EmpiricalMeasure& m) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("write_sample_csv: cannot open " + path);
  std::fprintf(f, "replica,coordinate,value\n");
  for (int r = 0; r < m.size(); ++r) {
    for (int c = 0; c < m.width(); ++c) {
      std::fprintf(f, "%d,%d,%.17g\n", r, c, m.point(r)[c]);
    }
  }
  std::fclose(f);
}

void write_sample_binary(const std::string& path, const EmpiricalMeasure& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_sample_binary: cannot open " + path);
  out.write(reinterpret_cast<const char*>(m.data().data()),
            static_cast<std::streamsize>(m.data().size() * sizeof(double)));
}

}  // namespace odlab
