#include "odlab/sde.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace odlab {

double step_size(double gamma, double h0, double c_over_gamma) {
  return std::min(h0, c_over_gamma / gamma);
}

LangevinStepper::LangevinStepper(const ModelSpec& m, double h, Scheme scheme)
    : m_(&m), scheme_(scheme), d_(m.d), h_(h), f_(m.d), n_(m.d) {
  if (!(h > 0.0)) throw std::invalid_argument("LangevinStepper: h must be > 0");
  const double gh = m.gamma * h;
  c_ = std::exp(-gh);
  s_ = std::sqrt(-std::expm1(-2.0 * gh));
  b_ = std::tanh(0.5 * gh) / m.gamma;
  em_noise_ = std::sqrt(2.0 * m.gamma * h);
}

void LangevinStepper::step(double* x, double* y, const double* xi) {
  if (scheme_ == Scheme::EulerMaruyama) {
    m_->force.eval(x, f_.data());
    m_->sigma.apply_sigma(xi, n_.data());
    for (int i = 0; i < d_; ++i) {
      const double y_old = y[i];
      y[i] += h_ * (f_[i] - m_->gamma * y_old) + em_noise_ * n_[i];
      x[i] = wrap01(x[i] + h_ * y_old);
    }
    return;
  }
  // kick / drift / OU / drift / kick
  m_->force.eval(x, f_.data());
  for (int i = 0; i < d_; ++i) y[i] += b_ * f_[i];
  for (int i = 0; i < d_; ++i) x[i] = wrap01(x[i] + 0.5 * h_ * y[i]);
  m_->sigma.apply_sigma(xi, n_.data());
  for (int i = 0; i < d_; ++i) y[i] = c_ * y[i] + s_ * n_[i];
  for (int i = 0; i < d_; ++i) x[i] = wrap01(x[i] + 0.5 * h_ * y[i]);
  m_->force.eval(x, f_.data());
  for (int i = 0; i < d_; ++i) y[i] += b_ * f_[i];
}

PhaseState langevin_step(const ModelSpec& m, const PhaseState& p,
                         const Vec& brownian_increment, double h) {
  if (static_cast<int>(p.dim()) != m.d ||
      static_cast<int>(brownian_increment.size()) != m.d) {
    throw std::invalid_argument("langevin_step: dimension mismatch");
  }
  LangevinStepper stepper(m, h);
  PhaseState q = p;
  Vec xi(m.d);
  const double inv_sqrt_h = 1.0 / std::sqrt(h);
  for (int i = 0; i < m.d; ++i) xi[i] = brownian_increment[i] * inv_sqrt_h;
  stepper.step(q.position.coords.data(), q.velocity.coords.data(), xi.data());
  for (int i = 0; i < m.d; ++i) {
    if (!std::isfinite(q.velocity.coords[i]) ||
        !std::isfinite(q.position.coords[i])) {
      throw std::runtime_error("langevin_step: non-finite state");
    }
  }
  return q;
}

void overdamped_step_raw(const ModelSpec& m, double* z,
                         const double* brownian_increment, double h,
                         double* scratch) {
  m.force.eval(z, scratch);
  for (int i = 0; i < m.d; ++i) {
    z[i] = z[i] + h * scratch[i];
  }
  m.sigma.apply_sigma(brownian_increment, scratch);
  const double sqrt2 = std::sqrt(2.0);
  for (int i = 0; i < m.d; ++i) {
    z[i] = wrap01(z[i] + sqrt2 * scratch[i]);
  }
}

TorusPoint overdamped_step(const ModelSpec& m, const TorusPoint& z,
                           const Vec& brownian_increment, double h) {
  if (static_cast<int>(z.dim()) != m.d ||
      static_cast<int>(brownian_increment.size()) != m.d) {
    throw std::invalid_argument("overdamped_step: dimension mismatch");
  }
  if (!(h > 0.0)) throw std::invalid_argument("overdamped_step: h must be > 0");
  TorusPoint out = z;
  Vec scratch(m.d);
  overdamped_step_raw(m, out.coords.data(), brownian_increment.data(), h,
                      scratch.data());
  for (double c : out.coords) {
    if (!std::isfinite(c)) {
      throw std::runtime_error("overdamped_step: non-finite state");
    }
  }
  return out;
}

std::vector<PhaseState> simulate_trajectory(const ModelSpec& m,
                                            const IntegratorConfig& cfg,
                                            const PhaseState& init,
                                            const NoisePath& noise,
                                            BinnedNoiseSums* bins) {
  if (cfg.burn_in_fraction < 0.0 || cfg.burn_in_fraction >= 1.0) {
    throw std::invalid_argument("simulate_trajectory: burn-in fraction in [0,1)");
  }
  if (cfg.stride < 1) throw std::invalid_argument("simulate_trajectory: stride >= 1");
  if (noise.dim() != m.d || noise.step() != cfg.h) {
    throw std::invalid_argument("simulate_trajectory: noise path mismatch");
  }
  const auto n_steps =
      static_cast<std::uint64_t>(std::llround(cfg.horizon / cfg.h));
  if (std::abs(n_steps * cfg.h - cfg.horizon) > 1e-9 * std::max(1.0, cfg.horizon)) {
    throw std::invalid_argument("simulate_trajectory: horizon not a multiple of h");
  }

  if (bins) {
    if (bins->steps_per_bin == 0 || n_steps % bins->steps_per_bin != 0) {
      throw std::invalid_argument(
          "simulate_trajectory: steps_per_bin must divide the step count");
    }
    bins->dim = m.d;
    bins->sums.assign((n_steps / bins->steps_per_bin) * m.d, 0.0);
  }

  const std::uint64_t kept = static_cast<std::uint64_t>(
      std::floor((1.0 - cfg.burn_in_fraction) * static_cast<double>(n_steps)));
  const std::uint64_t burn = n_steps - kept;

  std::vector<PhaseState> out;
  out.reserve(kept / cfg.stride);

  LangevinStepper stepper(m, cfg.h, cfg.scheme);
  Vec x = init.position.coords;
  Vec y = init.velocity.coords;
  Vec xi(m.d);
  const double sqrt_h = std::sqrt(cfg.h);

  for (std::uint64_t k = 0; k < n_steps; ++k) {
    noise.unit_normal(k, xi.data());
    stepper.step(x.data(), y.data(), xi.data());
    if (bins) {
      double* b = bins->bin(k / bins->steps_per_bin);
      for (int i = 0; i < m.d; ++i) b[i] += sqrt_h * xi[i];
    }
    for (int i = 0; i < m.d; ++i) {
      if (!std::isfinite(y[i]) || !std::isfinite(x[i])) {
        throw std::runtime_error("simulate_trajectory: non-finite state at step " +
                                 std::to_string(k));
      }
    }
    if (k + 1 > burn && (k + 1 - burn) % cfg.stride == 0) {
      PhaseState s;
      s.position.coords = x;
      s.velocity.coords = y;
      out.push_back(std::move(s));
    }
  }
  return out;
}

PhaseState default_initial_state(const ModelSpec& m, const CounterRng& rng) {
  PhaseState p;
  p.position.coords.resize(m.d);
  p.velocity.coords.resize(m.d);
  Vec xi(m.d);
  for (int i = 0; i < m.d; ++i) {
    p.position.coords[i] = rng.uniform(0, static_cast<std::uint32_t>(i));
    xi[i] = rng.normal(1, static_cast<std::uint32_t>(i));
  }
  m.sigma.apply_sigma(xi.data(), p.velocity.coords.data());
  return p;
}

}  // namespace odlab
