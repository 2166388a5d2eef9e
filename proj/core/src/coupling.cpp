#include "odlab/coupling.hpp"

#include <cmath>
#include <stdexcept>

#include "odlab/parallel.hpp"
#include "odlab/sde.hpp"
#include "odlab/stats.hpp"

namespace odlab {

double h_weight(double s, double t, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("h_weight: gamma must be > 0");
  if (!(t > 0.0)) throw std::invalid_argument("h_weight: t must be > 0");
  if (s < 0.0 || s > t) throw std::invalid_argument("h_weight: s outside [0, t]");
  const double g2 = gamma * gamma;
  // (e^{-g2 (t-s)} - e^{-g2 t}) / (1 - e^{-2 g2 t}); both factored through
  // expm1 so the large-g2 t regime keeps full relative accuracy.
  const double num = std::exp(-g2 * (t - s)) * (-std::expm1(-g2 * s));
  const double den = -std::expm1(-2.0 * g2 * t);
  return (2.0 / gamma) * num / den;
}

double a_projection_weight(double s, double t, double gamma) {
  return h_weight(s, t, gamma) / std::sqrt(2.0);
}

Vec accumulate_A(const NoisePath& noise, std::uint64_t n_steps, double gamma,
                 const DiffusionMatrix& sigma) {
  if (noise.dim() != sigma.dim()) {
    throw std::invalid_argument("accumulate_A: dimension mismatch");
  }
  const int d = noise.dim();
  const double gh = gamma * noise.step();
  const double c = std::exp(-gh);
  const double s = std::sqrt(-std::expm1(-2.0 * gh));
  Vec a(d, 0.0), xi(d), sn(d);
  for (std::uint64_t k = 0; k < n_steps; ++k) {
    noise.unit_normal(k, xi.data());
    sigma.apply_sigma(xi.data(), sn.data());
    for (int i = 0; i < d; ++i) a[i] = c * a[i] + s * sn[i];
  }
  return a;
}

std::uint64_t CouplingConfig::bins() const {
  const double b = t / delta;
  const auto n = static_cast<std::uint64_t>(std::llround(b));
  if (n == 0 || std::abs(b - static_cast<double>(n)) > 1e-9 * b) {
    throw std::invalid_argument("CouplingConfig: delta must divide t");
  }
  return n;
}

std::uint64_t CouplingConfig::steps_per_bin() const {
  const double h_rule = step_size(gamma, h0, gamma_step_cap);
  return static_cast<std::uint64_t>(std::ceil(gamma * delta / h_rule - 1e-12));
}

double CouplingConfig::micro_step() const {
  return gamma * delta / static_cast<double>(steps_per_bin());
}

namespace {

// replica-local channel ids inside the counter-RNG stream space
constexpr std::uint64_t kChannelNoise = 0;
constexpr std::uint64_t kChannelInit = 1;

CouplingRecord run_one_replica(const ModelSpec& m, const CouplingConfig& cc,
                               std::uint64_t seed, std::uint64_t replica) {
  const int d = m.d;
  const std::uint64_t n_bins = cc.bins();
  const std::uint64_t spb = cc.steps_per_bin();
  const double h = cc.micro_step();
  const std::uint64_t n_steps = n_bins * spb;
  const double sqrt_h = std::sqrt(h);
  const double sqrt2 = std::sqrt(2.0);

  NoisePath noise(seed, replica * 8 + kChannelNoise, d, h);
  CounterRng init_rng(seed, replica * 8 + kChannelInit);
  PhaseState init = default_initial_state(m, init_rng);

  // pass 1: Langevin to physical time gamma t, with A and binned Brownian sums
  LangevinStepper stepper(m, h);
  const double c = stepper.ou_decay();
  const double s_ou = stepper.ou_noise();

  Vec x = init.position.coords;
  Vec y = init.velocity.coords;
  Vec a(d, 0.0), xi(d), sn(d);
  std::vector<double> bin_sums(n_bins * d, 0.0);

  for (std::uint64_t k = 0; k < n_steps; ++k) {
    noise.unit_normal(k, xi.data());
    stepper.step(x.data(), y.data(), xi.data());
    m.sigma.apply_sigma(xi.data(), sn.data());
    double* b = bin_sums.data() + (k / spb) * d;
    for (int i = 0; i < d; ++i) {
      a[i] = c * a[i] + s_ou * sn[i];
      b[i] += sqrt_h * xi[i];
    }
  }
  for (int i = 0; i < d; ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i]) || !std::isfinite(a[i])) {
      throw std::runtime_error("run_coupling: non-finite state in pass 1");
    }
  }

  // pass 2: W and the overdamped reference on the shared bins
  const double inv_sqrt_gamma = 1.0 / std::sqrt(cc.gamma);
  Vec w = init.position.coords;
  Vec xbar = init.position.coords;
  Vec fw(d), fb(d), dbg(d), sdb(d);

  double beta_prev = a_projection_weight(0.0, cc.t, cc.gamma);
  for (std::uint64_t j = 0; j < n_bins; ++j) {
    const double s1 = cc.t * static_cast<double>(j + 1) / static_cast<double>(n_bins);
    const double beta_next = a_projection_weight(s1, cc.t, cc.gamma);
    const double dbeta = beta_next - beta_prev;
    beta_prev = beta_next;

    const double* b = bin_sums.data() + j * d;
    for (int i = 0; i < d; ++i) dbg[i] = b[i] * inv_sqrt_gamma;
    m.sigma.apply_sigma(dbg.data(), sdb.data());

    m.force.eval(w.data(), fw.data());
    m.force.eval(xbar.data(), fb.data());
    for (int i = 0; i < d; ++i) {
      w[i] = wrap01(w[i] + cc.delta * fw[i] + sqrt2 * (sdb[i] - dbeta * a[i]));
      xbar[i] = wrap01(xbar[i] + cc.delta * fb[i] + sqrt2 * sdb[i]);
    }
  }

  CouplingRecord rec;
  rec.langevin_final.position.coords = x;
  rec.langevin_final.velocity.coords = y;
  rec.a_t = a;
  rec.w_t.coords = w;
  rec.xbar_t.coords = xbar;
  rec.abs_y0 = euclidean_dist(init.velocity.coords.data(), Vec(d, 0.0).data(), d);
  rec.e1 = torus_dist(x.data(), w.data(), d);
  rec.e2 = euclidean_dist(y.data(), a.data(), d);
  rec.e3 = torus_dist(xbar.data(), w.data(), d);
  return rec;
}

}  // namespace

CouplingEnsemble run_coupling(const ModelSpec& m, const CouplingConfig& cc,
                              std::uint64_t seed, int threads) {
  if (cc.replicas < 2) throw std::invalid_argument("run_coupling: need >= 2 replicas");
  cc.bins();  // validates alignment

  CouplingEnsemble out;
  out.records.resize(cc.replicas);
  parallel_for(static_cast<std::uint64_t>(cc.replicas), threads,
               [&](std::uint64_t r) {
                 out.records[r] = run_one_replica(m, cc, seed, r);
               });

  const int d = m.d;
  const int r_count = cc.replicas;
  CouplingSummary& s = out.summary;
  s.gamma = cc.gamma;
  s.t = cc.t;
  s.replicas = r_count;
  s.micro_step = cc.micro_step();

  std::vector<double> e1(r_count), e2(r_count), e3(r_count), y0(r_count);
  for (int r = 0; r < r_count; ++r) {
    e1[r] = out.records[r].e1;
    e2[r] = out.records[r].e2;
    e3[r] = out.records[r].e3;
    y0[r] = out.records[r].abs_y0;
  }
  s.e1_mean = mean(e1);
  s.e2_mean = mean(e2);
  s.e3_mean = mean(e3);
  s.mean_abs_y0 = mean(y0);
  const CounterRng boot(seed, 0x636f75706cULL);
  s.e1_se = bootstrap_se_mean(e1, 200, boot.derive(1));
  s.e2_se = bootstrap_se_mean(e2, 200, boot.derive(2));
  s.e3_se = bootstrap_se_mean(e3, 200, boot.derive(3));

  // independence diagnostic: sin/cos embedding of W against A components
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  s.corr_w_a.resize(2 * d, d);
  std::vector<double> emb(r_count), acol(r_count);
  for (int i = 0; i < d; ++i) {
    for (int trig = 0; trig < 2; ++trig) {
      for (int r = 0; r < r_count; ++r) {
        const double v = kTwoPi * out.records[r].w_t.coords[i];
        emb[r] = trig == 0 ? std::sin(v) : std::cos(v);
      }
      for (int j = 0; j < d; ++j) {
        for (int r = 0; r < r_count; ++r) acol[r] = out.records[r].a_t[j];
        s.corr_w_a(2 * i + trig, j) = pearson_corr(emb, acol);
      }
    }
  }
  s.max_abs_corr_w_a = s.corr_w_a.cwiseAbs().maxCoeff();

  // empirical covariance of A_t with entrywise moment-based standard errors
  s.a_cov = Eigen::MatrixXd::Zero(d, d);
  s.a_cov_se = Eigen::MatrixXd::Zero(d, d);
  Vec a_mean(d, 0.0);
  for (int r = 0; r < r_count; ++r) {
    for (int i = 0; i < d; ++i) a_mean[i] += out.records[r].a_t[i];
  }
  for (int i = 0; i < d; ++i) a_mean[i] /= r_count;
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      double cij = 0.0, qij = 0.0;
      for (int r = 0; r < r_count; ++r) {
        const double di = out.records[r].a_t[i] - a_mean[i];
        const double dj = out.records[r].a_t[j] - a_mean[j];
        cij += di * dj;
        qij += di * dj * di * dj;
      }
      cij /= (r_count - 1);
      qij /= r_count;
      s.a_cov(i, j) = cij;
      s.a_cov_se(i, j) = std::sqrt(std::max(0.0, qij - cij * cij) / r_count);
    }
  }
  return out;
}

}  // namespace odlab
