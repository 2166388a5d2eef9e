#include "odlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <semaphore>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "odlab/ot.hpp"
#include "odlab/parallel.hpp"
#include "odlab/sampling.hpp"
#include "odlab/sde.hpp"

namespace odlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// The dense assignment solver holds an n^2 cost matrix (134 MB at n = 4096),
// so concurrent solves are capped independently of the worker count.
struct SolveSlot {
  static std::counting_semaphore<16>& sem() {
    static std::counting_semaphore<16> s(4);
    return s;
  }
  explicit SolveSlot(int n) : active(n >= 1024) {
    if (active) sem().acquire();
  }
  ~SolveSlot() {
    if (active) sem().release();
  }
  bool active;
};

double joint_w1(const ExperimentConfig& cfg, const EmpiricalMeasure& mu,
                const EmpiricalMeasure& nu, std::uint64_t seed) {
  switch (cfg.rate.method) {
    case OtMethodChoice::Exact: {
      SolveSlot slot(mu.size());
      return w1_exact(mu, nu).value;
    }
    case OtMethodChoice::Sinkhorn: {
      const double med = median_ground_cost(mu, nu, 4096, seed);
      SinkhornOptions opts;
      opts.tolerance = cfg.sinkhorn.tolerance;
      opts.max_iterations = cfg.sinkhorn.max_iterations;
      SolveSlot slot(mu.size());
      return w1_sinkhorn(mu, nu, std::max(1e-12, cfg.sinkhorn.epsilon_scale * med),
                         opts)
          .value;
    }
    case OtMethodChoice::Sorted1d:
      throw std::invalid_argument(
          "rate sweep: sorted1d cannot estimate the joint phase-space W1; "
          "use exact or sinkhorn");
  }
  return 0.0;
}

double marginal_w1(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
  if (mu.width() == 1) return w1_sorted_1d(mu, nu).value;
  SolveSlot slot(mu.size());
  return w1_exact(mu, nu).value;
}

void append_check(ValidationReport& rep, std::string name, bool pass,
                  double value, double bound, std::string note = {}) {
  rep.checks.push_back(
      {std::move(name), pass, value, bound, std::move(note)});
}

std::FILE* open_out(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  return f;
}

// Tabulated Gibbs density e^{-U}/Z on T^1 (the quadrature reference for the
// equilibrium position marginal).
TabulatedDensity1d tabulate_gibbs_1d(const TrigPoly& u, int nodes) {
  TabulatedDensity1d out;
  out.grid.resize(nodes + 1);
  out.pdf.resize(nodes + 1);
  out.cdf.assign(nodes + 1, 0.0);
  double umin = 1e300;
  std::vector<double> uv(nodes + 1);
  for (int i = 0; i <= nodes; ++i) {
    out.grid[i] = static_cast<double>(i) / nodes;
    uv[i] = u.empty() ? 0.0 : u.value(&out.grid[i]);
    umin = std::min(umin, uv[i]);
  }
  for (int i = 0; i <= nodes; ++i) out.pdf[i] = std::exp(-(uv[i] - umin));
  const double dx = 1.0 / nodes;
  for (int i = 0; i < nodes; ++i) {
    out.cdf[i + 1] = out.cdf[i] + 0.5 * dx * (out.pdf[i] + out.pdf[i + 1]);
  }
  const double mass = out.cdf[nodes];
  for (int i = 0; i <= nodes; ++i) {
    out.pdf[i] /= mass;
    out.cdf[i] /= mass;
  }
  out.cdf[nodes] = 1.0;
  return out;
}

double ks_uniform(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const auto n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    d = std::max(d, std::abs((static_cast<double>(i) + 1.0) / n - xs[i]));
    d = std::max(d, std::abs(xs[i] - static_cast<double>(i) / n));
  }
  return d;
}

}  // namespace

bool ValidationReport::all_pass() const {
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

void print_report(const ValidationReport& rep, bool verbose) {
  std::printf("== %s ==\n", rep.title.c_str());
  for (const auto& c : rep.checks) {
    if (verbose || !c.pass) {
      std::printf("[%s] %-42s value=%.6g bound=%.6g%s%s\n",
                  c.pass ? "PASS" : "FAIL", c.name.c_str(), c.value, c.bound,
                  c.note.empty() ? "" : "  ", c.note.c_str());
    }
  }
  std::printf("%s: %s\n", rep.title.c_str(), rep.all_pass() ? "PASS" : "FAIL");
}

double median_ground_cost(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                          int pairs, std::uint64_t seed) {
  CounterRng rng(seed, 0x6d656469616eULL);
  std::vector<double> costs(pairs);
  for (int k = 0; k < pairs; ++k) {
    const int i = static_cast<int>(rng.uniform(k, 0) * mu.size());
    const int j = static_cast<int>(rng.uniform(k, 1) * nu.size());
    costs[k] = mu.ground_dist(std::min(i, mu.size() - 1), nu,
                              std::min(j, nu.size() - 1));
  }
  std::nth_element(costs.begin(), costs.begin() + pairs / 2, costs.end());
  return costs[pairs / 2];
}

// ---------------------------------------------------------------------------
// Rate sweep

RateFit run_rate_sweep(const ExperimentConfig& cfg) {
  const auto& gammas = cfg.rate.gammas;
  const int n = cfg.rate.samples;
  const int reps = cfg.rate.repetitions;
  for (double g : gammas) {
    if (!(g >= 2.0)) throw std::invalid_argument("rate sweep: gammas must be >= 2");
  }

  const CounterRng root(cfg.seed, 0x72617465ULL);
  SamplerConfig sampler = cfg.sampler;
  sampler.threads = 1;  // parallelism lives at the work-item level

  RateFit fit;
  fit.rows.resize(gammas.size());
  for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
    fit.rows[gi].gamma = gammas[gi];
    fit.rows[gi].n = n;
    fit.rows[gi].repetitions = reps;
    fit.rows[gi].rep_w1.resize(reps);
    fit.rows[gi].rep_w1_position.resize(reps);
    fit.rows[gi].rep_w1_velocity.resize(reps);
  }

  const std::uint64_t n_items = gammas.size() * static_cast<std::uint64_t>(reps);
  parallel_for(n_items, cfg.threads, [&](std::uint64_t item) {
    const std::size_t gi = item / reps;
    const int rep = static_cast<int>(item % reps);
    const ModelSpec model(cfg.model.force, cfg.model.sigma, gammas[gi]);
    const std::uint64_t tag = (gi * 1024 + static_cast<std::uint64_t>(rep)) * 4;

    const StationarySample mu = sample_mu_gamma(model, n, sampler, root.derive(tag));
    const StationarySample nu =
        sample_mu_o_tensor_gauss(model, n, sampler, root.derive(tag + 1));

    RateRow& row = fit.rows[gi];
    row.rep_w1[rep] = joint_w1(cfg, mu.measure, nu.measure, root.derive(tag + 2));
    row.rep_w1_position[rep] =
        marginal_w1(mu.measure.position_marginal(), nu.measure.position_marginal());
    row.rep_w1_velocity[rep] =
        marginal_w1(mu.measure.velocity_marginal(), nu.measure.velocity_marginal());
  });

  // bias floors: W1 between two independent samples of the same law, one pair
  // per gamma
  parallel_for(gammas.size(), cfg.threads, [&](std::uint64_t gi) {
    const ModelSpec model(cfg.model.force, cfg.model.sigma, gammas[gi]);
    const std::uint64_t tag = gi * 1024 + 1000;
    const StationarySample a =
        sample_mu_o_tensor_gauss(model, n, sampler, root.derive(tag));
    const StationarySample b =
        sample_mu_o_tensor_gauss(model, n, sampler, root.derive(tag + 1));
    fit.rows[gi].bias_floor =
        joint_w1(cfg, a.measure, b.measure, root.derive(tag + 2));
  });

  for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
    RateRow& row = fit.rows[gi];
    row.w1_mean = mean(row.rep_w1);
    row.w1_se = bootstrap_se_mean(row.rep_w1, 200, root.derive(gi * 7 + 3));
    row.w1_position_mean = mean(row.rep_w1_position);
    row.w1_velocity_mean = mean(row.rep_w1_velocity);
  }
  std::sort(fit.rows.begin(), fit.rows.end(),
            [](const RateRow& a, const RateRow& b) { return a.gamma < b.gamma; });

  // drop the largest gamma from the fit when it does not clear the floor
  std::size_t used = fit.rows.size();
  const RateRow& last = fit.rows.back();
  if (last.w1_mean < last.bias_floor + 2.0 * last.w1_se) {
    if (fit.rows.size() < 4) {
      throw std::runtime_error(
          "rate sweep: largest gamma is floor-dominated and too few points remain");
    }
    used -= 1;
    fit.largest_gamma_excluded = true;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "gamma=%g: W1 estimate %.4g below bias floor %.4g + 2 SE "
                  "(%.4g); excluded from the fit",
                  last.gamma, last.w1_mean, last.bias_floor, 2.0 * last.w1_se);
    fit.warnings.emplace_back(buf);
  }

  std::vector<double> gs(used), ws(used);
  std::vector<std::vector<double>> rep_cells(used);
  for (std::size_t i = 0; i < used; ++i) {
    gs[i] = fit.rows[i].gamma;
    ws[i] = fit.rows[i].w1_mean;
    rep_cells[i] = fit.rows[i].rep_w1;
  }
  const LogLogFit ll = fit_loglog(gs, ws);
  fit.slope = ll.slope;
  fit.intercept = ll.intercept;
  fit.points_used = static_cast<int>(used);
  const auto ci = bootstrap_slope_ci(gs, rep_cells, 400, root.derive(0x6369ULL));
  fit.slope_ci_lo = ci.first;
  fit.slope_ci_hi = ci.second;
  return fit;
}

std::vector<std::string> write_rate_csv(const RateFit& fit, const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> files;

  {
    const std::string path = dir + "/rate_sweep.csv";
    std::FILE* f = open_out(path);
    std::fprintf(f,
                 "gamma,n,repetitions,w1_mean,w1_se,w1_position_mean,"
                 "w1_velocity_mean,bias_floor\n");
    for (const auto& r : fit.rows) {
      std::fprintf(f, "%.17g,%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.gamma, r.n,
                   r.repetitions, r.w1_mean, r.w1_se, r.w1_position_mean,
                   r.w1_velocity_mean, r.bias_floor);
    }
    std::fclose(f);
    files.push_back(path);
  }
  {
    const std::string path = dir + "/rate_sweep_reps.csv";
    std::FILE* f = open_out(path);
    std::fprintf(f, "gamma,repetition,w1_phase,w1_position,w1_velocity\n");
    for (const auto& r : fit.rows) {
      for (int k = 0; k < r.repetitions; ++k) {
        std::fprintf(f, "%.17g,%d,%.17g,%.17g,%.17g\n", r.gamma, k, r.rep_w1[k],
                     r.rep_w1_position[k], r.rep_w1_velocity[k]);
      }
    }
    std::fclose(f);
    files.push_back(path);
  }
  {
    const std::string path = dir + "/rate_fit.csv";
    std::FILE* f = open_out(path);
    std::fprintf(f,
                 "slope,intercept,slope_ci_lo,slope_ci_hi,points_used,"
                 "largest_gamma_excluded\n");
    std::fprintf(f, "%.17g,%.17g,%.17g,%.17g,%d,%d\n", fit.slope, fit.intercept,
                 fit.slope_ci_lo, fit.slope_ci_hi, fit.points_used,
                 fit.largest_gamma_excluded ? 1 : 0);
    std::fclose(f);
    files.push_back(path);
  }
  return files;
}

// ---------------------------------------------------------------------------
// Equilibrium validator

ValidationReport validate_equilibrium(const ExperimentConfig& cfg) {
  if (cfg.model.force.kind() != ForceKind::GradientTrig) {
    throw std::invalid_argument("validate_equilibrium: gradient force required");
  }
  const ModelSpec& m = cfg.model;
  const int d = m.d;
  ValidationReport rep;
  rep.title = "equilibrium validation";

  const int n = 10000;
  SamplerConfig sampler = cfg.sampler;
  sampler.threads = resolve_threads(cfg.threads);
  const CounterRng root(cfg.seed, 0x65717569ULL);
  const StationarySample s = sample_mu_gamma(m, n, sampler, root.derive(1));
  const double ess = std::max(4.0, s.ess_estimate);

  if (d == 1) {
    const TabulatedDensity1d gibbs = tabulate_gibbs_1d(m.force.potential(), 4096);
    const std::vector<double> cloud = gibbs.quantile_cloud(n);
    const EmpiricalMeasure ref = EmpiricalMeasure::position(1, cloud);
    const double w1 =
        w1_sorted_1d(s.measure.position_marginal(), ref).value;
    append_check(rep, "position_marginal_w1_vs_quadrature", w1 <= 0.02, w1, 0.02);
  } else {
    append_check(rep, "position_marginal_w1_vs_quadrature", true, 0.0, 0.02,
                 "requires d = 1; skipped");
  }

  const Eigen::VectorXd vm = velocity_mean(s.measure);
  const Eigen::MatrixXd vc = velocity_cov(s.measure);
  double worst_mean = 0.0, worst_mean_bound = 0.0;
  for (int i = 0; i < d; ++i) {
    const double se = std::sqrt(vc(i, i) / ess);
    if (std::abs(vm[i]) - 3 * se > worst_mean - worst_mean_bound) {
      worst_mean = std::abs(vm[i]);
      worst_mean_bound = 3 * se;
    }
  }
  append_check(rep, "velocity_mean_zero", worst_mean <= worst_mean_bound,
               worst_mean, worst_mean_bound);

  double worst_var_dev = 0.0, var_bound = 0.0;
  for (int i = 0; i < d; ++i) {
    const double target = m.sigma.sigma_sq()(i, i);
    const double se = target * std::sqrt(2.0 / ess);
    const double dev = std::abs(vc(i, i) - target);
    if (dev - 3 * se > worst_var_dev - var_bound) {
      worst_var_dev = dev;
      var_bound = 3 * se;
    }
  }
  append_check(rep, "velocity_variance", worst_var_dev <= var_bound, worst_var_dev,
               var_bound);

  const IndependenceReport ind = independence_diagnostic(s);
  append_check(rep, "position_velocity_independence",
               ind.max_abs_stat <= ind.threshold, ind.max_abs_stat, ind.threshold);

  // stationarity residual of the closed form on a lattice
  const EquilibriumDensity eq = equilibrium_density(m, d == 1 ? 4096 : 128);
  const int pos_nodes = d == 1 ? 64 : 8;
  const int vel_nodes = d == 1 ? 64 : 8;
  double max_res = 0.0;
  const double vspan = 4.0 * std::sqrt(m.sigma.sigma_sq().diagonal().maxCoeff());
  std::vector<int> idx(d, 0);
  const auto total_pos = static_cast<long>(std::pow(pos_nodes, d));
  const auto total_vel = static_cast<long>(std::pow(vel_nodes, d));
  for (long ip = 0; ip < total_pos; ++ip) {
    PhaseState p;
    p.position.coords.resize(d);
    p.velocity.coords.resize(d);
    long rem = ip;
    for (int i = 0; i < d; ++i) {
      p.position.coords[i] = static_cast<double>(rem % pos_nodes) / pos_nodes;
      rem /= pos_nodes;
    }
    for (long iv = 0; iv < total_vel; ++iv) {
      long rv = iv;
      for (int i = 0; i < d; ++i) {
        p.velocity.coords[i] =
            -vspan + 2.0 * vspan * static_cast<double>(rv % vel_nodes) /
                         std::max(1, vel_nodes - 1);
        rv /= vel_nodes;
      }
      max_res = std::max(max_res,
                         std::abs(stationarity_residual(m, eq.candidate, p)));
    }
  }
  append_check(rep, "stationarity_residual_closed_form", max_res <= 1e-8, max_res,
               1e-8);
  return rep;
}

// ---------------------------------------------------------------------------
// Space-homogeneous validator

ValidationReport validate_homogeneous(const ExperimentConfig& cfg) {
  if (cfg.model.force.kind() != ForceKind::Constant) {
    throw std::invalid_argument("validate_homogeneous: constant force required");
  }
  const ModelSpec& m = cfg.model;
  const int d = m.d;
  ValidationReport rep;
  rep.title = "space-homogeneous validation";

  const int n = cfg.rate.samples;
  SamplerConfig sampler = cfg.sampler;
  sampler.threads = 1;
  const CounterRng root(cfg.seed, 0x686f6d6fULL);

  const int reps = 4;
  std::vector<double> w1s(reps);
  std::vector<StationarySample> mus;
  mus.reserve(reps);
  for (int r = 0; r < reps; ++r) {
    mus.push_back(sample_mu_gamma(m, n, sampler, root.derive(10 + 4 * r)));
  }
  parallel_for(reps, cfg.threads, [&](std::uint64_t r) {
    const StationarySample nu =
        sample_mu_o_tensor_gauss(m, n, sampler, root.derive(11 + 4 * r));
    w1s[r] = joint_w1(cfg, mus[r].measure, nu.measure, root.derive(12 + 4 * r));
  });
  const StationarySample floor_a =
      sample_mu_o_tensor_gauss(m, n, sampler, root.derive(1000));
  const StationarySample floor_b =
      sample_mu_o_tensor_gauss(m, n, sampler, root.derive(1001));
  const double floor =
      joint_w1(cfg, floor_a.measure, floor_b.measure, root.derive(1002));

  // pooled moment checks on the first sample
  const StationarySample& s = mus.front();
  const double ess = std::max(4.0, s.ess_estimate);
  const Eigen::VectorXd vm = velocity_mean(s.measure);
  const Eigen::MatrixXd vc = velocity_cov(s.measure);

  double worst_mean_dev = 0.0, mean_bound = 0.0;
  for (int i = 0; i < d; ++i) {
    const double se = std::sqrt(vc(i, i) / ess);
    const double dev = std::abs(vm[i] - m.force.eta()[i] / m.gamma);
    if (dev - 3 * se > worst_mean_dev - mean_bound) {
      worst_mean_dev = dev;
      mean_bound = 3 * se;
    }
  }
  append_check(rep, "velocity_mean_eta_over_gamma", worst_mean_dev <= mean_bound,
               worst_mean_dev, mean_bound);

  double worst_cov_dev = 0.0, cov_bound = 0.0;
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      const double se =
          std::sqrt((vc(i, i) * vc(j, j) + vc(i, j) * vc(i, j)) / ess);
      const double dev = std::abs(vc(i, j) - m.sigma.sigma_sq()(i, j));
      if (dev - 3 * se > worst_cov_dev - cov_bound) {
        worst_cov_dev = dev;
        cov_bound = 3 * se;
      }
    }
  }
  append_check(rep, "velocity_covariance_sigma_sq", worst_cov_dev <= cov_bound,
               worst_cov_dev, cov_bound);

  // Gaussian shape: per-coordinate skewness and excess kurtosis
  double worst_shape = 0.0, shape_bound = 0.0;
  for (int i = 0; i < d; ++i) {
    std::vector<double> ys(s.measure.size());
    for (int r = 0; r < s.measure.size(); ++r) ys[r] = s.measure.point(r)[d + i];
    const double mu1 = mean(ys);
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double y : ys) {
      const double c = y - mu1;
      m2 += c * c;
      m3 += c * c * c;
      m4 += c * c * c * c;
    }
    m2 /= ys.size();
    m3 /= ys.size();
    m4 /= ys.size();
    const double skew = m3 / std::pow(m2, 1.5);
    const double kurt = m4 / (m2 * m2) - 3.0;
    const double se_skew = std::sqrt(6.0 / ess);
    const double se_kurt = std::sqrt(24.0 / ess);
    if (std::abs(skew) - 3 * se_skew > worst_shape - shape_bound) {
      worst_shape = std::abs(skew);
      shape_bound = 3 * se_skew;
    }
    if (std::abs(kurt) - 3 * se_kurt > worst_shape - shape_bound) {
      worst_shape = std::abs(kurt);
      shape_bound = 3 * se_kurt;
    }
  }
  append_check(rep, "velocity_gaussian_shape", worst_shape <= shape_bound,
               worst_shape, shape_bound);

  double worst_ks = 0.0;
  for (int i = 0; i < d; ++i) {
    std::vector<double> xs(s.measure.size());
    for (int r = 0; r < s.measure.size(); ++r) xs[r] = s.measure.point(r)[i];
    worst_ks = std::max(worst_ks, ks_uniform(std::move(xs)));
  }
  const double ks_bound = 1.628 / std::sqrt(ess);  // 1% critical value
  append_check(rep, "positions_uniform_ks", worst_ks <= ks_bound, worst_ks,
               ks_bound);

  // W1 against the closed form |Sigma^{-1} eta| / gamma
  Eigen::VectorXd eta(d);
  for (int i = 0; i < d; ++i) eta[i] = m.force.eta()[i];
  const double analytic = (m.sigma.sigma_inv() * eta).norm() / m.gamma;
  const double w1_mean_val = mean(w1s);
  const double w1_se = bootstrap_se_mean(w1s, 200, root.derive(2000));
  const double tol = std::max(0.15 / m.gamma, 3.0 * w1_se + floor);
  const double dev = std::abs(w1_mean_val - analytic);
  char note[128];
  std::snprintf(note, sizeof note, "W1=%.5g analytic=%.5g floor=%.4g se=%.4g",
                w1_mean_val, analytic, floor, w1_se);
  append_check(rep, "w1_vs_analytic", dev <= tol, dev, tol, note);
  return rep;
}

// ---------------------------------------------------------------------------
// Coupling diagnostics

CouplingDiagnostics run_coupling_diagnostics(const ExperimentConfig& cfg) {
  CouplingDiagnostics diag;
  diag.report.title = "coupling diagnostics";
  const auto& gammas = cfg.coupling.gammas;
  if (gammas.size() < 3) {
    throw std::invalid_argument("coupling diagnostics: need >= 3 gammas");
  }

  for (double gamma : gammas) {
    const ModelSpec model(cfg.model.force, cfg.model.sigma, gamma);
    CouplingConfig cc;
    cc.t = cfg.coupling.t;
    cc.gamma = gamma;
    cc.delta = cfg.coupling.delta;
    cc.replicas = cfg.coupling.replicas;
    cc.h0 = cfg.coupling.h0;
    const CouplingEnsemble ens = run_coupling(model, cc, cfg.seed, cfg.threads);
    diag.rows.push_back(ens.summary);
  }

  const int d = cfg.model.d;
  const double t = cfg.coupling.t;
  const double sup_f = cfg.model.force.sup_norm_bound();
  for (const auto& row : diag.rows) {
    const double g2t = row.gamma * row.gamma * t;
    char name[96];

    // e2 bound from the pathwise decomposition of Y
    const double rhs = row.mean_abs_y0 * std::exp(-g2t) + sup_f / row.gamma;
    std::snprintf(name, sizeof name, "e2_bound_gamma_%g", row.gamma);
    append_check(diag.report, name, row.e2_mean <= rhs + 3 * row.e2_se,
                 row.e2_mean, rhs + 3 * row.e2_se);

    // covariance of A_t against Sigma^2 (1 - e^{-2 gamma^2 t})
    const double shrink = -std::expm1(-2.0 * g2t);
    double worst = 0.0, bound = 0.0;
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        const double target = cfg.model.sigma.sigma_sq()(i, j) * shrink;
        const double dev = std::abs(row.a_cov(i, j) - target);
        const double se = 3.0 * row.a_cov_se(i, j);
        if (dev - se > worst - bound) {
          worst = dev;
          bound = se;
        }
      }
    }
    std::snprintf(name, sizeof name, "a_covariance_gamma_%g", row.gamma);
    append_check(diag.report, name, worst <= bound, worst, bound);

    const double corr_bound = 3.0 / std::sqrt(static_cast<double>(row.replicas));
    std::snprintf(name, sizeof name, "w_a_independence_gamma_%g", row.gamma);
    append_check(diag.report, name, row.max_abs_corr_w_a <= corr_bound,
                 row.max_abs_corr_w_a, corr_bound);
  }

  std::vector<double> gs, e1, e2, e3;
  for (const auto& row : diag.rows) {
    gs.push_back(row.gamma);
    e1.push_back(row.e1_mean);
    e2.push_back(row.e2_mean);
    e3.push_back(row.e3_mean);
  }
  diag.e1_slope = fit_loglog(gs, e1).slope;
  diag.e2_slope = fit_loglog(gs, e2).slope;
  diag.e3_slope = fit_loglog(gs, e3).slope;
  append_check(diag.report, "e1_decay_slope", diag.e1_slope <= -0.8, diag.e1_slope,
               -0.8);
  return diag;
}

std::string write_coupling_csv(const CouplingDiagnostics& diag,
                               const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::string path = dir + "/coupling_diagnostics.csv";
  std::FILE* f = open_out(path);
  std::fprintf(f,
               "gamma,t,replicas,e1_mean,e1_se,e2_mean,e2_se,e3_mean,e3_se,"
               "max_abs_corr_w_a\n");
  for (const auto& r : diag.rows) {
    std::fprintf(f, "%.17g,%.17g,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                 r.gamma, r.t, r.replicas, r.e1_mean, r.e1_se, r.e2_mean, r.e2_se,
                 r.e3_mean, r.e3_se, r.max_abs_corr_w_a);
  }
  std::fclose(f);
  return path;
}

// ---------------------------------------------------------------------------
// OT self-test

namespace {

EmpiricalMeasure random_phase_cloud(const CounterRng& rng, std::uint64_t tag,
                                    int n, int d, double vel_mean = 0.0,
                                    double vel_sd = 1.0) {
  std::vector<double> rows(static_cast<std::size_t>(n) * 2 * d);
  std::uint64_t step = tag << 20;
  for (int i = 0; i < n; ++i) {
    double* row = rows.data() + static_cast<std::size_t>(i) * 2 * d;
    for (int k = 0; k < d; ++k) {
      row[k] = rng.uniform(step, static_cast<std::uint32_t>(k));
      row[d + k] =
          vel_mean + vel_sd * rng.normal(step, static_cast<std::uint32_t>(d + k));
    }
    ++step;
  }
  return EmpiricalMeasure::phase_flat(d, std::move(rows));
}

}  // namespace

ValidationReport ot_selftest(std::uint64_t seed) {
  ValidationReport rep;
  rep.title = "ot self-test";
  const CounterRng rng(seed, 0x6f747374ULL);

  // assignment vs factorial brute force
  {
    int exact_matches = 0;
    const int instances = 50;
    for (int inst = 0; inst < instances; ++inst) {
      const int n = 2 + static_cast<int>(rng.uniform(inst, 0) * 5.0);  // 2..6
      const int d = 1 + (inst % 2);
      const EmpiricalMeasure mu = random_phase_cloud(rng, 2 * inst + 1, n, d);
      const EmpiricalMeasure nu = random_phase_cloud(rng, 2 * inst + 2, n, d);
      std::vector<double> cost(static_cast<std::size_t>(n) * n);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) cost[i * n + j] = mu.ground_dist(i, nu, j);
      }
      std::vector<int> perm(n);
      for (int i = 0; i < n; ++i) perm[i] = i;
      double best = 1e300;
      do {
        double total = 0.0;
        for (int i = 0; i < n; ++i) total += cost[i * n + perm[i]];
        best = std::min(best, total);
      } while (std::next_permutation(perm.begin(), perm.end()));

      const OTResult res = w1_exact(mu, nu);
      double solver_total = 0.0;
      for (int i = 0; i < n; ++i) solver_total += cost[i * n + res.permutation[i]];
      if (solver_total == best) ++exact_matches;
    }
    append_check(rep, "assignment_equals_brute_force", exact_matches == instances,
                 exact_matches, instances);
  }

  // circular sorted matching vs assignment
  {
    double worst = 0.0;
    for (int inst = 0; inst < 20; ++inst) {
      const int n = 64;
      std::vector<double> a(n), b(n);
      for (int i = 0; i < n; ++i) {
        a[i] = rng.uniform(4000 + inst, static_cast<std::uint32_t>(2 * i));
        b[i] = rng.uniform(4000 + inst, static_cast<std::uint32_t>(2 * i + 1));
      }
      const EmpiricalMeasure mu = EmpiricalMeasure::position(1, a);
      const EmpiricalMeasure nu = EmpiricalMeasure::position(1, b);
      const double sorted = w1_sorted_1d(mu, nu).value;
      const double exact = w1_exact(mu, nu).value;
      worst = std::max(worst, std::abs(sorted - exact));
    }
    append_check(rep, "sorted_circle_equals_assignment", worst <= 1e-12, worst,
                 1e-12);
  }

  // marginal inequality on random phase clouds
  {
    bool ok = true;
    double min_gap = 1e300;
    for (int inst = 0; inst < 20; ++inst) {
      const int d = 1 + (inst % 2);
      const EmpiricalMeasure mu =
          random_phase_cloud(rng, 6000 + 2 * inst, 128, d, 0.0, 1.0);
      const EmpiricalMeasure nu =
          random_phase_cloud(rng, 6001 + 2 * inst, 128, d, 0.4, 1.3);
      const auto [wm, wj] = marginal_inequality_check(mu, nu);
      ok = ok && wm <= wj + 1e-12;
      min_gap = std::min(min_gap, wj - wm);
    }
    append_check(rep, "marginal_inequality", ok, min_gap, 0.0,
                 "min joint-marginal gap");
  }

  // Sinkhorn against the exact value
  {
    double worst_rel = 0.0;
    for (int inst = 0; inst < 2; ++inst) {
      const int n = 256;
      const EmpiricalMeasure mu = random_phase_cloud(rng, 8000 + 2 * inst, n, 1);
      const EmpiricalMeasure nu =
          random_phase_cloud(rng, 8001 + 2 * inst, n, 1, 0.5, 1.2);
      const double med = median_ground_cost(mu, nu, 4096, rng.derive(inst));
      const double exact = w1_exact(mu, nu).value;
      const double sink = w1_sinkhorn(mu, nu, 0.005 * med).value;
      worst_rel = std::max(worst_rel, std::abs(sink - exact) / exact);
    }
    append_check(rep, "sinkhorn_within_5pct_of_exact", worst_rel <= 0.05,
                 worst_rel, 0.05);
  }
  return rep;
}

// ---------------------------------------------------------------------------

void write_manifest(const std::string& path, const std::string& config_text,
                    std::uint64_t seed, int threads,
                    const std::vector<std::string>& files) {
  nlohmann::json j;
  j["tool"] = "odlab";
  j["version"] = "0.1.0";
  j["config_digest"] = config_digest(config_text);
  j["seed"] = seed;
  j["threads"] = threads;
  j["files"] = files;
  std::FILE* f = open_out(path);
  const std::string text = j.dump(2) + "\n";
  std::fwrite(text.data(), 1, text.size(), f);
  std::fclose(f);
}

}  // namespace odlab
