// odlab: sampling, Wasserstein estimation and overdamped-limit rate studies
// for kinetic Langevin dynamics on the torus.

#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>

#include "odlab/config.hpp"
#include "odlab/experiments.hpp"
#include "odlab/sampling.hpp"

namespace {

struct GlobalArgs {
  std::string config_path;
  std::string out_dir;
  std::int64_t seed = -1;
  int threads = -1;
};

odlab::ExperimentConfig load(const GlobalArgs& args, std::string& config_text) {
  if (args.config_path.empty()) {
    throw std::runtime_error("--config is required for this subcommand");
  }
  config_text = odlab::read_file(args.config_path);
  odlab::ExperimentConfig cfg =
      odlab::parse_config(config_text, args.config_path);
  if (args.seed >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed);
  if (args.threads >= 0) cfg.threads = args.threads;
  if (!args.out_dir.empty()) cfg.output_dir = args.out_dir;
  return cfg;
}

int run_simulate(const GlobalArgs& args) {
  std::string text;
  const odlab::ExperimentConfig cfg = load(args, text);
  std::filesystem::create_directories(cfg.output_dir);

  odlab::SamplerConfig sampler = cfg.sampler;
  sampler.threads = cfg.threads;
  const int n = cfg.rate.samples;
  const auto mu = odlab::sample_mu_gamma(cfg.model, n, sampler, cfg.seed);
  const auto nu = odlab::sample_mu_o_tensor_gauss(cfg.model, n, sampler, cfg.seed);

  const std::string mu_path = cfg.output_dir + "/mu_gamma.csv";
  const std::string nu_path = cfg.output_dir + "/mu_o_tensor_gauss.csv";
  odlab::write_sample_csv(mu_path, mu.measure);
  odlab::write_sample_csv(nu_path, nu.measure);
  odlab::write_manifest(cfg.output_dir + "/manifest.json", text, cfg.seed,
                        cfg.threads, {mu_path, nu_path});
  std::printf("wrote %s (stride %.4g, ess %.0f) and %s\n", mu_path.c_str(),
              mu.stride_time, mu.ess_estimate, nu_path.c_str());
  return 0;
}

int run_rate(const GlobalArgs& args) {
  std::string text;
  const odlab::ExperimentConfig cfg = load(args, text);
  const odlab::RateFit fit = odlab::run_rate_sweep(cfg);
  auto files = odlab::write_rate_csv(fit, cfg.output_dir);
  odlab::write_manifest(cfg.output_dir + "/manifest.json", text, cfg.seed,
                        cfg.threads, files);
  for (const auto& w : fit.warnings) std::printf("warning: %s\n", w.c_str());
  std::printf("rate fit: slope %.4f (CI [%.4f, %.4f]), intercept %.4f, "
              "%d points%s\n",
              fit.slope, fit.slope_ci_lo, fit.slope_ci_hi, fit.intercept,
              fit.points_used,
              fit.largest_gamma_excluded ? " (largest gamma excluded)" : "");
  for (const auto& r : fit.rows) {
    std::printf("  gamma %6.4g  W1 %.5f +- %.5f  floor %.5f\n", r.gamma,
                r.w1_mean, r.w1_se, r.bias_floor);
  }
  return 0;
}

int run_validator(const GlobalArgs& args, bool equilibrium) {
  std::string text;
  const odlab::ExperimentConfig cfg = load(args, text);
  const odlab::ValidationReport rep = equilibrium
                                          ? odlab::validate_equilibrium(cfg)
                                          : odlab::validate_homogeneous(cfg);
  odlab::print_report(rep);
  return rep.all_pass() ? 0 : 1;
}

int run_coupling_diag(const GlobalArgs& args) {
  std::string text;
  const odlab::ExperimentConfig cfg = load(args, text);
  const odlab::CouplingDiagnostics diag = odlab::run_coupling_diagnostics(cfg);
  const std::string csv = odlab::write_coupling_csv(diag, cfg.output_dir);
  odlab::write_manifest(cfg.output_dir + "/manifest.json", text, cfg.seed,
                        cfg.threads, {csv});
  std::printf("slopes: e1 %.4f  e2 %.4f  e3 %.4f\n", diag.e1_slope,
              diag.e2_slope, diag.e3_slope);
  odlab::print_report(diag.report);
  return diag.report.all_pass() ? 0 : 1;
}

int run_ot_selftest(const GlobalArgs& args) {
  const std::uint64_t seed = args.seed >= 0 ? static_cast<std::uint64_t>(args.seed) : 7;
  const odlab::ValidationReport rep = odlab::ot_selftest(seed);
  odlab::print_report(rep);
  return rep.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "odlab: kinetic Langevin dynamics on the torus, stationary sampling,\n"
      "Wasserstein estimation and overdamped-limit diagnostics"};
  app.require_subcommand(1);

  GlobalArgs args;
  app.add_option("--config", args.config_path, "JSON experiment config");
  app.add_option("--seed", args.seed, "override the config seed");
  app.add_option("--out-dir", args.out_dir, "override the output directory");
  app.add_option("--threads", args.threads, "worker threads (0 = hardware)");

  auto* simulate = app.add_subcommand(
      "simulate", "sample mu_gamma and mu_O x g_Sigma, write sample CSVs");
  auto* rate = app.add_subcommand(
      "rate-sweep", "gamma sweep of W1(mu_gamma, mu_O x g_Sigma) with rate fit");
  auto* veq = app.add_subcommand("validate-equilibrium",
                                 "closed-form checks for gradient forces");
  auto* vho = app.add_subcommand("validate-homogeneous",
                                 "closed-form checks for constant forces");
  auto* cdiag = app.add_subcommand("coupling-diagnostics",
                                   "two-pass coupling error terms over gamma");
  auto* otst = app.add_subcommand("ot-selftest",
                                  "solver cross-checks (brute force, 1d, Sinkhorn)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return run_simulate(args);
    if (rate->parsed()) return run_rate(args);
    if (veq->parsed()) return run_validator(args, true);
    if (vho->parsed()) return run_validator(args, false);
    if (cdiag->parsed()) return run_coupling_diag(args);
    if (otst->parsed()) return run_ot_selftest(args);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
