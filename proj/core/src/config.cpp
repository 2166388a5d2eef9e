#include "odlab/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace odlab {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& source, const std::string& what) {
  throw std::invalid_argument(source + ": " + what);
}

void require_keys(const json& obj, const std::set<std::string>& allowed,
                  const std::string& source, const std::string& where) {
  if (!obj.is_object()) fail(source, where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.contains(key)) {
      fail(source, "unknown key '" + key + "' in " + where);
    }
  }
}

std::vector<TrigTerm> parse_trig(const json& arr, int d,
                                 const std::string& source,
                                 const std::string& where) {
  if (!arr.is_array()) fail(source, where + " must be an array of harmonics");
  std::vector<TrigTerm> terms;
  for (const auto& t : arr) {
    require_keys(t, {"wave", "cos", "sin"}, source, where + " harmonic");
    TrigTerm term;
    if (!t.contains("wave") || !t["wave"].is_array() ||
        static_cast<int>(t["wave"].size()) != d) {
      fail(source, where + ": each harmonic needs a 'wave' array of length d");
    }
    for (const auto& k : t["wave"]) term.wave.push_back(k.get<int>());
    term.cos_coef = t.value("cos", 0.0);
    term.sin_coef = t.value("sin", 0.0);
    terms.push_back(std::move(term));
  }
  return terms;
}

DiffusionMatrix parse_sigma(const json& s, int d, const std::string& source) {
  require_keys(s, {"identity", "diagonal", "dense"}, source, "model.sigma");
  const int variants = int(s.contains("identity")) + int(s.contains("diagonal")) +
                       int(s.contains("dense"));
  if (variants != 1) {
    fail(source, "model.sigma needs exactly one of identity / diagonal / dense");
  }
  if (s.contains("identity")) {
    if (!s["identity"].get<bool>()) fail(source, "model.sigma.identity must be true");
    return DiffusionMatrix::identity(d);
  }
  if (s.contains("diagonal")) {
    Vec diag = s["diagonal"].get<Vec>();
    if (static_cast<int>(diag.size()) != d) {
      fail(source, "model.sigma.diagonal must have d entries");
    }
    return DiffusionMatrix::diagonal(diag);
  }
  const auto& rows = s["dense"];
  if (!rows.is_array() || static_cast<int>(rows.size()) != d) {
    fail(source, "model.sigma.dense must be a d x d matrix");
  }
  Eigen::MatrixXd m(d, d);
  for (int i = 0; i < d; ++i) {
    if (static_cast<int>(rows[i].size()) != d) {
      fail(source, "model.sigma.dense must be a d x d matrix");
    }
    for (int j = 0; j < d; ++j) m(i, j) = rows[i][j].get<double>();
  }
  return DiffusionMatrix(std::move(m));
}

ModelSpec parse_model(const json& m, const std::string& source) {
  require_keys(m, {"dimension", "gamma", "sigma", "force"}, source, "model");
  if (!m.contains("dimension") || !m.contains("gamma") || !m.contains("sigma") ||
      !m.contains("force")) {
    fail(source, "model needs dimension, gamma, sigma, force");
  }
  const int d = m["dimension"].get<int>();
  if (d < 1) fail(source, "model.dimension must be >= 1");
  const double gamma = m["gamma"].get<double>();
  DiffusionMatrix sigma = parse_sigma(m["sigma"], d, source);

  const auto& fj = m["force"];
  require_keys(fj,
               {"kind", "potential", "eta", "tau", "curl_potential",
                "sup_norm_bound"},
               source, "model.force");
  const std::string kind = fj.value("kind", "");

  ForceField force = [&]() -> ForceField {
    if (kind == "constant") {
      if (!fj.contains("eta")) fail(source, "constant force needs eta");
      Vec eta = fj["eta"].get<Vec>();
      if (static_cast<int>(eta.size()) != d) fail(source, "eta must have d entries");
      return ForceField::constant(std::move(eta));
    }
    if (kind == "gradient") {
      if (!fj.contains("potential")) fail(source, "gradient force needs potential");
      TrigPoly u(d, parse_trig(fj["potential"], d, source, "model.force.potential"));
      return ForceField::gradient_trig(std::move(u), sigma);
    }
    if (kind == "mixed") {
      TrigPoly u(d, fj.contains("potential")
                        ? parse_trig(fj["potential"], d, source,
                                     "model.force.potential")
                        : std::vector<TrigTerm>{});
      Vec eta = fj.contains("eta") ? fj["eta"].get<Vec>() : Vec(d, 0.0);
      if (static_cast<int>(eta.size()) != d) fail(source, "eta must have d entries");
      const double tau = fj.value("tau", 0.0);
      TrigPoly v(d, fj.contains("curl_potential")
                        ? parse_trig(fj["curl_potential"], d, source,
                                     "model.force.curl_potential")
                        : std::vector<TrigTerm>{});
      return ForceField::mixed(std::move(u), std::move(eta), tau, std::move(v),
                               sigma);
    }
    fail(source, "model.force.kind must be gradient / constant / mixed");
  }();

  if (fj.contains("sup_norm_bound")) {
    force.override_sup_norm_bound(fj["sup_norm_bound"].get<double>());
  }
  return ModelSpec(std::move(force), std::move(sigma), gamma);
}

OtMethodChoice parse_method(const std::string& s, const std::string& source) {
  if (s == "exact") return OtMethodChoice::Exact;
  if (s == "sorted1d") return OtMethodChoice::Sorted1d;
  if (s == "sinkhorn") return OtMethodChoice::Sinkhorn;
  fail(source, "ot method must be exact / sorted1d / sinkhorn");
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text,
                              const std::string& source) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(source, std::string("JSON parse error: ") + e.what());
  }
  require_keys(root,
               {"model", "sampling", "rate_sweep", "coupling", "sinkhorn",
                "seed", "threads", "output_dir"},
               source, "top level");
  if (!root.contains("model")) fail(source, "config needs a model block");

  ExperimentConfig cfg(parse_model(root["model"], source));

  if (root.contains("sampling")) {
    const auto& s = root["sampling"];
    require_keys(s,
                 {"h0", "gamma_step_cap", "burn_in_macro", "target_autocorr",
                  "provenance", "replica_horizon_macro", "pilot_states",
                  "overdamped_step"},
                 source, "sampling");
    cfg.sampler.h0 = s.value("h0", cfg.sampler.h0);
    cfg.sampler.gamma_step_cap = s.value("gamma_step_cap", cfg.sampler.gamma_step_cap);
    cfg.sampler.burn_in_macro = s.value("burn_in_macro", cfg.sampler.burn_in_macro);
    cfg.sampler.target_autocorr =
        s.value("target_autocorr", cfg.sampler.target_autocorr);
    cfg.sampler.replica_horizon_macro =
        s.value("replica_horizon_macro", cfg.sampler.replica_horizon_macro);
    cfg.sampler.pilot_states = s.value("pilot_states", cfg.sampler.pilot_states);
    cfg.sampler.overdamped_step =
        s.value("overdamped_step", cfg.sampler.overdamped_step);
    if (s.contains("provenance")) {
      const std::string p = s["provenance"].get<std::string>();
      if (p == "thinned") {
        cfg.sampler.provenance = Provenance::ThinnedTrajectory;
      } else if (p == "replicas") {
        cfg.sampler.provenance = Provenance::ReplicaTerminal;
      } else {
        fail(source, "sampling.provenance must be thinned / replicas");
      }
    }
    if (!(cfg.sampler.h0 > 0.0) || !(cfg.sampler.gamma_step_cap > 0.0)) {
      fail(source, "sampling steps must be positive");
    }
    if (cfg.sampler.target_autocorr <= 0.0 || cfg.sampler.target_autocorr >= 1.0) {
      fail(source, "sampling.target_autocorr must lie in (0, 1)");
    }
  }

  if (root.contains("rate_sweep")) {
    const auto& r = root["rate_sweep"];
    require_keys(r, {"gammas", "samples", "repetitions", "method"}, source,
                 "rate_sweep");
    if (r.contains("gammas")) cfg.rate.gammas = r["gammas"].get<std::vector<double>>();
    cfg.rate.samples = r.value("samples", cfg.rate.samples);
    cfg.rate.repetitions = r.value("repetitions", cfg.rate.repetitions);
    if (r.contains("method")) {
      cfg.rate.method = parse_method(r["method"].get<std::string>(), source);
    }
    for (double g : cfg.rate.gammas) {
      if (!(g >= 2.0)) fail(source, "rate_sweep.gammas must all be >= 2");
    }
    if (cfg.rate.gammas.size() < 3) fail(source, "rate_sweep needs >= 3 gammas");
    if (cfg.rate.samples < 2 || cfg.rate.repetitions < 2) {
      fail(source, "rate_sweep needs samples >= 2 and repetitions >= 2");
    }
  }

  if (root.contains("coupling")) {
    const auto& c = root["coupling"];
    require_keys(c, {"gammas", "t", "delta", "replicas", "h0"}, source, "coupling");
    if (c.contains("gammas")) {
      cfg.coupling.gammas = c["gammas"].get<std::vector<double>>();
    }
    cfg.coupling.t = c.value("t", cfg.coupling.t);
    cfg.coupling.delta = c.value("delta", cfg.coupling.delta);
    cfg.coupling.replicas = c.value("replicas", cfg.coupling.replicas);
    cfg.coupling.h0 = c.value("h0", cfg.coupling.h0);
    for (double g : cfg.coupling.gammas) {
      if (!(g >= 2.0)) fail(source, "coupling.gammas must all be >= 2");
    }
    if (!(cfg.coupling.t > 0.0) || !(cfg.coupling.delta > 0.0)) {
      fail(source, "coupling.t and coupling.delta must be positive");
    }
  }

  if (root.contains("sinkhorn")) {
    const auto& s = root["sinkhorn"];
    require_keys(s, {"epsilon_scale", "tolerance", "max_iterations"}, source,
                 "sinkhorn");
    cfg.sinkhorn.epsilon_scale = s.value("epsilon_scale", cfg.sinkhorn.epsilon_scale);
    cfg.sinkhorn.tolerance = s.value("tolerance", cfg.sinkhorn.tolerance);
    cfg.sinkhorn.max_iterations =
        s.value("max_iterations", cfg.sinkhorn.max_iterations);
  }

  if (root.contains("seed")) cfg.seed = root["seed"].get<std::uint64_t>();
  if (root.contains("threads")) cfg.threads = root["threads"].get<int>();
  if (root.contains("output_dir")) cfg.output_dir = root["output_dir"].get<std::string>();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  return parse_config(read_file(path), path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string config_digest(const std::string& json_text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : json_text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace odlab
