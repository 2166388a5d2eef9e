#ifndef ODLAB_CONFIG_HPP
#define ODLAB_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "odlab/model.hpp"
#include "odlab/sampling.hpp"

namespace odlab {

enum class OtMethodChoice { Exact, Sorted1d, Sinkhorn };

struct RateSweepConfig {
  std::vector<double> gammas{2, 4, 8, 16, 32, 64};
  int samples = 4096;
  int repetitions = 8;
  OtMethodChoice method = OtMethodChoice::Exact;
};

struct CouplingSweepConfig {
  std::vector<double> gammas{2, 4, 8, 16, 32};
  double t = 1.0;
  double delta = 1e-2;
  int replicas = 2000;
  double h0 = 1e-3;
};

struct SinkhornConfig {
  double epsilon_scale = 0.005;  // epsilon = scale * median ground cost
  double tolerance = 1e-8;
  int max_iterations = 50000;
};

/// Full experiment description. Parsed from JSON with strict unknown-key
/// rejection: a typo anywhere in the file is an error, not a silent default.
struct ExperimentConfig {
  ModelSpec model;
  SamplerConfig sampler;
  RateSweepConfig rate;
  CouplingSweepConfig coupling;
  SinkhornConfig sinkhorn;
  std::uint64_t seed = 1;
  int threads = 0;  // 0 = hardware concurrency
  std::string output_dir = "out";

  explicit ExperimentConfig(ModelSpec m) : model(std::move(m)) {}
};

/// Parse a config from JSON text. `source_name` is used in error messages.
ExperimentConfig parse_config(const std::string& json_text,
                              const std::string& source_name = "<config>");

/// Load and parse a config file.
ExperimentConfig load_config(const std::string& path);

/// Stable 64-bit FNV-1a digest of the raw config bytes, as hex.
std::string config_digest(const std::string& json_text);

/// Reads a whole file into a string (binary mode).
std::string read_file(const std::string& path);

}  // namespace odlab

#endif
