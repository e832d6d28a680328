#pragma once

// YAML experiment configuration. Unknown keys, wrong types and out-of-range
// values raise ConfigError with the offending key and its line.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <gsfcv/dynamics.hpp>
#include <gsfcv/gauge.hpp>

namespace gsfcv::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Experiment {
  embed_profiles,
  pendulum,
  damped,
  pu,
  variational_checks,
  optctrl_lqr,
  ring_suite,
};

const char* to_string(Experiment e) noexcept;

struct GaugeSection {
  GaugeKind kind = GaugeKind::power;
  double eps_max = 0.0625;
  double eps_min = 3.0517578125e-05;
  std::size_t points = 12;

  Gauge make() const;
};

struct MollifierSection {
  int moment_order = 4;
  double scale_exponent = 0.5;
};

struct ControlSection {
  double t1 = 0.0;
  double t2 = 1.0;
  double q1 = 1.0;
  std::size_t nodes = 2001;
  double alpha = 0.5;
  int max_iter = 200;
  double grad_tol = 1e-6;
  double tol = 1e-10;
};

// Profiles are sampled on x = s / b_eps with s in [-span, span].
struct ProfileSection {
  std::size_t nodes = 201;
  double span = 1.25;
};

struct ExperimentConfig {
  Experiment experiment = Experiment::embed_profiles;
  GaugeSection gauge;
  MollifierSection mollifier;
  SystemKind system = SystemKind::pendulum;
  SystemParams params;
  std::vector<double> ic;
  double t1 = 0.0;
  double t2 = 10.0;
  double tol = 1e-10;
  ControlSection control;
  ProfileSection profile;
  std::string output_dir = "out";
  std::uint64_t seed = 1;
  // Raw text, hashed into the manifest.
  std::string source;
  std::string origin;
  // Source line of every key seen, by dotted path.
  std::map<std::string, int> lines;
};

struct AcceptanceConfig {
  GaugeSection gauge;
  MollifierSection mollifier;
  std::uint64_t seed = 20240611;
  int property_instances = 100;
  std::string source;
};

ExperimentConfig parse_experiment_config(const std::string& text,
                                         const std::string& origin);
ExperimentConfig load_experiment_config(const std::string& path);

AcceptanceConfig parse_acceptance_config(const std::string& text,
                                         const std::string& origin);
AcceptanceConfig load_acceptance_config(const std::string& path);

// Checks cross-field ranges after command-line overrides were applied.
void validate(const ExperimentConfig& c);

}  // namespace gsfcv::cli
