#pragma once

// Experiment configuration: flat `key = value` text with array literals.
//
//   dim = 2
//   lambdas = [0.2, 0.1, 0.05]
//   z0_modes = [[1, 0, cos, 0.3], [0, 1, sin, 0.1]]   # k1, k2[, k3], kind, amplitude
//
// `#` starts a comment. Unknown keys are rejected.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "eldiff/model.hpp"
#include "eldiff/npns.hpp"

namespace eldiff {

/// Parsed value: a scalar token or a (possibly nested) list.
struct ConfigValue {
  std::string scalar;
  std::vector<ConfigValue> items;
  bool is_list = false;
};

using ConfigTable = std::map<std::string, ConfigValue>;

/// Throws ConfigError with the line number on malformed input.
ConfigTable parse_config_text(const std::string& text);

enum class DtPolicy { Auto, Fixed };

struct MmsConfig {
  int n = 32;
  double lambda = 1.0;
  double final_time = 0.5;
  std::vector<double> dts{2e-3, 1e-3, 5e-4};
  std::vector<int> grid_sizes{8, 16, 32};
  double spatial_dt = 1e-3;  ///< step for the steady spatial study
};

struct ExperimentConfig {
  int dim = 2;
  int n = 64;
  double mu = 1.0;
  double kappa0 = 0.5;
  std::vector<double> lambdas;
  ProfileSpec doping;
  ProfileSpec z0;
  std::vector<ProfileSpec> v0;  ///< one spec per component
  double final_time = 0.5;
  int snapshots = 10;
  DtPolicy dt_policy = DtPolicy::Auto;
  double dt = 1e-3;
  double limit_dt = 1e-3;
  double cfl_advect = 0.4;
  double cfl_relax = 0.5;
  std::uint64_t seed = 12345;
  std::filesystem::path output_dir = "out";
  MmsConfig mms;

  Params params(double lambda) const;
  StepControl npns_control() const;
  StepControl limit_control() const;
};

/// Environment variable that overrides `output_dir`.
inline constexpr const char* kOutputDirEnv = "ELDIFF_OUTPUT_DIR";

ExperimentConfig config_from_table(const ConfigTable& table);
ExperimentConfig parse_config(const std::string& text);
/// Reads the file and applies the output-directory override.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Throws ConfigError: lambdas strictly decreasing in (0, 0.5], at least
/// one lambda, snapshots >= 5, power-of-two N >= 8, positive times.
void validate_config(const ExperimentConfig& config);

}  // namespace eldiff
