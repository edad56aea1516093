#pragma once

#include "frs/quadrature.hpp"
#include "frs/solvers.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace frs {

/// Schema or value error in a run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OutputConfig {
  std::string prefix = "trace";
  bool csv = true;
  bool json = true;
  /// `t,x,u` export; needs an operator with eigenfunctions.
  bool grid = false;
  int grid_points = 101;
};

struct ConvergenceConfig {
  std::vector<double> steps;
  /// 1-based modes compared against the oracle.
  std::vector<int> modes{1};
};

struct RunConfig {
  ProblemSpec spec;
  QuadratureConfig quadrature;
  OutputConfig output;
  std::optional<ConvergenceConfig> convergence;
  std::vector<std::string> warnings;
};

/// Numbers may be JSON numbers or decimal strings; "pi" is accepted for lengths.
/// Relative paths resolve against `base_dir`.
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

/// Parses a decimal string exactly as strtod would, or "pi".
double parse_decimal(const std::string& text);

}  // namespace frs
