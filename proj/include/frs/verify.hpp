#pragma once

#include "frs/config.hpp"
#include "frs/quadrature.hpp"

#include <string>
#include <vector>

namespace frs {

struct VerifyOptions {
  /// Empty runs every suite.
  std::vector<std::string> suites;
  /// Multiplies every numerical tolerance; 0 turns each tolerance check into an exact-equality demand.
  double tolerance_scale = 1.0;
  QuadratureConfig quadrature;
};

struct CheckResult {
  std::string suite;
  std::string name;
  std::string claim;
  bool passed = true;
  /// Non-gating checks record known violations without failing the run.
  bool gating = true;
  int samples = 0;
  /// Smallest slack (limit - observed) over all samples; negative on failure.
  double worst_margin = 0.0;
  double worst_observed = 0.0;
  std::string worst_case;
};

struct VerifyReport {
  std::vector<CheckResult> checks;

  bool passed() const;
  /// Names of failing gating checks.
  std::vector<std::string> failures() const;
  std::string json() const;
};

/// laplace, initial, a_properties, b_properties, identities, derivatives, limit,
/// oracle, solvers, coercivity, constants.
const std::vector<std::string>& verify_suite_names();

/// Throws std::invalid_argument for an unknown suite name.
VerifyReport run_verify(const VerifyOptions& options);

struct ConvergenceRow {
  int mode;
  double step;
  double oracle;
  double reference;
  double error;
  /// NaN on the first row of each mode.
  double observed_order;
};

/// L1 oracle against the quadrature solution u_k(T) of a forward problem, for
/// each requested mode and step. Steps must divide T.
std::vector<ConvergenceRow> run_convergence(const ProblemSpec& spec, const ConvergenceConfig& study,
                                            const QuadratureConfig& q = {});

}  // namespace frs
