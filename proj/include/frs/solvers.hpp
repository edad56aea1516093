#pragma once

#include "frs/kernel.hpp"
#include "frs/quadrature.hpp"
#include "frs/source.hpp"
#include "frs/spectral.hpp"

#include <Eigen/Dense>

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace frs {

enum class ProblemKind { forward, nonlocal, backward };

std::string to_string(ProblemKind kind);
ProblemKind problem_kind_from_string(const std::string& name);

struct ProblemSpec {
  ProblemKind kind;
  OperatorPtr op;
  double rho;
  double gamma;
  double horizon;
  /// phi (forward), the non-local datum (nonlocal) or psi (backward).
  CoefficientField data;
  Source source;
  /// Strictly increasing, first node 0, last node horizon.
  Eigen::VectorXd time_grid;

  void validate() const;
  KernelParams params(int k) const { return {rho, gamma, op->eigenvalue(k)}; }
};

/// Failure inside one mode; carries the 1-based mode index (0 if not mode-specific).
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, int mode) : std::runtime_error(what), mode_(mode) {}
  int mode() const noexcept { return mode_; }

 private:
  int mode_;
};

class GridTooCoarse : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Interior nodes needed before finite-difference diagnostics are attempted.
inline constexpr int kMinInteriorNodes = 64;

/// Per-node mode-space norms. Entries are NaN where a quantity is not defined
/// (node 0 for derivative terms, both ends for the residual).
struct TraceDiagnostics {
  Eigen::VectorXd norm_u;
  Eigen::VectorXd norm_Au;
  Eigen::VectorXd norm_Dt_u;
  Eigen::VectorXd norm_A_Drho_u;
  Eigen::VectorXd residual;
};

struct SolutionTrace {
  Eigen::VectorXd nodes;
  /// coefficients(i, k-1) = u_k(nodes(i)).
  Eigen::MatrixXd coefficients;
  OperatorPtr op;
  std::vector<std::string> warnings;
  std::optional<TraceDiagnostics> diagnostics;
  /// Named scalar checks, e.g. "nonlocal_gap", "terminal_gap", "residual_max".
  std::map<std::string, double> metrics;

  int modes() const { return static_cast<int>(coefficients.cols()); }
  CoefficientField field(Eigen::Index node) const;
};

/// int_0^t B(lambda, s) f(t - s) ds with a mesh graded toward both ends.
Estimate convolve_B(const KernelParams& p, const std::function<double(double)>& f, double t,
                    const QuadratureConfig& q = {});

/// V_k(t_i) for every node and mode: the response to the source with zero data.
Eigen::MatrixXd source_response(const ProblemSpec& spec, const QuadratureConfig& q = {});

SolutionTrace solve_forward(const ProblemSpec& spec, const QuadratureConfig& q = {});

/// W(t) = sum_k A(lambda_k, t) / (A(lambda_k, T) - 1) psi_k v_k on the spec's grid.
SolutionTrace solve_auxiliary_W(const CoefficientField& psi, const ProblemSpec& spec, const QuadratureConfig& q = {});

SolutionTrace solve_nonlocal(const ProblemSpec& spec, const QuadratureConfig& q = {});
SolutionTrace solve_backward(const ProblemSpec& spec, const QuadratureConfig& q = {});

/// Dispatches on spec.kind.
SolutionTrace solve(const ProblemSpec& spec, const QuadratureConfig& q = {});

/// ||D_t u + A u + gamma A D^rho u - f|| per node; NaN at the two end nodes.
/// Throws GridTooCoarse below kMinInteriorNodes interior nodes.
Eigen::VectorXd residual(const SolutionTrace& trace, const ProblemSpec& spec);

TraceDiagnostics compute_diagnostics(const SolutionTrace& trace, const ProblemSpec& spec);

struct CoercivityRow {
  double t;
  double norm_Dt_u;
  double norm_Au;
  double norm_A_Drho_u;
  double weighted_Dt_u;
};

/// Rows for nodes 1..n.
std::vector<CoercivityRow> coercivity_report(const SolutionTrace& trace, const ProblemSpec& spec);

/// Largest residual over interior nodes with t >= from.
double max_residual(const Eigen::VectorXd& nodes, const Eigen::VectorXd& residual, double from);

/// Thread count used for per-mode work; 0 means hardware concurrency.
void set_mode_threads(unsigned threads);
unsigned mode_threads();

}  // namespace frs
