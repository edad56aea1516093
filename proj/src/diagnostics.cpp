#include "frs/oracle.hpp"
#include "frs/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace frs {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_trace(const SolutionTrace& trace, const ProblemSpec& spec) {
  if (trace.nodes.size() != trace.coefficients.rows()) throw std::invalid_argument("trace has one row per node");
  if (trace.coefficients.cols() != spec.op->modes()) throw std::invalid_argument("trace and spec disagree on modes");
  const Eigen::Index interior = trace.nodes.size() - 2;
  if (interior < kMinInteriorNodes) {
    throw GridTooCoarse("finite-difference diagnostics need at least " + std::to_string(kMinInteriorNodes) +
                        " interior nodes, got " + std::to_string(std::max<Eigen::Index>(interior, 0)));
  }
}

// Three-point derivative: central on interior nodes, one-sided at the last node,
// undefined at node 0.
Eigen::MatrixXd time_derivative(const Eigen::VectorXd& t, const Eigen::MatrixXd& u) {
  const Eigen::Index n = t.size();
  Eigen::MatrixXd du(u.rows(), u.cols());
  du.row(0).setConstant(kNaN);
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    const double h1 = t(i) - t(i - 1);
    const double h2 = t(i + 1) - t(i);
    du.row(i) = -h2 / (h1 * (h1 + h2)) * u.row(i - 1) + (h2 - h1) / (h1 * h2) * u.row(i) +
                h1 / (h2 * (h1 + h2)) * u.row(i + 1);
  }
  const Eigen::Index m = n - 1;
  const double h1 = t(m) - t(m - 1);
  const double h2 = t(m - 1) - t(m - 2);
  du.row(m) = (2.0 * h1 + h2) / (h1 * (h1 + h2)) * u.row(m) - (h1 + h2) / (h1 * h2) * u.row(m - 1) +
              h1 / (h2 * (h1 + h2)) * u.row(m - 2);
  return du;
}

}  // namespace

TraceDiagnostics compute_diagnostics(const SolutionTrace& trace, const ProblemSpec& spec) {
  check_trace(trace, spec);
  const auto& t = trace.nodes;
  const auto& u = trace.coefficients;
  const Eigen::Index n = t.size();
  const Eigen::RowVectorXd lambda = spec.op->eigenvalues().transpose();

  const Eigen::MatrixXd du = time_derivative(t, u);
  const Eigen::MatrixXd au = u.array().rowwise() * lambda.array();
  const Eigen::MatrixXd drho = caputo_l12_nonuniform(t, u, spec.rho);
  const Eigen::MatrixXd a_drho = drho.array().rowwise() * lambda.array();

  TraceDiagnostics d;
  d.norm_u = u.rowwise().norm();
  d.norm_Au = au.rowwise().norm();
  d.norm_Dt_u = du.rowwise().norm();
  d.norm_A_Drho_u = a_drho.rowwise().norm();
  d.norm_Dt_u(0) = kNaN;
  d.norm_A_Drho_u(0) = kNaN;
  d.residual = Eigen::VectorXd::Constant(n, kNaN);
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    const Eigen::RowVectorXd r = du.row(i) + au.row(i) + spec.gamma * a_drho.row(i) - spec.source.at(t(i)).transpose();
    d.residual(i) = r.norm();
  }
  return d;
}

Eigen::VectorXd residual(const SolutionTrace& trace, const ProblemSpec& spec) {
  return compute_diagnostics(trace, spec).residual;
}

std::vector<CoercivityRow> coercivity_report(const SolutionTrace& trace, const ProblemSpec& spec) {
  const TraceDiagnostics d = trace.diagnostics ? *trace.diagnostics : compute_diagnostics(trace, spec);
  std::vector<CoercivityRow> rows;
  rows.reserve(static_cast<std::size_t>(trace.nodes.size()));
  for (Eigen::Index i = 1; i < trace.nodes.size(); ++i) {
    const double t = trace.nodes(i);
    rows.push_back({t, d.norm_Dt_u(i), d.norm_Au(i), d.norm_A_Drho_u(i), std::pow(t, 1.0 - spec.rho) * d.norm_Dt_u(i)});
  }
  return rows;
}

double max_residual(const Eigen::VectorXd& nodes, const Eigen::VectorXd& residual, double from) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < nodes.size(); ++i) {
    if (nodes(i) >= from && std::isfinite(residual(i))) worst = std::max(worst, residual(i));
  }
  return worst;
}

}  // namespace frs
