#include "frs/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <sstream>

namespace frs {

void QuadratureConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw std::invalid_argument("quadrature tolerances must be positive");
  if (max_refinements < 1) throw std::invalid_argument("max_refinements must be at least 1");
  if (!(split_point > 0.0)) throw std::invalid_argument("split_point must be positive");
  if (!(min_derivative_time > 0.0)) throw std::invalid_argument("min_derivative_time must be positive");
}

double require(const Estimate& e, std::string_view context) {
  if (!e.converged) {
    std::ostringstream msg;
    msg.precision(17);
    msg << context << ": quadrature did not converge (best " << e.value << ", error bound " << e.error << ")";
    throw NonconvergenceError(msg.str(), e);
  }
  return e.value;
}

namespace quadrature {

GaussRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("Gauss-Legendre order must be positive");
  // Jacobi matrix of the Legendre recurrence: off-diagonal k / sqrt(4k^2 - 1).
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k, k - 1) = b;
    jacobi(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  GaussRule rule;
  rule.nodes = solver.eigenvalues();
  rule.weights = 2.0 * solver.eigenvectors().row(0).array().square().transpose();
  return rule;
}

}  // namespace quadrature
}  // namespace frs
