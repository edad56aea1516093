#include "frs/oracle.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace frs {

namespace {
void check_rho(double rho, const L1Grid& grid) {
  if (rho != grid.rho) throw std::invalid_argument("rho does not match the L1 grid weights");
}
}  // namespace

L1Grid make_l1_grid(double rho, double step, int count) {
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("rho must lie strictly inside (0, 1)");
  if (!(step > 0.0)) throw std::invalid_argument("L1 step must be positive");
  if (count < 1) throw std::invalid_argument("L1 grid needs at least one step");
  Eigen::VectorXd b(count);
  const double e = 1.0 - rho;
  for (int j = 0; j < count; ++j) b(j) = std::pow(j + 1.0, e) - std::pow(static_cast<double>(j), e);
  return {rho, step, count, std::move(b)};
}

double caputo_l1(std::span<const double> history, double rho, const L1Grid& grid) {
  check_rho(rho, grid);
  if (history.size() < 2) throw std::invalid_argument("caputo_l1 needs at least two history values");
  const std::size_t n = history.size() - 1;
  if (n > static_cast<std::size_t>(grid.count)) throw std::invalid_argument("history longer than the L1 grid");
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) acc += grid.weights(static_cast<Eigen::Index>(j)) * (history[n - j] - history[n - j - 1]);
  return std::pow(grid.step, -grid.rho) / std::tgamma(2.0 - grid.rho) * acc;
}

Eigen::MatrixXd caputo_l1_nonuniform(const Eigen::VectorXd& nodes, const Eigen::MatrixXd& values, double rho) {
  if (nodes.size() != values.rows() || nodes.size() < 2) throw std::invalid_argument("caputo_l1_nonuniform: bad sizes");
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("rho must lie strictly inside (0, 1)");
  const Eigen::Index n = nodes.size();
  const double e = 1.0 - rho;
  Eigen::VectorXd h = nodes.tail(n - 1) - nodes.head(n - 1);
  if ((h.array() <= 0.0).any()) throw std::invalid_argument("nodes must be strictly increasing");
  const Eigen::MatrixXd slopes = (values.bottomRows(n - 1) - values.topRows(n - 1)).array().colwise() / h.array();
  // weights(m, j) = (t_m - t_j)^{1-rho} - (t_m - t_{j+1})^{1-rho} for j < m
  Eigen::MatrixXd weights = Eigen::MatrixXd::Zero(n, n - 1);
  for (Eigen::Index m = 1; m < n; ++m) {
    for (Eigen::Index j = 0; j < m; ++j) {
      weights(m, j) = std::pow(nodes(m) - nodes(j), e) - std::pow(nodes(m) - nodes(j + 1), e);
    }
  }
  return (weights * slopes) / std::tgamma(2.0 - rho);
}

Eigen::MatrixXd caputo_l12_nonuniform(const Eigen::VectorXd& nodes, const Eigen::MatrixXd& values, double rho) {
  if (nodes.size() != values.rows() || nodes.size() < 2) throw std::invalid_argument("caputo_l12_nonuniform: bad sizes");
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("rho must lie strictly inside (0, 1)");
  const Eigen::Index n = nodes.size();
  Eigen::VectorXd h = nodes.tail(n - 1) - nodes.head(n - 1);
  if ((h.array() <= 0.0).any()) throw std::invalid_argument("nodes must be strictly increasing");
  const double e1 = 1.0 - rho;
  const double e2 = 2.0 - rho;
  // weights(m, i) multiplies u_i in the approximation at t_m
  Eigen::MatrixXd weights = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index m = 1; m < n; ++m) {
    for (Eigen::Index j = 0; j < m; ++j) {
      // s in [t_j, t_{j+1}] maps to x = t_m - s in [lo, hi]
      const double lo = nodes(m) - nodes(j + 1);
      const double hi = nodes(m) - nodes(j);
      const double i0 = (std::pow(hi, e1) - std::pow(lo, e1)) / e1;
      const double w1 = i0 / h(j);  // weight of the slope u[t_j, t_{j+1}]
      weights(m, j + 1) += w1;
      weights(m, j) -= w1;
      if (j == 0) continue;
      // u' = u[t_j,t_{j+1}] + u[t_{j-1},t_j,t_{j+1}] (2s - t_j - t_{j+1})
      const double i1 = (std::pow(hi, e2) - std::pow(lo, e2)) / e2;
      const double c = (hi + lo) * i0 - 2.0 * i1;
      const double span = h(j) + h(j - 1);
      const double a = c / (span * h(j));
      const double b = c / (span * h(j - 1));
      weights(m, j + 1) += a;
      weights(m, j) -= a + b;
      weights(m, j - 1) += b;
    }
  }
  return (weights * values) / std::tgamma(1.0 - rho);
}

Eigen::VectorXd caputo_l1_nonuniform(const Eigen::VectorXd& nodes, const Eigen::VectorXd& values, double rho) {
  return caputo_l1_nonuniform(nodes, Eigen::MatrixXd(values), rho).col(0);
}

Eigen::VectorXd solve_scalar(double lambda, double gamma, double rho, double y0, const std::function<double(double)>& f,
                             const L1Grid& grid) {
  check_rho(rho, grid);
  if (!(lambda > 0.0) || !(gamma > 0.0)) throw std::invalid_argument("lambda and gamma must be positive");
  const int n = grid.count;
  const double dt = grid.step;
  const double c = std::pow(dt, -grid.rho) / std::tgamma(2.0 - grid.rho);
  const double memory = lambda * gamma * c;
  const double diag = 1.0 / dt + lambda + memory;

  Eigen::VectorXd y(n + 1);
  y(0) = y0;
  // increments stored back to front so the history sum is a contiguous dot product
  Eigen::VectorXd reversed = Eigen::VectorXd::Zero(n + 1);
  for (int m = 1; m <= n; ++m) {
    double history = 0.0;
    if (m > 1) history = grid.weights.segment(1, m - 1).dot(reversed.segment(n - m + 1, m - 1));
    const double rhs = f(m * dt) + y(m - 1) / dt + memory * (y(m - 1) - history);
    y(m) = rhs / diag;
    reversed(n - m) = y(m) - y(m - 1);
  }
  return y;
}

Extrapolation richardson_extrapolate(double coarse, double fine, double assumed_order, std::optional<double> reference) {
  if (!(assumed_order > 0.0)) throw std::invalid_argument("assumed order must be positive");
  const double factor = std::pow(2.0, assumed_order) - 1.0;
  Extrapolation out{fine + (fine - coarse) / factor, std::numeric_limits<double>::quiet_NaN(), false};
  if (reference) {
    const double e_coarse = coarse - *reference;
    const double e_fine = fine - *reference;
    if (e_fine != 0.0 && e_coarse != 0.0) {
      out.observed_order = std::log2(std::abs(e_coarse / e_fine));
      out.order_reliable = (e_coarse > 0.0) == (e_fine > 0.0);
    }
  }
  return out;
}

Extrapolation richardson_three_level(double coarse, double mid, double fine) {
  const double d1 = coarse - mid;
  const double d2 = mid - fine;
  if (d2 == 0.0 || d1 == 0.0) return {fine, std::numeric_limits<double>::quiet_NaN(), false};
  const double order = std::log2(std::abs(d1 / d2));
  const bool reliable = (d1 > 0.0) == (d2 > 0.0) && order > 0.0;
  const double factor = reliable ? std::pow(2.0, order) - 1.0 : 1.0;
  return {fine + (fine - mid) / factor, order, reliable};
}

}  // namespace frs
