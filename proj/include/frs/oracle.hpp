#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <span>

namespace frs {

/// Uniform step grid with the L1 weights b_j = (j+1)^{1-rho} - j^{1-rho},
/// j = 0 .. count-1.
struct L1Grid {
  double rho;
  double step;
  int count;
  Eigen::VectorXd weights;
};

L1Grid make_l1_grid(double rho, double step, int count);

/// L1 approximation of the Caputo derivative at t_n from the history y_0..y_n:
/// step^{-rho} / Gamma(2-rho) * sum_{j<n} b_j (y_{n-j} - y_{n-j-1}).
double caputo_l1(std::span<const double> history, double rho, const L1Grid& grid);

/// L1 approximation on an arbitrary increasing grid, returned for every node
/// (zero at the first). O(n^2).
Eigen::VectorXd caputo_l1_nonuniform(const Eigen::VectorXd& nodes, const Eigen::VectorXd& values, double rho);

/// Column-wise version: values(i, c) is series c at nodes(i).
Eigen::MatrixXd caputo_l1_nonuniform(const Eigen::VectorXd& nodes, const Eigen::MatrixXd& values, double rho);

/// Caputo derivative of the interpolant that is linear on the first interval and
/// quadratic through (t_{j-1}, t_j, t_{j+1}) on later ones (L1-2). Column-wise,
/// zero at the first node; O(h^{3-rho}) on smooth data.
Eigen::MatrixXd caputo_l12_nonuniform(const Eigen::VectorXd& nodes, const Eigen::MatrixXd& values, double rho);

/// Implicit Euler + L1 solution of y' + lambda (1 + gamma D^rho) y = f,
/// y(0) = y0, at the grid nodes 0, step, ..., count * step.
Eigen::VectorXd solve_scalar(double lambda, double gamma, double rho, double y0, const std::function<double(double)>& f,
                             const L1Grid& grid);

struct Extrapolation {
  double value;
  /// NaN when it cannot be determined from the inputs.
  double observed_order;
  bool order_reliable;
};

/// Two runs at step h and h/2. The improved value assumes `assumed_order`;
/// the observed order is available only when a reference value is given.
Extrapolation richardson_extrapolate(double coarse, double fine, double assumed_order = 1.0,
                                     std::optional<double> reference = std::nullopt);

/// Three runs at h, h/2, h/4; the order is read off the successive differences,
/// which must share a sign for the estimate to be reliable.
Extrapolation richardson_three_level(double coarse, double mid, double fine);

}  // namespace frs
