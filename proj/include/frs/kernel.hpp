#pragma once

#include "frs/quadrature.hpp"

#include <cmath>
#include <numbers>

namespace frs {

/// One scalar mode of y' + lambda (1 + gamma D^rho) y = f.
class KernelParams {
 public:
  KernelParams(double rho, double gamma, double lambda);

  double rho() const noexcept { return rho_; }
  double gamma() const noexcept { return gamma_; }
  double lambda() const noexcept { return lambda_; }

  KernelParams with_lambda(double lambda) const { return {rho_, gamma_, lambda}; }

 private:
  double rho_;
  double gamma_;
  double lambda_;
};

/// Validates 0 < rho < 1 and gamma > 0; shared by every entry point that takes
/// the pair without an eigenvalue.
void check_order_and_relaxation(double rho, double gamma);

// Closed forms are templated on the scalar so that tests can evaluate them in
// extended precision.

/// Real part of the kernel denominator on the negative axis:
/// lambda - r + lambda gamma r^rho cos(rho pi).
template <typename Scalar>
Scalar resonance_function(Scalar r, Scalar rho, Scalar gamma, Scalar lambda) {
  using std::cos;
  using std::pow;
  return lambda - r + lambda * gamma * pow(r, rho) * cos(rho * std::numbers::pi_v<Scalar>);
}

template <typename Scalar>
Scalar density_denominator(Scalar r, Scalar rho, Scalar gamma, Scalar lambda) {
  using std::pow;
  using std::sin;
  const Scalar re = resonance_function(r, rho, gamma, lambda);
  const Scalar im = lambda * gamma * pow(r, rho) * sin(rho * std::numbers::pi_v<Scalar>);
  return re * re + im * im;
}

/// Spectral density of A: (gamma/pi) lambda^2 r^{rho-1} sin(rho pi) / |denominator|^2.
template <typename Scalar>
Scalar density_A(Scalar r, Scalar rho, Scalar gamma, Scalar lambda) {
  using std::pow;
  using std::sin;
  const Scalar pi = std::numbers::pi_v<Scalar>;
  return gamma / pi * lambda * lambda * pow(r, rho - 1) * sin(rho * pi) /
         density_denominator(r, rho, gamma, lambda);
}

/// Spectral density of B: (gamma/pi) lambda r^rho sin(rho pi) / |denominator|^2.
template <typename Scalar>
Scalar density_B(Scalar r, Scalar rho, Scalar gamma, Scalar lambda) {
  using std::pow;
  using std::sin;
  const Scalar pi = std::numbers::pi_v<Scalar>;
  return gamma / pi * lambda * pow(r, rho) * sin(rho * pi) / density_denominator(r, rho, gamma, lambda);
}

/// Laplace transform of A: (1 + lambda gamma z^{rho-1}) / (z + lambda + lambda gamma z^rho).
template <typename Scalar>
Scalar laplace_A(Scalar z, Scalar rho, Scalar gamma, Scalar lambda) {
  using std::pow;
  return (1 + lambda * gamma * pow(z, rho - 1)) / (z + lambda + lambda * gamma * pow(z, rho));
}

/// Laplace transform of B: 1 / (z + lambda + lambda gamma z^rho).
template <typename Scalar>
Scalar laplace_B(Scalar z, Scalar rho, Scalar gamma, Scalar lambda) {
  using std::pow;
  return 1 / (z + lambda + lambda * gamma * pow(z, rho));
}

double density_A(double r, const KernelParams& p);
double density_B(double r, const KernelParams& p);
double laplace_A_closed_form(const KernelParams& p, double z);
double laplace_B_closed_form(const KernelParams& p, double z);

/// The unique positive root of resonance_function; the densities peak there,
/// sharply so when rho is close to 1.
double resonance_point(const KernelParams& p);

/// A(lambda, t): solution of y' + lambda(1 + gamma D^rho) y = 0, y(0) = 1.
Estimate eval_A(const KernelParams& p, double t, const QuadratureConfig& q = {});

/// B(lambda, t): the impulse response, inverse Laplace transform of
/// 1 / (z + lambda + lambda gamma z^rho).
Estimate eval_B(const KernelParams& p, double t, const QuadratureConfig& q = {});

/// dA/dt = -lambda B.
Estimate eval_dA_dt(const KernelParams& p, double t, const QuadratureConfig& q = {});

/// dB/dt = -int r e^{-rt} density_B(r) dr. Refuses t below q.min_derivative_time.
Estimate eval_dB_dt(const KernelParams& p, double t, const QuadratureConfig& q = {});

/// Uniform-in-k lower bound of A(lambda_k, t) on [0, T] for lambda_k >= lambda_1:
/// (gamma sin(rho pi) / 3 pi) int r^{rho-1} e^{-rT} / (r^2/lambda_1^2 + gamma^2 r^{2 rho} + 1) dr.
Estimate lower_bound_A(double rho, double gamma, double lambda_1, double horizon, const QuadratureConfig& q = {});

/// Claimed lower bound of lambda_k B(lambda_k, t) on [0, T]:
/// (gamma sin(rho pi) / 4) int r^rho e^{-rT} / (r^2/lambda_1^2 + gamma^2 r^{2 rho} + 1) dr.
/// This constant is not valid for every parameter set; see README.
Estimate lower_bound_B(double rho, double gamma, double lambda_1, double horizon, const QuadratureConfig& q = {});

struct BoundConstants {
  double c_lower_A;
  double c_lower_B;
  double horizon;
};

BoundConstants bound_constants(double rho, double gamma, double lambda_1, double horizon,
                               const QuadratureConfig& q = {});

}  // namespace frs
