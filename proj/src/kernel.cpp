#include "frs/kernel.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace frs {

KernelParams::KernelParams(double rho, double gamma, double lambda) : rho_(rho), gamma_(gamma), lambda_(lambda) {
  check_order_and_relaxation(rho, gamma);
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be positive");
}

void check_order_and_relaxation(double rho, double gamma) {
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("rho must lie strictly inside (0, 1)");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("gamma must be positive");
}

double density_A(double r, const KernelParams& p) {
  if (!(r > 0.0)) throw std::invalid_argument("density_A requires r > 0");
  return density_A<double>(r, p.rho(), p.gamma(), p.lambda());
}

double density_B(double r, const KernelParams& p) {
  if (!(r > 0.0)) throw std::invalid_argument("density_B requires r > 0");
  return density_B<double>(r, p.rho(), p.gamma(), p.lambda());
}

double laplace_A_closed_form(const KernelParams& p, double z) {
  if (!(z > 0.0)) throw std::invalid_argument("Laplace variable must be positive");
  return laplace_A<double>(z, p.rho(), p.gamma(), p.lambda());
}

double laplace_B_closed_form(const KernelParams& p, double z) {
  if (!(z > 0.0)) throw std::invalid_argument("Laplace variable must be positive");
  return laplace_B<double>(z, p.rho(), p.gamma(), p.lambda());
}

double resonance_point(const KernelParams& p) {
  auto g = [&](double r) { return resonance_function(r, p.rho(), p.gamma(), p.lambda()); };
  double lo = 0.0;
  double hi = std::max(p.lambda(), 1.0);
  while (g(hi) >= 0.0) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

enum class Moment { A, B, dB };

// Splits [0, inf) at s. Inner range: r = s u^{1/rho}, so r^rho = s^rho u and
// r^{rho-1} dr = (s^rho / rho) du. Outer range: r = s w^{-beta} with
// beta = 1/(1-rho), so r^{rho-1} = s^{rho-1} w and density_B(r) dr becomes
// bounded in w even at t = 0.
Estimate kernel_integral(const KernelParams& p, double t, Moment moment, const QuadratureConfig& q) {
  q.validate();
  const double rho = p.rho();
  const double gamma = p.gamma();
  const double lambda = p.lambda();
  const double pi = std::numbers::pi;
  const double sn = std::sin(rho * pi);
  const double cs = std::cos(rho * pi);
  const double s = q.split_point;
  const double s_rho = std::pow(s, rho);
  const double beta = 1.0 / (1.0 - rho);
  const double log_s = std::log(s);
  const double outer_scale = gamma / pi * lambda * sn * beta * std::pow(s, rho - 1.0);
  const double inner_scale = gamma / pi * lambda * sn * s_rho / rho;

  auto inner = [&](double u) {
    const double r = s * std::pow(u, 1.0 / rho);
    const double r_rho = s_rho * u;
    const double re = lambda - r + lambda * gamma * cs * r_rho;
    const double im = lambda * gamma * sn * r_rho;
    const double base = inner_scale / (re * re + im * im);
    const double decay = t > 0.0 ? std::exp(-r * t) : 1.0;
    switch (moment) {
      case Moment::A: return base * lambda * decay;
      case Moment::B: return base * r * decay;
      case Moment::dB: return -base * r * r * decay;
    }
    return 0.0;
  };

  auto outer = [&](double w) {
    const double log_r = log_s - beta * std::log(w);
    const double r = std::exp(log_r);
    const double lambda_over_r = lambda * std::exp(-log_r);
    const double r_rho1 = w / s * s_rho;  // r^{rho-1} = s^{rho-1} w
    const double re = lambda_over_r - 1.0 + lambda * gamma * cs * r_rho1;
    const double im = lambda * gamma * sn * r_rho1;
    const double base = outer_scale / (re * re + im * im);
    switch (moment) {
      case Moment::A: return base * lambda_over_r * (t > 0.0 ? std::exp(-r * t) : 1.0);
      case Moment::B: return base * (t > 0.0 ? std::exp(-r * t) : 1.0);
      case Moment::dB: return -base * std::exp(log_r - r * t);
    }
    return 0.0;
  };

  std::vector<double> inner_bp{0.0, 1.0};
  std::vector<double> outer_bp{0.0, 1.0};
  auto add_point = [&](double r) {
    if (!(r > 0.0) || !std::isfinite(r) || r == s) return;
    if (r < s) {
      inner_bp.push_back(std::pow(r / s, rho));
    } else {
      outer_bp.push_back(std::pow(s / r, 1.0 - rho));
    }
  };

  const double r_star = resonance_point(p);
  const double slope = -1.0 + lambda * gamma * cs * rho * std::pow(r_star, rho - 1.0);
  const double half_width = lambda * gamma * sn * std::pow(r_star, rho) / std::abs(slope);
  add_point(r_star);
  if (half_width < 0.5 * r_star) {
    add_point(r_star - half_width);
    add_point(r_star + half_width);
    add_point(r_star - 10.0 * half_width);
    add_point(r_star + 10.0 * half_width);
  }
  if (t > 0.0) add_point(1.0 / t);

  for (auto* bp : {&inner_bp, &outer_bp}) {
    std::sort(bp->begin(), bp->end());
    bp->erase(std::unique(bp->begin(), bp->end()), bp->end());
  }
  return quadrature::integrate_adaptive(inner, inner_bp, q) + quadrature::integrate_adaptive(outer, outer_bp, q);
}

void check_time(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("time must be finite and nonnegative");
}

}  // namespace

Estimate eval_A(const KernelParams& p, double t, const QuadratureConfig& q) {
  check_time(t);
  return kernel_integral(p, t, Moment::A, q);
}

Estimate eval_B(const KernelParams& p, double t, const QuadratureConfig& q) {
  check_time(t);
  return kernel_integral(p, t, Moment::B, q);
}

Estimate eval_dA_dt(const KernelParams& p, double t, const QuadratureConfig& q) {
  if (!(t > 0.0)) throw std::invalid_argument("eval_dA_dt requires t > 0");
  return scaled(eval_B(p, t, q), -p.lambda());
}

Estimate eval_dB_dt(const KernelParams& p, double t, const QuadratureConfig& q) {
  check_time(t);
  if (t < q.min_derivative_time) {
    throw std::domain_error("eval_dB_dt: t is below min_derivative_time; the kernel derivative is unreliable there");
  }
  return kernel_integral(p, t, Moment::dB, q);
}

namespace {

void check_bound_args(double rho, double gamma, double lambda_1, double horizon) {
  check_order_and_relaxation(rho, gamma);
  if (!(lambda_1 > 0.0)) throw std::invalid_argument("lambda_1 must be positive");
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
}

}  // namespace

Estimate lower_bound_A(double rho, double gamma, double lambda_1, double horizon, const QuadratureConfig& q) {
  check_bound_args(rho, gamma, lambda_1, horizon);
  q.validate();
  auto f = [&](double r) {
    return std::pow(r, rho - 1.0) * std::exp(-r * horizon) /
           (r * r / (lambda_1 * lambda_1) + gamma * gamma * std::pow(r, 2.0 * rho) + 1.0);
  };
  const auto integral = quadrature::integrate_semiinfinite(f, {rho - 1.0, horizon, -3.0}, q);
  return scaled(integral, gamma * std::sin(rho * std::numbers::pi) / (3.0 * std::numbers::pi));
}

Estimate lower_bound_B(double rho, double gamma, double lambda_1, double horizon, const QuadratureConfig& q) {
  check_bound_args(rho, gamma, lambda_1, horizon);
  q.validate();
  auto f = [&](double r) {
    return std::pow(r, rho) * std::exp(-r * horizon) /
           (r * r / (lambda_1 * lambda_1) + gamma * gamma * std::pow(r, 2.0 * rho) + 1.0);
  };
  const auto integral = quadrature::integrate_semiinfinite(f, {0.0, horizon, -2.0}, q);
  return scaled(integral, gamma * std::sin(rho * std::numbers::pi) / 4.0);
}

BoundConstants bound_constants(double rho, double gamma, double lambda_1, double horizon, const QuadratureConfig& q) {
  return {require(lower_bound_A(rho, gamma, lambda_1, horizon, q), "lower_bound_A"),
          require(lower_bound_B(rho, gamma, lambda_1, horizon, q), "lower_bound_B"), horizon};
}

}  // namespace frs
