#include "frs/checks.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace frs {

namespace {

enum class Which { A, B };

Estimate laplace(const KernelParams& p, double z, Which which, const QuadratureConfig& q) {
  if (!(z > 0.0) || !std::isfinite(z)) throw std::invalid_argument("Laplace variable must be positive");
  const double end = 50.0 / z;
  auto f = [&](double t) {
    const Estimate k = which == Which::A ? eval_A(p, t, q) : eval_B(p, t, q);
    return std::exp(-z * t) * require(k, which == Which::A ? "A" : "B");
  };
  std::vector<double> bp{0.0, end};
  for (int j = 1; j <= 30; ++j) bp.push_back(std::ldexp(end, -j));
  // resolve the initial layer of width about 1/lambda
  for (double s = 0.1 / p.lambda(); s < end; s *= 10.0) bp.push_back(s);
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
  return quadrature::integrate_adaptive(f, bp, q);
}

Estimate integrate_B_from_zero(const KernelParams& p, double t, const QuadratureConfig& q) {
  const double beta = 1.0 / (1.0 - p.rho());
  auto f = [&](double v) {
    if (v <= 0.0) return 0.0;
    const double s = t * std::pow(v, beta);
    return require(eval_B(p, s, q), "B") * t * beta * std::pow(v, beta - 1.0);
  };
  std::vector<double> bp{0.0, 1.0};
  for (double s = 0.1 / p.lambda(); s < t; s *= 10.0) bp.push_back(std::pow(s / t, 1.0 - p.rho()));
  for (int j = 1; j <= 10; ++j) bp.push_back(std::ldexp(1.0, -j));
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
  return quadrature::integrate_adaptive(f, bp, q);
}

}  // namespace

Estimate numerical_laplace_A(const KernelParams& p, double z, const QuadratureConfig& q) {
  return laplace(p, z, Which::A, q);
}

Estimate numerical_laplace_B(const KernelParams& p, double z, const QuadratureConfig& q) {
  return laplace(p, z, Which::B, q);
}

Estimate integrate_B(const KernelParams& p, double t, const QuadratureConfig& q) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("integration limit must be nonnegative");
  if (t == 0.0) return {0.0, 0.0, true, 0};
  return integrate_B_from_zero(p, t, q);
}

std::vector<Estimate> cumulative_integral_B(const KernelParams& p, std::span<const double> times,
                                            const QuadratureConfig& q) {
  std::vector<Estimate> out;
  out.reserve(times.size());
  Estimate acc{0.0, 0.0, true, 0};
  double prev = 0.0;
  for (double t : times) {
    if (!(t >= prev)) throw std::invalid_argument("times must be nonnegative and increasing");
    if (t > prev) {
      if (prev == 0.0) {
        acc = integrate_B_from_zero(p, t, q);
      } else {
        auto f = [&](double s) { return require(eval_B(p, s, q), "B"); };
        acc = acc + quadrature::integrate(f, prev, t, q);
      }
    }
    out.push_back(acc);
    prev = t;
  }
  return out;
}

}  // namespace frs
