#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace frs {

/// Tolerances and layout of the improper-integral quadrature used by every
/// kernel evaluation.
struct QuadratureConfig {
  double rel_tol = 1e-8;
  double abs_tol = 1e-12;
  /// Maximum bisection depth of any single panel.
  int max_refinements = 30;
  /// Point separating the algebraically singular range of r from the decaying one.
  double split_point = 1.0;
  /// Smallest time at which the kernel time derivative is evaluated.
  double min_derivative_time = 1e-6;

  void validate() const;
};

/// A quadrature value together with its estimated absolute error. When
/// `converged` is false the value is the best estimate reached before the
/// refinement budget ran out.
struct Estimate {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
  long evaluations = 0;
};

inline Estimate operator+(const Estimate& a, const Estimate& b) {
  return {a.value + b.value, a.error + b.error, a.converged && b.converged,
          a.evaluations + b.evaluations};
}

inline Estimate scaled(const Estimate& e, double factor) {
  return {e.value * factor, e.error * std::abs(factor), e.converged, e.evaluations};
}

class NonconvergenceError : public std::runtime_error {
 public:
  NonconvergenceError(const std::string& what, Estimate best)
      : std::runtime_error(what), best_(best) {}
  const Estimate& best() const noexcept { return best_; }

 private:
  Estimate best_;
};

/// Returns the value of a converged estimate, throws NonconvergenceError otherwise.
double require(const Estimate& e, std::string_view context);

namespace quadrature {

// 21-point Kronrod extension of the 10-point Gauss-Legendre rule (QUADPACK qk21).
inline constexpr std::array<double, 11> kKronrodNodes = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};
inline constexpr std::array<double, 11> kKronrodWeights = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077958109831074, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
inline constexpr std::array<double, 5> kGaussWeights = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct PanelResult {
  double value;
  double error;
};

/// One Gauss-Kronrod panel with the QUADPACK error heuristic.
template <class F>
PanelResult gauss_kronrod21(F&& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  std::array<double, 21> fv{};
  fv[20] = f(center);
  for (int j = 0; j < 10; ++j) {
    const double dx = half * kKronrodNodes[j];
    fv[2 * j] = f(center - dx);
    fv[2 * j + 1] = f(center + dx);
  }
  double kronrod = kKronrodWeights[10] * fv[20];
  double gauss = 0.0;
  double resabs = std::abs(kronrod);
  for (int j = 0; j < 10; ++j) {
    const double pair = fv[2 * j] + fv[2 * j + 1];
    kronrod += kKronrodWeights[j] * pair;
    resabs += kKronrodWeights[j] * (std::abs(fv[2 * j]) + std::abs(fv[2 * j + 1]));
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * pair;
  }
  const double mean = 0.5 * kronrod;
  double resasc = kKronrodWeights[10] * std::abs(fv[20] - mean);
  for (int j = 0; j < 10; ++j) {
    resasc += kKronrodWeights[j] * (std::abs(fv[2 * j] - mean) + std::abs(fv[2 * j + 1] - mean));
  }
  kronrod *= half;
  resabs *= std::abs(half);
  resasc *= std::abs(half);
  double err = std::abs((kronrod - gauss * half));
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) {
    err = std::max(50.0 * eps * resabs, err);
  }
  if (!std::isfinite(kronrod)) err = std::numeric_limits<double>::infinity();
  return {kronrod, err};
}

/// Globally adaptive Gauss-Kronrod integration over the partition given by
/// `breakpoints` (sorted, at least two entries). The panel with the largest
/// error is bisected until the total error meets the tolerance.
template <class F>
Estimate integrate_adaptive(F&& f, std::span<const double> breakpoints, const QuadratureConfig& q) {
  struct Panel {
    double a, b, value, error;
    int depth;
  };
  constexpr int kMaxPanels = 4096;
  std::vector<Panel> panels;
  Estimate out;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    const double a = breakpoints[i];
    const double b = breakpoints[i + 1];
    if (!(b > a)) continue;
    const auto r = gauss_kronrod21(f, a, b);
    panels.push_back({a, b, r.value, r.error, 0});
    out.evaluations += 21;
  }
  if (panels.empty()) return out;

  auto totals = [&] {
    double v = 0.0, e = 0.0;
    for (const auto& p : panels) {
      v += p.value;
      e += p.error;
    }
    return std::pair{v, e};
  };

  while (true) {
    const auto [value, error] = totals();
    out.value = value;
    out.error = error;
    const double tol = std::max(q.abs_tol, q.rel_tol * std::abs(value));
    if (error <= tol) {
      out.converged = std::isfinite(value);
      return out;
    }
    std::size_t worst = panels.size();
    for (std::size_t i = 0; i < panels.size(); ++i) {
      if (panels[i].depth >= q.max_refinements) continue;
      if (worst == panels.size() || panels[i].error > panels[worst].error) worst = i;
    }
    if (worst == panels.size() || panels.size() >= kMaxPanels) {
      out.converged = false;
      return out;
    }
    const Panel p = panels[worst];
    const double mid = 0.5 * (p.a + p.b);
    const auto left = gauss_kronrod21(f, p.a, mid);
    const auto right = gauss_kronrod21(f, mid, p.b);
    out.evaluations += 42;
    panels[worst] = {p.a, mid, left.value, left.error, p.depth + 1};
    panels.insert(panels.begin() + static_cast<std::ptrdiff_t>(worst) + 1,
                  Panel{mid, p.b, right.value, right.error, p.depth + 1});
  }
}

template <class F>
Estimate integrate(F&& f, double a, double b, const QuadratureConfig& q) {
  const std::array<double, 2> bp{a, b};
  return integrate_adaptive(std::forward<F>(f), std::span<const double>(bp), q);
}

/// Endpoint behaviour of an integrand on [0, inf): f(r) ~ r^singular_exponent
/// near the origin, and either e^{-r decay_scale} or r^tail_exponent at infinity.
struct EndpointBehavior {
  double singular_exponent = 0.0;
  double decay_scale = 0.0;
  double tail_exponent = -2.0;
};

/// Integrates f over [0, inf). The range is split at q.split_point; the inner
/// part uses r = s u^{1/(1+a)} to absorb the r^a singularity and the outer part
/// uses r = s w^{-beta} with beta chosen so that an r^tail_exponent decay
/// becomes a bounded integrand in w.
template <class F>
Estimate integrate_semiinfinite(F&& f, const EndpointBehavior& behavior, const QuadratureConfig& q) {
  const double a = behavior.singular_exponent;
  if (!(a > -1.0 && a <= 0.0)) throw std::invalid_argument("singular_exponent must lie in (-1, 0]");
  if (behavior.decay_scale < 0.0) throw std::invalid_argument("decay_scale must be nonnegative");
  if (behavior.decay_scale == 0.0 && !(behavior.tail_exponent < -1.0)) {
    throw std::invalid_argument("algebraic tail must decay faster than 1/r");
  }
  const double s = q.split_point;
  const double inner_power = 1.0 / (1.0 + a);
  auto inner = [&](double u) {
    const double r = s * std::pow(u, inner_power);
    const double jac = s * inner_power * std::pow(u, inner_power - 1.0);
    const double v = f(r) * jac;
    return std::isfinite(v) ? v : 0.0;
  };
  const double beta = behavior.decay_scale > 0.0 ? 1.0 : -1.0 / (behavior.tail_exponent + 1.0);
  auto outer = [&](double w) {
    const double log_r = std::log(s) - beta * std::log(w);
    const double r = std::exp(log_r);
    if (!std::isfinite(r)) return 0.0;
    const double v = f(r) * beta * r / w;
    return std::isfinite(v) ? v : 0.0;
  };
  std::vector<double> inner_bp{0.0, 1.0};
  std::vector<double> outer_bp{0.0, 1.0};
  if (behavior.decay_scale > 0.0) {
    // put a breakpoint where the exponential factor reaches e^{-1}
    const double r_decay = 1.0 / behavior.decay_scale;
    if (r_decay < s) {
      inner_bp.insert(inner_bp.begin() + 1, std::pow(r_decay / s, 1.0 / inner_power));
    } else if (r_decay > s) {
      outer_bp.insert(outer_bp.begin() + 1, std::pow(s / r_decay, 1.0 / beta));
    }
  }
  return integrate_adaptive(inner, inner_bp, q) + integrate_adaptive(outer, outer_bp, q);
}

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

/// Golub-Welsch construction of the n-point Gauss-Legendre rule.
GaussRule gauss_legendre(int n);

}  // namespace quadrature
}  // namespace frs
