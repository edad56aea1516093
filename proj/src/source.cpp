#include "frs/source.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

namespace frs {

Source::Source(SourceKind kind, OperatorPtr op, ModeFunction f, double lo, double hi)
    : kind_(kind), op_(std::move(op)), f_(std::move(f)), lo_(lo), hi_(hi) {
  if (!op_) throw std::invalid_argument("source needs an operator");
}

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

Source Source::zero(OperatorPtr op) {
  return {SourceKind::zero, std::move(op), [](int, double) { return 0.0; }, -kInf, kInf};
}

Source Source::constant(OperatorPtr op, double c) {
  if (!std::isfinite(c)) throw std::invalid_argument("constant source must be finite");
  return {SourceKind::constant, std::move(op), [c](int, double) { return c; }, -kInf, kInf};
}

Source Source::manufactured_t2(OperatorPtr op, double rho, double gamma) {
  if (!(rho > 0.0 && rho < 1.0) || !(gamma > 0.0)) throw std::invalid_argument("invalid rho or gamma");
  const double g3 = std::tgamma(3.0 - rho);
  auto ev = op->eigenvalues();
  auto f = [ev = std::move(ev), rho, gamma, g3](int k, double t) {
    const double lam = ev(k - 1);
    if (t <= 0.0) return 0.0;
    return 2.0 * t + lam * t * t + 2.0 * lam * gamma * std::pow(t, 2.0 - rho) / g3;
  };
  return {SourceKind::manufactured_t2, std::move(op), std::move(f), 0.0, kInf};
}

Source Source::callable(OperatorPtr op, ModeFunction f) {
  if (!f) throw std::invalid_argument("callable source is empty");
  return {SourceKind::callable, std::move(op), std::move(f), -kInf, kInf};
}

Source Source::separable(std::function<double(double)> g, CoefficientField h) {
  if (!g) throw std::invalid_argument("separable source needs a time factor");
  auto coeffs = h.coefficients();
  auto f = [g = std::move(g), coeffs = std::move(coeffs)](int k, double t) { return g(t) * coeffs(k - 1); };
  return {SourceKind::separable, h.op_ptr(), std::move(f), -kInf, kInf};
}

Source Source::sampled(OperatorPtr op, Eigen::VectorXd times, Eigen::MatrixXd values) {
  if (times.size() < 2) throw std::invalid_argument("sampled source needs at least two sample times");
  if (values.rows() != times.size() || values.cols() != op->modes()) {
    throw std::invalid_argument("sampled source must have one row per time and one column per mode");
  }
  for (Eigen::Index i = 1; i < times.size(); ++i) {
    if (!(times(i) > times(i - 1))) throw std::invalid_argument("sample times must be strictly increasing");
  }
  if (!values.allFinite() || !times.allFinite()) throw std::invalid_argument("sampled source must be finite");
  const double lo = times(0);
  const double hi = times(times.size() - 1);
  auto data = std::make_shared<const std::pair<Eigen::VectorXd, Eigen::MatrixXd>>(std::move(times), std::move(values));
  auto f = [data](int k, double t) {
    const auto& [ts, vs] = *data;
    const Eigen::Index n = ts.size();
    if (t <= ts(0)) return vs(0, k - 1);
    if (t >= ts(n - 1)) return vs(n - 1, k - 1);
    const auto it = std::upper_bound(ts.data(), ts.data() + n, t);
    const Eigen::Index j = (it - ts.data()) - 1;
    const double w = (t - ts(j)) / (ts(j + 1) - ts(j));
    return (1.0 - w) * vs(j, k - 1) + w * vs(j + 1, k - 1);
  };
  return {SourceKind::sampled, std::move(op), std::move(f), lo, hi};
}

Eigen::VectorXd Source::at(double t) const {
  Eigen::VectorXd out(modes());
  for (int k = 1; k <= modes(); ++k) out(k - 1) = f_(k, t);
  return out;
}

std::function<double(double)> Source::mode(int k) const {
  if (k < 1 || k > modes()) throw std::out_of_range("mode index out of range");
  return [f = f_, k](double t) { return f(k, t); };
}

void Source::check_covers(double horizon) const {
  const double tol = 1e-12 * std::max(1.0, horizon);
  if (lo_ > tol || hi_ < horizon - tol) throw std::invalid_argument("source sampling does not cover [0, T]");
}

double Source::max_norm_tau(const Eigen::VectorXd& times, double eps) const {
  double best = 0.0;
  for (Eigen::Index i = 0; i < times.size(); ++i) {
    best = std::max(best, norm_tau(CoefficientField(op_, at(times(i))), eps));
  }
  return best;
}

std::string Source::describe() const {
  switch (kind_) {
    case SourceKind::zero: return "zero";
    case SourceKind::constant: return "constant";
    case SourceKind::manufactured_t2: return "manufactured_t2";
    case SourceKind::callable: return "callable";
    case SourceKind::separable: return "separable";
    case SourceKind::sampled: return "sampled";
  }
  return "unknown";
}

}  // namespace frs
