#pragma once

#include "frs/spectral.hpp"

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace frs {

enum class SourceKind { zero, constant, manufactured_t2, callable, separable, sampled };

/// Per-mode source coefficients f_k(t) of the right-hand side.
class Source {
 public:
  using ModeFunction = std::function<double(int k, double t)>;

  static Source zero(OperatorPtr op);
  /// f_k(t) = c for every mode.
  static Source constant(OperatorPtr op, double c);
  /// f_k(t) = 2t + lambda_k t^2 + 2 lambda_k gamma t^{2-rho} / Gamma(3-rho), whose solution with zero data is t^2.
  static Source manufactured_t2(OperatorPtr op, double rho, double gamma);
  /// k is 1-based.
  static Source callable(OperatorPtr op, ModeFunction f);
  /// f_k(t) = g(t) h_k.
  static Source separable(std::function<double(double)> g, CoefficientField h);
  /// values(i, k-1) = f_k(times(i)); piecewise-linear between samples.
  static Source sampled(OperatorPtr op, Eigen::VectorXd times, Eigen::MatrixXd values);

  SourceKind kind() const noexcept { return kind_; }
  int modes() const noexcept { return op_->modes(); }
  const OperatorPtr& op_ptr() const noexcept { return op_; }
  bool is_zero() const noexcept { return kind_ == SourceKind::zero; }

  double operator()(int k, double t) const { return f_(k, t); }
  Eigen::VectorXd at(double t) const;
  /// The scalar time function of mode k.
  std::function<double(double)> mode(int k) const;

  /// Throws unless the source is defined on all of [0, horizon].
  void check_covers(double horizon) const;

  /// max over the given times of the D(A^eps) norm of f(t).
  double max_norm_tau(const Eigen::VectorXd& times, double eps) const;

  std::string describe() const;

 private:
  Source(SourceKind kind, OperatorPtr op, ModeFunction f, double lo, double hi);

  SourceKind kind_;
  OperatorPtr op_;
  ModeFunction f_;
  double lo_;
  double hi_;
};

}  // namespace frs
