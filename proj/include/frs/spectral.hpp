#pragma once

#include <Eigen/Dense>

#include <memory>

namespace frs {

enum class OperatorKind { dirichlet_laplacian_1d, explicit_spectrum };

/// A self-adjoint positive operator truncated to its first N eigenpairs.
/// Modes are indexed from 1 in the public interface.
class SpectralOperator {
 public:
  static SpectralOperator dirichlet_laplacian_1d(double length, int modes);
  static SpectralOperator explicit_spectrum(Eigen::VectorXd eigenvalues);

  OperatorKind kind() const noexcept { return kind_; }
  int modes() const noexcept { return static_cast<int>(eigenvalues_.size()); }
  const Eigen::VectorXd& eigenvalues() const noexcept { return eigenvalues_; }
  double eigenvalue(int k) const;
  /// Domain length for grid-based operators, 0 otherwise.
  double length() const noexcept { return length_; }
  bool has_eigenfunctions() const noexcept { return kind_ == OperatorKind::dirichlet_laplacian_1d; }
  /// v_k(x) = sqrt(2/L) sin(k pi x / L).
  double eigenfunction(int k, double x) const;

 private:
  SpectralOperator(OperatorKind kind, Eigen::VectorXd eigenvalues, double length);

  OperatorKind kind_;
  Eigen::VectorXd eigenvalues_;
  double length_;
};

using OperatorPtr = std::shared_ptr<const SpectralOperator>;

OperatorPtr dirichlet_laplacian_1d(double length, int modes);
OperatorPtr explicit_spectrum(Eigen::VectorXd eigenvalues);

/// Mode coefficients h_k = (h, v_k) of an element of H.
class CoefficientField {
 public:
  CoefficientField(OperatorPtr op, Eigen::VectorXd coefficients);

  static CoefficientField zero(OperatorPtr op);
  /// The k-th basis vector e_k (1-based).
  static CoefficientField unit(OperatorPtr op, int k);

  const Eigen::VectorXd& coefficients() const noexcept { return coefficients_; }
  double operator()(int k) const { return coefficients_(k - 1); }
  int modes() const noexcept { return static_cast<int>(coefficients_.size()); }
  const SpectralOperator& op() const noexcept { return *op_; }
  const OperatorPtr& op_ptr() const noexcept { return op_; }

 private:
  OperatorPtr op_;
  Eigen::VectorXd coefficients_;
};

CoefficientField operator+(const CoefficientField& a, const CoefficientField& b);
CoefficientField operator-(const CoefficientField& a, const CoefficientField& b);
CoefficientField operator*(double s, const CoefficientField& a);

/// (sum_k lambda_k^{2 tau} |h_k|^2)^{1/2}.
double norm_tau(const CoefficientField& field, double tau);

/// Coefficient-wise multiplication by lambda_k^tau.
CoefficientField apply_A(const CoefficientField& field, double tau);

/// Uniform grid of `points` nodes on [0, length], endpoints included.
Eigen::VectorXd uniform_grid(double length, int points);

struct Projection {
  CoefficientField field;
  /// Fewer than 8 grid points per shortest resolved wavelength.
  bool aliasing_risk;
};

/// Trapezoid-rule inner products (h, v_k) from samples on a grid spanning [0, L].
Projection project(const Eigen::VectorXd& samples, const Eigen::VectorXd& grid, const OperatorPtr& op);

/// sum_k h_k v_k(x) at every grid point.
Eigen::VectorXd synthesize(const CoefficientField& field, const Eigen::VectorXd& grid);

/// Truncation diagnostic lambda_N^2 |h_N|^2.
double tail_estimate(const CoefficientField& field);

}  // namespace frs
