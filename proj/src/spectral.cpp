#include "frs/spectral.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace frs {

SpectralOperator::SpectralOperator(OperatorKind kind, Eigen::VectorXd eigenvalues, double length)
    : kind_(kind), eigenvalues_(std::move(eigenvalues)), length_(length) {}

SpectralOperator SpectralOperator::dirichlet_laplacian_1d(double length, int modes) {
  if (!(length > 0.0) || !std::isfinite(length)) throw std::invalid_argument("domain length must be positive");
  if (modes < 1) throw std::invalid_argument("mode count must be at least 1");
  Eigen::VectorXd ev(modes);
  for (int k = 1; k <= modes; ++k) {
    const double w = k * std::numbers::pi / length;
    ev(k - 1) = w * w;
  }
  return {OperatorKind::dirichlet_laplacian_1d, std::move(ev), length};
}

SpectralOperator SpectralOperator::explicit_spectrum(Eigen::VectorXd eigenvalues) {
  if (eigenvalues.size() < 1) throw std::invalid_argument("spectrum must contain at least one eigenvalue");
  if (!(eigenvalues(0) > 0.0)) throw std::invalid_argument("eigenvalues must be positive");
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    if (!std::isfinite(eigenvalues(i))) throw std::invalid_argument("eigenvalues must be finite");
    if (i > 0 && eigenvalues(i) < eigenvalues(i - 1)) {
      throw std::invalid_argument("eigenvalues must be non-decreasing");
    }
  }
  return {OperatorKind::explicit_spectrum, std::move(eigenvalues), 0.0};
}

double SpectralOperator::eigenvalue(int k) const {
  if (k < 1 || k > modes()) throw std::out_of_range("mode index out of range");
  return eigenvalues_(k - 1);
}

double SpectralOperator::eigenfunction(int k, double x) const {
  if (!has_eigenfunctions()) throw std::logic_error("operator has no eigenfunction representation");
  if (k < 1 || k > modes()) throw std::out_of_range("mode index out of range");
  return std::sqrt(2.0 / length_) * std::sin(k * std::numbers::pi * x / length_);
}

OperatorPtr dirichlet_laplacian_1d(double length, int modes) {
  return std::make_shared<const SpectralOperator>(SpectralOperator::dirichlet_laplacian_1d(length, modes));
}

OperatorPtr explicit_spectrum(Eigen::VectorXd eigenvalues) {
  return std::make_shared<const SpectralOperator>(SpectralOperator::explicit_spectrum(std::move(eigenvalues)));
}

CoefficientField::CoefficientField(OperatorPtr op, Eigen::VectorXd coefficients)
    : op_(std::move(op)), coefficients_(std::move(coefficients)) {
  if (!op_) throw std::invalid_argument("coefficient field needs an operator");
  if (coefficients_.size() != op_->modes()) {
    throw std::invalid_argument("coefficient count must equal the operator mode count");
  }
}

CoefficientField CoefficientField::zero(OperatorPtr op) {
  const int n = op ? op->modes() : 0;
  return {std::move(op), Eigen::VectorXd::Zero(n)};
}

CoefficientField CoefficientField::unit(OperatorPtr op, int k) {
  auto field = zero(std::move(op));
  if (k < 1 || k > field.modes()) throw std::out_of_range("mode index out of range");
  Eigen::VectorXd c = field.coefficients();
  c(k - 1) = 1.0;
  return {field.op_ptr(), std::move(c)};
}

namespace {
void check_same_basis(const CoefficientField& a, const CoefficientField& b) {
  if (a.op_ptr() != b.op_ptr()) throw std::invalid_argument("fields are expanded in different bases");
}
}  // namespace

CoefficientField operator+(const CoefficientField& a, const CoefficientField& b) {
  check_same_basis(a, b);
  return {a.op_ptr(), a.coefficients() + b.coefficients()};
}

CoefficientField operator-(const CoefficientField& a, const CoefficientField& b) {
  check_same_basis(a, b);
  return {a.op_ptr(), a.coefficients() - b.coefficients()};
}

CoefficientField operator*(double s, const CoefficientField& a) { return {a.op_ptr(), s * a.coefficients()}; }

double norm_tau(const CoefficientField& field, double tau) {
  const auto& ev = field.op().eigenvalues();
  if (tau == 0.0) return field.coefficients().norm();
  return (ev.array().pow(tau) * field.coefficients().array()).matrix().norm();
}

CoefficientField apply_A(const CoefficientField& field, double tau) {
  if (tau == 0.0) return field;
  const auto& ev = field.op().eigenvalues();
  return {field.op_ptr(), (ev.array().pow(tau) * field.coefficients().array()).matrix()};
}

Eigen::VectorXd uniform_grid(double length, int points) {
  if (!(length > 0.0) || points < 2) throw std::invalid_argument("grid needs positive length and at least 2 points");
  Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(points, 0.0, length);
  x(points - 1) = length;
  return x;
}

namespace {

void check_grid(const Eigen::VectorXd& grid, const SpectralOperator& op) {
  if (!op.has_eigenfunctions()) throw std::logic_error("operator has no eigenfunction representation");
  if (grid.size() < 2) throw std::invalid_argument("spatial grid needs at least 2 points");
  for (Eigen::Index i = 1; i < grid.size(); ++i) {
    if (!(grid(i) > grid(i - 1))) throw std::invalid_argument("spatial grid must be strictly increasing");
  }
}

}  // namespace

Projection project(const Eigen::VectorXd& samples, const Eigen::VectorXd& grid, const OperatorPtr& op) {
  check_grid(grid, *op);
  if (samples.size() != grid.size()) throw std::invalid_argument("sample count must match grid size");
  const double len = op->length();
  const double span_tol = 1e-9 * len;
  if (std::abs(grid(0)) > span_tol || std::abs(grid(grid.size() - 1) - len) > span_tol) {
    throw std::invalid_argument("spatial grid must span [0, L]");
  }
  const Eigen::Index m = grid.size();
  Eigen::VectorXd weights = Eigen::VectorXd::Zero(m);
  for (Eigen::Index i = 0; i + 1 < m; ++i) {
    const double h = grid(i + 1) - grid(i);
    weights(i) += 0.5 * h;
    weights(i + 1) += 0.5 * h;
  }
  const Eigen::VectorXd weighted = weights.cwiseProduct(samples);
  Eigen::VectorXd coeffs(op->modes());
  for (int k = 1; k <= op->modes(); ++k) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) acc += weighted(i) * op->eigenfunction(k, grid(i));
    coeffs(k - 1) = acc;
  }
  // Shortest wavelength 2L/N against the coarsest spacing.
  double max_h = 0.0;
  for (Eigen::Index i = 0; i + 1 < m; ++i) max_h = std::max(max_h, grid(i + 1) - grid(i));
  const bool aliasing = (2.0 * len / op->modes()) / max_h < 8.0;
  return {CoefficientField(op, std::move(coeffs)), aliasing};
}

Eigen::VectorXd synthesize(const CoefficientField& field, const Eigen::VectorXd& grid) {
  check_grid(grid, field.op());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    double acc = 0.0;
    for (int k = 1; k <= field.modes(); ++k) acc += field(k) * field.op().eigenfunction(k, grid(i));
    out(i) = acc;
  }
  return out;
}

double tail_estimate(const CoefficientField& field) {
  const int n = field.modes();
  const double lam = field.op().eigenvalue(n);
  return lam * lam * field(n) * field(n);
}

}  // namespace frs
