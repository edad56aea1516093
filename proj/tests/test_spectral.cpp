#include "frs/spectral.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace frs;

TEST_CASE("dirichlet laplacian eigenpairs") {
  const auto op = dirichlet_laplacian_1d(2.0, 5);
  REQUIRE(op->modes() == 5);
  for (int k = 1; k <= 5; ++k) {
    CHECK(op->eigenvalue(k) == doctest::Approx(std::pow(k * std::numbers::pi / 2.0, 2)).epsilon(1e-15));
  }
  CHECK(op->eigenfunction(1, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(op->eigenfunction(3, 0.0)) < 1e-15);
  CHECK_THROWS_AS(op->eigenvalue(0), std::out_of_range);
  CHECK_THROWS_AS(op->eigenvalue(6), std::out_of_range);
  CHECK_THROWS_AS(dirichlet_laplacian_1d(0.0, 3), std::invalid_argument);
  CHECK_THROWS_AS(dirichlet_laplacian_1d(1.0, 0), std::invalid_argument);
}

TEST_CASE("explicit spectrum validation") {
  CHECK_NOTHROW(explicit_spectrum((Eigen::VectorXd(3) << 1.0, 1.0, 4.0).finished()));
  CHECK_THROWS_AS(explicit_spectrum(Eigen::VectorXd(0)), std::invalid_argument);
  CHECK_THROWS_AS(explicit_spectrum((Eigen::VectorXd(2) << 0.0, 1.0).finished()), std::invalid_argument);
  CHECK_THROWS_AS(explicit_spectrum((Eigen::VectorXd(2) << 2.0, 1.0).finished()), std::invalid_argument);
  const auto op = explicit_spectrum((Eigen::VectorXd(2) << 1.0, 2.0).finished());
  CHECK_FALSE(op->has_eigenfunctions());
  CHECK_THROWS_AS(op->eigenfunction(1, 0.0), std::logic_error);
}

TEST_CASE("eigenfunctions are orthonormal on the grid") {
  const auto op = dirichlet_laplacian_1d(std::numbers::pi, 6);
  const auto x = uniform_grid(std::numbers::pi, 401);
  for (int j = 1; j <= 6; ++j) {
    Eigen::VectorXd v(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) v(i) = op->eigenfunction(j, x(i));
    const auto pr = project(v, x, op);
    CHECK_FALSE(pr.aliasing_risk);
    for (int k = 1; k <= 6; ++k) CHECK(pr.field(k) == doctest::Approx(j == k ? 1.0 : 0.0).epsilon(1e-10));
  }
}

TEST_CASE("synthesize and project round trip") {
  const auto op = dirichlet_laplacian_1d(1.0, 4);
  const CoefficientField h(op, (Eigen::VectorXd(4) << 0.3, -1.0, 0.0, 0.25).finished());
  const auto x = uniform_grid(1.0, 257);
  const auto back = project(synthesize(h, x), x, op).field;
  CHECK((back.coefficients() - h.coefficients()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("coarse sampling flags aliasing") {
  const auto op = dirichlet_laplacian_1d(1.0, 16);
  const auto x = uniform_grid(1.0, 33);
  CHECK(project(Eigen::VectorXd::Zero(x.size()), x, op).aliasing_risk);
}

TEST_CASE("fractional norms and powers") {
  const auto op = explicit_spectrum((Eigen::VectorXd(2) << 4.0, 9.0).finished());
  const CoefficientField h(op, (Eigen::VectorXd(2) << 1.0, 2.0).finished());
  CHECK(norm_tau(h, 0.0) == doctest::Approx(std::sqrt(5.0)));
  CHECK(norm_tau(h, 0.5) == doctest::Approx(std::sqrt(4.0 * 1.0 + 9.0 * 4.0)));
  const auto ah = apply_A(h, 1.0);
  CHECK(ah(1) == doctest::Approx(4.0));
  CHECK(ah(2) == doctest::Approx(18.0));
  CHECK(tail_estimate(h) == doctest::Approx(81.0 * 4.0));
}

TEST_CASE("field arithmetic stays in one basis") {
  const auto op = explicit_spectrum((Eigen::VectorXd(2) << 1.0, 2.0).finished());
  const auto other = explicit_spectrum((Eigen::VectorXd(2) << 1.0, 2.0).finished());
  const auto e1 = CoefficientField::unit(op, 1);
  const auto sum = e1 + 2.0 * CoefficientField::unit(op, 2) - CoefficientField::zero(op);
  CHECK(sum(1) == 1.0);
  CHECK(sum(2) == 2.0);
  CHECK_THROWS_AS(e1 + CoefficientField::unit(other, 1), std::invalid_argument);
  CHECK_THROWS_AS(CoefficientField::unit(op, 3), std::out_of_range);
  CHECK_THROWS_AS(CoefficientField(op, Eigen::VectorXd::Zero(3)), std::invalid_argument);
}
