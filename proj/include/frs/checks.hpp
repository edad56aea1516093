#pragma once

#include "frs/kernel.hpp"
#include "frs/quadrature.hpp"

#include <span>
#include <vector>

namespace frs {

/// Truncated transform int_0^{50/z} e^{-zt} A(lambda, t) dt, graded toward t = 0.
Estimate numerical_laplace_A(const KernelParams& p, double z, const QuadratureConfig& q = {});
Estimate numerical_laplace_B(const KernelParams& p, double z, const QuadratureConfig& q = {});

/// int_0^t B(lambda, s) ds. The substitution s = t v^{1/(1-rho)} smooths the
/// s^{1-rho} behaviour of B at the origin.
Estimate integrate_B(const KernelParams& p, double t, const QuadratureConfig& q = {});

/// int_0^{t_i} B ds for an increasing list of times, accumulated interval by interval.
std::vector<Estimate> cumulative_integral_B(const KernelParams& p, std::span<const double> times,
                                            const QuadratureConfig& q = {});

}  // namespace frs
