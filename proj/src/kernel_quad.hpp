#pragma once

#include <functional>
#include <limits>

#include "ldp/kernel.hpp"
#include "quadrature.hpp"

namespace ldp::detail {

// The number mantissa * exp(exponent); lets integrands carry e^{p.y} factors
// that would overflow on their own but are tamed by the kernel's decay.
struct Scaled {
  double mantissa = 0.0;
  double exponent = 0.0;
};

using RayIntegrand = std::function<Scaled(double, Direction)>;

double sphere_area(int dimension);

// Integrates f(r, nu) J(r nu) over {|y| > r_min}. When `radial_integrand` is
// set and the kernel is radial, f is assumed independent of nu and the
// integral collapses to one half-line; otherwise N = 1 sums both rays and
// N = 2 integrates over the polar angle.
QuadResult integrate_kernel(const Kernel& k, const RayIntegrand& f,
                            double r_min, double delta, bool radial_integrand,
                            const QuadOptions& opt,
                            double r_max = std::numeric_limits<double>::infinity());

// Integrates f(r) J(r nu) r^{N-1} along one ray, combining exponents before
// exponentiating.
QuadResult integrate_along(const Kernel& k, Direction nu, const std::function<Scaled(double)>& f,
                           double r_min, double delta, const QuadOptions& opt,
                           double r_max = std::numeric_limits<double>::infinity());

}  // namespace ldp::detail
