#include "kernel_quad.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "ldp/error.hpp"

namespace ldp::detail {

double sphere_area(int dimension) {
  const double n = dimension;
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

QuadResult integrate_along(const Kernel& k, Direction nu, const std::function<Scaled(double)>& f,
                           double r_min, double delta, const QuadOptions& opt, double r_max) {
  RayPlan plan;
  plan.r_min = r_min;
  plan.delta = delta;
  plan.breaks = k.ray_breakpoints(nu);
  plan.breaks.push_back(1.0);
  plan.support = std::min(k.ray_support(nu), r_max);
  plan.singular_origin = k.singularity_exponent > 0.0;
  const int power = k.dimension - 1;
  auto g = [&](double r) {
    const Scaled s = f(r);
    if (s.mantissa == 0.0) return 0.0;
    const double log_j = k.ray_log_density(r, nu);
    if (log_j == -std::numeric_limits<double>::infinity()) return 0.0;
    double e = std::log(std::abs(s.mantissa)) + s.exponent + log_j;
    if (power > 0) e += power * std::log(r);
    return std::copysign(std::exp(e), s.mantissa);
  };
  return integrate_ray(g, plan, opt);
}

QuadResult integrate_kernel(const Kernel& k, const RayIntegrand& f,
                            double r_min, double delta, bool radial_integrand,
                            const QuadOptions& opt, double r_max) {
  if (k.is_null()) return {};
  const int n = k.dimension;
  if (k.radial && radial_integrand) {
    std::vector<double> e(static_cast<std::size_t>(n), 0.0);
    e[0] = 1.0;
    Direction nu(e);
    QuadResult r = integrate_along(k, nu, [&](double r) { return f(r, nu); }, r_min, delta, opt, r_max);
    const double area = sphere_area(n);
    return {r.value * area, r.error * area};
  }
  if (n == 1) {
    const std::array<double, 1> plus{1.0};
    const std::array<double, 1> minus{-1.0};
    QuadResult a = integrate_along(k, plus, [&](double r) { return f(r, plus); }, r_min, delta, opt, r_max);
    QuadResult b =
        integrate_along(k, minus, [&](double r) { return f(r, minus); }, r_min, delta, opt, r_max);
    return {a.value + b.value, a.error + b.error};
  }
  if (n == 2) {
    double inner_error = 0.0;
    auto inner = [&](double theta) {
      const std::array<double, 2> nu{std::cos(theta), std::sin(theta)};
      QuadResult r = integrate_along(k, nu, [&](double r) { return f(r, nu); }, r_min, delta, opt, r_max);
      inner_error = std::max(inner_error, r.error);
      return r.value;
    };
    QuadResult out;
    out.value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        inner, 0.0, 2.0 * std::numbers::pi, 10, 1e-11, &out.error);
    out.error += 2.0 * std::numbers::pi * inner_error;
    return out;
  }
  fail(ErrorKind::InvalidArgument,
       "integration over non-radial kernels is only available for N = 1, 2");
}

}  // namespace ldp::detail
