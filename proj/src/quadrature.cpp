#include "quadrature.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "ldp/error.hpp"

namespace ldp::detail {

namespace {

using boost::math::quadrature::gauss_kronrod;
using boost::math::quadrature::tanh_sinh;

QuadResult tanh_sinh_piece(const std::function<double(double)>& g, double a, double b,
                           const QuadOptions& opt) {
  thread_local tanh_sinh<double> integrator;
  QuadResult r;
  double l1 = 0.0;
  r.value = integrator.integrate(g, a, b, opt.rel_tol, &r.error, &l1);
  return r;
}

}  // namespace

QuadResult integrate_interval(const std::function<double(double)>& g, double a, double b,
                              const QuadOptions& opt) {
  QuadResult r;
  if (!(b > a)) return r;
  r.value = gauss_kronrod<double, 31>::integrate(g, a, b, opt.max_depth, opt.rel_tol, &r.error);
  return r;
}

QuadResult integrate_ray(const std::function<double(double)>& g, const RayPlan& plan,
                         const QuadOptions& opt) {
  std::vector<double> pts{plan.r_min};
  auto add = [&](double x) {
    if (x > plan.r_min && x < plan.support && std::isfinite(x)) pts.push_back(x);
  };
  if (plan.delta > 0.0) add(plan.delta);
  for (double b : plan.breaks) add(b);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const bool bounded = std::isfinite(plan.support);
  if (bounded) pts.push_back(plan.support);

  QuadResult total;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const bool first = i == 0 && plan.singular_origin;
    QuadResult piece = first ? tanh_sinh_piece(g, pts[i], pts[i + 1], opt)
                             : integrate_interval(g, pts[i], pts[i + 1], opt);
    total.value += piece.value;
    total.error += piece.error;
  }
  if (bounded) return total;

  double M = std::max(1.0, pts.back());
  if (pts.back() < M) {
    QuadResult piece = integrate_interval(g, pts.back(), M, opt);
    total.value += piece.value;
    total.error += piece.error;
  }
  double prev = -1.0;
  for (int k = 0; k < opt.max_doublings; ++k) {
    QuadResult piece = integrate_interval(g, M, 2.0 * M, opt);
    total.value += piece.value;
    total.error += piece.error;
    const double cur = std::abs(piece.value);
    if (!std::isfinite(total.value)) fail(ErrorKind::NonConvergence, "tail integral diverges");
    if (prev >= 0.0 && cur <= prev) {
      const double ratio = prev > 0.0 ? cur / prev : 0.0;
      const double remainder = ratio < 1.0 ? cur * ratio / (1.0 - ratio) : cur;
      if (remainder <= opt.tail_tol * std::abs(total.value) ||
          (cur == 0.0 && total.value == 0.0))
        return total;
    }
    prev = cur;
    M *= 2.0;
  }
  fail(ErrorKind::NonConvergence, "tail truncation did not settle within the doubling budget");
}

double expm1_minus_x(double x) {
  if (std::abs(x) < 0.1) {
    // x^2/2! + x^3/3! + ... summed until negligible
    double term = x * x / 2.0;
    double sum = term;
    for (int n = 3; n < 30; ++n) {
      term *= x / n;
      sum += term;
      if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
  }
  return std::expm1(x) - x;
}

double cosh_minus_1(double x) {
  const double s = std::sinh(0.5 * x);
  return 2.0 * s * s;
}

double bessel_i0_minus_1(double x) {
  if (std::abs(x) < 0.5) {
    // sum_{k>=1} (x^2/4)^k / (k!)^2
    const double y = 0.25 * x * x;
    double term = 1.0;
    double sum = 0.0;
    for (int k = 1; k < 30; ++k) {
      term *= y / (static_cast<double>(k) * k);
      sum += term;
      if (term < 1e-18 * sum) break;
    }
    return sum;
  }
  return std::cyl_bessel_i(0.0, x) - 1.0;
}

}  // namespace ldp::detail
