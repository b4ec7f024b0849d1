#pragma once

#include <functional>
#include <limits>
#include <vector>

namespace ldp::detail {

// Integration plan for one half-line r * nu, r in (r_min, support).
struct RayPlan {
  double r_min = 0.0;
  double delta = 0.0;               // split point near the origin, 0 = none
  std::vector<double> breaks;       // interior split points
  double support = std::numeric_limits<double>::infinity();
  bool singular_origin = false;     // integrand has an endpoint singularity at 0
};

struct QuadOptions {
  double rel_tol = 1e-13;
  double tail_tol = 1e-14;
  int max_depth = 15;
  int max_doublings = 64;
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
};

// Integrates g over the ray; unbounded support is handled by doubling pieces
// [M, 2M] until a geometric remainder estimate falls below tail_tol.
QuadResult integrate_ray(const std::function<double(double)>& g, const RayPlan& plan,
                         const QuadOptions& opt);

// Adaptive Gauss-Kronrod on a finite interval.
QuadResult integrate_interval(const std::function<double(double)>& g, double a, double b,
                              const QuadOptions& opt);

// exp(x) - 1 - x without cancellation.
double expm1_minus_x(double x);
// cosh(x) - 1 without cancellation.
double cosh_minus_1(double x);
// I_0(x) - 1 without cancellation.
double bessel_i0_minus_1(double x);

}  // namespace ldp::detail
