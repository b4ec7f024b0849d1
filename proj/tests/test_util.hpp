#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ldp/kernel.hpp"

namespace testutil {

inline ldp::Kernel make(const std::string& family,
                        std::map<std::string, std::vector<double>> params = {}, int dim = 1) {
  ldp::KernelSpec s;
  s.family = family;
  s.dimension = dim;
  s.params = std::move(params);
  return ldp::build_kernel(s);
}

inline ldp::Vec v1(double x) {
  ldp::Vec v(1);
  v[0] = x;
  return v;
}

inline ldp::Vec v2(double x, double y) {
  ldp::Vec v(2);
  v << x, y;
  return v;
}

// Maximum of a concave function on [lo, hi]: dense scan, then golden section
// around the best sample.
inline std::pair<double, double> maximize_concave(const std::function<double(double)>& f,
                                                  double lo, double hi, int scan = 20000) {
  double best_x = lo, best = f(lo);
  for (int i = 1; i <= scan; ++i) {
    const double x = lo + (hi - lo) * i / scan;
    const double v = f(x);
    if (v > best) { best = v; best_x = x; }
  }
  const double cell = (hi - lo) / scan;
  double a = std::max(lo, best_x - cell), b = std::min(hi, best_x + cell);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < 200 && b - a > 1e-15 * (1.0 + std::abs(a)); ++i) {
    if (fc > fd) { b = d; d = c; fd = fc; c = b - g * (b - a); fc = f(c); }
    else { a = c; c = d; fc = fd; d = a + g * (b - a); fd = f(d); }
  }
  const double x = 0.5 * (a + b);
  return {x, std::max(f(x), best)};
}

}  // namespace testutil
