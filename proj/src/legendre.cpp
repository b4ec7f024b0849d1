#include "ldp/legendre.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include <boost/math/tools/minima.hpp>

#include "ldp/error.hpp"

namespace ldp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vec scalar_vec(double x) {
  Vec v(1);
  v[0] = x;
  return v;
}

// Domain cap used by the solver: the evaluators refuse anything beyond it.
double admissible(double limit) { return std::isfinite(limit) ? limit * (1.0 - kDomainMargin) : kInf; }

bool near_boundary(double pn, double limit) {
  return std::isfinite(limit) && pn >= limit * (1.0 - 1e-4);
}

// Starting point from the asymptotic gradient law along q.
Vec asymptotic_start(const ConvexBundle& h, const Vec& q) {
  const double qn = q.norm();
  Vec p = Vec::Zero(h.dimension);
  if (qn <= 1.0) return p;
  const Vec dir = q / qn;
  const double limit = h.domain_limit(dir);
  if (std::isfinite(limit)) return (1.0 - 1.0 / qn) * admissible(limit) * dir;
  const double rho = h.support_radius ? h.support_radius(dir) : kInf;
  if (std::isfinite(rho) && rho > 0.0) return (std::log(qn) / rho) * dir;
  return p;
}

// H' along the real line, mapping overflow to an infinite slope of the right sign.
double slope_or_inf(const ConvexBundle& h, double p) {
  try {
    const double g = h.gradient(scalar_vec(p))[0];
    if (std::isfinite(g)) return g;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NonConvergence) throw;
  }
  return p > 0.0 ? kInf : -kInf;
}

ConjugateResult finish(const ConvexBundle& h, const Vec& q, const Vec& p, int iterations) {
  ConjugateResult r;
  r.argmax = p;
  r.value = p.dot(q) - h.value(p);
  r.residual = (q - h.gradient(p)).norm();
  r.iterations = iterations;
  const double pn = p.norm();
  r.hit_domain_boundary = pn > 0.0 && near_boundary(pn, h.domain_limit(p / pn));
  return r;
}

ConjugateResult conjugate_1d(const ConvexBundle& h, double q, double start,
                             const ConjugateOptions& opt) {
  const double hi_lim = admissible(h.domain_limit(scalar_vec(1.0)));
  const double lo_lim = -admissible(h.domain_limit(scalar_vec(-1.0)));
  const double tol = opt.tolerance * std::max(1.0, std::abs(q));
  auto f = [&](double p) { return slope_or_inf(h, p) - q; };
  const Vec qv = scalar_vec(q);

  double x = std::clamp(start, std::isfinite(lo_lim) ? 0.99 * lo_lim : lo_lim,
                        std::isfinite(hi_lim) ? 0.99 * hi_lim : hi_lim);
  double fx = f(x);
  int iterations = 0;
  if (std::abs(fx) <= tol) return finish(h, qv, scalar_vec(x), iterations);

  // Expand a bracket [a, b] with f(a) < 0 < f(b) away from x.
  double a = x, fa = fx, b = x, fb = fx;
  double step = std::max(1.0, std::abs(x));
  const double edge = fx < 0.0 ? hi_lim : lo_lim;
  const double sign = fx < 0.0 ? 1.0 : -1.0;
  while (true) {
    ++iterations;
    double next = x + sign * step;
    if (sign > 0.0 ? next >= edge : next <= edge) next = edge;
    const double fn = f(next);
    if (sign > 0.0) {
      if (fn >= 0.0) { b = next; fb = fn; break; }
      a = next; fa = fn;
    } else {
      if (fn <= 0.0) { a = next; fa = fn; break; }
      b = next; fb = fn;
    }
    if (next == edge) {
      // The supremum sits on the edge of the admissible domain.
      return finish(h, qv, scalar_vec(next), iterations);
    }
    step *= 2.0;
    if (iterations > opt.max_iterations)
      fail(ErrorKind::NonConvergence, "conjugate: could not bracket the maximizer");
  }

  x = std::abs(fa) < std::abs(fb) ? a : b;
  fx = std::abs(fa) < std::abs(fb) ? fa : fb;
  if (!std::isfinite(fx)) {
    x = 0.5 * (a + b);
    fx = f(x);
  }
  bool force_bisect = false;
  double prev_abs = kInf;
  for (; iterations < opt.max_iterations; ++iterations) {
    if (std::abs(fx) <= tol) break;
    if (fx < 0.0) { a = x; fa = fx; } else { b = x; fb = fx; }
    if (b - a <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(a), std::abs(b)))
      break;
    double next = 0.5 * (a + b);
    if (!force_bisect) {
      const double d = h.hess_quadform(scalar_vec(x), scalar_vec(1.0));
      const double newton = x - fx / d;
      if (std::isfinite(newton) && newton > a && newton < b) next = newton;
    }
    prev_abs = std::abs(fx);
    x = next;
    fx = f(x);
    // Bisect next time if Newton failed to halve the residual.
    force_bisect = !(std::abs(fx) <= 0.5 * prev_abs);
  }
  ConjugateResult r = finish(h, qv, scalar_vec(x), iterations);
  if (r.residual > 1e-8 * std::max(1.0, std::abs(q)) && !r.hit_domain_boundary &&
      iterations >= opt.max_iterations)
    fail(ErrorKind::NonConvergence, "conjugate: iteration budget exhausted");
  return r;
}

ConjugateResult conjugate_nd(const ConvexBundle& h, const Vec& q, Vec p,
                             const ConjugateOptions& opt) {
  const int n = h.dimension;
  const double tol = opt.tolerance * std::max(1.0, q.norm());
  auto in_domain = [&](const Vec& x) {
    const double xn = x.norm();
    return xn == 0.0 || xn <= admissible(h.domain_limit(x / xn));
  };
  auto objective = [&](const Vec& x) {
    try {
      const double v = x.dot(q) - h.value(x);
      return std::isfinite(v) ? v : -kInf;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NonConvergence) throw;
      return -kInf;
    }
  };
  if (!in_domain(p)) p.setZero();
  double phi = objective(p);
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    const Vec g = q - h.gradient(p);
    if (g.norm() <= tol) break;
    Mat hess(n, n);
    for (int i = 0; i < n; ++i) {
      Vec e = Vec::Zero(n);
      e[i] = 1.0;
      hess(i, i) = h.hess_quadform(p, e);
    }
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        Vec e = Vec::Zero(n);
        e[i] = e[j] = 1.0 / std::sqrt(2.0);
        hess(i, j) = hess(j, i) = h.hess_quadform(p, e) - 0.5 * (hess(i, i) + hess(j, j));
      }
    Vec d = hess.ldlt().solve(g);
    if (!d.allFinite() || d.dot(g) <= 0.0) d = g;
    double t = 1.0;
    bool moved = false;
    while (t > 1e-30) {
      const Vec trial = p + t * d;
      if (in_domain(trial)) {
        const double v = objective(trial);
        if (v >= phi + 1e-4 * t * g.dot(d) || (v >= phi && t * d.norm() < 1e-12 * (1.0 + p.norm()))) {
          p = trial;
          phi = v;
          moved = true;
          break;
        }
      }
      t *= 0.5;
    }
    if (!moved) break;
  }
  ConjugateResult r = finish(h, q, p, it);
  if (r.residual > 1e-8 * std::max(1.0, q.norm()) && !r.hit_domain_boundary &&
      it >= opt.max_iterations)
    fail(ErrorKind::NonConvergence, "conjugate: iteration budget exhausted");
  return r;
}

}  // namespace

ConvexBundle make_bundle(const Hamiltonian& h) {
  auto shared = std::make_shared<const Hamiltonian>(h);
  ConvexBundle b;
  b.dimension = h.dimension();
  b.value = [shared](const Vec& p) { return shared->value(p); };
  b.gradient = [shared](const Vec& p) { return shared->gradient(p); };
  b.hess_quadform = [shared](const Vec& p, const Vec& nu) { return shared->hess_quadform(p, nu); };
  b.domain_limit = [shared](const Vec& d) { return shared->domain_limit(d); };
  b.support_radius = [shared](const Vec& d) {
    const Kernel& k = shared->kernel();
    if (k.is_null()) return kInf;
    Vec nu = d / d.norm();
    return k.ray_support(Direction(nu.data(), static_cast<std::size_t>(nu.size())));
  };
  return b;
}

ConvexBundle make_bundle(const HamiltonianParams& hp) { return make_bundle(Hamiltonian(hp)); }

ConjugateResult conjugate(const ConvexBundle& h, const Vec& q, const std::optional<Vec>& start,
                          const ConjugateOptions& opt) {
  require(q.size() == h.dimension, ErrorKind::InvalidArgument, "conjugate: q has the wrong dimension");
  require(q.allFinite(), ErrorKind::InvalidArgument, "conjugate: q must be finite");
  Vec p0 = start ? *start : asymptotic_start(h, q);
  require(p0.size() == h.dimension, ErrorKind::InvalidArgument,
          "conjugate: start point has the wrong dimension");
  if (h.dimension == 1) return conjugate_1d(h, q[0], p0[0], opt);
  return conjugate_nd(h, q, p0, opt);
}

Conjugator::Conjugator(ConvexBundle h, ConjugateOptions opt) : h_(std::move(h)), opt_(opt) {}

void Conjugator::reset() {
  last_q_.reset();
  last_p_.reset();
}

ConjugateResult Conjugator::operator()(const Vec& q) {
  std::optional<Vec> start;
  if (last_q_ && last_p_ && q.size() == last_q_->size()) {
    const double a = q.norm(), b = last_q_->norm();
    if (a > 0.0 && b > 0.0 && q.dot(*last_q_) >= (1.0 - 1e-12) * a * b) start = last_p_;
  }
  ConjugateResult r = conjugate(h_, q, start, opt_);
  last_q_ = q;
  last_p_ = r.argmax;
  return r;
}

namespace {

// Maximizes c r - phi(r) over r >= 0 for convex phi with phi(0) = 0.
std::pair<double, double> maximize_ray(double c, const std::function<double(double)>& phi) {
  auto g = [&](double r) { return c * r - phi(r); };
  double r = 1.0;
  while (g(2.0 * r) >= g(r) && r < 1e150) r *= 2.0;
  const double hi = 2.0 * r;
  auto neg = [&](double x) { return -g(x); };
  auto [arg, val] = boost::math::tools::brent_find_minima(neg, 0.0, hi, 50);
  // Polish the argmax by bisection on the sign of the slope.
  auto slope = [&](double x) {
    const double h = 1e-6 * std::max(x, 1e-3);
    return g(x + h) - g(std::max(0.0, x - h));
  };
  if (arg > 0.0) {
    double lo = std::max(0.0, arg * (1.0 - 1e-4)), up = arg * (1.0 + 1e-4);
    if (slope(lo) > 0.0 && slope(up) < 0.0) {
      for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + up);
        (slope(mid) > 0.0 ? lo : up) = mid;
      }
      arg = 0.5 * (lo + up);
    }
  }
  const double best = std::max(g(arg), -val);
  if (g(0.0) >= best) return {0.0, 0.0};
  return {arg, g(arg)};
}

}  // namespace

ConjugateResult k_transform(const Kernel& k, const Vec& p) {
  require(p.size() == k.dimension, ErrorKind::InvalidArgument, "k_transform: p has the wrong dimension");
  if (std::holds_alternative<CriticalTail>(k.tail))
    fail(ErrorKind::UnsupportedTail, "k_transform: K degenerates for critical kernels");
  ConjugateResult r;
  r.argmax = Vec::Zero(k.dimension);
  const double pn = p.norm();
  if (pn == 0.0) return r;
  Vec nu = p / pn;
  Direction d(nu.data(), static_cast<std::size_t>(nu.size()));
  if (std::holds_alternative<CompactTail>(k.tail)) {
    const double rho = std::isfinite(k.ray_support(d)) ? k.ray_support(d) : std::get<CompactTail>(k.tail).rho;
    r.value = rho * pn;
    r.argmax = rho * nu;
    return r;
  }
  require(k.radial || k.dimension == 1, ErrorKind::UnsupportedTail,
          "k_transform: intermediate kernels must be radial or one-dimensional");
  const auto& omega = std::get<IntermediateTail>(k.tail).omega;
  auto phi = [&](double s) {
    if (s == 0.0) return 0.0;
    Vec y = s * nu;
    return s * omega(y);
  };
  auto [arg, val] = maximize_ray(pn, phi);
  r.value = val;
  r.argmax = arg * nu;
  if (arg > 0.0) {
    const double h = 1e-5 * arg;
    r.residual = std::abs(pn - (phi(arg + h) - phi(arg - h)) / (2.0 * h));
  }
  return r;
}

double k_inverse(const Kernel& k, double z) {
  if (!(z >= 0.0)) fail(ErrorKind::BelowRange, "k_inverse: z must be nonnegative");
  if (!k.symmetric)
    fail(ErrorKind::InvalidArgument, "k_inverse: only defined for symmetric kernels");
  if (const auto* c = std::get_if<CompactTail>(&k.tail)) return z / c->rho;
  if (const auto* c = std::get_if<CriticalTail>(&k.tail)) return c->beta0;
  Vec e = Vec::Zero(k.dimension);
  e[0] = 1.0;
  auto K = [&](double r) { return k_transform(k, r * e).value; };
  double lo = 0.0, hi = 1.0;
  while (K(hi) <= z) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) fail(ErrorKind::NonConvergence, "k_inverse: K does not reach z");
  }
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (K(mid) <= z ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace ldp
