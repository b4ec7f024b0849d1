#include "ldp/rate.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/tools/minima.hpp>

#include "ldp/error.hpp"

namespace ldp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vec unit(int n, int i) {
  Vec e = Vec::Zero(n);
  e[i] = 1.0;
  return e;
}

// Smallest s > 0 along the ray p = s * dir beyond s0 with H(p) = 0, or the
// admissible edge if H stays negative up to it.
double exit_root(const Hamiltonian& h, const Vec& dir, double s0) {
  const double limit = h.domain_limit(dir);
  const double edge = std::isfinite(limit) ? limit * (1.0 - kDomainMargin) : kInf;
  double lo = s0, hi = s0;
  double step = std::max(1.0, s0);
  while (true) {
    hi = std::min(lo + step, edge);
    if (h.value(hi * dir) >= 0.0) break;
    if (hi == edge) return edge;
    lo = hi;
    step *= 2.0;
    if (step > 1e300) fail(ErrorKind::NonConvergence, "rate: Hamiltonian has no exit root");
  }
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (h.value(mid * dir) < 0.0 ? lo : hi) = mid;
  }
  return hi;
}

// min over s in (0, t] of s L(d / s) for a 1-D displacement d.
double boundary_cost_1d(const Lagrangian& L, double d, double t) {
  if (d == 0.0) return 0.0;
  Vec q(1);
  q[0] = d / t;
  const ConjugateResult r = L.solve(q);
  const double h_at = r.argmax[0] * q[0] - r.value;
  if (h_at >= 0.0) return t * r.value;
  // The drift alone reaches the boundary in time.
  if (r.argmax[0] * d <= 0.0) return 0.0;
  // Leaving earlier is cheaper; the optimum sits where H(p) = 0, cost p d.
  Vec dir(1);
  dir[0] = d > 0.0 ? 1.0 : -1.0;
  const double s = exit_root(L.hamiltonian(), dir, std::abs(r.argmax[0]));
  return s * std::abs(d);
}

double boundary_cost_nd(const Lagrangian& L, const Vec& d, double t) {
  if (d.norm() == 0.0) return 0.0;
  auto g = [&](double log_s) {
    const double s = std::exp(log_s);
    return s * L.value(d / s);
  };
  const double hi = std::log(t);
  const double at_t = g(hi);
  auto [arg, val] = boost::math::tools::brent_find_minima(g, hi - 14.0 * std::numbers::ln10, hi, 40);
  (void)arg;
  return std::min(val, at_t);
}

}  // namespace

HamiltonianParams jump_form_params(Kernel k, double A, const Vec& B) {
  const int n = k.dimension;
  require(B.size() == n, ErrorKind::InvalidArgument, "jump_form_params: drift has the wrong dimension");
  HamiltonianParams hp;
  hp.A = A * Mat::Identity(n, n);
  hp.B = B;
  hp.compensated = k.singularity_exponent >= 1.0;
  hp.kernel = std::move(k);
  return hp;
}

HamiltonianParams jump_form_params(Kernel k, double A, double B) {
  require(k.dimension == 1, ErrorKind::InvalidArgument, "jump_form_params: scalar drift needs N = 1");
  Vec b(1);
  b[0] = B;
  return jump_form_params(std::move(k), A, b);
}

Lagrangian::Lagrangian(HamiltonianParams hp)
    : h_(std::move(hp)),
      bundle_(make_bundle(h_)),
      regime_(regime_of(h_.kernel().tail)),
      symmetric_(h_.kernel().symmetric && h_.params().B.isZero(0.0)) {
  if (h_.kernel().is_null()) regime_ = Regime::Compact;
}

ConjugateResult Lagrangian::solve(const Vec& q) const { return conjugate(bundle_, q); }

double Lagrangian::value(const Vec& q) const { return solve(q).value; }

double Lagrangian::radial(double r) const { return value(r * unit(dimension(), 0)); }

Lagrangian make_lagrangian(HamiltonianParams hp) { return Lagrangian(std::move(hp)); }

RateResult rate_iinf(const Lagrangian& L, const Vec& x, double t) {
  require(t > 0.0 && std::isfinite(t), ErrorKind::InvalidArgument, "rate: t must be positive");
  require(x.size() == L.dimension(), ErrorKind::InvalidArgument, "rate: x has the wrong dimension");
  const double xn = x.norm();
  require(xn <= 1.0 + 1e-12, ErrorKind::DomainViolation, "rate: x must lie in the closed unit ball");
  const int n = L.dimension();
  RateResult out;
  out.regime = L.regime();

  if (n == 1) {
    const double left = boundary_cost_1d(L, -1.0 - x[0], t);
    const double right = boundary_cost_1d(L, 1.0 - x[0], t);
    out.value = std::min(left, right);
    out.minimizing_boundary_point = unit(1, 0) * (right <= left ? 1.0 : -1.0);
    return out;
  }

  const Vec radial_dir = xn > 0.0 ? Vec(x / xn) : unit(n, 0);
  if (L.symmetric() && L.hamiltonian().kernel().radial) {
    const double d = std::max(0.0, 1.0 - xn);
    out.value = d == 0.0 ? 0.0 : t * L.radial(d / t);
    out.minimizing_boundary_point = radial_dir;
    return out;
  }

  require(n == 2, ErrorKind::InvalidArgument, "rate: boundary search supports N <= 2");
  auto point = [](double a) {
    Vec y(2);
    y << std::cos(a), std::sin(a);
    return y;
  };
  auto cost = [&](double a) { return boundary_cost_nd(L, point(a) - x, t); };
  constexpr int kAngles = 256;
  const double da = 2.0 * std::numbers::pi / kAngles;
  double best_a = 0.0, best = kInf;
  for (int i = 0; i < kAngles; ++i) {
    const double c = cost(i * da);
    if (c < best) {
      best = c;
      best_a = i * da;
    }
  }
  auto [a, v] = boost::math::tools::brent_find_minima(cost, best_a - da, best_a + da, 30);
  if (v < best) {
    best = v;
    best_a = a;
  }
  out.value = best;
  out.minimizing_boundary_point = point(best_a);
  return out;
}

double lax_oleinik(const Lagrangian& L, double A, const Vec& x, double t) {
  require(A >= 0.0, ErrorKind::InvalidArgument, "lax_oleinik: A must be nonnegative");
  if (A == 0.0) return 0.0;
  const double v = rate_iinf(L, x, t).value;
  return std::min(A, v);
}

double predicted_log_bound(const Kernel& k, double R, double theta, double t) {
  require(R > std::numbers::e, ErrorKind::InvalidArgument, "predicted_log_bound: R must exceed e");
  require(theta >= 0.0 && theta < 1.0, ErrorKind::InvalidArgument,
          "predicted_log_bound: theta must lie in [0, 1)");
  require(t > 0.0, ErrorKind::InvalidArgument, "predicted_log_bound: t must be positive");
  const double scale = (1.0 - theta) * R;
  switch (regime_of(k.tail)) {
    case Regime::Compact: {
      // An asymmetric compact kernel is dominated by a symmetric one with the
      // same outer radius, so the formula applies unchanged.
      require(k.symmetric || k.singularity_exponent == 0.0, ErrorKind::MajorizationUnavailable,
              "predicted_log_bound: no symmetric majorant for this kernel");
      return scale * std::log(R) / std::get<CompactTail>(k.tail).rho;
    }
    case Regime::Intermediate:
      require(k.symmetric, ErrorKind::MajorizationUnavailable,
              "predicted_log_bound: no symmetric majorant for this kernel");
      return scale * k_inverse(k, std::log(scale / t));
    case Regime::Critical:
      return scale * std::get<CriticalTail>(k.tail).beta0;
  }
  return 0.0;
}

}  // namespace ldp
