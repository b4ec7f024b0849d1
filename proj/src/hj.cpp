#include "ldp/hj.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "ldp/error.hpp"

namespace ldp {

SlopeTable::SlopeTable(const std::function<double(double)>& h,
                       const std::function<double(double)>& dh, double cap, int points)
    : cap_(cap), step_(2.0 * cap / (points - 1)), max_abs_slope_(0.0), argmin_(0.0) {
  require(cap > 0.0 && points >= 3, ErrorKind::InvalidArgument, "slope table: bad range");
  v_.resize(points);
  d_.resize(points);
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < points; ++k) {
    const double p = k == points - 1 ? cap : -cap + k * step_;
    v_[k] = h(p);
    d_[k] = dh(p);
    require(std::isfinite(v_[k]) && std::isfinite(d_[k]), ErrorKind::DomainViolation,
            fmt::format("slope table: H is not finite at p = {}", p));
    max_abs_slope_ = std::max(max_abs_slope_, std::abs(d_[k]));
    if (v_[k] < best) {
      best = v_[k];
      argmin_ = p;
    }
  }
}

double SlopeTable::value(double p) const {
  if (p <= -cap_) return v_.front() + d_.front() * (p + cap_);
  if (p >= cap_) return v_.back() + d_.back() * (p - cap_);
  const double u = (p + cap_) / step_;
  const std::size_t k = std::min(static_cast<std::size_t>(u), v_.size() - 2);
  const double s = u - static_cast<double>(k);
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * v_[k] + (s3 - 2 * s2 + s) * step_ * d_[k] +
         (-2 * s3 + 3 * s2) * v_[k + 1] + (s3 - s2) * step_ * d_[k + 1];
}

double SlopeTable::slope(double p) const {
  if (p <= -cap_) return d_.front();
  if (p >= cap_) return d_.back();
  const double u = (p + cap_) / step_;
  const std::size_t k = std::min(static_cast<std::size_t>(u), v_.size() - 2);
  const double s = u - static_cast<double>(k);
  const double s2 = s * s;
  return (6 * s2 - 6 * s) / step_ * (v_[k] - v_[k + 1]) + (3 * s2 - 4 * s + 1) * d_[k] +
         (3 * s2 - 2 * s) * d_[k + 1];
}

SlopeTable tabulate(const Hamiltonian& h, double cap) {
  require(h.dimension() == 1, ErrorKind::InvalidArgument, "hj: one-dimensional Hamiltonians only");
  Vec e(1);
  for (double s : {1.0, -1.0}) {
    e[0] = s;
    if (cap > h.domain_limit(e) * (1.0 - kDomainMargin))
      fail(ErrorKind::DomainViolation,
           fmt::format("hj: slope range {} leaves the domain of H; use the constrained solver", cap));
  }
  return SlopeTable([&](double p) { return h.value1(p); }, [&](double p) { return h.derivative1(p); },
                    cap);
}

double numerical_hamiltonian(const SlopeTable& H, NumericalFlux flux, double a, double b) {
  if (flux == NumericalFlux::LaxFriedrichs) {
    const double sigma = 1.1 * H.max_abs_slope();
    return H.value(0.5 * (a + b)) - 0.5 * sigma * (b - a);
  }
  const double m = H.argmin();
  return std::max(H.value(std::max(a, m)), H.value(std::min(b, m)));
}

void hj_step(const SlopeTable& H, NumericalFlux flux, std::vector<double>& field, double dt,
             double h, double clip) {
  const std::size_t n = field.size();
  double left = field[0];
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double mid = field[i];
    const double a = std::clamp((mid - left) / h, -clip, clip);
    const double b = std::clamp((field[i + 1] - mid) / h, -clip, clip);
    field[i] = mid - dt * numerical_hamiltonian(H, flux, a, b);
    left = mid;
  }
}

double hj_max_dt(const SlopeTable& H, double h) {
  const double sigma = 1.1 * H.max_abs_slope();
  return sigma > 0.0 ? 0.5 * h / sigma : h;
}

namespace {

void check_grid(const HJGrid& g, std::vector<double>& times) {
  require(g.n >= 3, ErrorKind::InvalidArgument, "hj: need at least 3 interior nodes");
  require(g.A >= 0.0 && std::isfinite(g.A), ErrorKind::InvalidArgument, "hj: A must be finite and >= 0");
  require(g.T > 0.0, ErrorKind::InvalidArgument, "hj: T must be positive");
  require(g.dt >= 0.0, ErrorKind::InvalidArgument, "hj: dt must be >= 0");
  if (times.empty()) times.push_back(g.T);
  std::sort(times.begin(), times.end());
  require(times.front() >= 0.0 && times.back() <= g.T * (1.0 + 1e-12), ErrorKind::InvalidArgument,
          "hj: snapshot times must lie in [0, T]");
}

// Smallest P with H(+-P) >= level, capped at `upper`.
double auto_cap(const Hamiltonian& H, double level, double upper) {
  Vec e(1);
  double limit = std::numeric_limits<double>::infinity();
  for (double s : {1.0, -1.0}) {
    e[0] = s;
    limit = std::min(limit, H.domain_limit(e) * (1.0 - kDomainMargin));
  }
  auto high_enough = [&](double P) {
    return std::min(H.value1(P), H.value1(-P)) >= level;
  };
  double lo = 0.0, hi = 1.0;
  while (hi < upper && !high_enough(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > limit)
      fail(ErrorKind::DomainViolation,
           "hj: the slopes needed exceed the domain of H; use the constrained solver");
  }
  if (hi >= upper) return upper;
  for (int i = 0; i < 40 && hi - lo > 1e-3 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (high_enough(mid) ? hi : lo) = mid;
  }
  return hi;
}

template <class Post>
Field march(const SlopeTable& table, NumericalFlux flux, const HJGrid& g,
            const std::vector<double>& times, double clip, Post post) {
  const double h = g.h();
  const double stable = hj_max_dt(table, h);
  double dt = g.dt > 0.0 ? g.dt : stable;
  if (dt * 1.1 * table.max_abs_slope() / h > 0.5 * (1.0 + 1e-12))
    fail(ErrorKind::CFLViolation, fmt::format("hj: dt = {} exceeds the stable step {}", dt, stable));

  Field f;
  f.dt = dt;
  f.x.resize(g.n + 2);
  for (int i = 0; i < g.n + 2; ++i) f.x[i] = -1.0 + i * h;
  f.x.back() = 1.0;
  std::vector<double> u(g.n + 2, g.A);
  u.front() = u.back() = 0.0;
  post(u);

  double t = 0.0;
  for (double target : times) {
    while (t < target * (1.0 - 1e-14)) {
      const double step = std::min(dt, target - t);
      hj_step(table, flux, u, step, h, clip);
      for (std::size_t i = 1; i + 1 < u.size(); ++i) u[i] = std::clamp(u[i], 0.0, g.A);
      post(u);
      t = std::min(t + step, target);
      if (target - t < 1e-14 * target) t = target;
    }
    f.times.push_back(target);
    f.values.push_back(u);
  }
  return f;
}

}  // namespace

Field solve_hj(const Hamiltonian& H, const HJGrid& g, std::vector<double> times) {
  check_grid(g, times);
  if (g.A == 0.0) {
    SlopeTable zero([](double) { return 0.0; }, [](double) { return 0.0; }, 1.0, 3);
    return march(zero, g.flux, g, times, 1.0, [](std::vector<double>&) {});
  }
  double cap = g.slope_cap;
  if (cap <= 0.0) {
    const double t_first = times.front() > 0.0 ? times.front() : std::min(g.T, 1e-3);
    cap = auto_cap(H, 20.0 * g.A / t_first, g.A / g.h());
  }
  const SlopeTable table = tabulate(H, cap);
  return march(table, g.flux, g, times, std::numeric_limits<double>::infinity(),
               [](std::vector<double>&) {});
}

void lipschitz_truncate(std::vector<double>& f, double lip, double h) {
  const double step = lip * h;
  for (std::size_t i = 1; i < f.size(); ++i) f[i] = std::min(f[i], f[i - 1] + step);
  for (std::size_t i = f.size() - 1; i-- > 0;) f[i] = std::min(f[i], f[i + 1] + step);
}

Field solve_hj_constrained(const Hamiltonian& H, double beta0, const HJGrid& g,
                           std::vector<double> times, double margin) {
  check_grid(g, times);
  require(beta0 > 0.0 && std::isfinite(beta0), ErrorKind::InvalidArgument,
          "hj: beta0 must be positive and finite");
  require(margin > 0.0 && margin < 1.0, ErrorKind::InvalidArgument, "hj: margin must lie in (0, 1)");
  const double cap = beta0 * (1.0 - margin);
  const double h = g.h();
  if (g.A == 0.0) {
    SlopeTable zero([](double) { return 0.0; }, [](double) { return 0.0; }, 1.0, 3);
    return march(zero, g.flux, g, times, cap, [](std::vector<double>&) {});
  }
  const SlopeTable table = tabulate(H, cap);
  return march(table, g.flux, g, times, cap,
               [&](std::vector<double>& u) { lipschitz_truncate(u, beta0, h); });
}

Field solve_hj_ladder(const Hamiltonian& H, HJGrid g, std::vector<double> times,
                      const std::vector<double>& ladder) {
  require(!ladder.empty(), ErrorKind::InvalidArgument, "hj: empty A ladder");
  const double top = *std::max_element(ladder.begin(), ladder.end());
  g.A = top;
  Field f = solve_hj(H, g, std::move(times));
  for (auto& snap : f.values)
    for (std::size_t i = 1; i + 1 < snap.size(); ++i)
      if (snap[i] >= top * (1.0 - 1e-9)) snap[i] = std::numeric_limits<double>::infinity();
  return f;
}

}  // namespace ldp
