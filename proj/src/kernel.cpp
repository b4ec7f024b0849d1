#include "ldp/kernel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <set>

#include "kernel_quad.hpp"
#include "ldp/error.hpp"

namespace ldp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double ball_volume(int n, double r) {
  const double d = n;
  return std::pow(std::numbers::pi, 0.5 * d) * std::pow(r, d) / std::tgamma(0.5 * d + 1.0);
}

double scalar(const KernelSpec& spec, const std::string& key, std::optional<double> fallback) {
  auto it = spec.params.find(key);
  if (it == spec.params.end()) {
    if (fallback) return *fallback;
    fail(ErrorKind::InvalidSpec, spec.family + ": missing parameter '" + key + "'");
  }
  if (it->second.size() != 1)
    fail(ErrorKind::InvalidSpec, spec.family + ": parameter '" + key + "' must be a number");
  return it->second.front();
}

void allow_keys(const KernelSpec& spec, std::initializer_list<const char*> keys) {
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [key, value] : spec.params) {
    if (!allowed.count(key))
      fail(ErrorKind::InvalidSpec, spec.family + ": unknown parameter '" + key + "'");
  }
}

// Shared setup for kernels whose density depends on |y| only.
Kernel radial_kernel(const std::string& family, int n, std::function<double(double)> profile,
                     std::function<double(double)> log_profile, std::vector<double> breaks,
                     double support, double moment_limit) {
  Kernel k;
  k.family = family;
  k.dimension = n;
  k.symmetric = true;
  k.radial = true;
  k.ray_density = [profile](double r, Direction) { return profile(r); };
  k.ray_log_density = [log_profile](double r, Direction) { return log_profile(r); };
  k.ray_breakpoints = [breaks](Direction) { return breaks; };
  k.ray_support = [support](Direction) { return support; };
  k.exp_moment_limit = [moment_limit](Direction) { return moment_limit; };
  return k;
}

double resolve_rho0(const KernelSpec& spec, double fallback) {
  const double rho0 = spec.rho0.value_or(fallback);
  if (!(rho0 > 0.0) || !std::isfinite(rho0))
    fail(ErrorKind::InvalidSpec, spec.family + ": rho0 must be positive");
  return rho0;
}

Kernel build_compact_uniform(const KernelSpec& spec) {
  allow_keys(spec, {"rho", "mass"});
  const double rho = scalar(spec, "rho", std::nullopt);
  const double mass = scalar(spec, "mass", 1.0);
  if (!(rho > 0.0)) fail(ErrorKind::InvalidSpec, "compact_uniform: rho must be positive");
  if (!(mass > 0.0)) fail(ErrorKind::InvalidSpec, "compact_uniform: mass must be positive");
  const double level = mass / ball_volume(spec.dimension, rho);
  const double log_level = std::log(level);
  Kernel k = radial_kernel(
      "compact_uniform", spec.dimension, [=](double r) { return r <= rho ? level : 0.0; },
      [=](double r) { return r <= rho ? log_level : -kInf; }, {}, rho, kInf);
  k.rho0 = resolve_rho0(spec, 0.5 * rho);
  if (rho < k.rho0) fail(ErrorKind::InvalidSpec, "compact_uniform: rho is smaller than rho0");
  k.tail = CompactTail{rho};
  return k;
}

Kernel build_compact_custom(const KernelSpec& spec) {
  allow_keys(spec, {"radii", "values"});
  auto radii_it = spec.params.find("radii");
  auto values_it = spec.params.find("values");
  if (radii_it == spec.params.end() || values_it == spec.params.end())
    fail(ErrorKind::InvalidSpec, "compact_custom: needs 'radii' and 'values'");
  const std::vector<double> radii = radii_it->second;
  const std::vector<double> values = values_it->second;
  if (radii.empty() || radii.size() != values.size())
    fail(ErrorKind::InvalidSpec, "compact_custom: 'radii' and 'values' must have equal length");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > (i == 0 ? 0.0 : radii[i - 1])))
      fail(ErrorKind::InvalidSpec, "compact_custom: radii must be positive and increasing");
    if (!(values[i] >= 0.0) || !std::isfinite(values[i]))
      fail(ErrorKind::InvalidSpec, "compact_custom: values must be finite and nonnegative");
  }
  const double rho = radii.back();
  auto profile = [radii, values](double r) {
    auto it = std::upper_bound(radii.begin(), radii.end(), r);
    if (it == radii.end()) return r == radii.back() ? values.back() : 0.0;
    return values[static_cast<std::size_t>(it - radii.begin())];
  };
  std::vector<double> breaks(radii.begin(), radii.end() - 1);
  Kernel k = radial_kernel(
      "compact_custom", spec.dimension, profile,
      [profile](double r) {
        const double v = profile(r);
        return v > 0.0 ? std::log(v) : -kInf;
      },
      breaks, rho, kInf);
  k.rho0 = resolve_rho0(spec, 0.5 * rho);
  if (rho < k.rho0) fail(ErrorKind::InvalidSpec, "compact_custom: outer radius is smaller than rho0");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const double inner = i == 0 ? 0.0 : radii[i - 1];
    if (inner < k.rho0 && values[i] <= 0.0)
      fail(ErrorKind::InvalidSpec, "compact_custom: density vanishes inside the ball of radius rho0");
  }
  k.tail = CompactTail{rho};
  return k;
}

Kernel build_exp_power(const KernelSpec& spec) {
  allow_keys(spec, {"alpha", "scale"});
  const double alpha = scalar(spec, "alpha", std::nullopt);
  const double scale = scalar(spec, "scale", 1.0);
  if (!(alpha > 1.0)) fail(ErrorKind::InvalidSpec, "exp_power: alpha must exceed 1");
  if (!(scale > 0.0)) fail(ErrorKind::InvalidSpec, "exp_power: scale must be positive");
  const double log_scale = std::log(scale);
  Kernel k = radial_kernel(
      "exp_power", spec.dimension, [=](double r) { return scale * std::exp(-std::pow(r, alpha)); },
      [=](double r) { return log_scale - std::pow(r, alpha); }, {}, kInf, kInf);
  k.rho0 = resolve_rho0(spec, 1.0);
  k.tail = IntermediateTail{[alpha](const Vec& y) { return std::pow(y.norm(), alpha - 1.0); }, 1.0};
  return k;
}

Kernel build_exp_linear(const KernelSpec& spec) {
  allow_keys(spec, {"alpha", "mass"});
  const double alpha = scalar(spec, "alpha", std::nullopt);
  const double mass = scalar(spec, "mass", 1.0);
  if (!(alpha > 0.0)) fail(ErrorKind::InvalidSpec, "exp_linear: alpha must be positive");
  if (!(mass > 0.0)) fail(ErrorKind::InvalidSpec, "exp_linear: mass must be positive");
  const int n = spec.dimension;
  const double c = mass * std::pow(alpha, n) / (detail::sphere_area(n) * std::tgamma(n));
  const double log_c = std::log(c);
  Kernel k = radial_kernel(
      "exp_linear", n, [=](double r) { return c * std::exp(-alpha * r); },
      [=](double r) { return log_c - alpha * r; }, {}, kInf, alpha);
  k.rho0 = resolve_rho0(spec, 1.0);
  k.tail = CriticalTail{alpha};
  return k;
}

Kernel build_super_exp(const KernelSpec& spec) {
  allow_keys(spec, {});
  // J = exp(1 - e^{|y|}), so that |y| omega(y) = e^{|y|} - 1 vanishes at the origin.
  Kernel k = radial_kernel(
      "super_exp", spec.dimension, [](double r) { return std::exp(-std::expm1(r)); },
      [](double r) { return -std::expm1(r); }, {}, kInf, kInf);
  k.rho0 = resolve_rho0(spec, 1.0);
  k.tail = IntermediateTail{[](const Vec& y) {
                              const double r = y.norm();
                              return std::expm1(r) / r;
                            },
                            1.0};
  return k;
}

Kernel build_tempered_stable(const KernelSpec& spec) {
  allow_keys(spec, {"alpha", "lambda", "scale"});
  const double alpha = scalar(spec, "alpha", std::nullopt);
  const double lambda = scalar(spec, "lambda", std::nullopt);
  const double scale = scalar(spec, "scale", 1.0);
  if (!(alpha > 0.0))
    fail(ErrorKind::InvalidSpec, "tempered_stable: alpha must be positive");
  if (alpha >= 2.0)
    fail(ErrorKind::InvalidSpec,
         "tempered_stable: singularity exponent alpha >= 2 is not a Levy measure");
  if (!(lambda > 0.0)) fail(ErrorKind::InvalidSpec, "tempered_stable: lambda must be positive");
  if (!(scale > 0.0)) fail(ErrorKind::InvalidSpec, "tempered_stable: scale must be positive");
  const double power = spec.dimension + alpha;
  const double log_scale = std::log(scale);
  Kernel k = radial_kernel(
      "tempered_stable", spec.dimension,
      [=](double r) { return scale * std::exp(-lambda * r) * std::pow(r, -power); },
      [=](double r) { return log_scale - lambda * r - power * std::log(r); }, {}, kInf, lambda);
  k.singularity_exponent = alpha;
  k.rho0 = resolve_rho0(spec, 1.0);
  k.tail = CriticalTail{lambda};
  return k;
}

Kernel build_asymmetric_demo(const KernelSpec& spec) {
  allow_keys(spec, {});
  if (spec.dimension != 1)
    fail(ErrorKind::InvalidSpec, "asymmetric_1d_demo is one-dimensional");
  // (1/2) e^{-|y|} on y < 0 and (1/2) on [0, 1]
  Kernel k;
  k.family = "asymmetric_1d_demo";
  k.dimension = 1;
  k.symmetric = false;
  k.radial = false;
  k.ray_density = [](double r, Direction nu) {
    if (nu[0] < 0.0) return 0.5 * std::exp(-r);
    return r <= 1.0 ? 0.5 : 0.0;
  };
  k.ray_log_density = [](double r, Direction nu) {
    if (nu[0] < 0.0) return -std::numbers::ln2 - r;
    return r <= 1.0 ? -std::numbers::ln2 : -kInf;
  };
  k.ray_breakpoints = [](Direction) { return std::vector<double>{}; };
  k.ray_support = [](Direction nu) { return nu[0] < 0.0 ? kInf : 1.0; };
  k.exp_moment_limit = [](Direction nu) { return nu[0] < 0.0 ? 1.0 : kInf; };
  k.rho0 = resolve_rho0(spec, 1.0);
  if (k.rho0 > 1.0)
    fail(ErrorKind::InvalidSpec, "asymmetric_1d_demo: support does not contain the ball of radius rho0");
  k.tail = CriticalTail{1.0};
  return k;
}

}  // namespace

Regime regime_of(const Tail& tail) {
  if (std::holds_alternative<CompactTail>(tail)) return Regime::Compact;
  if (std::holds_alternative<IntermediateTail>(tail)) return Regime::Intermediate;
  return Regime::Critical;
}

const char* to_string(Regime regime) {
  switch (regime) {
    case Regime::Compact: return "Compact";
    case Regime::Intermediate: return "Intermediate";
    case Regime::Critical: return "Critical";
  }
  return "Unknown";
}

double Kernel::density(const Vec& y) const {
  if (y.size() != dimension)
    fail(ErrorKind::InvalidArgument, "density: point has the wrong dimension");
  const double r = y.norm();
  if (r == 0.0) fail(ErrorKind::InvalidArgument, "density: J is not defined at the origin");
  Vec nu = y / r;
  return ray_density(r, Direction(nu.data(), static_cast<std::size_t>(nu.size())));
}

Kernel build_kernel(const KernelSpec& spec) {
  if (spec.dimension < 1) fail(ErrorKind::InvalidSpec, "dimension must be at least 1");
  const std::string& f = spec.family;
  if (f == "compact_uniform") return build_compact_uniform(spec);
  if (f == "compact_custom") return build_compact_custom(spec);
  if (f == "exp_power") return build_exp_power(spec);
  if (f == "exp_linear") return build_exp_linear(spec);
  if (f == "super_exp") return build_super_exp(spec);
  if (f == "tempered_stable") return build_tempered_stable(spec);
  if (f == "asymmetric_1d_demo") return build_asymmetric_demo(spec);
  fail(ErrorKind::InvalidSpec, "unknown kernel family '" + f + "'");
}

Kernel make_null_kernel(int dimension) {
  Kernel k = radial_kernel(
      "null", dimension, [](double) { return 0.0; }, [](double) { return -kInf; }, {}, 0.0, kInf);
  k.rho0 = 0.0;
  k.tail = CompactTail{0.0};
  return k;
}

Kernel scale_on_annulus(const Kernel& k, double a, double b, double factor) {
  if (!(a >= 0.0 && b > a && factor >= 0.0))
    fail(ErrorKind::InvalidArgument, "scale_on_annulus: need 0 <= a < b and factor >= 0");
  Kernel out = k;
  out.family = k.family + "_annulus_scaled";
  auto base = k.ray_density;
  auto base_log = k.ray_log_density;
  auto base_breaks = k.ray_breakpoints;
  const double log_factor = std::log(factor);
  out.ray_density = [=](double r, Direction nu) {
    const double v = base(r, nu);
    return (r > a && r < b) ? factor * v : v;
  };
  out.ray_log_density = [=](double r, Direction nu) {
    const double v = base_log(r, nu);
    return (r > a && r < b) ? v + log_factor : v;
  };
  out.ray_breakpoints = [=](Direction nu) {
    std::vector<double> br = base_breaks(nu);
    br.push_back(a);
    br.push_back(b);
    return br;
  };
  return out;
}

double log_weight_omega(const Kernel& k, const Vec& y) {
  const double r = y.norm();
  if (r == 0.0) fail(ErrorKind::InvalidArgument, "log_weight_omega: y must be nonzero");
  Vec nu = y / r;
  Direction d(nu.data(), static_cast<std::size_t>(nu.size()));
  const double log_j = k.ray_log_density(r, d);
  if (!(log_j > -kInf))
    fail(ErrorKind::DomainViolation, "log_weight_omega: y lies outside the support of J");
  return -log_j / r;
}

double van_der_corput(unsigned index, unsigned base) {
  double result = 0.0;
  double f = 1.0 / base;
  while (index > 0) {
    result += f * (index % base);
    index /= base;
    f /= base;
  }
  return result;
}

namespace {

double sample_extent(const Kernel& k1, const Kernel& k2) {
  double extent = 50.0;
  for (const Kernel* k : {&k1, &k2}) {
    if (const auto* c = std::get_if<CompactTail>(&k->tail)) extent = std::max(extent, 1.25 * c->rho);
  }
  return extent;
}

// Directions used to test a radius: both signs in 1-D, a fan of angles in 2-D.
std::vector<std::vector<double>> probe_directions(int n, int count) {
  std::vector<std::vector<double>> dirs;
  if (n == 1) return {{1.0}, {-1.0}};
  for (int i = 0; i < count; ++i) {
    std::vector<double> d(static_cast<std::size_t>(n), 0.0);
    const double th = 2.0 * std::numbers::pi * i / count;
    d[0] = std::cos(th);
    d[1] = std::sin(th);
    dirs.push_back(d);
  }
  return dirs;
}

}  // namespace

OrderingResult is_essentially_ordered(const Kernel& k1, const Kernel& k2, int samples) {
  OrderingResult out;
  if (k1.dimension != k2.dimension || std::abs(k1.rho0 - k2.rho0) > 1e-12) return out;
  const int n = k1.dimension;
  const double extent = sample_extent(k1, k2);
  auto le = [](double a, double b) { return a <= b * (1.0 + 1e-14) + 1e-300; };

  std::vector<double> nu(static_cast<std::size_t>(n), 0.0);
  for (int i = 1; i <= samples; ++i) {
    const double r = extent * van_der_corput(static_cast<unsigned>(i), 2);
    if (r == 0.0) continue;
    if (n == 1) {
      nu[0] = van_der_corput(static_cast<unsigned>(i), 3) < 0.5 ? 1.0 : -1.0;
    } else {
      const double th = 2.0 * std::numbers::pi * van_der_corput(static_cast<unsigned>(i), 3);
      std::fill(nu.begin(), nu.end(), 0.0);
      nu[0] = std::cos(th);
      nu[1] = std::sin(th);
    }
    if (!le(k1.ray_density(r, nu), k2.ray_density(r, nu))) return out;
  }

  // Scan radii strictly inside (rho0/2, rho0) for the longest strict run.
  const auto dirs = probe_directions(n, 16);
  const int grid = 400;
  const double lo = 0.5 * k1.rho0;
  const double hi = k1.rho0;
  int best_start = -1, best_len = 0, run_start = -1;
  for (int i = 1; i < grid; ++i) {
    const double r = lo + (hi - lo) * i / grid;
    bool strict = true;
    for (const auto& d : dirs) {
      if (!(k1.ray_density(r, d) < k2.ray_density(r, d))) {
        strict = false;
        break;
      }
      if (!le(k1.ray_density(r, d), k2.ray_density(r, d))) return out;
    }
    if (strict) {
      if (run_start < 0) run_start = i;
      if (i - run_start + 1 > best_len) {
        best_len = i - run_start + 1;
        best_start = run_start;
      }
    } else {
      run_start = -1;
    }
  }
  if (best_len < 3) return out;
  const double a = lo + (hi - lo) * best_start / grid;
  const double b = lo + (hi - lo) * (best_start + best_len - 1) / grid;
  for (const auto& d : dirs) {
    const double mid = 0.5 * (a + b);
    if (!(k1.ray_density(mid, d) < k2.ray_density(mid, d))) return out;
  }
  out.ordered = true;
  out.witness = std::make_pair(a, b);
  return out;
}

double levy_integral(const Kernel& k, double eps, double M) {
  if (!(eps > 0.0 && M > eps)) fail(ErrorKind::InvalidArgument, "levy_integral: need 0 < eps < M");
  detail::QuadOptions opt;
  opt.rel_tol = 1e-12;
  double total = 0.0;
  auto piece = [&](double a, double b) {
    if (b <= a) return;
    total += detail::integrate_kernel(
                 k, [](double r, Direction) { return detail::Scaled{std::min(1.0, r * r), 0.0}; }, a,
                 0.0, true, opt, b)
                 .value;
  };
  piece(eps, std::min(1.0, M));
  piece(std::max(1.0, eps), M);
  return total;
}

double tail_mass(const Kernel& k, double r, Direction nu) {
  detail::QuadOptions opt;
  opt.rel_tol = 1e-12;
  opt.tail_tol = 1e-13;
  if (k.dimension == 1) {
    return detail::integrate_along(k, nu, [](double) { return detail::Scaled{1.0, 0.0}; }, r, 0.0,
                                   opt)
        .value;
  }
  return detail::integrate_kernel(
             k, [](double, Direction) { return detail::Scaled{1.0, 0.0}; }, r, 0.0, true, opt)
      .value;
}

double log_truncated_exp_moment(const Kernel& k, double beta, double M) {
  const double lo = 0.5 * k.rho0;
  if (!(M > lo)) fail(ErrorKind::InvalidArgument, "log_truncated_exp_moment: M must exceed rho0/2");
  std::vector<std::vector<double>> dirs;
  double weight = 1.0;
  if (k.dimension == 1) {
    dirs = {{1.0}, {-1.0}};
  } else if (k.radial) {
    std::vector<double> e(static_cast<std::size_t>(k.dimension), 0.0);
    e[0] = 1.0;
    dirs = {e};
    weight = detail::sphere_area(k.dimension);
  } else {
    fail(ErrorKind::InvalidArgument, "log_truncated_exp_moment: needs N = 1 or a radial kernel");
  }
  const int steps = std::max(1000, static_cast<int>((M - lo) / 0.05));
  const double h = (M - lo) / steps;
  double peak = -kInf;
  std::vector<double> terms;
  terms.reserve(dirs.size() * static_cast<std::size_t>(steps + 1));
  for (const auto& d : dirs) {
    for (int i = 0; i <= steps; ++i) {
      const double r = lo + h * i;
      double l = beta * r + k.ray_log_density(r, d) + (k.dimension - 1) * std::log(r);
      if (i == 0 || i == steps) l += std::log(0.5);
      terms.push_back(l);
      peak = std::max(peak, l);
    }
  }
  if (peak == -kInf) return -kInf;
  double sum = 0.0;
  for (double l : terms) sum += std::exp(l - peak);
  return peak + std::log(sum * h * weight);
}

double probe_critical_exponent(const Kernel& k) {
  const double m1 = 2048.0, m2 = 4096.0;
  auto diverges = [&](double beta) {
    const double a = log_truncated_exp_moment(k, beta, m1);
    const double b = log_truncated_exp_moment(k, beta, m2);
    return b - a > 1e-3;
  };
  double hi = 1.0;
  while (!diverges(hi)) {
    hi *= 2.0;
    if (hi > 1024.0) return kInf;
  }
  double lo = 0.0;
  for (int i = 0; i < 40 && hi - lo > 1e-6 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (diverges(mid) ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

double symmetry_defect(const Kernel& k, int samples, double extent, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int n = k.dimension;
  double worst = 0.0;
  std::vector<double> nu(static_cast<std::size_t>(n)), neg(static_cast<std::size_t>(n));
  for (int i = 0; i < samples; ++i) {
    double norm = 0.0;
    for (auto& c : nu) {
      c = gauss(rng);
      norm += c * c;
    }
    norm = std::sqrt(norm);
    for (int j = 0; j < n; ++j) {
      nu[static_cast<std::size_t>(j)] /= norm;
      neg[static_cast<std::size_t>(j)] = -nu[static_cast<std::size_t>(j)];
    }
    const double r = extent * unit(rng) + 1e-9;
    worst = std::max(worst, std::abs(k.ray_density(r, nu) - k.ray_density(r, neg)));
  }
  return worst;
}

}  // namespace ldp
