#include "ldp/hamiltonian.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "kernel_quad.hpp"
#include "ldp/error.hpp"

namespace ldp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double dot(const Vec& p, Direction nu) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) s += p[i] * nu[static_cast<std::size_t>(i)];
  return s;
}

Vec unit(double value) {
  Vec v(1);
  v[0] = value;
  return v;
}

using detail::Scaled;

// Exponential-type factors returned as mantissa * exp(exponent); the switch
// at |x| = 20 keeps small arguments free of cancellation.
Scaled s_exp(double x) { return {1.0, x}; }

Scaled s_expm1(double x) {
  if (x < 20.0) return {std::expm1(x), 0.0};
  return {-std::expm1(-x), x};
}

Scaled s_expm1_minus_x(double x) {
  if (x < 20.0) return {detail::expm1_minus_x(x), 0.0};
  return {1.0 - (1.0 + x) * std::exp(-x), x};
}

Scaled s_cosh(double x) {
  const double a = std::abs(x);
  if (a < 20.0) return {std::cosh(x), 0.0};
  return {0.5 * (1.0 + std::exp(-2.0 * a)), a};
}

Scaled s_cosh_minus_1(double x) {
  const double a = std::abs(x);
  if (a < 20.0) return {detail::cosh_minus_1(x), 0.0};
  return {0.5 * (1.0 + std::exp(-2.0 * a)) - std::exp(-a), a};
}

Scaled s_sinh(double x) {
  const double a = std::abs(x);
  if (a < 20.0) return {std::sinh(x), 0.0};
  return {std::copysign(0.5 * (1.0 - std::exp(-2.0 * a)), x), a};
}

// Modified Bessel I_nu(x), x >= 0, switching to the Hankel expansion for large x.
Scaled s_bessel_i(double order, double x) {
  if (x < 600.0) return {std::cyl_bessel_i(order, x), 0.0};
  const double mu = 4.0 * order * order;
  const double z = 8.0 * x;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 6; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= -(mu - odd * odd) / (k * z);
    sum += term;
  }
  return {sum / std::sqrt(2.0 * std::numbers::pi * x), x};
}

Scaled s_bessel_i0_minus_1(double x) {
  if (x < 600.0) return {detail::bessel_i0_minus_1(x), 0.0};
  return s_bessel_i(0.0, x);
}

Scaled times(double c, Scaled s) { return {c * s.mantissa, s.exponent}; }

void validate(const HamiltonianParams& hp) {
  const Eigen::Index n = hp.B.size();
  require(n >= 1, ErrorKind::InvalidArgument, "drift B must have at least one component");
  require(hp.A.rows() == n && hp.A.cols() == n, ErrorKind::InvalidArgument,
          "diffusion matrix A must be N x N with N = size of B");
  require(hp.kernel.dimension == n, ErrorKind::InvalidArgument,
          "kernel dimension does not match the size of B");
  require(n <= 2 || hp.kernel.is_null(), ErrorKind::InvalidArgument,
          "Hamiltonian quadrature is available for N = 1, 2");
  const double scale = 1.0 + hp.A.cwiseAbs().maxCoeff();
  require((hp.A - hp.A.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale,
          ErrorKind::InvalidArgument, "diffusion matrix A must be symmetric");
  std::mt19937 rng(20240611u);
  std::normal_distribution<double> gauss;
  for (Eigen::Index i = 0; i < n + 10; ++i) {
    Vec nu = Vec::Zero(n);
    if (i < n) {
      nu[i] = 1.0;
    } else {
      for (Eigen::Index j = 0; j < n; ++j) nu[j] = gauss(rng);
      nu.normalize();
    }
    require(nu.dot(hp.A * nu) >= -1e-14 * scale, ErrorKind::InvalidArgument,
            "diffusion matrix A must be positive semidefinite");
  }
  require(hp.compensated || hp.kernel.singularity_exponent < 1.0, ErrorKind::InvalidArgument,
          "uncompensated form diverges for singularity exponent >= 1");
}

detail::QuadOptions options(const QuadratureConfig& q) {
  detail::QuadOptions o;
  o.rel_tol = 1e-13;
  o.tail_tol = q.tail_cutoff_tol;
  o.max_depth = q.max_refinements;
  return o;
}

void check_quadrature(const detail::QuadResult& r) {
  if (!std::isfinite(r.value) || r.error > 1e-7 * std::abs(r.value) + 1e-11)
    fail(ErrorKind::NonConvergence, "quadrature error estimate exceeds tolerance");
}

}  // namespace

HamiltonianParams make_params_1d(Kernel kernel, double A, double B, bool compensated) {
  HamiltonianParams hp;
  hp.A = Mat::Constant(1, 1, A);
  hp.B = unit(B);
  hp.kernel = std::move(kernel);
  hp.compensated = compensated;
  return hp;
}

Hamiltonian::Hamiltonian(HamiltonianParams params) : params_(std::move(params)) {
  validate(params_);
}

bool Hamiltonian::use_radial() const {
  return params_.kernel.radial && !params_.quadrature.force_polar;
}

double Hamiltonian::delta() const {
  if (params_.quadrature.delta_split > 0.0) return params_.quadrature.delta_split;
  return params_.kernel.singularity_exponent > 0.0 ? 1e-3 : 0.5 * params_.kernel.rho0;
}

double Hamiltonian::domain_limit(const Vec& direction) const {
  const double norm = direction.norm();
  if (norm == 0.0 || params_.kernel.is_null()) return kInf;
  Vec nu = direction / norm;
  return params_.kernel.exp_moment_limit(Direction(nu.data(), static_cast<std::size_t>(nu.size())));
}

bool Hamiltonian::in_domain(const Vec& p) const {
  if (p.size() != dimension() || !p.allFinite()) return false;
  return p.norm() <= domain_limit(p) * (1.0 - kDomainMargin);
}

void Hamiltonian::check_domain(const Vec& p) const {
  require(p.size() == dimension(), ErrorKind::InvalidArgument, "p has the wrong dimension");
  require(p.allFinite(), ErrorKind::InvalidArgument, "p must be finite");
  if (!in_domain(p))
    fail(ErrorKind::DomainViolation,
         "|p| exceeds the exponential-moment domain of the kernel (limit " +
             std::to_string(domain_limit(p)) + ")");
}

double Hamiltonian::value(const Vec& p) const {
  check_domain(p);
  const auto& hp = params_;
  double out = p.dot(hp.A * p) + hp.B.dot(p);
  if (hp.kernel.is_null()) return out;
  const double pn = p.norm();
  if (pn == 0.0) return out;
  const bool comp = hp.compensated;
  detail::QuadResult r;
  if (use_radial()) {
    const int n = dimension();
    r = detail::integrate_kernel(
        hp.kernel,
        [&](double s, Direction) {
          return n == 1 ? s_cosh_minus_1(pn * s) : s_bessel_i0_minus_1(pn * s);
        },
        0.0, delta(), true, options(hp.quadrature));
  } else {
    r = detail::integrate_kernel(
        hp.kernel,
        [&](double s, Direction nu) {
          const double x = s * dot(p, nu);
          return (comp && s < 1.0) ? s_expm1_minus_x(x) : s_expm1(x);
        },
        0.0, delta(), false, options(hp.quadrature));
  }
  check_quadrature(r);
  return out + r.value;
}

Vec Hamiltonian::gradient(const Vec& p) const {
  check_domain(p);
  const auto& hp = params_;
  Vec g = 2.0 * hp.A * p + hp.B;
  if (hp.kernel.is_null()) return g;
  const int n = dimension();
  const double pn = p.norm();
  const bool comp = hp.compensated;
  if (use_radial()) {
    if (pn == 0.0) return g;
    detail::QuadResult r = detail::integrate_kernel(
        hp.kernel,
        [&](double s, Direction) {
          return times(s, n == 1 ? s_sinh(pn * s) : s_bessel_i(1.0, pn * s));
        },
        0.0, delta(), true, options(hp.quadrature));
    check_quadrature(r);
    return g + (r.value / pn) * p;
  }
  for (int j = 0; j < n; ++j) {
    detail::QuadResult r = detail::integrate_kernel(
        hp.kernel,
        [&](double s, Direction nu) {
          const double x = s * dot(p, nu);
          const Scaled w = (comp && s < 1.0) ? s_expm1(x) : s_exp(x);
          return times(nu[static_cast<std::size_t>(j)] * s, w);
        },
        0.0, delta(), false, options(hp.quadrature));
    check_quadrature(r);
    g[j] += r.value;
  }
  return g;
}

double Hamiltonian::hess_quadform(const Vec& p, const Vec& nu_in) const {
  check_domain(p);
  require(nu_in.size() == dimension(), ErrorKind::InvalidArgument, "nu has the wrong dimension");
  const double nn = nu_in.norm();
  require(std::abs(nn - 1.0) <= 1e-9, ErrorKind::InvalidArgument, "nu must be a unit vector");
  const auto& hp = params_;
  double out = 2.0 * nu_in.dot(hp.A * nu_in);
  if (hp.kernel.is_null()) return out;
  const int n = dimension();
  const double pn = p.norm();
  detail::QuadResult r;
  if (use_radial()) {
    if (n == 1) {
      r = detail::integrate_kernel(
          hp.kernel, [&](double s, Direction) { return times(s * s, s_cosh(pn * s)); }, 0.0, delta(),
          true, options(hp.quadrature));
    } else {
      // Frame aligned with p: weights (I0 + I2)/2 along p, (I0 - I2)/2 across.
      const double c = pn > 0.0 ? nu_in.dot(p) / pn : 1.0;
      const double c2 = c * c;
      r = detail::integrate_kernel(
          hp.kernel,
          [&](double s, Direction) {
            const double x = pn * s;
            const Scaled i0 = s_bessel_i(0.0, x);
            const double i2 = x == 0.0 ? 0.0 : s_bessel_i(2.0, x).mantissa;
            return Scaled{s * s * 0.5 * (i0.mantissa + (2.0 * c2 - 1.0) * i2), i0.exponent};
          },
          0.0, delta(), true, options(hp.quadrature));
    }
  } else {
    r = detail::integrate_kernel(
        hp.kernel,
        [&](double s, Direction nu) {
          const double a = dot(nu_in, nu);
          return times(s * s * a * a, s_exp(s * dot(p, nu)));
        },
        0.0, delta(), false, options(hp.quadrature));
  }
  check_quadrature(r);
  return out + r.value;
}

Mat Hamiltonian::hessian(const Vec& p) const {
  const int n = dimension();
  Mat h(n, n);
  for (int i = 0; i < n; ++i) {
    Vec e = Vec::Zero(n);
    e[i] = 1.0;
    h(i, i) = hess_quadform(p, e);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      Vec e = Vec::Zero(n);
      e[i] = e[j] = 1.0 / std::sqrt(2.0);
      const double mixed = hess_quadform(p, e);
      h(i, j) = h(j, i) = mixed - 0.5 * (h(i, i) + h(j, j));
    }
  }
  return h;
}

double Hamiltonian::value_ess(const Vec& p) const {
  check_domain(p);
  const auto& hp = params_;
  if (hp.kernel.is_null()) return 0.0;
  const int n = dimension();
  const double pn = p.norm();
  const double r_min = 0.5 * hp.kernel.rho0;
  detail::QuadResult r;
  if (use_radial()) {
    r = detail::integrate_kernel(
        hp.kernel,
        [&](double s, Direction) {
          return n == 1 ? s_cosh(pn * s) : s_bessel_i(0.0, pn * s);
        },
        r_min, 0.0, true, options(hp.quadrature));
  } else {
    r = detail::integrate_kernel(
        hp.kernel, [&](double s, Direction nu) { return s_exp(s * dot(p, nu)); }, r_min, 0.0,
        false, options(hp.quadrature));
  }
  check_quadrature(r);
  return r.value;
}

Vec Hamiltonian::gradient_ess(const Vec& p) const {
  check_domain(p);
  const auto& hp = params_;
  const int n = dimension();
  Vec g = Vec::Zero(n);
  if (hp.kernel.is_null()) return g;
  const double pn = p.norm();
  const double r_min = 0.5 * hp.kernel.rho0;
  if (use_radial()) {
    if (pn == 0.0) return g;
    detail::QuadResult r = detail::integrate_kernel(
        hp.kernel,
        [&](double s, Direction) {
          return times(s, n == 1 ? s_sinh(pn * s) : s_bessel_i(1.0, pn * s));
        },
        r_min, 0.0, true, options(hp.quadrature));
    check_quadrature(r);
    return (r.value / pn) * p;
  }
  for (int j = 0; j < n; ++j) {
    detail::QuadResult r = detail::integrate_kernel(
        hp.kernel,
        [&](double s, Direction nu) {
          return times(nu[static_cast<std::size_t>(j)] * s, s_exp(s * dot(p, nu)));
        },
        r_min, 0.0, false, options(hp.quadrature));
    check_quadrature(r);
    g[j] = r.value;
  }
  return g;
}

double Hamiltonian::value1(double p) const { return value(unit(p)); }
double Hamiltonian::derivative1(double p) const { return gradient(unit(p))[0]; }
double Hamiltonian::second1(double p) const { return hess_quadform(unit(p), unit(1.0)); }

double eval_h(const HamiltonianParams& hp, const Vec& p) { return Hamiltonian(hp).value(p); }
double eval_h_ess(const HamiltonianParams& hp, const Vec& p) {
  return Hamiltonian(hp).value_ess(p);
}
Vec grad_h(const HamiltonianParams& hp, const Vec& p) { return Hamiltonian(hp).gradient(p); }
double hess_quadform(const HamiltonianParams& hp, const Vec& p, const Vec& nu) {
  return Hamiltonian(hp).hess_quadform(p, nu);
}

}  // namespace ldp
