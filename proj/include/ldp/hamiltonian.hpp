#pragma once

#include "ldp/kernel.hpp"

namespace ldp {

// Relative distance to the edge of the exponential-moment domain that
// evaluations must keep.
inline constexpr double kDomainMargin = 1e-6;

struct QuadratureConfig {
  double delta_split = 0.0;  // 0 picks 1e-3 for singular kernels, rho0/2 otherwise
  double tail_cutoff_tol = 1e-14;
  int max_refinements = 15;
  bool force_polar = false;  // bypass the radial reduction for radial kernels
};

struct HamiltonianParams {
  Mat A;
  Vec B;
  Kernel kernel;
  bool compensated = true;
  QuadratureConfig quadrature;
};

// One-dimensional parameters with scalar diffusion and drift.
HamiltonianParams make_params_1d(Kernel kernel, double A, double B, bool compensated);

// Validated, immutable evaluator for
//   H(p) = p.Ap + B.p + int (e^{p.y} - 1 - (p.y) 1_{|y|<1}) J(y) dy
// (the compensator is dropped when `compensated` is false).
class Hamiltonian {
 public:
  explicit Hamiltonian(HamiltonianParams params);

  int dimension() const { return static_cast<int>(params_.B.size()); }
  const HamiltonianParams& params() const { return params_; }
  const Kernel& kernel() const { return params_.kernel; }

  double value(const Vec& p) const;
  Vec gradient(const Vec& p) const;
  double hess_quadform(const Vec& p, const Vec& nu) const;
  Mat hessian(const Vec& p) const;

  // Tail part int_{|y| > rho0/2} e^{p.y} J(y) dy and its gradient.
  double value_ess(const Vec& p) const;
  Vec gradient_ess(const Vec& p) const;

  // Largest |p| along `direction` at which H is finite (infinity if none).
  double domain_limit(const Vec& direction) const;
  // Admissible iff |p| <= domain_limit * (1 - kDomainMargin).
  bool in_domain(const Vec& p) const;

  double value1(double p) const;
  double derivative1(double p) const;
  double second1(double p) const;

 private:
  void check_domain(const Vec& p) const;
  bool use_radial() const;
  double delta() const;

  HamiltonianParams params_;
};

double eval_h(const HamiltonianParams& hp, const Vec& p);
double eval_h_ess(const HamiltonianParams& hp, const Vec& p);
Vec grad_h(const HamiltonianParams& hp, const Vec& p);
double hess_quadform(const HamiltonianParams& hp, const Vec& p, const Vec& nu);

}  // namespace ldp
