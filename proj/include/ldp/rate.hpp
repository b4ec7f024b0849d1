#pragma once

#include <optional>

#include "ldp/hamiltonian.hpp"
#include "ldp/legendre.hpp"

namespace ldp {

// Hamiltonian of the jump-form generator  int (u(x+y) - u(x)) J(y) dy  plus
// diffusion and drift. Integrable kernels drop the compensator; singular ones
// (exponent >= 1) keep it.
HamiltonianParams jump_form_params(Kernel k, double A, const Vec& B);
HamiltonianParams jump_form_params(Kernel k, double A, double B);

// L = H*, evaluated by cold-start conjugation so one instance can be shared
// between threads.
class Lagrangian {
 public:
  explicit Lagrangian(HamiltonianParams hp);

  int dimension() const { return h_.dimension(); }
  const Hamiltonian& hamiltonian() const { return h_; }
  Regime regime() const { return regime_; }
  // Even in q: symmetric kernel and no drift.
  bool symmetric() const { return symmetric_; }

  double value(const Vec& q) const;
  ConjugateResult solve(const Vec& q) const;
  // L(r e1); the radial profile when symmetric() and the kernel is radial.
  double radial(double r) const;

 private:
  Hamiltonian h_;
  ConvexBundle bundle_;
  Regime regime_;
  bool symmetric_;
};

Lagrangian make_lagrangian(HamiltonianParams hp);

struct RateResult {
  double value = 0.0;
  Vec minimizing_boundary_point;
  Regime regime = Regime::Compact;
  std::optional<double> predicted_log_bound;
};

// I(x, t) = min over boundary points y and exit times s in (0, t] of
// s L((y - x) / s). When H >= 0 (L(0) = 0) the exit time is s = t.
RateResult rate_iinf(const Lagrangian& L, const Vec& x, double t);

// min(A, I(x, t)); A may be +infinity.
double lax_oleinik(const Lagrangian& L, double A, const Vec& x, double t);

// Leading-order exponent E(R) in sup |u - u_R| <= exp(-E(R)).
double predicted_log_bound(const Kernel& k, double R, double theta, double t);

}  // namespace ldp
