#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "ldp/field.hpp"
#include "ldp/hamiltonian.hpp"

namespace ldp {

enum class NumericalFlux {
  Godunov,       // exact Riemann solution for convex H
  LaxFriedrichs  // H((a+b)/2) - sigma (b-a)/2 with one global sigma
};

// Uniform grid on [-1, 1] with n interior nodes, h = 2 / (n + 1).
struct HJGrid {
  int n = 399;
  double dt = 0.0;  // 0 picks the largest step allowed by the CFL bound
  double T = 1.0;
  double A = 1.0;
  double slope_cap = 0.0;  // 0 picks the cap automatically
  NumericalFlux flux = NumericalFlux::Godunov;

  double h() const { return 2.0 / (n + 1); }
};

// H on [-cap, cap] by cubic Hermite interpolation, extended linearly outside.
// The extension keeps H convex and its slope bounded by max |H'| on the table.
class SlopeTable {
 public:
  SlopeTable(const std::function<double(double)>& h, const std::function<double(double)>& dh,
             double cap, int points = 4001);

  double value(double p) const;
  double slope(double p) const;
  double cap() const { return cap_; }
  double max_abs_slope() const { return max_abs_slope_; }
  double argmin() const { return argmin_; }

 private:
  double cap_, step_, max_abs_slope_, argmin_;
  std::vector<double> v_, d_;
};

SlopeTable tabulate(const Hamiltonian& h, double cap);

// Numerical Hamiltonian from the backward and forward differences a, b.
double numerical_hamiltonian(const SlopeTable& H, NumericalFlux flux, double a, double b);

// One explicit step on the interior nodes; the two end nodes are left
// unchanged. Slopes are clipped to [-clip, clip] before H sees them.
void hj_step(const SlopeTable& H, NumericalFlux flux, std::vector<double>& field, double dt,
             double h, double clip = std::numeric_limits<double>::infinity());

// Largest step with dt * sigma / h <= 1/2, sigma = 1.1 max|H'| on the table.
double hj_max_dt(const SlopeTable& H, double h);

// I_t + H(I_x) = 0 on (-1, 1), I = 0 at x = +-1, I(x, 0) = A inside.
Field solve_hj(const Hamiltonian& H, const HJGrid& g, std::vector<double> times);

// Same with the gradient constraint |I_x| <= beta0. The slopes fed to H are
// capped at beta0 (1 - margin).
Field solve_hj_constrained(const Hamiltonian& H, double beta0, const HJGrid& g,
                           std::vector<double> times, double margin = 0.05);

// Replaces f by its largest minorant with |f_i - f_{i+1}| <= lip * h.
void lipschitz_truncate(std::vector<double>& f, double lip, double h);

// Approximates infinite initial data: I^A = min(A, I) for every level, so the
// largest level of the ladder is solved and nodes where it is still active
// are set to +inf.
Field solve_hj_ladder(const Hamiltonian& H, HJGrid g, std::vector<double> times,
                      const std::vector<double>& ladder = {2.0, 5.0, 10.0, 20.0});

}  // namespace ldp
