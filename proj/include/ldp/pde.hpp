#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "ldp/field.hpp"
#include "ldp/kernel.hpp"

namespace ldp {

enum class BoundaryMode {
  WholeLine,             // nodes beyond the truncation stay at u0
  DirichletZeroOutside,  // nodes with |x| > R stay at 0
  Barrier                // 0 inside the ball at t = 0, sup u0 outside for all t
};

// u_t = int (u(x+y) - u(x)) J(y) dy + A u'' + B u' on the grid x_j = j / n_per_unit.
// Singular kernels add the compensator -u' y on |y| < 1.
struct SimConfig {
  Kernel kernel;
  double A_diff = 0.0;
  double B_drift = 0.0;
  double R = 10.0;
  double domain_truncation = 0.0;  // 0 picks R + max(reach, 10)
  int n_per_unit = 10;
  double dt = 0.0;  // 0 picks the step automatically
  double T = 1.0;
  std::vector<double> times;  // snapshot times, T when empty
  std::function<double(double)> u0 = [](double) { return 1.0; };
  BoundaryMode bc_mode = BoundaryMode::WholeLine;
};

// Kernel weights on the lattice h Z (hat-function quadrature) and the local moments of J
// on the inner region |y| < delta that the lattice cannot resolve.
struct Stencil {
  double h = 0.0;
  int reach_minus = 0;         // weights[k] is the jump by (k - reach_minus) h
  int reach_plus = 0;
  std::vector<double> weights;
  double diffusion = 0.0;      // half the inner second moment
  double drift = 0.0;          // inner first moment, or minus the compensator
  double mass() const;
};

// Radius along nu beyond which the kernel's mass is below `tol`.
double kernel_reach(const Kernel& k, double nu, double tol = 1e-30);

Stencil build_stencil(const Kernel& k, double h);

// Largest step with dt (mass + 2 a / h^2 + |b| / h) <= 1.
double positivity_dt(const Stencil& s, double A_diff, double B_drift);

// Step used when cfg.dt is 0: 0.9 of the positivity bound, at most 1e-3.
double default_dt(const Stencil& s, double A_diff, double B_drift);

// Snapshots of the solution on the nodes with |x| <= domain_truncation.
Field simulate(const SimConfig& cfg);

// u - u_R evolved directly, so values far below the size of u keep their
// relative accuracy, together with the barrier v_R. Both live on the grid of
// simulate(cfg); bc_mode is ignored.
struct DifferenceFields {
  Field difference;
  Field barrier;
};
DifferenceFields simulate_difference(const SimConfig& cfg);

// max of u - uR over all snapshots and the nodes with |x| <= theta R.
double sup_difference(const Field& u, const Field& uR, double theta, double R);
// Same for a field that already holds u - u_R.
double window_sup(const Field& diff, double theta, double R);

constexpr double kSaturationFloor = 1e-300;

// -(1/R) ln vR on the nodes with |x| <= R, rescaled to x / R and t / R.
struct EmpiricalRate {
  Field rate;
  std::vector<std::vector<bool>> saturated;  // vR <= kSaturationFloor there
};
EmpiricalRate empirical_rate(const Field& vR, double R);

struct SweepRecord {
  double R = 0.0;
  double theta = 0.0;
  double t_obs = 0.0;
  double sup_diff = 0.0;
  double empirical_exponent = 0.0;  // -ln sup_diff
  double predicted_exponent = 0.0;
  double ratio = 0.0;
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  bool trend_ok = false;  // ratios non-decreasing in R
};

RateFit fit_rate(std::vector<SweepRecord> records);

struct SweepConfig {
  SimConfig base;  // R and times are overridden per entry
  std::vector<double> radii;
  double theta = 0.0;
  double t_obs = 1.0;
  unsigned threads = 1;
};

// One direct-difference simulation per radius, sorted by R. When
// `differences` is given it receives the u - u_R fields in the same order.
std::vector<SweepRecord> sweep(const SweepConfig& cfg, std::vector<Field>* differences = nullptr);

// Header "R,theta,t_obs,sup_diff,empirical_exponent,predicted_exponent,ratio"
// and, when a fit is given, a footer "# fit,slope=..,intercept=..,r2=..,trend_ok=..".
void write_sweep_csv(const std::vector<SweepRecord>& records, const RateFit* fit, std::ostream& out);
std::vector<SweepRecord> read_sweep_csv(std::istream& in);

}  // namespace ldp
