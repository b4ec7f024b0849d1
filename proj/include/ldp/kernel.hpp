#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace ldp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Unit direction in R^N, passed around without allocating.
using Direction = std::span<const double>;

struct CompactTail {
  double rho;  // outer support radius
};

struct IntermediateTail {
  std::function<double(const Vec&)> omega;  // omega(y) with J = exp(-|y| omega(y))
  double eta;                               // angle constant in (0, 1]
};

struct CriticalTail {
  double beta0;  // exponential moments exist exactly for |beta| < beta0
};

using Tail = std::variant<CompactTail, IntermediateTail, CriticalTail>;

enum class Regime { Compact, Intermediate, Critical };

Regime regime_of(const Tail& tail);
const char* to_string(Regime regime);

// A Levy density J on R^N \ {0}. All evaluators are pure and the object is
// immutable once built, so copies can be shared between threads.
struct Kernel {
  std::string family;
  int dimension = 1;
  bool symmetric = true;
  bool radial = true;  // J(y) depends on |y| only
  double singularity_exponent = 0.0;
  double rho0 = 1.0;
  Tail tail = CompactTail{0.0};

  // J(r * nu) and its logarithm for r > 0 and |nu| = 1.
  std::function<double(double, Direction)> ray_density;
  std::function<double(double, Direction)> ray_log_density;
  // Radii along nu where J jumps; quadrature splits there.
  std::function<std::vector<double>(Direction)> ray_breakpoints;
  // sup{r : J(r nu) > 0}, infinity for unbounded support.
  std::function<double(Direction)> ray_support;
  // sup{beta >= 0 : int_{|y|>1} exp(beta nu.y) J(y) dy < inf}.
  std::function<double(Direction)> exp_moment_limit;

  double density(const Vec& y) const;
  bool is_null() const { return family == "null"; }
};

struct KernelSpec {
  std::string family;
  int dimension = 1;
  // Scalars are stored as one-element vectors; compact_custom uses arrays.
  std::map<std::string, std::vector<double>> params;
  std::optional<double> rho0;
};

Kernel build_kernel(const KernelSpec& spec);

// Zero density; turns a Hamiltonian into its quadratic-plus-drift part.
Kernel make_null_kernel(int dimension);

// Copy of k whose density is multiplied by `factor` on the annulus a < |y| < b.
Kernel scale_on_annulus(const Kernel& k, double a, double b, double factor);

double log_weight_omega(const Kernel& k, const Vec& y);

struct OrderingResult {
  bool ordered = false;
  std::optional<std::pair<double, double>> witness;
};

OrderingResult is_essentially_ordered(const Kernel& k1, const Kernel& k2,
                                      int samples = 10000);

// int_{eps < |y| < M} min(1, |y|^2) J(y) dy
double levy_integral(const Kernel& k, double eps, double M);

// Mass of J on {|y| > r} along the half-line r * nu (1-D) or in total (radial).
double tail_mass(const Kernel& k, double r, Direction nu);

// log of int_{rho0/2 < |y| < M} exp(beta |y|) J(y) dy, radial kernels or N = 1.
double log_truncated_exp_moment(const Kernel& k, double beta, double M);

// Bisection on the divergence of truncated exponential moments.
double probe_critical_exponent(const Kernel& k);

// Max |J(y) - J(-y)| over quasi-random samples in the ball of radius `extent`.
double symmetry_defect(const Kernel& k, int samples, double extent, unsigned seed);

// Quasi-random points used by the sampling checks.
double van_der_corput(unsigned index, unsigned base);

}  // namespace ldp
