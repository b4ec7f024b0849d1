#pragma once

#include <functional>
#include <optional>

#include "ldp/hamiltonian.hpp"
#include "ldp/kernel.hpp"

namespace ldp {

struct ConjugateResult {
  double value = 0.0;
  Vec argmax;  // maximizing p for L, maximizing y for K
  double residual = 0.0;
  int iterations = 0;
  bool hit_domain_boundary = false;
};

// What the conjugate solver needs to know about a convex function H.
struct ConvexBundle {
  int dimension = 1;
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
  std::function<double(const Vec&, const Vec&)> hess_quadform;
  // Largest |p| along a direction where H is finite; infinity if unbounded.
  std::function<double(const Vec&)> domain_limit;
  // Outer support radius of the kernel along a direction, infinity if unbounded.
  // Only used to pick a starting point.
  std::function<double(const Vec&)> support_radius;
};

ConvexBundle make_bundle(const Hamiltonian& h);
ConvexBundle make_bundle(const HamiltonianParams& hp);

struct ConjugateOptions {
  int max_iterations = 300;
  double tolerance = 1e-12;  // residual target, scaled by max(1, |q|)
};

// L(q) = sup_p { p.q - H(p) } with the maximizer p0(q).
ConjugateResult conjugate(const ConvexBundle& h, const Vec& q,
                          const std::optional<Vec>& start = std::nullopt,
                          const ConjugateOptions& opt = {});

// Reuses the previous maximizer as starting point when successive queries lie
// on the same ray. Not thread-safe; use one instance per thread.
class Conjugator {
 public:
  explicit Conjugator(ConvexBundle h, ConjugateOptions opt = {});
  ConjugateResult operator()(const Vec& q);
  void reset();

 private:
  ConvexBundle h_;
  ConjugateOptions opt_;
  std::optional<Vec> last_q_;
  std::optional<Vec> last_p_;
};

// K(p) = sup_y { p.y - |y| omega(y) }; |y| omega(y) is taken as 0 on the
// support of a compact kernel and +infinity outside it.
ConjugateResult k_transform(const Kernel& k, const Vec& p);

// Radius r with K(r nu) = z for symmetric kernels (z / rho for compact
// kernels, beta0 for critical ones).
double k_inverse(const Kernel& k, double z);

}  // namespace ldp
