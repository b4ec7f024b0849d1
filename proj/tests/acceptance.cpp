#include <chrono>
#include <cmath>
#include <functional>
#include <future>
#include <iostream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "ldp/error.hpp"
#include "ldp/hamiltonian.hpp"
#include "ldp/hj.hpp"
#include "ldp/legendre.hpp"
#include "ldp/pde.hpp"
#include "ldp/rate.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace ldp;
using testutil::make;
using testutil::v1;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;
  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

Kernel uniform() { return make("compact_uniform", {{"rho", {1.0}}}); }
Kernel two_sided_exp() { return make("exp_linear", {{"alpha", {1.0}}}); }
Kernel demo() { return make("asymmetric_1d_demo"); }

// Difference and barrier fields of one acceptance simulation, kept for the sandwich check.
struct Run {
  std::string label;
  double R = 0.0;
  DifferenceFields f;
};
std::vector<Run> g_runs;

std::vector<DifferenceFields> simulate_ladder(const Kernel& k, const std::vector<double>& radii, int n,
                                              const std::function<std::vector<double>(double)>& times,
                                              const std::string& label) {
  std::vector<std::future<DifferenceFields>> jobs;
  for (double R : radii) {
    SimConfig c;
    c.kernel = k;
    c.R = R;
    c.n_per_unit = n;
    c.times = times(R);
    c.T = c.times.back();
    jobs.push_back(std::async(std::launch::async, [c] { return simulate_difference(c); }));
  }
  std::vector<DifferenceFields> out;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    out.push_back(jobs[i].get());
    g_runs.push_back({label, radii[i], out.back()});
  }
  return out;
}

double at_node(const Field& f, std::size_t snap, double x) {
  for (std::size_t i = 0; i < f.x.size(); ++i)
    if (std::abs(f.x[i] - x) < 1e-9) return f.values[snap][i];
  throw Error(ErrorKind::GridMismatch, fmt::format("no node at {}", x));
}

std::string list(const std::vector<double>& v, const char* f = "{:.4g}") {
  std::string s;
  for (double e : v) s += (s.empty() ? "" : ", ") + fmt::format(fmt::runtime(f), e);
  return "[" + s + "]";
}

bool nondecreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] < v[i - 1]) return false;
  return true;
}

Outcome closed_form_hamiltonians() {
  Outcome o;
  const auto start = Clock::now();
  struct Case {
    std::string name;
    HamiltonianParams hp;
    std::function<double(double)> exact;
    double lo, hi;
  };
  const std::vector<Case> cases = {
      {"uniform", make_params_1d(uniform(), 0.0, 0.0, true), oracle::h_uniform, -20.0, 20.0},
      {"two-sided exp", make_params_1d(two_sided_exp(), 0.0, 0.0, true), oracle::h_two_sided_exp, -0.95, 0.95},
      {"demo", make_params_1d(demo(), 0.0, 0.0, false), oracle::h_asymmetric_demo, -0.95, 5.0},
  };
  for (const Case& c : cases) {
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
      // Interior sample points; the demo's interval is open at -0.95.
      const double p = c.lo + (c.hi - c.lo) * (i + 0.5) / 50.0;
      const double exact = c.exact(p);
      worst = std::max(worst, std::abs(eval_h(c.hp, v1(p)) - exact) / std::abs(exact));
    }
    o.note(fmt::format("{} rel err {:.2e}", c.name, worst));
    o.check(worst <= 1e-8, c.name + " exceeds 1e-8");
  }
  const double t = seconds_since(start);
  o.note(fmt::format("{:.2f} s", t));
  o.check(t < 5.0, "runtime over 5 s");
  return o;
}

Outcome conjugate_correctness() {
  Outcome o;
  std::mt19937 rng(2024);
  struct Case {
    ConvexBundle b;
    double plo, phi;
  };
  const std::vector<Case> cases = {
      {make_bundle(make_params_1d(uniform(), 0.1, 0.2, true)), -30.0, 30.0},
      {make_bundle(make_params_1d(two_sided_exp(), 0.0, 0.0, true)), -0.99, 0.99},
      {make_bundle(make_params_1d(demo(), 0.0, 0.0, false)), -0.99, 20.0},
  };
  double worst_fy = 0.0, worst_res = 0.0;
  int solves = 0;
  for (const Case& c : cases) {
    std::uniform_real_distribution<double> P(c.plo, c.phi), Q(-50.0, 50.0);
    for (int i = 0; i < 1000; ++i) {
      const double p = P(rng), q = Q(rng);
      const ConjugateResult r = conjugate(c.b, v1(q));
      ++solves;
      worst_fy = std::min(worst_fy, (r.value + c.b.value(v1(p)) - p * q) / (1.0 + std::abs(r.value)));
      if (!r.hit_domain_boundary) worst_res = std::max(worst_res, std::abs(q - c.b.gradient(r.argmax)[0]));
    }
  }
  o.note(fmt::format("{} pairs, min Fenchel-Young gap {:.1e}, max residual {:.1e}", solves, worst_fy, worst_res));
  o.check(worst_fy >= -1e-8, "Fenchel-Young violated");
  o.check(worst_res <= 1e-8, "residual above 1e-8");
  const ConjugateResult r = conjugate(cases[1].b, v1(16.0 / 9.0));
  o.note(fmt::format("L(16/9) = {:.10f}", r.value));
  o.check(std::abs(r.value - 5.0 / 9.0) <= 1e-6, "L(16/9) off 5/9");
  return o;
}

Outcome k_inverse_table() {
  Outcome o;
  const Kernel gauss = make("exp_power", {{"alpha", {2.0}}});
  for (double z : {1.0, 10.0, 100.0}) {
    for (double rho : {1.0, 4.0})
      o.check(k_inverse(make("compact_uniform", {{"rho", {rho}}}), z) == z / rho,
              fmt::format("compact rho={} z={}", rho, z));
    const double g = k_inverse(gauss, z);
    o.check(std::abs(g - 2.0 * std::sqrt(z)) <= 1e-6, fmt::format("exp_power z={} gave {}", z, g));
    for (double alpha : {1.0, 1.7})
      o.check(k_inverse(make("exp_linear", {{"alpha", {alpha}}}), z) == alpha,
              fmt::format("exp_linear alpha={} z={}", alpha, z));
  }
  o.note("z in {1, 10, 100}");
  return o;
}

double hj_error(const Hamiltonian& H, const Lagrangian& L, double A, int n, double t) {
  HJGrid g;
  g.n = n;
  g.A = A;
  g.T = t;
  const Field f = solve_hj(H, g, {t});
  double err = 0.0;
  for (std::size_t i = 0; i < f.x.size(); ++i)
    err = std::max(err, std::abs(f.values[0][i] - lax_oleinik(L, A, v1(f.x[i]), t)));
  return err;
}

Outcome lax_oleinik_vs_scheme() {
  Outcome o;
  const auto start = Clock::now();
  struct Case {
    std::string name;
    HamiltonianParams hp;
    double A;
  };
  const std::vector<Case> cases = {
      {"quadratic", jump_form_params(make_null_kernel(1), 0.5, 0.0), 10.0},
      {"uniform", jump_form_params(uniform(), 0.0, 0.0), 5.0},
  };
  for (const Case& c : cases) {
    const Hamiltonian H(c.hp);
    const Lagrangian L(c.hp);
    for (double t : {0.25, 0.5, 1.0}) {
      const double coarse = hj_error(H, L, c.A, 399, t), fine = hj_error(H, L, c.A, 799, t);
      o.note(fmt::format("{} t={}: {:.4f} -> {:.4f}", c.name, t, coarse, fine));
      o.check(coarse <= 0.05, fmt::format("{} t={} above 0.05", c.name, t));
      o.check(fine < coarse, fmt::format("{} t={} not reduced by doubling", c.name, t));
    }
  }
  const double t = seconds_since(start);
  o.note(fmt::format("{:.1f} s", t));
  o.check(t < 30.0, "runtime over 30 s");
  return o;
}

Outcome constrained_solver() {
  Outcome o;
  const HamiltonianParams hp = jump_form_params(two_sided_exp(), 0.0, 0.0);
  const Hamiltonian H(hp);
  const Lagrangian L(hp);
  const double beta0 = 1.0, A = 10.0;
  HJGrid g;
  g.n = 399;
  g.A = A;
  const Field f = solve_hj_constrained(H, beta0, g, {1e-3, 0.5, 1.0});
  const double h = f.h();
  double slope = 0.0;
  for (const auto& snap : f.values)
    for (std::size_t i = 1; i < snap.size(); ++i) slope = std::max(slope, std::abs(snap[i] - snap[i - 1]) / h);
  double trace = 0.0, late = 0.0;
  for (std::size_t i = 0; i < f.x.size(); ++i) {
    const double dist = 1.0 - std::abs(f.x[i]);
    trace = std::max(trace, std::abs(f.values[0][i] - std::min(A, beta0 * dist)));
    late = std::max(late, std::abs(f.values[2][i] - lax_oleinik(L, A, v1(f.x[i]), 1.0)));
  }
  o.note(fmt::format("max slope {:.4f} (bound {:.4f}), trace err {:.4f}, t=1 err {:.4f}", slope,
                     beta0 + 2.0 * h, trace, late));
  o.check(slope <= beta0 + 2.0 * h, "slope bound");
  o.check(trace <= 0.05, "obstacle trace");
  o.check(late <= 0.05, "Lax-Oleinik at t = 1");
  return o;
}

// Snapshot values keyed by lattice index x / h, for comparing grids of different extent.
std::map<long, double> by_node(const Field& f, std::size_t snap) {
  std::map<long, double> m;
  const double h = f.h();
  for (std::size_t i = 0; i < f.x.size(); ++i) m[std::lround(f.x[i] / h)] = f.values[snap][i];
  return m;
}

Outcome sandwich_and_monotonicity() {
  Outcome o;
  // Every direct-difference run: 0 <= u - u_R <= v_R + 1e-10.
  double worst_low = 0.0, worst_high = -1.0;
  for (const Run& r : g_runs)
    for (std::size_t s = 0; s < r.f.difference.values.size(); ++s)
      for (std::size_t i = 0; i < r.f.difference.x.size(); ++i) {
        const double d = r.f.difference.values[s][i], v = r.f.barrier.values[s][i];
        worst_low = std::min(worst_low, d);
        worst_high = std::max(worst_high, d - v);
      }
  o.note(fmt::format("{} runs, min diff {:.1e}, max diff - v_R {:.1e}", g_runs.size(), worst_low, worst_high));
  o.check(worst_low >= 0.0 && worst_high <= 1e-10, "direct difference sandwich");

  // u_R non-decreasing in R: within a ladder at equal snapshot times, u - u_R is non-increasing.
  int pairs = 0;
  bool mono = true;
  for (std::size_t a = 0; a < g_runs.size(); ++a)
    for (std::size_t b = 0; b < g_runs.size(); ++b) {
      const Run &small = g_runs[a], &large = g_runs[b];
      if (small.label != large.label || !(small.R < large.R)) continue;
      if (small.f.difference.times != large.f.difference.times) continue;
      ++pairs;
      for (std::size_t s = 0; s < small.f.difference.times.size(); ++s) {
        const auto ds = by_node(small.f.difference, s), dl = by_node(large.f.difference, s);
        for (const auto& [j, v] : ds) {
          const auto it = dl.find(j);
          if (it != dl.end() && it->second > v * (1.0 + 1e-12) + 1e-300) mono = false;
        }
      }
    }
  o.note(fmt::format("{} ordered pairs", pairs));
  o.check(mono, "u_R decreased in R");

  // Plain boundary modes on the demo kernel, compared by subtraction.
  std::map<double, Field> uR;
  Field u, vR;
  for (double R : {10.0, 15.0}) {
    SimConfig c;
    c.kernel = demo();
    c.R = R;
    c.times = {0.5, 1.0};
    c.u0 = [](double x) { return x < 3.0 ? 1.0 : 0.5; };
    c.bc_mode = BoundaryMode::WholeLine;
    u = simulate(c);
    c.bc_mode = BoundaryMode::DirichletZeroOutside;
    uR[R] = simulate(c);
    c.bc_mode = BoundaryMode::Barrier;
    vR = simulate(c);
    double low = 0.0, high = -1.0;
    for (std::size_t s = 0; s < u.values.size(); ++s)
      for (std::size_t i = 0; i < u.x.size(); ++i) {
        const double d = u.values[s][i] - uR[R].values[s][i];
        low = std::min(low, d);
        high = std::max(high, d - vR.values[s][i]);
      }
    o.check(low >= -1e-12 && high <= 1e-10, fmt::format("plain-mode sandwich at R={}", R));
  }
  bool plain_mono = true;
  for (std::size_t s = 0; s < u.values.size(); ++s) {
    const auto small = by_node(uR[10.0], s), large = by_node(uR[15.0], s);
    for (const auto& [j, v] : small) {
      const auto it = large.find(j);
      if (it != large.end() && it->second < v - 1e-12) plain_mono = false;
    }
  }
  o.check(plain_mono, "plain-mode u_R decreased in R");
  o.note("plain modes on the demo kernel checked");
  return o;
}

Outcome compact_rate() {
  Outcome o;
  const std::vector<double> radii = {8, 12, 16, 20, 24};
  const auto runs = simulate_ladder(uniform(), radii, 40, [](double) { return std::vector<double>{1.0}; }, "c7");
  std::vector<double> ratios;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const double R = radii[i];
    ratios.push_back(-std::log(window_sup(runs[i].difference, 0.0, R)) / (R * std::log(R)));
  }
  o.note("ratios " + list(ratios));
  o.check(nondecreasing(ratios), "ratios decrease");
  o.check(ratios.back() >= 0.4 && ratios.back() <= 1.3, "R=24 ratio outside [0.4, 1.3]");
  return o;
}

Outcome critical_rate() {
  Outcome o;
  const std::vector<double> radii = {16, 24, 32, 40};
  const double theta = 0.5, beta0 = 1.0;
  const auto runs =
      simulate_ladder(two_sided_exp(), radii, 10, [](double) { return std::vector<double>{1.0}; }, "c8");
  std::vector<double> ratios;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const double R = radii[i];
    ratios.push_back(-std::log(window_sup(runs[i].difference, theta, R)) / ((1.0 - theta) * beta0 * R));
  }
  o.note("ratios " + list(ratios));
  o.check(ratios.back() >= 0.6 && ratios.back() <= 1.4, "R=40 ratio outside [0.6, 1.4]");
  o.check(nondecreasing(ratios), "ratios decrease");
  return o;
}

Outcome demo_asymmetry() {
  Outcome o;
  const std::vector<double> radii = {10, 15, 20};
  const auto runs = simulate_ladder(demo(), radii, 10, [](double) { return std::vector<double>{1.0}; }, "c9");
  std::vector<double> factors;
  for (const auto& r : runs)
    factors.push_back(std::log(at_node(r.difference, 0, 2.0)) / std::log(at_node(r.difference, 0, -2.0)));
  o.note("factors " + list(factors));
  o.check(factors.back() >= 1.5, "R=20 factor below 1.5");
  o.check(nondecreasing(factors), "factor does not grow with R");
  return o;
}

Outcome negligibility() {
  Outcome o;
  const std::vector<std::pair<std::string, Kernel>> kernels = {{"uniform", uniform()},
                                                               {"exp_power2", make("exp_power", {{"alpha", {2.0}}})}};
  for (const auto& [name, k] : kernels) {
    const Hamiltonian h(make_params_1d(k, 0.0, 0.0, true));
    for (double sign : {1.0, -1.0}) {
      std::vector<double> r;
      for (double a : {20.0, 30.0, 40.0}) {
        const double p = sign * a;
        r.push_back(h.value_ess(v1(p)) / (p * h.gradient_ess(v1(p))[0]));
      }
      o.note(fmt::format("{} {} {}", name, sign > 0 ? "+" : "-", list(r)));
      o.check(r[0] < 0.2 && r[1] < r[0] && r[2] < r[1], name + " ratio");
    }
  }
  return o;
}

Outcome lagrangian_ordering() {
  Outcome o;
  const Kernel k2 = uniform();
  const Kernel k1 = scale_on_annulus(k2, 0.3, 0.6, 0.5);
  o.check(is_essentially_ordered(k1, k2).ordered, "annulus copy not ordered");
  const ConvexBundle b1 = make_bundle(make_params_1d(k1, 0.0, 0.0, true));
  const ConvexBundle b2 = make_bundle(make_params_1d(k2, 0.0, 0.0, true));
  for (double q : {1e3, 1e4, 1e5, -1e3, -1e4, -1e5}) {
    const double l1 = conjugate(b1, v1(q)).value, l2 = conjugate(b2, v1(q)).value;
    o.check(l1 >= l2, fmt::format("q={}: {} < {}", q, l1, l2));
    if (q == 1e5) o.note(fmt::format("L1(1e5) - L2(1e5) = {:.4g}", l1 - l2));
  }
  return o;
}

Outcome empirical_convergence() {
  Outcome o;
  const std::vector<double> radii = {8, 16, 24};
  const auto runs =
      simulate_ladder(uniform(), radii, 20, [](double R) { return std::vector<double>{0.05 * R}; }, "c12");
  const Lagrangian L(jump_form_params(uniform(), 0.0, 0.0));
  std::vector<double> errors;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const EmpiricalRate e = empirical_rate(runs[i].difference, radii[i]);
    double err = 0.0;
    for (std::size_t j = 0; j < e.rate.x.size(); ++j) {
      if (std::abs(e.rate.x[j]) > 0.5 + 1e-12) continue;
      o.check(!e.saturated[0][j], fmt::format("saturated at R={}", radii[i]));
      err = std::max(err, std::abs(e.rate.values[0][j] - rate_iinf(L, v1(e.rate.x[j]), 0.05).value));
    }
    errors.push_back(err);
  }
  o.note("sup errors " + list(errors));
  o.check(errors[1] < errors[0] && errors[2] < errors[1], "error not decreasing");
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
      {1, closed_form_hamiltonians}, {2, conjugate_correctness}, {3, k_inverse_table},
      {4, lax_oleinik_vs_scheme},    {5, constrained_solver},    {7, compact_rate},
      {8, critical_rate},            {9, demo_asymmetry},        {12, empirical_convergence},
      {10, negligibility},           {11, lagrangian_ordering},  {6, sandwich_and_monotonicity},
  };
  // Criterion 6 inspects the simulations of 7, 8, 9 and 12, so it runs after them.
  std::map<int, std::pair<Outcome, double>> results;
  for (const auto& [id, run] : criteria) {
    const auto start = Clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.check(false, std::string("error: ") + e.what());
    }
    results[id] = {o, seconds_since(start)};
  }
  int failed = 0;
  for (const auto& [id, r] : results) {
    const auto& [o, t] = r;
    std::cout << fmt::format("criterion {:2}: {} ({:.1f} s) {}\n", id, o.pass ? "PASS" : "FAIL", t, o.detail);
    if (!o.pass) ++failed;
  }
  std::cout << fmt::format("{} of {} criteria pass\n", results.size() - failed, results.size());
  return failed == 0 ? 0 : 1;
}
