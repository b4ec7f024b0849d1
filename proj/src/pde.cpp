#include "ldp/pde.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>
#include <thread>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>
#include <fmt/format.h>

#include "kernel_quad.hpp"
#include "ldp/error.hpp"
#include "ldp/rate.hpp"

namespace ldp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

detail::QuadOptions stencil_quad() {
  detail::QuadOptions opt;
  opt.rel_tol = 1e-12;
  opt.tail_tol = 1e-32;
  return opt;
}

// int_{a}^{b} f(r) J(r s) dr along the half-line of sign s, adaptive.
double ray_integral(const Kernel& k, double s, const std::function<double(double)>& f, double a,
                    double b) {
  if (!(b > a)) return 0.0;
  const std::array<double, 1> nu{s};
  return detail::integrate_along(
             k, nu, [&](double r) { return detail::Scaled{f(r), 0.0}; }, a, 0.0, stencil_quad(), b)
      .value;
}

// Same on a short interval away from the origin: fixed Gauss rule on the
// pieces between the kernel's jump radii.
template <class F>
double cell_integral(const Kernel& k, double s, const std::vector<double>& breaks, F f, double a,
                     double b) {
  if (!(b > a)) return 0.0;
  const std::array<double, 1> nu{s};
  auto g = [&](double r) { return f(r) * k.ray_density(r, nu); };
  double total = 0.0, lo = a;
  for (double c : breaks) {
    if (c <= lo || c >= b) continue;
    total += boost::math::quadrature::gauss<double, 15>::integrate(g, lo, c);
    lo = c;
  }
  return total + boost::math::quadrature::gauss<double, 15>::integrate(g, lo, b);
}

// Grid x_j = j h for j in [lo, hi], stored at offset j - lo.
struct Grid {
  double h = 0.0;
  int lo = 0, hi = 0;
  int out = 0;    // |j| <= out is reported
  int ball = 0;   // |j| <= ball is inside B_R

  std::size_t size() const { return static_cast<std::size_t>(hi - lo + 1); }
  std::size_t at(int j) const { return static_cast<std::size_t>(j - lo); }
  double x(int j) const { return j * h; }
};

struct Plan {
  Stencil stencil;
  Grid grid;
  double a = 0.0, b = 0.0;  // total diffusion and drift
  double dt = 0.0;
  std::vector<double> times;
};

int nodes_within(double r, double h) { return static_cast<int>(std::floor(r / h + 1e-9)); }

Plan make_plan(const SimConfig& cfg) {
  require(cfg.kernel.dimension == 1, ErrorKind::InvalidArgument, "simulate: one-dimensional kernels only");
  require(cfg.n_per_unit >= 1, ErrorKind::InvalidArgument, "simulate: n_per_unit must be >= 1");
  require(cfg.R > 0.0 && std::isfinite(cfg.R), ErrorKind::InvalidArgument, "simulate: R must be positive");
  require(cfg.A_diff >= 0.0 && std::isfinite(cfg.A_diff), ErrorKind::InvalidArgument,
          "simulate: A_diff must be finite and >= 0");
  require(std::isfinite(cfg.B_drift), ErrorKind::InvalidArgument, "simulate: B_drift must be finite");
  require(cfg.T > 0.0 && std::isfinite(cfg.T), ErrorKind::InvalidArgument, "simulate: T must be positive");
  require(cfg.dt >= 0.0, ErrorKind::InvalidArgument, "simulate: dt must be >= 0");
  require(static_cast<bool>(cfg.u0), ErrorKind::InvalidArgument, "simulate: missing initial data");

  Plan p;
  const double h = 1.0 / cfg.n_per_unit;
  p.stencil = build_stencil(cfg.kernel, h);
  const Stencil& s = p.stencil;
  p.a = cfg.A_diff + s.diffusion;
  p.b = cfg.B_drift + s.drift;

  const double reach = std::max(s.reach_minus, s.reach_plus) * h;
  double trunc = cfg.domain_truncation;
  if (trunc <= 0.0) trunc = cfg.R + std::max(reach, 10.0);
  if (trunc < cfg.R + reach * (1.0 - 1e-12))
    fail(ErrorKind::TruncationTooSmall,
         fmt::format("simulate: truncation {} is below R + kernel reach = {}", trunc, cfg.R + reach));
  p.grid.h = h;
  p.grid.ball = nodes_within(cfg.R, h);
  p.grid.out = nodes_within(trunc, h);
  p.grid.lo = -p.grid.out - s.reach_minus - 1;
  p.grid.hi = p.grid.out + s.reach_plus + 1;

  const double stable = positivity_dt(s, p.a, p.b);
  if (cfg.dt > 0.0) {
    if (cfg.dt > stable * (1.0 + 1e-12))
      fail(ErrorKind::CFLViolation,
           fmt::format("simulate: dt = {} exceeds the positivity bound {}", cfg.dt, stable));
    p.dt = cfg.dt;
  } else {
    p.dt = std::min(0.9 * stable, 1e-3);
  }

  p.times = cfg.times;
  if (p.times.empty()) p.times.push_back(cfg.T);
  std::sort(p.times.begin(), p.times.end());
  require(p.times.front() >= 0.0 && p.times.back() <= cfg.T * (1.0 + 1e-12), ErrorKind::InvalidArgument,
          "simulate: snapshot times must lie in [0, T]");
  return p;
}

// One explicit Euler step on the nodes |j| <= active. Every coefficient is
// nonnegative, so tiny values keep their relative accuracy.
void euler_step(const Plan& p, int active, double dt, const std::vector<double>& cur,
                std::vector<double>& next) {
  const Stencil& s = p.stencil;
  const double h = p.grid.h;
  const double diff = p.a / (h * h);
  const double adv = std::abs(p.b) / h;
  const double keep = 1.0 - dt * (s.mass() + 2.0 * diff + adv);
  const int side = p.b > 0.0 ? 1 : -1;
  const Eigen::Map<const Eigen::VectorXd> w(s.weights.data(), static_cast<Eigen::Index>(s.weights.size()));
  for (int j = -active; j <= active; ++j) {
    const std::size_t i = p.grid.at(j);
    const Eigen::Map<const Eigen::VectorXd> window(cur.data() + i - s.reach_minus,
                                                   static_cast<Eigen::Index>(s.weights.size()));
    double gain = w.dot(window) + diff * (cur[i - 1] + cur[i + 1]);
    if (adv > 0.0) gain += adv * cur[side > 0 ? i + 1 : i - 1];
    next[i] = keep * cur[i] + dt * gain;
  }
}

std::vector<double> reported(const Plan& p, const std::vector<double>& u) {
  return {u.begin() + static_cast<std::ptrdiff_t>(p.grid.at(-p.grid.out)),
          u.begin() + static_cast<std::ptrdiff_t>(p.grid.at(p.grid.out)) + 1};
}

Field empty_field(const Plan& p) {
  Field f;
  f.dt = p.dt;
  for (int j = -p.grid.out; j <= p.grid.out; ++j) f.x.push_back(p.grid.x(j));
  return f;
}

// Advances the states through the snapshot times; `step` moves every state
// by one step of the given length and `record` stores the snapshots.
template <class Step, class Record>
void run(const Plan& p, Step step, Record record) {
  double t = 0.0;
  for (double target : p.times) {
    while (t < target * (1.0 - 1e-14)) {
      const double dt = std::min(p.dt, target - t);
      step(dt);
      t = std::min(t + dt, target);
      if (target - t < 1e-14 * target) t = target;
    }
    record(target);
  }
}

double sup_initial(const Plan& p, const SimConfig& cfg) {
  double m = 0.0;
  for (int j = p.grid.lo; j <= p.grid.hi; ++j) {
    const double v = cfg.u0(p.grid.x(j));
    require(v >= 0.0 && std::isfinite(v), ErrorKind::InvalidArgument,
            "simulate: u0 must be finite and nonnegative");
    m = std::max(m, v);
  }
  return m;
}

std::vector<double> initial_state(const Plan& p, const SimConfig& cfg, BoundaryMode mode, double M) {
  std::vector<double> u(p.grid.size());
  for (int j = p.grid.lo; j <= p.grid.hi; ++j) {
    const bool inside = std::abs(j) <= p.grid.ball;
    double v = cfg.u0(p.grid.x(j));
    if (mode == BoundaryMode::DirichletZeroOutside && !inside) v = 0.0;
    if (mode == BoundaryMode::Barrier) v = inside ? 0.0 : M;
    u[p.grid.at(j)] = v;
  }
  return u;
}

}  // namespace

double Stencil::mass() const {
  double m = 0.0;
  for (double w : weights) m += w;
  return m;
}

double kernel_reach(const Kernel& k, double nu, double tol) {
  require(k.dimension == 1, ErrorKind::InvalidArgument, "kernel_reach: one-dimensional kernels only");
  if (k.is_null()) return 0.0;
  const std::array<double, 1> dir{nu > 0.0 ? 1.0 : -1.0};
  const double support = k.ray_support(dir);
  if (std::isfinite(support)) return support;
  auto small = [&](double r) { return tail_mass(k, r, dir) < tol; };
  double lo = 0.0, hi = 1.0;
  while (!small(hi)) {
    lo = hi;
    hi *= 2.0;
    require(hi < 1e6, ErrorKind::NonConvergence, "kernel_reach: tail mass does not decay");
  }
  while (hi - lo > 1e-3 * hi) {
    const double mid = 0.5 * (lo + hi);
    (small(mid) ? hi : lo) = mid;
  }
  return hi;
}

Stencil build_stencil(const Kernel& k, double h) {
  require(k.dimension == 1, ErrorKind::InvalidArgument, "stencil: one-dimensional kernels only");
  require(h > 0.0, ErrorKind::InvalidArgument, "stencil: h must be positive");
  Stencil s;
  s.h = h;
  if (k.is_null()) {
    s.weights = {0.0};
    return s;
  }
  // Singular kernels keep |y| < sqrt(h) out of the lattice sum.
  const int inner = k.singularity_exponent > 0.0 ? static_cast<int>(std::floor(std::sqrt(h) / h)) : 0;
  const double delta = inner * h;
  const double r_plus = kernel_reach(k, 1.0), r_minus = kernel_reach(k, -1.0);
  s.reach_plus = r_plus > delta ? static_cast<int>(std::ceil(r_plus / h)) : 0;
  s.reach_minus = r_minus > delta ? static_cast<int>(std::ceil(r_minus / h)) : 0;
  s.weights.assign(static_cast<std::size_t>(s.reach_minus + s.reach_plus + 1), 0.0);
  // Hat-function weights: the jump lands on the two nearest nodes with
  // linear interpolation, which keeps the mass and the first moment exact.
  for (double sign : {1.0, -1.0}) {
    const std::array<double, 1> nu{sign};
    const std::vector<double> breaks = k.ray_breakpoints(nu);
    const int reach = sign > 0.0 ? s.reach_plus : s.reach_minus;
    const double limit = sign > 0.0 ? r_plus : r_minus;
    // With no inner region the hat at the origin is a zero jump; it is kept
    // so that the weights carry the whole mass.
    for (int c = inner; c <= reach; ++c) {
      const double mid = c * h;
      const double rise = c == 0 ? 0.0
                                 : cell_integral(k, sign, breaks, [&](double r) { return r / h - (c - 1); },
                                                 std::max((c - 1) * h, delta), std::min(mid, limit));
      const double fall = cell_integral(k, sign, breaks, [&](double r) { return (c + 1) - r / h; }, mid,
                                        std::min((c + 1) * h, limit));
      s.weights[static_cast<std::size_t>(s.reach_minus + static_cast<int>(sign) * c)] += rise + fall;
    }
  }
  const bool compensated = k.singularity_exponent >= 1.0;
  for (double sign : {1.0, -1.0}) {
    s.diffusion += 0.5 * ray_integral(k, sign, [](double r) { return r * r; }, 0.0, delta);
    if (compensated)
      s.drift -= sign * ray_integral(k, sign, [](double r) { return r; }, delta, std::max(delta, 1.0));
    else
      s.drift += sign * ray_integral(k, sign, [](double r) { return r; }, 0.0, delta);
  }
  return s;
}

double positivity_dt(const Stencil& s, double A_diff, double B_drift) {
  const double rate = s.mass() + 2.0 * A_diff / (s.h * s.h) + std::abs(B_drift) / s.h;
  return rate > 0.0 ? 1.0 / rate : kInf;
}

double default_dt(const Stencil& s, double A_diff, double B_drift) {
  return std::min(0.9 * positivity_dt(s, A_diff, B_drift), 1e-3);
}

Field simulate(const SimConfig& cfg) {
  const Plan p = make_plan(cfg);
  const double M = sup_initial(p, cfg);
  std::vector<double> u = initial_state(p, cfg, cfg.bc_mode, M);
  std::vector<double> next = u;
  const int active = cfg.bc_mode == BoundaryMode::WholeLine ? p.grid.out : p.grid.ball;
  Field f = empty_field(p);
  run(
      p,
      [&](double dt) {
        euler_step(p, active, dt, u, next);
        std::swap(u, next);
      },
      [&](double t) {
        f.times.push_back(t);
        f.values.push_back(reported(p, u));
      });
  return f;
}

DifferenceFields simulate_difference(const SimConfig& cfg) {
  const Plan p = make_plan(cfg);
  const double M = sup_initial(p, cfg);
  std::vector<double> u = initial_state(p, cfg, BoundaryMode::WholeLine, M);
  const bool constant = std::all_of(u.begin(), u.end(), [&](double v) { return v == u.front(); });
  std::vector<double> d = u, v = initial_state(p, cfg, BoundaryMode::Barrier, M);
  for (int j = -p.grid.ball; j <= p.grid.ball; ++j) d[p.grid.at(j)] = 0.0;
  std::vector<double> u_next = u, d_next = d, v_next = v;

  DifferenceFields out{empty_field(p), empty_field(p)};
  run(
      p,
      [&](double dt) {
        euler_step(p, p.grid.ball, dt, d, d_next);
        euler_step(p, p.grid.ball, dt, v, v_next);
        std::swap(d, d_next);
        std::swap(v, v_next);
        if (constant) return;
        // Outside the ball u_R = 0, so the difference is u itself.
        euler_step(p, p.grid.out, dt, u, u_next);
        std::swap(u, u_next);
        for (std::size_t i = 0; i < u.size(); ++i) {
          const int j = p.grid.lo + static_cast<int>(i);
          if (std::abs(j) > p.grid.ball) d[i] = u[i];
        }
      },
      [&](double t) {
        out.difference.times.push_back(t);
        out.difference.values.push_back(reported(p, d));
        out.barrier.times.push_back(t);
        out.barrier.values.push_back(reported(p, v));
      });
  return out;
}

namespace {

bool in_window(double x, double theta, double R) {
  return std::abs(x) <= theta * R * (1.0 + 1e-12) + 1e-12;
}

}  // namespace

double sup_difference(const Field& u, const Field& uR, double theta, double R) {
  require(u.x.size() == uR.x.size() && u.times == uR.times, ErrorKind::GridMismatch,
          "sup_difference: fields do not share the grid and times");
  for (std::size_t i = 0; i < u.x.size(); ++i)
    require(std::abs(u.x[i] - uR.x[i]) <= 1e-12 * (1.0 + std::abs(u.x[i])), ErrorKind::GridMismatch,
            "sup_difference: fields do not share the grid");
  require(theta >= 0.0 && R > 0.0, ErrorKind::InvalidArgument, "sup_difference: need theta >= 0 and R > 0");
  double best = -kInf;
  for (std::size_t s = 0; s < u.times.size(); ++s) {
    for (std::size_t i = 0; i < u.x.size(); ++i) {
      if (!in_window(u.x[i], theta, R)) continue;
      const double d = u.values[s][i] - uR.values[s][i];
      if (d < -1e-12)
        fail(ErrorKind::ComparisonViolated,
             fmt::format("sup_difference: u - u_R = {} < 0 at x = {}", d, u.x[i]));
      best = std::max(best, d);
    }
  }
  require(best > -kInf, ErrorKind::InvalidArgument, "sup_difference: no node in the window");
  return std::max(best, 0.0);
}

double window_sup(const Field& diff, double theta, double R) {
  require(theta >= 0.0 && R > 0.0, ErrorKind::InvalidArgument, "window_sup: need theta >= 0 and R > 0");
  double best = -kInf;
  for (const auto& snap : diff.values)
    for (std::size_t i = 0; i < diff.x.size(); ++i)
      if (in_window(diff.x[i], theta, R)) best = std::max(best, snap[i]);
  require(best > -kInf, ErrorKind::InvalidArgument, "window_sup: no node in the window");
  return best;
}

EmpiricalRate empirical_rate(const Field& vR, double R) {
  require(R > 0.0, ErrorKind::InvalidArgument, "empirical_rate: R must be positive");
  EmpiricalRate out;
  out.rate.dt = vR.dt / R;
  std::vector<std::size_t> nodes;
  for (std::size_t i = 0; i < vR.x.size(); ++i) {
    if (std::abs(vR.x[i]) > R * (1.0 + 1e-12)) continue;
    nodes.push_back(i);
    out.rate.x.push_back(vR.x[i] / R);
  }
  const double floor_value = -std::log(kSaturationFloor) / R;
  for (std::size_t s = 0; s < vR.times.size(); ++s) {
    out.rate.times.push_back(vR.times[s] / R);
    std::vector<double> row;
    std::vector<bool> sat;
    for (std::size_t i : nodes) {
      const double v = vR.values[s][i];
      const bool low = !(v > kSaturationFloor);
      row.push_back(low ? floor_value : -std::log(v) / R);
      sat.push_back(low);
    }
    out.rate.values.push_back(std::move(row));
    out.saturated.push_back(std::move(sat));
  }
  return out;
}

RateFit fit_rate(std::vector<SweepRecord> records) {
  std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) { return a.R < b.R; });
  require(records.size() >= 3, ErrorKind::InsufficientData, "fit_rate: need at least 3 records");
  for (std::size_t i = 1; i < records.size(); ++i)
    require(records[i].R > records[i - 1].R, ErrorKind::InsufficientData, "fit_rate: radii must be distinct");
  for (const auto& r : records)
    require(r.sup_diff > kSaturationFloor && std::isfinite(r.empirical_exponent), ErrorKind::Saturated,
            fmt::format("fit_rate: record at R = {} is saturated", r.R));
  const double n = static_cast<double>(records.size());
  double mx = 0.0, my = 0.0;
  for (const auto& r : records) {
    mx += r.predicted_exponent / n;
    my += r.empirical_exponent / n;
  }
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& r : records) {
    const double dx = r.predicted_exponent - mx, dy = r.empirical_exponent - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  require(sxx > 0.0, ErrorKind::InsufficientData, "fit_rate: predicted exponents are all equal");
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (const auto& r : records) {
    const double e = r.empirical_exponent - (fit.intercept + fit.slope * r.predicted_exponent);
    ss_res += e * e;
  }
  fit.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  fit.trend_ok = true;
  for (std::size_t i = 1; i < records.size(); ++i)
    if (records[i].ratio < records[i - 1].ratio * (1.0 - 1e-12)) fit.trend_ok = false;
  return fit;
}

std::vector<SweepRecord> sweep(const SweepConfig& cfg, std::vector<Field>* differences) {
  require(!cfg.radii.empty(), ErrorKind::InvalidArgument, "sweep: no radii");
  require(cfg.t_obs > 0.0, ErrorKind::InvalidArgument, "sweep: t_obs must be positive");
  std::vector<double> radii = cfg.radii;
  std::sort(radii.begin(), radii.end());
  std::vector<SweepRecord> out(radii.size());
  std::vector<Field> fields(differences ? radii.size() : 0);
  std::vector<std::exception_ptr> errors(radii.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < radii.size(); i = next++) {
      try {
        SimConfig c = cfg.base;
        c.R = radii[i];
        c.T = cfg.t_obs;
        c.times = {cfg.t_obs};
        if (c.domain_truncation > 0.0 && c.domain_truncation <= c.R) c.domain_truncation = 0.0;
        const DifferenceFields f = simulate_difference(c);
        SweepRecord r;
        r.R = c.R;
        r.theta = cfg.theta;
        r.t_obs = cfg.t_obs;
        r.sup_diff = window_sup(f.difference, cfg.theta, c.R);
        r.empirical_exponent = -std::log(r.sup_diff);
        r.predicted_exponent = predicted_log_bound(c.kernel, c.R, cfg.theta, cfg.t_obs);
        r.ratio = r.empirical_exponent / r.predicted_exponent;
        out[i] = r;
        if (differences) fields[i] = f.difference;
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned threads = std::clamp<unsigned>(cfg.threads, 1u, static_cast<unsigned>(radii.size()));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  if (differences) *differences = std::move(fields);
  return out;
}

namespace {

constexpr std::array<const char*, 7> kSweepColumns = {
    "R", "theta", "t_obs", "sup_diff", "empirical_exponent", "predicted_exponent", "ratio"};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

}  // namespace

void write_sweep_csv(const std::vector<SweepRecord>& records, const RateFit* fit, std::ostream& out) {
  for (std::size_t i = 0; i < kSweepColumns.size(); ++i) out << (i ? "," : "") << kSweepColumns[i];
  out << '\n';
  for (const auto& r : records) {
    const std::array<double, 7> row = {r.R, r.theta, r.t_obs, r.sup_diff,
                                       r.empirical_exponent, r.predicted_exponent, r.ratio};
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_csv_number(row[i]);
    out << '\n';
  }
  if (fit)
    out << "# fit,slope=" << format_csv_number(fit->slope) << ",intercept=" << format_csv_number(fit->intercept)
        << ",r2=" << format_csv_number(fit->r2) << ",trend_ok=" << (fit->trend_ok ? "true" : "false") << '\n';
}

std::vector<SweepRecord> read_sweep_csv(std::istream& in) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorKind::Io, "sweep csv: empty input");
  const std::vector<std::string> header = split(line);
  std::array<std::size_t, kSweepColumns.size()> column{};
  for (std::size_t c = 0; c < kSweepColumns.size(); ++c) {
    const auto it = std::find(header.begin(), header.end(), kSweepColumns[c]);
    require(it != header.end(), ErrorKind::MissingColumns,
            fmt::format("sweep csv: missing column {}", kSweepColumns[c]));
    column[c] = static_cast<std::size_t>(it - header.begin());
  }
  std::vector<SweepRecord> out;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const std::vector<std::string> cells = split(line);
    require(cells.size() == header.size(), ErrorKind::Io, "sweep csv: malformed row: " + line);
    std::array<double, kSweepColumns.size()> v{};
    try {
      for (std::size_t c = 0; c < v.size(); ++c) v[c] = std::stod(cells[column[c]]);
    } catch (const std::exception&) {
      fail(ErrorKind::Io, "sweep csv: malformed number in row: " + line);
    }
    out.push_back({v[0], v[1], v[2], v[3], v[4], v[5], v[6]});
  }
  return out;
}

}  // namespace ldp
