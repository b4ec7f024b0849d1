#include "ldp/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "ldp/error.hpp"
#include "ldp/hamiltonian.hpp"
#include "ldp/hj.hpp"
#include "ldp/legendre.hpp"
#include "ldp/pde.hpp"
#include "ldp/rate.hpp"

namespace ldp {

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::Io, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes through a temporary file so readers never see a partial table.
void write_atomically(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    require(static_cast<bool>(out), ErrorKind::Io, "cannot open " + tmp);
    out << text;
    require(static_cast<bool>(out), ErrorKind::Io, "write failed: " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  require(!ec, ErrorKind::Io, "cannot rename " + tmp + " to " + path);
}

double number(const json& v, const std::string& what) {
  require(v.is_number(), ErrorKind::InvalidSpec, what + " must be a number");
  return v.get<double>();
}

std::vector<std::string> csv_cells(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

}  // namespace

KernelSpec parse_kernel_spec(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(ErrorKind::InvalidSpec, std::string("kernel spec: ") + e.what());
  }
  require(doc.is_object(), ErrorKind::InvalidSpec, "kernel spec: expected a JSON object");
  KernelSpec spec;
  for (const auto& [key, value] : doc.items()) {
    if (key == "family") {
      require(value.is_string(), ErrorKind::InvalidSpec, "kernel spec: family must be a string");
      spec.family = value.get<std::string>();
    } else if (key == "dimension") {
      require(value.is_number_integer(), ErrorKind::InvalidSpec, "kernel spec: dimension must be an integer");
      spec.dimension = value.get<int>();
    } else if (key == "rho0") {
      spec.rho0 = number(value, "kernel spec: rho0");
    } else if (key == "params") {
      require(value.is_object(), ErrorKind::InvalidSpec, "kernel spec: params must be an object");
      for (const auto& [name, p] : value.items()) {
        std::vector<double> v;
        if (p.is_array()) {
          for (const auto& e : p) v.push_back(number(e, "kernel spec: params." + name));
        } else {
          v.push_back(number(p, "kernel spec: params." + name));
        }
        spec.params[name] = std::move(v);
      }
    } else {
      fail(ErrorKind::InvalidSpec, "kernel spec: unknown key " + key);
    }
  }
  require(!spec.family.empty(), ErrorKind::InvalidSpec, "kernel spec: missing family");
  return spec;
}

KernelSpec load_kernel_spec(const std::string& path) { return parse_kernel_spec(read_file(path)); }

std::vector<double> parse_values(const std::string& text) {
  auto parse_one = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    require(used == s.size() && !s.empty(), ErrorKind::InvalidArgument, "not a number: '" + s + "'");
    return v;
  };
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ':')) parts.push_back(part);
    require(parts.size() == 3, ErrorKind::InvalidArgument, "range must be a:b:step, got '" + text + "'");
    const double a = parse_one(parts[0]), b = parse_one(parts[1]), step = parse_one(parts[2]);
    require(step > 0.0 && b >= a, ErrorKind::InvalidArgument, "range needs a <= b and step > 0");
    const auto count = static_cast<long>(std::floor((b - a) / step + 1e-9));
    require(count < 1000000, ErrorKind::InvalidArgument, "range has too many entries");
    for (long i = 0; i <= count; ++i) out.push_back(a + static_cast<double>(i) * step);
    return out;
  }
  for (const std::string& cell : csv_cells(text)) out.push_back(parse_one(cell));
  require(!out.empty(), ErrorKind::InvalidArgument, "empty value list");
  return out;
}

std::string format_number(double v) {
  std::string s = fmt::format("{:.10g}", v);
  if (s.find_first_not_of("-0123456789") == std::string::npos) s += ".0";
  return s;
}

std::string emit_plot_script(const std::string& table, PlotKind kind) {
  std::ifstream in(table);
  require(static_cast<bool>(in), ErrorKind::Io, "cannot open " + table);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorKind::InsufficientData, "plot: empty table " + table);
  const std::vector<std::string> header = csv_cells(line);
  auto column = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    require(it != header.end(), ErrorKind::MissingColumns, "plot: table lacks column " + name);
    return static_cast<int>(it - header.begin()) + 1;
  };
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#') rows.push_back(csv_cells(line));
  const std::string file = std::filesystem::path(table).filename().string();

  std::ostringstream s;
  s << "set datafile separator ','\n";
  if (kind == PlotKind::RateComparison) {
    const int pred = column("predicted_exponent"), emp = column("empirical_exponent");
    column("R");
    require(!rows.empty(), ErrorKind::InsufficientData, "plot: no rows in " + table);
    s << "set key top left\n"
      << "set xlabel 'predicted exponent'\n"
      << "set ylabel '-ln sup(u - u_R)'\n"
      << fmt::format("plot '{}' skip 1 using {}:{} with linespoints pt 7 title 'empirical', \\\n", file, pred, emp)
      << fmt::format("     '{}' skip 1 using {}:{} with lines dt 2 title 'predicted'\n", file, pred, pred);
    return s.str();
  }
  const int x = column("x"), r = column("R"), u = column("u_R");
  require(!rows.empty(), ErrorKind::InsufficientData, "plot: no rows in " + table);
  std::set<double> radii;
  for (const auto& row : rows) {
    require(row.size() == header.size(), ErrorKind::Io, "plot: ragged row in " + table);
    radii.insert(std::stod(row[static_cast<std::size_t>(r - 1)]));
  }
  s << "set key bottom center\n"
    << "set xlabel 'x'\n"
    << "set ylabel 'u_R(x, t)'\n"
    << "plot ";
  bool first = true;
  for (double R : radii) {
    const std::string tag = format_csv_number(R);
    s << (first ? "" : ", \\\n     ")
      << fmt::format("'{}' skip 1 using {}:(${} == {} ? ${} : 1/0) with lines title 'R = {}'", file, x, r, tag, u,
                     tag);
    first = false;
  }
  s << '\n';
  return s.str();
}

namespace {

struct Options {
  std::string kernel;
  double diffusion = 0.0;
  std::string drift = "0";
  std::string p, q, z, x;
  std::string t;
  double A = 1.0;
  std::string R;
  double theta = 0.0;
  int grid = 0;
  double dt = 0.0;
  double tmax = 0.0;
  std::string out;
  std::string mode = "whole_line";
  std::string config;
  unsigned seed = 0;
};

Kernel kernel_of(const Options& o) { return build_kernel(load_kernel_spec(o.kernel)); }

Vec as_vec(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); }

HamiltonianParams params_of(const Options& o) {
  Kernel k = kernel_of(o);
  std::vector<double> b = parse_values(o.drift);
  if (b.size() == 1 && k.dimension > 1) b.assign(static_cast<std::size_t>(k.dimension), b[0]);
  require(static_cast<int>(b.size()) == k.dimension, ErrorKind::InvalidArgument, "--drift has the wrong dimension");
  return jump_form_params(std::move(k), o.diffusion, as_vec(b));
}

// Points of dimension n: one per value when n = 1, otherwise a single vector.
std::vector<Vec> points(const std::string& text, int n) {
  const std::vector<double> v = parse_values(text);
  std::vector<Vec> out;
  if (n == 1) {
    for (double e : v) out.push_back(Vec::Constant(1, e));
    return out;
  }
  require(static_cast<int>(v.size()) == n, ErrorKind::InvalidArgument,
          fmt::format("expected a point with {} coordinates", n));
  out.push_back(as_vec(v));
  return out;
}

unsigned sweep_threads() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("LDP_THREADS")) {
    const std::vector<double> v = parse_values(env);
    require(v.size() == 1 && v[0] >= 1.0, ErrorKind::InvalidArgument, "LDP_THREADS must be a positive integer");
    n = std::min(n, static_cast<unsigned>(v[0]));
  }
  return n;
}

BoundaryMode mode_of(const std::string& m) {
  if (m == "whole_line") return BoundaryMode::WholeLine;
  if (m == "dirichlet_zero_outside") return BoundaryMode::DirichletZeroOutside;
  if (m == "barrier") return BoundaryMode::Barrier;
  fail(ErrorKind::InvalidArgument, "unknown mode " + m);
}

// Simulation settings shared by simulate and sweep. The optional config file
// uses the kernel-file syntax with keys u0 and domain_truncation.
SimConfig sim_config(const Options& o) {
  SimConfig c;
  c.kernel = kernel_of(o);
  c.A_diff = o.diffusion;
  const std::vector<double> b = parse_values(o.drift);
  require(b.size() == 1, ErrorKind::InvalidArgument, "--drift must be a scalar for simulations");
  c.B_drift = b[0];
  if (o.grid > 0) c.n_per_unit = o.grid;
  c.dt = o.dt;
  if (!o.config.empty()) {
    json doc;
    try {
      doc = json::parse(read_file(o.config));
    } catch (const json::exception& e) {
      fail(ErrorKind::InvalidSpec, std::string("config: ") + e.what());
    }
    require(doc.is_object(), ErrorKind::InvalidSpec, "config: expected a JSON object");
    for (const auto& [key, value] : doc.items()) {
      if (key == "u0") {
        const double level = number(value, "config: u0");
        require(level >= 0.0, ErrorKind::InvalidSpec, "config: u0 must be >= 0");
        c.u0 = [level](double) { return level; };
      } else if (key == "domain_truncation") {
        c.domain_truncation = number(value, "config: domain_truncation");
      } else {
        fail(ErrorKind::InvalidSpec, "config: unknown key " + key);
      }
    }
  }
  return c;
}

void print_values(std::ostream& out, const std::vector<double>& values) {
  for (double v : values) out << format_number(v) << '\n';
}

std::string with_suffix(const std::string& path, const std::string& suffix, const std::string& ext) {
  std::filesystem::path p(path);
  return (p.parent_path() / (p.stem().string() + suffix + ext)).string();
}

void emit_csv(const Options& o, std::ostream& out, const std::string& text) {
  if (o.out.empty())
    out << text;
  else
    write_atomically(o.out, text);
}

int command_hamiltonian(const Options& o, std::ostream& out) {
  const Hamiltonian H(params_of(o));
  std::vector<double> values;
  for (const Vec& p : points(o.p, H.dimension())) values.push_back(H.value(p));
  print_values(out, values);
  return 0;
}

int command_conjugate(const Options& o, std::ostream& out) {
  const Lagrangian L(params_of(o));
  std::vector<double> values;
  for (const Vec& q : points(o.q, L.dimension())) values.push_back(L.value(q));
  print_values(out, values);
  return 0;
}

int command_kinv(const Options& o, std::ostream& out) {
  const Kernel k = kernel_of(o);
  std::vector<double> values;
  for (double z : parse_values(o.z)) values.push_back(k_inverse(k, z));
  print_values(out, values);
  return 0;
}

int command_rate(const Options& o, std::ostream& out) {
  const Lagrangian L(params_of(o));
  std::vector<double> values;
  for (const Vec& x : points(o.x, L.dimension()))
    for (double t : parse_values(o.t)) values.push_back(rate_iinf(L, x, t).value);
  print_values(out, values);
  return 0;
}

int command_hj(const Options& o, std::ostream& out) {
  const HamiltonianParams hp = params_of(o);
  const Hamiltonian H(hp);
  HJGrid g;
  if (o.grid > 0) g.n = o.grid;
  g.A = o.A;
  g.dt = o.dt;
  g.T = o.tmax > 0.0 ? o.tmax : 1.0;
  const std::vector<double> times = o.t.empty() ? std::vector<double>{g.T} : parse_values(o.t);
  const Field f = regime_of(hp.kernel.tail) == Regime::Critical && !hp.kernel.is_null()
                      ? solve_hj_constrained(H, std::get<CriticalTail>(hp.kernel.tail).beta0, g, times)
                      : solve_hj(H, g, times);
  std::ostringstream csv;
  write_field_csv(f, csv);
  emit_csv(o, out, csv.str());
  return 0;
}

int command_simulate(const Options& o, std::ostream& out) {
  SimConfig c = sim_config(o);
  require(!o.R.empty(), ErrorKind::InvalidArgument, "simulate needs --R");
  const std::vector<double> R = parse_values(o.R);
  require(R.size() == 1, ErrorKind::InvalidArgument, "simulate takes a single --R");
  c.R = R[0];
  c.T = o.tmax > 0.0 ? o.tmax : 1.0;
  if (!o.t.empty()) c.times = parse_values(o.t);
  Field f;
  if (o.mode == "difference") {
    f = simulate_difference(c).difference;
  } else {
    c.bc_mode = mode_of(o.mode);
    f = simulate(c);
  }
  std::ostringstream csv;
  write_field_csv(f, csv);
  emit_csv(o, out, csv.str());
  return 0;
}

int command_sweep(const Options& o, std::ostream& out) {
  require(!o.out.empty(), ErrorKind::InvalidArgument, "sweep needs --out");
  require(!o.R.empty(), ErrorKind::InvalidArgument, "sweep needs --R");
  SweepConfig cfg;
  cfg.base = sim_config(o);
  cfg.radii = parse_values(o.R);
  cfg.theta = o.theta;
  const std::vector<double> t = o.t.empty() ? std::vector<double>{1.0} : parse_values(o.t);
  require(t.size() == 1, ErrorKind::InvalidArgument, "sweep takes a single --t");
  cfg.t_obs = t[0];
  cfg.threads = sweep_threads();
  const bool profiles = cfg.base.kernel.family == "asymmetric_1d_demo";
  std::vector<Field> diffs;
  const std::vector<SweepRecord> records = sweep(cfg, profiles ? &diffs : nullptr);

  std::optional<RateFit> fit;
  try {
    fit = fit_rate(records);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::InsufficientData && e.kind() != ErrorKind::Saturated) throw;
  }
  std::ostringstream csv;
  write_sweep_csv(records, fit ? &*fit : nullptr, csv);
  write_atomically(o.out, csv.str());
  write_atomically(with_suffix(o.out, "", ".gp"), emit_plot_script(o.out, PlotKind::RateComparison));

  if (profiles) {
    // u0 is constant, so u_R = u0 - (u - u_R).
    const double level = cfg.base.u0(0.0);
    std::ostringstream table;
    table << "x,R,u_R,difference\n";
    for (std::size_t i = 0; i < records.size(); ++i)
      for (std::size_t j = 0; j < diffs[i].x.size(); ++j) {
        const double x = diffs[i].x[j], d = diffs[i].values[0][j];
        if (std::abs(x) > records[i].R * (1.0 + 1e-12)) continue;
        table << format_csv_number(x) << ',' << format_csv_number(records[i].R) << ','
              << format_csv_number(level - d) << ',' << format_csv_number(d) << '\n';
      }
    const std::string path = with_suffix(o.out, "_profiles", ".csv");
    write_atomically(path, table.str());
    write_atomically(with_suffix(o.out, "_profiles", ".gp"), emit_plot_script(path, PlotKind::ProfileOverlay));
  }
  if (fit)
    out << "slope=" << format_number(fit->slope) << " r2=" << format_number(fit->r2)
        << " trend_ok=" << (fit->trend_ok ? "true" : "false") << '\n';
  return 0;
}

void report(std::ostream& err, const std::string& kind, const std::string& message) {
  err << json{{"error", kind}, {"message", message}}.dump() << '\n';
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Large-deviation rates for nonlocal diffusion: Hamiltonians, rates, HJ and PDE runs"};
  app.name("ldp");
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* cmd) {
    cmd->add_option("--kernel", o.kernel, "kernel spec file (JSON)")->required();
    cmd->add_option("--diffusion", o.diffusion, "diffusion coefficient A");
    cmd->add_option("--drift", o.drift, "drift B (comma list in N > 1)");
    cmd->add_option("--seed", o.seed, "seed; every command is deterministic");
  };
  CLI::App* ham = app.add_subcommand("hamiltonian", "evaluate H(p)");
  common(ham);
  ham->add_option("--p", o.p, "p: number, range a:b:step, or comma vector in N > 1")->required();
  CLI::App* conj = app.add_subcommand("conjugate", "evaluate L(q) = sup p.q - H(p)");
  common(conj);
  conj->add_option("--q", o.q, "q: number, range, or comma vector")->required();
  CLI::App* kinv = app.add_subcommand("kinv", "evaluate the inverse K-transform");
  common(kinv);
  kinv->add_option("--z", o.z, "z: number, range, or list")->required();
  CLI::App* rate = app.add_subcommand("rate", "rate function at (x, t)");
  common(rate);
  rate->add_option("--x", o.x, "x in the unit ball")->required();
  rate->add_option("--t", o.t, "t > 0")->required();
  CLI::App* hj = app.add_subcommand("hj", "solve I_t + H(I_x) = 0 on (-1, 1), write CSV");
  common(hj);
  hj->add_option("--A", o.A, "initial level");
  hj->add_option("--grid", o.grid, "interior nodes");
  hj->add_option("--dt", o.dt, "time step (0: CFL bound)");
  hj->add_option("--tmax", o.tmax, "horizon");
  hj->add_option("--t", o.t, "snapshot times");
  hj->add_option("--out", o.out, "CSV path (stdout when omitted)");
  CLI::App* sim = app.add_subcommand("simulate", "simulate the nonlocal equation, write CSV");
  common(sim);
  sim->add_option("--R", o.R, "ball radius")->required();
  sim->add_option("--grid", o.grid, "nodes per unit length");
  sim->add_option("--dt", o.dt, "time step (0: automatic)");
  sim->add_option("--tmax", o.tmax, "horizon");
  sim->add_option("--t", o.t, "snapshot times");
  sim->add_option("--mode", o.mode, "whole_line, dirichlet_zero_outside, barrier or difference");
  sim->add_option("--config", o.config, "JSON with u0 and domain_truncation");
  sim->add_option("--out", o.out, "CSV path (stdout when omitted)");
  CLI::App* sw = app.add_subcommand("sweep", "sup|u - u_R| over a range of R, with fit and plot script");
  common(sw);
  sw->add_option("--R", o.R, "radii a:b:step or list")->required();
  sw->add_option("--theta", o.theta, "window fraction");
  sw->add_option("--t", o.t, "observation time");
  sw->add_option("--grid", o.grid, "nodes per unit length");
  sw->add_option("--dt", o.dt, "time step (0: automatic)");
  sw->add_option("--config", o.config, "JSON with u0 and domain_truncation");
  sw->add_option("--out", o.out, "CSV path")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    report(err, "InvalidArgument", e.what());
    return 2;
  }

  try {
    if (ham->parsed()) return command_hamiltonian(o, out);
    if (conj->parsed()) return command_conjugate(o, out);
    if (kinv->parsed()) return command_kinv(o, out);
    if (rate->parsed()) return command_rate(o, out);
    if (hj->parsed()) return command_hj(o, out);
    if (sim->parsed()) return command_simulate(o, out);
    return command_sweep(o, out);
  } catch (const Error& e) {
    report(err, std::string(to_string(e.kind())), e.what());
    return is_validation(e.kind()) ? 2 : 3;
  } catch (const std::exception& e) {
    report(err, "NonConvergence", e.what());
    return 3;
  }
}

}  // namespace ldp
