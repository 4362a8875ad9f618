#pragma once

// Command-line front end: every experiment is a subcommand with a seed and
// machine-readable output (CSV or JSON, schema version 1). Identical flags
// and seed produce byte-identical files.

#include "pathint/acceptance.hpp"
#include "pathint/aharonov_bohm.hpp"
#include "pathint/classical.hpp"
#include "pathint/determinants.hpp"
#include "pathint/develop.hpp"
#include "pathint/feynman_kac.hpp"
#include "pathint/flow.hpp"
#include "pathint/greens.hpp"
#include "pathint/grid.hpp"
#include "pathint/jacobi.hpp"
#include "pathint/pde.hpp"
#include "pathint/propagators.hpp"
#include "pathint/sampler.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>

namespace pathint::cli {

using nlohmann::json;

namespace detail {

inline BoundaryFamily family_from(const std::string& name, const TimeGrid& g) {
  if (name == "za") return BoundaryFamily::fixed_at_start();
  if (name == "zb") return BoundaryFamily::fixed_at_end();
  if (name == "zab") return BoundaryFamily::fixed_both_ends();
  if (name == "z0") return BoundaryFamily::fixed_at(g, 0.5 * (g.t_a + g.t_b));
  throw CLI::ValidationError("--family", "unknown family " + name);
}

inline void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) return;
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open output file " + path);
  os << text;
}

// Scalar results go out as JSON (schema 1) or as a one-row CSV with the
// same fields, in the given field order either way.
inline void emit(const std::string& out, const std::string& format,
                 const std::vector<std::pair<std::string, json>>& fields,
                 const std::string& summary) {
  if (format == "json") {
    json wrapped;
    wrapped["schema"] = 1;
    for (const auto& [k, v] : fields) wrapped[k] = v;
    write_text(out, wrapped.dump(2) + "\n");
  } else if (format == "csv") {
    std::ostringstream os;
    os << std::setprecision(17);
    bool first = true;
    for (const auto& [k, v] : fields) os << (first ? "" : ",") << k, first = false;
    os << "\n";
    first = true;
    for (const auto& [k, v] : fields) {
      os << (first ? "" : ",");
      if (v.is_number_float())
        os << v.get<double>();
      else
        os << v;
      first = false;
    }
    os << "\n";
    write_text(out, os.str());
  } else {
    throw CLI::ValidationError("--format", "unknown format " + format);
  }
  std::cout << summary << "\n";
}

struct Csv {
  std::ostringstream os;
  Csv() { os << std::setprecision(17); }
  template <typename... T>
  void row(T&&... cells) {
    bool first = true;
    ((os << (first ? "" : ",") << cells, first = false), ...);
    os << "\n";
  }
  std::string str() const { return os.str(); }
};

inline int run_greens(const std::string& family, int n, int d, const std::string& out) {
  TimeGrid g(0.0, 1.0, n);
  BoundaryFamily fam = family_from(family, g);
  Eigen::MatrixXd hm = Eigen::MatrixXd::Identity(d, d);
  MetricMatrix h = MetricMatrix::from(hm);
  DiscreteKernel k = discretize_kernel(fam, g, h);
  Eigen::MatrixXd inv = k.solve(Eigen::MatrixXd::Identity(k.size(), k.size()));

  Csv csv;
  csv.row("t", "u", "G_closed", "G_discrete", "abs_err");
  double worst = 0.0;
  for (int i = 0; i < k.n_blocks(); ++i)
    for (int j = 0; j < k.n_blocks(); ++j) {
      double t = g.node(k.free_nodes[i]), u = g.node(k.free_nodes[j]);
      double closed = green_closed_form(fam, g, t, u);
      double disc = inv(i * d, j * d);
      double err = std::abs(closed - disc);
      worst = std::max(worst, err);
      csv.row(t, u, closed, disc, err);
    }
  write_text(out, csv.str());
  std::printf("greens family=%s n=%d d=%d max_abs_err=%.3e\n", family.c_str(), n, d, worst);
  return 0;
}

inline int run_mc(const std::string& check, const std::string& family, long samples,
                  std::uint64_t seed, int grid_n, const std::string& format,
                  const std::string& out) {
  TimeGrid g(0.0, 1.0, grid_n);
  MetricMatrix h = MetricMatrix::identity(1);
  double estimate = 0.0, std_err = 0.0, oracle = 0.0;

  if (check == "cov") {
    BoundaryFamily fam = family_from(family, g);
    PathSampler s(fam, g, h, seed);
    int i = grid_n / 4, j = grid_n / 2;
    PathFunctional f = [&](const DiscretePath& z) {
      return std::complex<double>(z.samples(i, 0) * z.samples(j, 0), 0.0);
    };
    Estimate e = expectation(s, f, samples);
    estimate = e.mean.real();
    std_err = e.std_err;
    oracle = green_closed_form(fam, g, g.node(i), g.node(j)) / (2.0 * pi);
  } else if (check == "cf") {
    PathSampler s(BoundaryFamily::fixed_at_start(), g, h, seed);
    double rho = 1.0;
    PathFunctional f = [&](const DiscretePath& z) {
      return std::exp(std::complex<double>(0.0, 2.0 * pi * rho * z.samples(grid_n, 0)));
    };
    Estimate e = expectation(s, f, samples);
    estimate = e.mean.real();
    std_err = e.std_err;
    oracle = std::exp(-pi * rho * rho * g.length());
  } else if (check == "fk") {
    auto phi = [](double x) { return std::exp(-x * x); };
    auto V = [](double x) { return -x * x; };
    double T = 0.5;
    FeynmanKacResult r =
        feynman_kac([&](const Vec& x) { return V(x(0)); },
                    [&](const Vec& x) { return phi(x(0)); }, T, Vec::Zero(1), grid_n,
                    samples, seed);
    estimate = r.estimate;
    std_err = r.std_err;
    CrankNicolson1d cn;
    oracle = cn.eval(cn.solve(phi, V, T), 0.0);
  } else {
    throw CLI::ValidationError("--check", "unknown check " + check);
  }

  std::vector<std::pair<std::string, json>> fields{{"estimate", estimate},
                                                   {"std_err", std_err},
                                                   {"oracle", oracle},
                                                   {"abs_err", std::abs(estimate - oracle)}};
  char line[160];
  std::snprintf(line, sizeof(line), "mc check=%s estimate=%.6f oracle=%.6f err=%.3e",
                check.c_str(), estimate, oracle, std::abs(estimate - oracle));
  emit(out, format, fields, line);
  return 0;
}

inline int run_flow(const std::string& system, std::uint64_t seed, int grid_n, double T,
                    double flux, const std::string& out) {
  TimeGrid g(0.0, T, grid_n);
  MetricMatrix h2 = MetricMatrix::identity(2);
  PathSampler s(BoundaryFamily::fixed_at_start(), g, h2, seed);
  DiscretePath z = s.sample(0);

  DrivenSystem sys;
  Vec x0;
  if (system == "flat") {
    sys = flat_translations(2);
    x0 = Vec::Zero(2);
  } else if (system == "polar") {
    sys = polar_plane();
    x0 = Vec(2);
    x0 << 2.0, 0.0;
  } else if (system == "gauge") {
    sys = abelian_gauge(flux);
    x0 = Vec(3);
    x0 << 2.0, 0.0, 0.0;
  } else if (system == "clock") {
    sys = product_with_clock(2, [](const Vec& x) { return -0.5 * x.squaredNorm(); });
    x0 = Vec::Zero(3);
  } else {
    throw CLI::ValidationError("--system", "unknown system " + system);
  }
  FlowResult res = integrate(sys, z, x0);
  Csv csv;
  std::ostringstream hdr;
  csv.os << "t";
  for (int a = 1; a <= res.trajectory.cols(); ++a) csv.os << ",x" << a;
  csv.os << "\n";
  for (int i = 0; i < res.trajectory.rows(); ++i) {
    csv.os << g.node(i);
    for (int a = 0; a < res.trajectory.cols(); ++a) csv.os << "," << res.trajectory(i, a);
    csv.os << "\n";
  }
  write_text(out, csv.str());
  std::printf("flow system=%s n=%d endpoint_norm=%.6f step_err=%.3e\n", system.c_str(),
              grid_n, res.endpoint.norm(), res.max_step_error);
  return 0;
}

inline int run_develop(int n, double duration, double vx, double vy,
                       const std::string& out) {
  TimeGrid g(0.0, duration, n);
  DiscretePath z(g, BoundaryFamily::fixed_at_end(), 2);
  for (int i = 0; i <= n; ++i) {
    double base = g.node(i) - g.t_b;
    z.samples(i, 0) = vx * base;
    z.samples(i, 1) = vy * base;
  }
  FrameS2 f{Vec3(0, 0, 1), Vec3(1, 0, 0), Vec3(0, 1, 0)};
  DevelopmentResult dev = develop(z, f);

  double circle_err = 0.0;
  double speed = std::hypot(vx, vy);
  if (speed > 0) {
    Vec3 dir = (vx * f.e1 + vy * f.e2) / speed;
    for (int i = 0; i <= n; ++i) {
      double s = speed * (g.node(i) - g.t_b);
      Vec3 exact = std::cos(s) * f.p + std::sin(s) * dir;
      circle_err = std::max(circle_err, (dev.points.row(i).transpose() - exact).norm());
    }
  }
  Csv csv;
  csv.row("t", "x", "y", "z");
  for (int i = 0; i <= n; ++i)
    csv.row(g.node(i), dev.points(i, 0), dev.points(i, 1), dev.points(i, 2));
  write_text(out, csv.str());
  std::printf("develop n=%d duration=%.3f great_circle_dev=%.3e\n", n, duration, circle_err);
  return 0;
}

inline int run_jacobi(double omega, double T, int n, const std::string& kind_name,
                      const std::string& out) {
  ActionSpec spec = ActionSpec::harmonic(1, omega);
  TimeGrid g(0.0, T, n);
  BoundaryKind kind = BoundaryKind::PP;
  if (kind_name == "mp") kind = BoundaryKind::MP;
  else if (kind_name == "pm") kind = BoundaryKind::PM;
  else if (kind_name == "mm") kind = BoundaryKind::MM;
  else if (kind_name != "pp") throw CLI::ValidationError("--kind", "unknown kind " + kind_name);

  BoundaryData bc = BoundaryData::position_to_position(Vec::Zero(1), Vec::Constant(1, 0.5));
  if (kind == BoundaryKind::MP)
    bc = BoundaryData::momentum_to_position(Vec::Ones(1), Vec::Constant(1, 0.5));
  if (kind == BoundaryKind::PM)
    bc = BoundaryData::position_to_momentum(Vec::Zero(1), Vec::Constant(1, 0.5));
  if (kind == BoundaryKind::MM)
    bc = BoundaryData::momentum_to_momentum(Vec::Ones(1), Vec::Constant(1, std::cos(omega * T)));
  ClassicalSolution sol = solve_classical(spec, bc, g);
  JacobiBlocks b = jacobi_blocks(spec, sol);

  Csv csv;
  csv.row("t", "J", "K", "Ktilde", "L", "green_diag");
  for (int i = 0; i <= n; i += std::max(1, n / 200)) {
    double t = g.node(i);
    csv.row(t, b.J(i)(0, 0), b.K(i)(0, 0), b.Kt(i)(0, 0), b.L(i)(0, 0),
            jacobi_green(b, kind, t, t)(0, 0));
  }
  write_text(out, csv.str());
  std::printf("jacobi kind=%s omega=%.3f T=%.3f detJ(t_b)=%.6f detK(t_b)=%.6f\n",
              kind_name.c_str(), omega, T, b.J(b.last()).determinant(),
              b.K(b.last()).determinant());
  return 0;
}

inline int run_det(const std::string& method, double omega, double T,
                   const std::string& family, const std::string& sign, int n,
                   const std::string& format, const std::string& out) {
  MetricMatrix h = MetricMatrix::identity(1);
  double a_val = (sign == "diff" ? 1.0 : -1.0) * omega * omega;
  FormDensity a = [a_val](double) { return Mat::Constant(1, 1, a_val); };
  TimeGrid g(0.0, T, n);
  BoundaryKind kind = (family == "zb") ? BoundaryKind::MP : BoundaryKind::PP;
  BoundaryFamily fam = (family == "zb") ? BoundaryFamily::fixed_at_end()
                                        : BoundaryFamily::fixed_both_ends();

  DetResult r;
  if (method == "limit") {
    r = det_by_limit(h, a, 1.0, fam, g);
    r.morse_index = morse_index(h, a, 1.0, fam, g);
  } else if (method == "jacobi") {
    r = det_by_jacobi(jacobi_blocks_of_form(h, a, 1.0, g), kind);
    r.morse_index = morse_index(h, a, 1.0, fam, g);
  } else if (method == "logderiv") {
    TimeGrid gl(0.0, T, std::min(n, 400));
    r = det_by_log_derivative(h, a, kind, gl, 1.0, 50);
    r.morse_index = morse_index(h, a, 1.0, fam, g);
  } else {
    throw CLI::ValidationError("--method", "unknown method " + method);
  }

  std::vector<std::pair<std::string, json>> fields{{"value", r.value},
                                                   {"index", r.morse_index},
                                                   {"method", method},
                                                   {"n", n},
                                                   {"err_est", r.err_est}};
  char line[160];
  std::snprintf(line, sizeof(line), "det method=%s family=%s value=%.6f index=%d",
                method.c_str(), family.c_str(), r.value, r.morse_index);
  emit(out, format, fields, line);
  return 0;
}

inline int run_wkb(const std::string& kind, double omega, double T, double xa, double xb,
                   int n, const std::string& format, const std::string& out) {
  ActionSpec spec =
      omega == 0.0 ? ActionSpec::free_particle(1) : ActionSpec::harmonic(1, omega);
  TimeGrid g(0.0, T, n);
  WkbAmplitude amp;
  if (kind == "pp") {
    ClassicalSolution sol = solve_classical(
        spec, BoundaryData::position_to_position(Vec::Constant(1, xa), Vec::Constant(1, xb)),
        g);
    amp = wkb_point_to_point(spec, sol, jacobi_blocks(spec, sol));
  } else if (kind == "mp") {
    spec.S0 = [](const Vec&) { return 0.0; };
    spec.gradS0 = [](const Vec&) { return Vec::Zero(1); };
    spec.hessS0 = [](const Vec&) { return Mat::Zero(1, 1); };
    ClassicalSolution sol = solve_classical(
        spec, BoundaryData::momentum_to_position({}, Vec::Constant(1, xb)), g);
    amp = wkb_momentum_to_position(spec, sol, jacobi_blocks(spec, sol));
  } else {
    throw CLI::ValidationError("--kind", "unknown kind " + kind);
  }
  std::vector<std::pair<std::string, json>> fields{{"modulus", std::abs(amp.value)},
                                                   {"phase", std::arg(amp.value)},
                                                   {"action", amp.action},
                                                   {"det", amp.vanvleck_det},
                                                   {"index", amp.index_q}};
  char line[160];
  std::snprintf(line, sizeof(line), "wkb kind=%s modulus=%.6f action=%.6f index=%d",
                kind.c_str(), std::abs(amp.value), amp.action, amp.index_q);
  emit(out, format, fields, line);
  return 0;
}

inline int run_ab(double flux, double ra, double rb, double tha, double thb, double T,
                  int n_max, int c_nodes, const std::string& sweep, int points,
                  const std::string& format, const std::string& out) {
  AbConfig cfg;
  cfg.flux_fraction = flux;
  cfg.r_a = ra;
  cfg.r_b = rb;
  cfg.theta_a = tha;
  cfg.theta_b = thb;
  cfg.T = T;
  cfg.n_max = n_max;
  cfg.validate();

  if (!sweep.empty()) {
    Csv csv;
    csv.row(sweep, "modulus", "phase");
    for (int k = 0; k < points; ++k) {
      AbConfig at = cfg;
      double v = 0.0;
      if (sweep == "c") {
        v = static_cast<double>(k) / points;
        at.flux_fraction = v;
      } else if (sweep == "T") {
        v = cfg.T * (0.25 + 1.5 * k / std::max(1, points - 1));
        at.T = v;
      } else {
        throw CLI::ValidationError("--sweep", "unknown sweep " + sweep);
      }
      Complex amp = ab_winding_sum(at);
      csv.row(v, std::abs(amp), std::arg(amp));
    }
    write_text(out, csv.str());
    std::printf("ab sweep=%s points=%d written\n", sweep.c_str(), points);
    return 0;
  }

  Complex amp = ab_winding_sum(cfg);
  std::vector<Complex> family = ab_flux_family(cfg, c_nodes);
  double round_trip = ab_round_trip_error(family, cfg, cfg.n_max);
  std::vector<std::pair<std::string, json>> fields{
      {"modulus", std::abs(amp)},
      {"phase", std::arg(amp)},
      {"free_modulus", std::abs(ab_free_kernel(cfg))},
      {"round_trip_err", round_trip}};
  char line[160];
  std::snprintf(line, sizeof(line), "ab c=%.3f modulus=%.6f roundtrip=%.3e", flux,
                std::abs(amp), round_trip);
  emit(out, format, fields, line);
  return 0;
}

inline int run_suite() {
  int failures = 0;
  for (const auto& c : acceptance::run_suite()) {
    std::printf("%s  %-65s %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                c.detail.c_str());
    if (!c.pass) ++failures;
  }
  if (failures) std::printf("%d criterion(s) failed\n", failures);
  return failures ? 1 : 0;
}

}  // namespace detail

inline int run(int argc, const char* const* argv) {
  CLI::App app{"path-space Gaussian integrators, driven flows and semiclassics"};
  app.require_subcommand(1);

  std::string out, format = "json", family = "zab", check = "cov", system = "flat";
  std::string method = "limit";
  std::string kind = "pp", sign = "osc", sweep;
  long samples = 100000;
  std::uint64_t seed = 1;
  int grid_n = 64, d = 1, n_max = 24, c_nodes = 256, points = 64;
  double omega = 1.0, T = 1.0, flux = 0.0, ra = 1.0, rb = 1.0, tha = 0.0, thb = 0.5;
  double xa = 0.0, xb = 1.0, vx = 1.0, vy = 0.0, duration = 3.14159265358979323846;

  auto* greens = app.add_subcommand("greens", "closed-form vs discretized Green functions");
  greens->add_option("--family", family);
  greens->add_option("--n", grid_n);
  greens->add_option("--d", d);
  greens->add_option("--out", out);

  auto* mc = app.add_subcommand("mc", "Monte Carlo integrator checks");
  mc->add_option("--check", check);
  mc->add_option("--family", family);
  mc->add_option("--samples", samples);
  mc->add_option("--seed", seed)->required();
  mc->add_option("--grid-n", grid_n);
  mc->add_option("--format", format);
  mc->add_option("--out", out);

  auto* flow = app.add_subcommand("flow", "driven chart flows");
  flow->add_option("--system", system);
  flow->add_option("--seed", seed)->required();
  flow->add_option("--grid-n", grid_n);
  flow->add_option("--T", T);
  flow->add_option("--c", flux);
  flow->add_option("--out", out);

  auto* dev = app.add_subcommand("develop", "Cartan development on the sphere");
  dev->add_option("--n", grid_n);
  dev->add_option("--duration", duration);
  dev->add_option("--vx", vx);
  dev->add_option("--vy", vy);
  dev->add_option("--out", out);

  auto* jac = app.add_subcommand("jacobi", "Jacobi blocks and Green functions");
  jac->add_option("--omega", omega);
  jac->add_option("--T", T);
  jac->add_option("--n", grid_n);
  jac->add_option("--kind", kind);
  jac->add_option("--out", out);

  auto* det = app.add_subcommand("det", "functional determinant ratios");
  det->add_option("--method", method);
  det->add_option("--omega", omega);
  det->add_option("--T", T);
  det->add_option("--family", family);
  det->add_option("--sign", sign);
  det->add_option("--n", grid_n);
  det->add_option("--format", format);
  det->add_option("--out", out);

  auto* wkb = app.add_subcommand("wkb", "semiclassical amplitudes");
  wkb->add_option("--kind", kind);
  wkb->add_option("--omega", omega);
  wkb->add_option("--T", T);
  wkb->add_option("--xa", xa);
  wkb->add_option("--xb", xb);
  wkb->add_option("--n", grid_n);
  wkb->add_option("--format", format);
  wkb->add_option("--out", out);

  auto* ab = app.add_subcommand("ab", "flux-line winding machinery");
  ab->add_option("--c", flux);
  ab->add_option("--ra", ra);
  ab->add_option("--rb", rb);
  ab->add_option("--theta-a", tha);
  ab->add_option("--theta-b", thb);
  ab->add_option("--T", T);
  ab->add_option("--n-max", n_max);
  ab->add_option("--c-nodes", c_nodes);
  ab->add_option("--sweep", sweep);
  ab->add_option("--points", points);
  ab->add_option("--format", format);
  ab->add_option("--out", out);

  app.add_subcommand("suite", "run the full verification battery");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (greens->parsed()) return detail::run_greens(family, grid_n, d, out);
    if (mc->parsed())
      return detail::run_mc(check, family, samples, seed, grid_n, format, out);
    if (flow->parsed()) return detail::run_flow(system, seed, grid_n, T, flux, out);
    if (dev->parsed()) return detail::run_develop(grid_n, duration, vx, vy, out);
    if (jac->parsed()) return detail::run_jacobi(omega, T, grid_n, kind, out);
    if (det->parsed())
      return detail::run_det(method, omega, T, family, sign, grid_n, format, out);
    if (wkb->parsed()) return detail::run_wkb(kind, omega, T, xa, xb, grid_n, format, out);
    if (ab->parsed())
      return detail::run_ab(flux, ra, rb, tha, thb, T, n_max, c_nodes, sweep, points,
                            format, out);
    return detail::run_suite();
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace pathint::cli
