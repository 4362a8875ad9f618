#pragma once

// The release gate: one entry per shipped guarantee, each checked at its
// stated tolerance. Returned as data so the CLI and the test binary share
// the battery.

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

#include <cmath>
#include <complex>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

namespace pathint::acceptance {

struct Criterion {
  std::string name;
  bool pass = false;
  std::string detail;
};

namespace detail {

inline std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3e", x);
  return buf;
}

inline Criterion green_function_oracle() {
  Criterion c{"greens: closed forms invert the discretized kernel", false, ""};
  TimeGrid g(0.0, 1.0, 200);
  double worst_pinned = 0.0, worst_free = 0.0;
  for (int d : {1, 2}) {
    Eigen::MatrixXd hm = Eigen::MatrixXd::Identity(d, d);
    if (d == 2) hm << 1.5, 0.25, 0.25, 0.8;
    MetricMatrix h = MetricMatrix::from(hm);
    worst_pinned = std::max(
        worst_pinned, verify_inverse(discretize_kernel(BoundaryFamily::fixed_both_ends(), g, h),
                                     BoundaryFamily::fixed_both_ends()));
    for (BoundaryFamily fam :
         {BoundaryFamily::fixed_at_start(), BoundaryFamily::fixed_at_end(),
          BoundaryFamily::fixed_at(g, 0.5)})
      worst_free = std::max(worst_free, verify_inverse(discretize_kernel(fam, g, h), fam));
  }
  double value = green_closed_form(BoundaryFamily::fixed_both_ends(), g, 0.25, 0.5);
  bool value_ok = std::abs(value - 0.125) < 1e-14;
  c.pass = worst_pinned < 1e-10 && worst_free < 5.0 * g.dt() && value_ok;
  c.detail = "pinned " + fmt(worst_pinned) + " free " + fmt(worst_free) +
             " G(0.25,0.5)=" + fmt(value);
  return c;
}

inline Criterion endpoint_decomposition() {
  Criterion c{"greens: endpoint subtraction identity on a 50x50 lattice", false, ""};
  TimeGrid g(0.0, 1.0, 50);
  BoundaryFamily za = BoundaryFamily::fixed_at_start();
  BoundaryFamily zab = BoundaryFamily::fixed_both_ends();
  double gbb = green_closed_form(za, g, g.t_b, g.t_b);
  double worst = 0.0;
  for (int i = 0; i <= 50; ++i)
    for (int j = 0; j <= 50; ++j) {
      double t = g.node(i), u = g.node(j);
      double lhs = green_closed_form(zab, g, t, u);
      double rhs = green_closed_form(za, g, t, u) -
                   green_closed_form(za, g, t, g.t_b) *
                       green_closed_form(za, g, g.t_b, u) / gbb;
      worst = std::max(worst, std::abs(lhs - rhs));
    }
  c.pass = worst < 1e-12;
  c.detail = "max " + fmt(worst);
  return c;
}

inline Criterion mc_covariance() {
  Criterion c{"mc: bridge covariance and endpoint characteristic function", false, ""};
  TimeGrid g(0.0, 1.0, 50);
  MetricMatrix h = MetricMatrix::identity(1);
  long count = 100000;
  PathSampler bridge(BoundaryFamily::fixed_both_ends(), g, h, 20240901);

  int pairs[10][2] = {{5, 5},   {5, 25},  {10, 40}, {12, 12}, {20, 30},
                      {25, 25}, {25, 45}, {30, 44}, {35, 35}, {40, 48}};
  std::vector<double> acc(10, 0.0), acc_sq(10, 0.0);
  for (long s = 0; s < count; ++s) {
    DiscretePath z = bridge.sample(s);
    for (int k = 0; k < 10; ++k) {
      double v = z.samples(pairs[k][0], 0) * z.samples(pairs[k][1], 0);
      acc[k] += v;
      acc_sq[k] += v * v;
    }
  }
  bool cov_ok = true;
  double worst_sigma = 0.0;
  for (int k = 0; k < 10; ++k) {
    double mean = acc[k] / count;
    double se = std::sqrt((acc_sq[k] / count - mean * mean) / count);
    double expect = green_closed_form(BoundaryFamily::fixed_both_ends(), g,
                                      g.node(pairs[k][0]), g.node(pairs[k][1])) /
                    (2.0 * pi);
    double sigmas = std::abs(mean - expect) / se;
    worst_sigma = std::max(worst_sigma, sigmas);
    cov_ok = cov_ok && (sigmas < 3.0);
  }

  PathSampler pinned0(BoundaryFamily::fixed_at_start(), g, h, 77);
  bool cf_ok = true;
  double worst_cf = 0.0;
  for (double rho : {0.5, 1.0}) {
    PathFunctional f = [&](const DiscretePath& z) {
      return std::exp(std::complex<double>(0.0, 2.0 * pi * rho * z.samples(g.n_steps, 0)));
    };
    Estimate e = expectation(pinned0, f, count);
    double expect = std::exp(-pi * rho * rho * g.length());
    double sigmas = std::abs(e.mean.real() - expect) / e.std_err;
    worst_cf = std::max(worst_cf, sigmas);
    cf_ok = cf_ok && (sigmas < 3.0) && (std::abs(e.mean.imag()) < 3.0 * e.std_err);
  }
  c.pass = cov_ok && cf_ok;
  c.detail = "cov worst " + fmt(worst_sigma) + " sigma, cf worst " + fmt(worst_cf) + " sigma";
  return c;
}

inline Criterion feynman_kac_vs_pde() {
  Criterion c{"mc: feynman-kac matches the crank-nicolson oracle", false, ""};
  auto phi = [](double x) { return std::exp(-x * x); };
  CrankNicolson1d cn;
  double T = 0.5;
  bool ok = true;
  double worst = 0.0;
  std::uint64_t seed = 11;
  for (int pot = 0; pot < 2; ++pot) {
    auto V = pot == 0 ? std::function<double(double)>([](double) { return 0.0; })
                      : std::function<double(double)>([](double x) { return -x * x; });
    Eigen::VectorXd u = cn.solve(phi, V, T);
    for (double x0v : {0.0, 0.5}) {
      FeynmanKacResult r = feynman_kac([&](const Vec& x) { return V(x(0)); },
                                       [&](const Vec& x) { return phi(x(0)); }, T,
                                       Vec::Constant(1, x0v), 200, 60000, seed++);
      double oracle = cn.eval(u, x0v);
      double err = std::abs(r.estimate - oracle);
      double bound = 3.0 * r.std_err + 1e-3;
      worst = std::max(worst, err / bound);
      ok = ok && (err < bound);
    }
  }
  c.pass = ok;
  c.detail = "worst err/bound " + fmt(worst);
  return c;
}

inline Criterion determinant_triple_agreement() {
  Criterion c{"det: limit, jacobi and log-derivative routes agree", false, ""};
  MetricMatrix h = MetricMatrix::identity(1);
  bool ok = true;
  double worst = 0.0;
  for (double wT : {0.5, 1.0, 2.0}) {
    FormDensity osc = [](double) { return Mat::Constant(1, 1, -1.0); };
    TimeGrid g(0.0, wT, 2000);
    TimeGrid g_log(0.0, wT, 400);
    for (BoundaryKind kind : {BoundaryKind::PP, BoundaryKind::MP}) {
      BoundaryFamily fam = (kind == BoundaryKind::PP) ? BoundaryFamily::fixed_both_ends()
                                                      : BoundaryFamily::fixed_at_end();
      double lim = det_by_limit(h, osc, 1.0, fam, g).value;
      double jac = det_by_jacobi(jacobi_blocks_of_form(h, osc, 1.0, g), kind).value;
      double scale = std::abs(jac);
      double spread = std::abs(lim - jac) / scale;
      // the log-derivative route exists only while Delta(nu) has no zero in
      // [0,1]; the momentum-position pencil crosses one beyond wT = pi/2
      bool log_defined = (kind == BoundaryKind::PP) || (wT < 0.5 * pi);
      if (log_defined) {
        double log = det_by_log_derivative(h, osc, kind, g_log, 1.0, 50).value;
        spread = std::max({spread, std::abs(lim - log) / scale,
                           std::abs(jac - log) / scale});
      }
      worst = std::max(worst, spread);
      ok = ok && (spread < 0.005);
    }
  }
  TimeGrid g1(0.0, 1.0, 2000);
  double v_osc = det_by_limit(h, [](double) { return Mat::Constant(1, 1, -1.0); }, 1.0,
                              BoundaryFamily::fixed_both_ends(), g1)
                     .value;
  double v_dif = det_by_limit(h, [](double) { return Mat::Constant(1, 1, 1.0); }, 1.0,
                              BoundaryFamily::fixed_both_ends(), g1)
                     .value;
  bool pins = std::abs(v_osc - std::sin(1.0)) / std::sin(1.0) < 1e-3 &&
              std::abs(v_dif - std::sinh(1.0)) / std::sinh(1.0) < 1e-3;
  c.pass = ok && pins;
  c.detail = "worst spread " + fmt(worst) + ", sin " + fmt(v_osc) + ", sinh " + fmt(v_dif);
  return c;
}

inline Criterion morse_index_counts() {
  Criterion c{"det: morse index counts the conjugate points", false, ""};
  MetricMatrix h = MetricMatrix::identity(1);
  FormDensity osc = [](double) { return Mat::Constant(1, 1, -1.0); };
  auto idx = [&](double wT) {
    TimeGrid g(0.0, wT, 600);
    return morse_index(h, osc, 1.0, BoundaryFamily::fixed_both_ends(), g);
  };
  int i0 = idx(0.5 * pi - 0.1), i1 = idx(1.5 * pi), i3 = idx(3.5 * pi);
  c.pass = (i0 == 0) && (i1 == 1) && (i3 == 3);
  c.detail = "indices " + std::to_string(i0) + "," + std::to_string(i1) + "," +
             std::to_string(i3);
  return c;
}

inline Criterion jacobi_block_identities() {
  Criterion c{"jacobi: block identities, hessian match and green inversion", false, ""};
  ActionSpec spec;
  spec.h = MetricMatrix::identity(1);
  spec.V = [](const Vec& x) { return 0.5 * x(0) * x(0) + 0.1 * std::pow(x(0), 4); };
  spec.gradV = [](const Vec& x) { return Vec::Constant(1, x(0) + 0.4 * std::pow(x(0), 3)); };
  spec.hessV = [](const Vec& x) { return Mat::Constant(1, 1, 1.0 + 1.2 * x(0) * x(0)); };

  TimeGrid g(0.0, 1.0, 2000);
  Vec xa = Vec::Constant(1, -0.2), xb = Vec::Constant(1, 0.6);
  ClassicalSolution sol = solve_classical(spec, BoundaryData::position_to_position(xa, xb), g);
  JacobiBlocks b = jacobi_blocks(spec, sol);
  int nb = b.last();

  bool initial = b.J(0).cwiseAbs().maxCoeff() == 0.0 && b.L(0).cwiseAbs().maxCoeff() == 0.0 &&
                 (b.K(0) - Mat::Identity(1, 1)).cwiseAbs().maxCoeff() == 0.0 &&
                 (b.Kt(0) - Mat::Identity(1, 1)).cwiseAbs().maxCoeff() == 0.0;
  double inv_err =
      std::max((b.J(nb) * b.M() - Mat::Identity(1, 1)).cwiseAbs().maxCoeff(),
               (b.K(nb) * b.N() - Mat::Identity(1, 1)).cwiseAbs().maxCoeff());

  // transposition against an independent backward integration from the
  // endpoint state: Ktilde(t_b,t_a) = K(t_a,t_b)^T
  HamiltonianFlow back =
      integrate_hamiltonian(spec, sol.x_at(g.n_steps), sol.p_at(g.n_steps), g, true, true);
  double transp_err = std::abs(b.Kt(nb)(0, 0) - back.Phi.front()(0, 0));

  double delta = 1e-4;
  auto act = [&](double da, double db) {
    return solve_classical(spec,
                           BoundaryData::position_to_position(
                               Vec::Constant(1, xa(0) + da), Vec::Constant(1, xb(0) + db)),
                           g)
        .action;
  };
  double hess = (act(delta, delta) - act(delta, -delta) - act(-delta, delta) +
                 act(-delta, -delta)) /
                (4.0 * delta * delta);
  double hess_rel = std::abs(b.van_vleck()(0, 0) - hess) / std::abs(hess);

  // green functions against the discretized second variation, all four kinds
  ActionSpec harm = ActionSpec::harmonic(1, 1.0);
  TimeGrid gh(0.0, 1.0, 500);
  Vec pa = Vec::Ones(1), hx = Vec::Zero(1);
  Vec hxb = Vec::Constant(1, std::sin(1.0)), hpb = Vec::Constant(1, std::cos(1.0));
  double green_worst = 0.0;
  struct Kase {
    BoundaryKind kind;
    BoundaryData bc;
  };
  for (auto& [kind, bc] : std::initializer_list<Kase>{
           {BoundaryKind::PP, BoundaryData::position_to_position(hx, hxb)},
           {BoundaryKind::MP, BoundaryData::momentum_to_position(pa, hxb)},
           {BoundaryKind::PM, BoundaryData::position_to_momentum(hx, hpb)},
           {BoundaryKind::MM, BoundaryData::momentum_to_momentum(pa, hpb)}}) {
    ClassicalSolution hs = solve_classical(harm, bc, gh);
    JacobiBlocks hb = jacobi_blocks(harm, hs);
    DiscreteKernel sv = second_variation_matrix(harm, hs, gh, kind);
    Eigen::MatrixXd inv = sv.solve(Eigen::MatrixXd::Identity(sv.size(), sv.size()));
    for (int bi = 0; bi < sv.n_blocks(); bi += 25)
      for (int bj = 0; bj < sv.n_blocks(); bj += 25) {
        double ti = gh.node(sv.free_nodes[bi]), tj = gh.node(sv.free_nodes[bj]);
        green_worst = std::max(
            green_worst, std::abs(inv(bi, bj) - jacobi_green(hb, kind, ti, tj)(0, 0)));
      }
  }

  c.pass = initial && inv_err < 1e-10 && transp_err < 1e-8 && hess_rel < 1e-4 &&
           green_worst < 10.0 * gh.dt();
  c.detail = "inv " + fmt(inv_err) + " transp " + fmt(transp_err) + " hess " +
             fmt(hess_rel) + " green " + fmt(green_worst);
  return c;
}

inline Criterion wkb_exactness() {
  Criterion c{"wkb: free and harmonic moduli", false, ""};
  PhysicalConstants pc;

  ActionSpec fr = ActionSpec::free_particle(2);
  TimeGrid g(0.0, 1.0, 500);
  Vec xa = Vec::Zero(2), xb(2);
  xb << 1.0, 0.2;
  ClassicalSolution fs = solve_classical(fr, BoundaryData::position_to_position(xa, xb), g);
  WkbAmplitude famp = wkb_point_to_point(fr, fs, jacobi_blocks(fr, fs));
  double free_err = std::abs(famp.prefactor_modulus - pc.mass / (pc.planck() * 1.0));

  ActionSpec ha = ActionSpec::harmonic(1, 1.0);
  TimeGrid gh(0.0, 1.0, 2000);
  ClassicalSolution hs = solve_classical(
      ha, BoundaryData::position_to_position(Vec::Zero(1), Vec::Ones(1)), gh);
  WkbAmplitude hamp = wkb_point_to_point(ha, hs, jacobi_blocks(ha, hs));
  double expect = std::sqrt(1.0 / (pc.planck() * std::sin(1.0)));
  MetricMatrix h1 = MetricMatrix::identity(1);
  double det = det_by_limit(h1, [](double) { return Mat::Constant(1, 1, -1.0); }, 1.0,
                            BoundaryFamily::fixed_both_ends(), gh)
                   .value;
  double via_det = (1.0 / std::sqrt(pc.planck() * 1.0)) / std::sqrt(det);
  double cross_rel = std::abs(hamp.prefactor_modulus - via_det) / via_det;

  c.pass = free_err < 1e-13 && std::abs(hamp.prefactor_modulus - expect) < 1e-8 &&
           cross_rel < 0.005;
  c.detail = "free err " + fmt(free_err) + " harmonic cross " + fmt(cross_rel);
  return c;
}

inline Criterion flow_and_development() {
  Criterion c{"flow: great circles, action conservation, chain rule, multistep", false, ""};
  // great circle at n = 1e4
  TimeGrid g(0.0, pi, 10000);
  DiscretePath z(g, BoundaryFamily::fixed_at_end(), 2);
  for (int i = 0; i <= g.n_steps; ++i) z.samples(i, 0) = g.node(i) - g.t_b;
  FrameS2 f{Vec3(0, 0, 1), Vec3(1, 0, 0), Vec3(0, 1, 0)};
  DevelopmentResult dev = develop(z, f);
  double circle_err = 0.0;
  for (int i = 0; i <= g.n_steps; ++i) {
    double s = g.node(i) - g.t_b;
    Vec3 exact = std::cos(s) * f.p + std::sin(s) * f.e1;
    circle_err = std::max(circle_err, (dev.points.row(i).transpose() - exact).norm());
  }

  // action conservation on a smooth chart drive
  TimeGrid ga(0.0, 1.0, 20000);
  DiscretePath za(ga, BoundaryFamily::fixed_at_end(), 2);
  for (int i = 0; i <= ga.n_steps; ++i) {
    double t = ga.node(i);
    za.samples(i, 0) = std::sin(2.0 * t) - std::sin(2.0);
    za.samples(i, 1) = 0.7 * (std::cos(3.0 * t) - std::cos(3.0));
  }
  DevelopmentResult deva = develop(za, f);
  double qa = quadratic_variation(za, MetricMatrix::identity(2));
  double action_rel = std::abs(developed_action(deva, ga) - qa) / qa;

  // chain rule is bitwise on the shared increment sequence
  TimeGrid gc(0.0, 1.0, 256);
  DiscretePath zc(gc, BoundaryFamily::fixed_at_start(), 2);
  for (int i = 0; i <= gc.n_steps; ++i) {
    double t = gc.node(i);
    zc.samples(i, 0) = 0.5 * std::sin(3.0 * t);
    zc.samples(i, 1) = 0.4 * t * t;
  }
  double chain = chain_rule_check(frame_bundle_s2(), zc, f.pack(), 0.5);

  // multistep self-convergence order on the frame bundle
  TimeGrid gm(0.0, 1.0, 4096);
  DiscretePath zm(gm, BoundaryFamily::fixed_at_start(), 2);
  for (int i = 0; i <= gm.n_steps; ++i) {
    zm.samples(i, 0) = 0.8 * gm.node(i);
    zm.samples(i, 1) = 0.6 * gm.node(i);
  }
  DrivenSystem sys = frame_bundle_s2();
  FlowResult ref = integrate(sys, zm, f.pack());
  auto err_at = [&](int n) {
    return (multistep_sigma(sys, zm, f.pack(), n) - ref.endpoint).norm();
  };
  double e32 = err_at(32), e64 = err_at(64), e128 = err_at(128);
  double ord1 = std::log2(e32 / e64), ord2 = std::log2(e64 / e128);

  bool order_ok = std::abs(ord1 - 1.0) <= 0.2 && std::abs(ord2 - 1.0) <= 0.2;
  c.pass = circle_err < 1e-6 && action_rel < 1e-6 && chain == 0.0 && order_ok;
  c.detail = "circle " + fmt(circle_err) + " action " + fmt(action_rel) + " chain " +
             fmt(chain) + " order " + fmt(ord1) + "/" + fmt(ord2);
  return c;
}

inline Criterion aharonov_bohm_machinery() {
  Criterion c{"ab: zero-flux collapse, flux periodicity, inversion round trip", false, ""};
  AbConfig cfg;
  cfg.r_a = 1.0;
  cfg.r_b = 1.2;
  cfg.theta_a = 0.3;
  cfg.theta_b = 1.1;
  cfg.T = 0.4;
  cfg.n_max = 24;

  Complex flat = ab_free_kernel(cfg);
  AbConfig zero = cfg;
  zero.flux_fraction = 0.0;
  double zero_rel = std::abs(ab_winding_sum(zero) - flat) / std::abs(flat);

  double period_rel = 0.0;
  for (double cc : {0.2, 0.63}) {
    AbConfig a = cfg, b = cfg;
    a.flux_fraction = cc;
    b.flux_fraction = cc + 1.0;
    double pa = std::norm(ab_winding_sum(a)), pb = std::norm(ab_winding_sum(b));
    period_rel = std::max(period_rel, std::abs(pa - pb) / pa);
  }

  double integer_rel = 0.0;
  for (int m : {1, -2}) {
    AbConfig a = cfg;
    a.flux_fraction = m;
    integer_rel = std::max(integer_rel,
                           std::abs(std::abs(ab_winding_sum(a)) - std::abs(flat)) /
                               std::abs(flat));
  }

  std::vector<Complex> family = ab_flux_family(cfg, 256);
  double round_trip = ab_round_trip_error(family, cfg, cfg.n_max);

  c.pass = zero_rel < 1e-10 && period_rel < 1e-12 && integer_rel < 1e-12 &&
           round_trip < 1e-8;
  c.detail = "zero " + fmt(zero_rel) + " period " + fmt(period_rel) + " integer " +
             fmt(integer_rel) + " roundtrip " + fmt(round_trip);
  return c;
}

inline Criterion chapman_kolmogorov() {
  Criterion c{"propagators: free kernels satisfy the semigroup law", false, ""};
  Regime s1 = Regime::diffusive();
  double T1 = 0.5, T2 = 0.5;
  Vec xa = Vec::Constant(1, -0.3), xb = Vec::Constant(1, 0.7);
  int n = 4000;
  double lo = -8.0, hi = 8.0, h = (hi - lo) / n;
  Complex acc{0, 0};
  for (int i = 0; i <= n; ++i) {
    double xm = lo + i * h;
    Complex v = free_amplitude(1, xa, Vec::Constant(1, xm), T1, s1) *
                free_amplitude(1, Vec::Constant(1, xm), xb, T2, s1);
    double wgt = (i == 0 || i == n) ? 1.0 : ((i % 2) ? 4.0 : 2.0);
    acc += wgt * v;
  }
  acc *= h / 3.0;
  double err = std::abs(acc - free_amplitude(1, xa, xb, T1 + T2, s1));
  c.pass = err < 1e-6;
  c.detail = "conv err " + fmt(err);
  return c;
}

}  // namespace detail

inline std::vector<Criterion> run_suite() {
  std::vector<Criterion> out;
  out.push_back(detail::green_function_oracle());
  out.push_back(detail::endpoint_decomposition());
  out.push_back(detail::mc_covariance());
  out.push_back(detail::feynman_kac_vs_pde());
  out.push_back(detail::determinant_triple_agreement());
  out.push_back(detail::morse_index_counts());
  out.push_back(detail::jacobi_block_identities());
  out.push_back(detail::wkb_exactness());
  out.push_back(detail::flow_and_development());
  out.push_back(detail::aharonov_bohm_machinery());
  out.push_back(detail::chapman_kolmogorov());
  return out;
}

}  // namespace pathint::acceptance
