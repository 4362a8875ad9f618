#include "pathint/aharonov_bohm.hpp"
#include "pathint/determinants.hpp"
#include "pathint/propagators.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

using namespace pathint;

namespace {

// Simpson quadrature of a complex integrand
template <typename F>
Complex simpson(F&& f, double lo, double hi, int n) {
  if (n % 2) ++n;
  double h = (hi - lo) / n;
  Complex acc = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) acc += f(lo + i * h) * ((i % 2) ? 4.0 : 2.0);
  return acc * (h / 3.0);
}

}  // namespace

TEST_CASE("free amplitude values and limits") {
  Vec x0 = Vec::Zero(2);
  REQUIRE(free_amplitude(2, x0, x0, 2.0, Regime::diffusive()).real() ==
          Catch::Approx(0.5));
  Complex osc = free_amplitude(2, x0, x0, 1.0, Regime::oscillatory());
  REQUIRE(std::abs(osc) == Catch::Approx(1.0));
  // oscillatory prefactor carries e^{-i pi/4} per dimension
  REQUIRE(std::arg(osc) == Catch::Approx(-pi / 2.0));
  REQUIRE_THROWS_AS(free_amplitude(2, x0, x0, -1.0, Regime::diffusive()),
                    std::invalid_argument);
}

TEST_CASE("free kernels compose under convolution") {
  Regime s1 = Regime::diffusive();
  double T1 = 0.5, T2 = 0.5;
  Vec xa = Vec::Constant(1, -0.3), xb = Vec::Constant(1, 0.7);
  auto k = [&](const Vec& a, const Vec& b, double T) {
    return free_amplitude(1, a, b, T, s1);
  };
  Complex conv = simpson(
      [&](double xm) {
        Vec m = Vec::Constant(1, xm);
        return k(xa, m, T1) * k(m, xb, T2);
      },
      -8.0, 8.0, 4000);
  Complex direct = k(xa, xb, T1 + T2);
  REQUIRE(std::abs(conv - direct) < 1e-6);
}

TEST_CASE("two dimensional kernels compose as well") {
  Regime s1 = Regime::diffusive();
  Vec xa(2), xb(2);
  xa << 0.0, 0.2;
  xb << 0.5, -0.1;
  auto k1 = [&](double a, double b, double T) {
    return free_amplitude(1, Vec::Constant(1, a), Vec::Constant(1, b), T, s1);
  };
  // separable: convolve each coordinate independently
  Complex cx = simpson([&](double m) { return k1(xa(0), m, 0.5) * k1(m, xb(0), 0.5); },
                       -8.0, 8.0, 2000);
  Complex cy = simpson([&](double m) { return k1(xa(1), m, 0.5) * k1(m, xb(1), 0.5); },
                       -8.0, 8.0, 2000);
  Complex direct = free_amplitude(2, xa, xb, 1.0, s1);
  REQUIRE(std::abs(cx * cy - direct) < 1e-6);
}

TEST_CASE("free point-to-point wkb is exact with modulus m/hT in the plane") {
  ActionSpec spec = ActionSpec::free_particle(2);
  TimeGrid g(0.0, 1.0, 500);
  Vec xa = Vec::Zero(2), xb(2);
  xb << 1.0, 0.0;
  ClassicalSolution sol = solve_classical(spec, BoundaryData::position_to_position(xa, xb), g);
  WkbAmplitude amp = wkb_point_to_point(spec, sol, jacobi_blocks(spec, sol));
  PhysicalConstants pc;
  REQUIRE(amp.prefactor_modulus ==
          Catch::Approx(pc.mass / (pc.planck() * 1.0)).epsilon(1e-12));
  REQUIRE(amp.action == Catch::Approx(0.5).margin(1e-12));
  // van Vleck matrix -1/T I has q = 2, p = 0: phase c = e^{-i pi/2}
  REQUIRE(amp.index_q == 2);
  Complex expect = std::polar(amp.prefactor_modulus, -pi / 2.0 + amp.action);
  REQUIRE(std::abs(amp.value - expect) < 1e-12);
}

TEST_CASE("harmonic wkb modulus carries the half-power of sin") {
  double w = 1.0, T = 1.0;
  ActionSpec spec = ActionSpec::harmonic(1, w);
  TimeGrid g(0.0, T, 2000);
  ClassicalSolution sol = solve_classical(
      spec, BoundaryData::position_to_position(Vec::Zero(1), Vec::Ones(1)), g);
  WkbAmplitude amp = wkb_point_to_point(spec, sol, jacobi_blocks(spec, sol));
  PhysicalConstants pc;
  double expect = std::sqrt(pc.mass * w / (pc.planck() * std::sin(w * T)));
  REQUIRE(amp.prefactor_modulus == Catch::Approx(expect).epsilon(1e-8));

  // cross-check |WKB|^2 against the determinant route:
  // |K_w|^2 / |K_free|^2 = 1 / Det(Q_1/Q_0) for the pinned-pinned pencil
  MetricMatrix h = MetricMatrix::identity(1);
  FormDensity density = [&](double) { return Mat::Constant(1, 1, -w * w); };
  double det = det_by_limit(h, density, 1.0, BoundaryFamily::fixed_both_ends(), g).value;
  double free_mod = 1.0 / std::sqrt(pc.planck() * T);
  REQUIRE(amp.prefactor_modulus ==
          Catch::Approx(free_mod / std::sqrt(det)).epsilon(5e-3));
}

TEST_CASE("small-time van vleck matrix is positive and sets the quarter phase") {
  ActionSpec spec = ActionSpec::harmonic(2, 1.0);
  TimeGrid g(0.0, 0.1, 200);
  Vec xa = Vec::Zero(2), xb(2);
  xb << 0.1, -0.2;
  ClassicalSolution sol = solve_classical(spec, BoundaryData::position_to_position(xa, xb), g);
  WkbAmplitude amp = wkb_point_to_point(spec, sol, jacobi_blocks(spec, sol));
  // d2S/dxa dxb = -w/sin(wT) < 0 for small T: q = d, p = 0
  REQUIRE(amp.index_q == 2);
  REQUIRE(amp.index_p == 0);
}

TEST_CASE("plane wave data propagates with unit modulus") {
  ActionSpec spec = ActionSpec::free_particle(1);
  double p0 = 0.7;
  spec.S0 = [p0](const Vec& x) { return p0 * x(0); };
  spec.gradS0 = [p0](const Vec&) { return Vec::Constant(1, p0); };
  spec.hessS0 = [](const Vec&) { return Mat::Zero(1, 1); };
  TimeGrid g(0.0, 1.0, 400);
  ClassicalSolution sol = solve_classical(
      spec, BoundaryData::momentum_to_position({}, Vec::Constant(1, 1.3)), g);
  JacobiBlocks b = jacobi_blocks(spec, sol);
  WkbAmplitude amp = wkb_momentum_to_position(spec, sol, b);
  REQUIRE(amp.prefactor_modulus == Catch::Approx(1.0).margin(1e-10));
  // classical action of the free path from momentum data:
  // S = p x_b - p^2 T / 2 (the action function of the plane wave)
  double expect = p0 * 1.3 - 0.5 * p0 * p0 * 1.0;
  REQUIRE(amp.action == Catch::Approx(expect).margin(1e-9));
}

TEST_CASE("zero-momentum oscillator data contracts by the cosine root") {
  double w = 1.0, T = 1.0;
  ActionSpec spec = ActionSpec::harmonic(1, w);
  spec.S0 = [](const Vec&) { return 0.0; };
  spec.gradS0 = [](const Vec&) { return Vec::Zero(1); };
  spec.hessS0 = [](const Vec&) { return Mat::Zero(1, 1); };
  TimeGrid g(0.0, T, 800);
  ClassicalSolution sol = solve_classical(
      spec, BoundaryData::momentum_to_position({}, Vec::Constant(1, 0.4)), g);
  JacobiBlocks b = jacobi_blocks(spec, sol);
  WkbAmplitude osc = wkb_momentum_to_position(spec, sol, b);
  REQUIRE(osc.vanvleck_det == Catch::Approx(std::cos(w * T)).margin(1e-9));
  REQUIRE(osc.prefactor_modulus == Catch::Approx(std::sqrt(std::cos(w * T))).margin(1e-9));

  // diffusion variant carries the reciprocal determinant
  WkbAmplitude diff = wkb_momentum_to_position(spec, sol, b, {}, {}, true);
  REQUIRE(diff.prefactor_modulus ==
          Catch::Approx(1.0 / std::sqrt(std::cos(w * T))).margin(1e-9));
}

TEST_CASE("winding sum at zero flux collapses to the flat kernel") {
  AbConfig cfg;
  cfg.r_a = 1.0;
  cfg.r_b = 1.2;
  cfg.theta_a = 0.3;
  cfg.theta_b = 1.1;
  cfg.T = 0.4;
  cfg.n_max = 24;
  cfg.flux_fraction = 0.0;
  Complex sum = ab_winding_sum(cfg);
  Complex flat = ab_free_kernel(cfg);
  REQUIRE(std::abs(sum - flat) < 1e-10 * std::abs(flat));
}

TEST_CASE("transition probability is periodic in the flux with period one") {
  AbConfig cfg;
  cfg.r_b = 0.8;
  cfg.theta_b = 0.9;
  cfg.T = 0.3;
  for (double c : {0.13, 0.5, 0.77}) {
    AbConfig a = cfg, b = cfg;
    a.flux_fraction = c;
    b.flux_fraction = c + 1.0;
    REQUIRE(std::norm(ab_winding_sum(a)) ==
            Catch::Approx(std::norm(ab_winding_sum(b))).epsilon(1e-12));
  }
}

TEST_CASE("integer flux has the free modulus exactly") {
  AbConfig cfg;
  cfg.theta_b = 0.6;
  cfg.T = 0.35;
  double flat = std::abs(ab_free_kernel(cfg));
  for (int m : {1, 2, -3}) {
    AbConfig a = cfg;
    a.flux_fraction = m;
    REQUIRE(std::abs(ab_winding_sum(a)) == Catch::Approx(flat).epsilon(1e-12));
  }
}

TEST_CASE("flux inversion and resummation round trip") {
  AbConfig cfg;
  cfg.r_b = 1.1;
  cfg.theta_b = 0.8;
  cfg.T = 0.4;
  cfg.n_max = 24;
  std::vector<Complex> family = ab_flux_family(cfg, 256);
  double err = ab_round_trip_error(family, cfg, 24);
  REQUIRE(err < 1e-8);

  // inversion recovers the model winding kernels themselves
  std::vector<Complex> p = ab_polar_inversion(family, cfg, 24);
  std::vector<Complex> model = ab_winding_kernels(cfg);
  double worst = 0.0;
  for (size_t k = 0; k < p.size(); ++k) worst = std::max(worst, std::abs(p[k] - model[k]));
  REQUIRE(worst < 1e-12 * std::abs(ab_free_kernel(cfg)));
}

TEST_CASE("short times concentrate the sum on the direct class") {
  AbConfig cfg;
  cfg.theta_b = 0.2;
  cfg.T = 0.05;
  cfg.n_max = 16;
  std::vector<Complex> p = ab_winding_kernels(cfg);
  double direct = std::abs(p[cfg.n_max]);  // n = 0 sits in the middle
  double wrapped = 0.0;
  for (int k = 0; k < static_cast<int>(p.size()); ++k)
    if (k != cfg.n_max) wrapped = std::max(wrapped, std::abs(p[k]));
  REQUIRE(wrapped < 1e-12 * direct);
}

TEST_CASE("config validation rejects bad radii and truncation") {
  AbConfig cfg;
  cfg.r_a = -1.0;
  REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);
  AbConfig cfg2;
  cfg2.n_max = 0;
  REQUIRE_THROWS_AS(cfg2.validate(), std::invalid_argument);
}

TEST_CASE("harmonic wkb amplitude satisfies the schrodinger equation") {
  // i dPsi/dT = -(1/2) d2Psi/dxb2 + V(xb) Psi, checked by finite differences
  // around (T, xb); exact for the quadratic action up to stencil error
  double w = 1.0;
  ActionSpec spec = ActionSpec::harmonic(1, w);
  auto psi = [&](double T, double xb) {
    TimeGrid g(0.0, T, 400);
    ClassicalSolution sol = solve_classical(
        spec, BoundaryData::position_to_position(Vec::Constant(1, 0.2), Vec::Constant(1, xb)),
        g);
    return wkb_point_to_point(spec, sol, jacobi_blocks(spec, sol)).value;
  };
  double T = 0.8, xb = 0.5, dT = 2e-3, dx = 2e-3;
  Complex dpsi_dT = (psi(T + dT, xb) - psi(T - dT, xb)) / (2.0 * dT);
  Complex lap = (psi(T, xb + dx) - 2.0 * psi(T, xb) + psi(T, xb - dx)) / (dx * dx);
  Complex residual = Complex(0, 1) * dpsi_dT + 0.5 * lap - 0.5 * w * w * xb * xb * psi(T, xb);
  REQUIRE(std::abs(residual) < 1e-3 * std::abs(psi(T, xb)));
}

TEST_CASE("free diffusive kernel satisfies the heat equation") {
  Regime s1 = Regime::diffusive();
  auto k = [&](double T, double x) {
    return free_amplitude(1, Vec::Zero(1), Vec::Constant(1, x), T, s1).real();
  };
  double T = 0.6, x = 0.4, dT = 1e-4, dx = 1e-3;
  double dt_term = (k(T + dT, x) - k(T - dT, x)) / (2.0 * dT);
  double lap = (k(T, x + dx) - 2.0 * k(T, x) + k(T, x - dx)) / (dx * dx);
  REQUIRE(dt_term == Catch::Approx(lap / (4.0 * pi)).epsilon(1e-5));
}

TEST_CASE("diffusion variant refuses a negative determinant branch") {
  // past the quarter period det K = cos(wT) < 0: the real root does not exist
  ActionSpec spec = ActionSpec::harmonic(1, 1.0);
  spec.S0 = [](const Vec&) { return 0.0; };
  spec.gradS0 = [](const Vec&) { return Vec::Zero(1); };
  spec.hessS0 = [](const Vec&) { return Mat::Zero(1, 1); };
  TimeGrid g(0.0, 2.0, 400);
  ClassicalSolution sol = solve_classical(
      spec, BoundaryData::momentum_to_position({}, Vec::Constant(1, 0.4)), g);
  JacobiBlocks b = jacobi_blocks(spec, sol);
  REQUIRE_THROWS_AS(wkb_momentum_to_position(spec, sol, b, {}, {}, true),
                    std::runtime_error);
  // the oscillatory branch reports the flip through the index instead
  WkbAmplitude osc = wkb_momentum_to_position(spec, sol, b);
  REQUIRE(osc.index_q == 1);
}
