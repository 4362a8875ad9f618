#include "pathint/determinants.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace pathint;

namespace {

FormDensity constant_density(double a) {
  return [a](double) { return Mat::Constant(1, 1, a); };
}

// eigenvalue-product reference for the pinned-both-ends harmonic pencil:
// sinh(wT)/(wT) for +w^2, sin(wT)/(wT) for -w^2
double dirichlet_reference(double a, double T) {
  double w = std::sqrt(std::abs(a));
  if (a > 0) return std::sinh(w * T) / (w * T);
  if (a < 0) return std::sin(w * T) / (w * T);
  return 1.0;
}

}  // namespace

TEST_CASE("zero perturbation has unit determinant and zero index") {
  TimeGrid g(0.0, 1.0, 100);
  MetricMatrix h = MetricMatrix::identity(1);
  DetResult r = det_by_limit(h, constant_density(0.0), 1.0,
                             BoundaryFamily::fixed_both_ends(), g);
  REQUIRE(r.value == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(r.morse_index == 0);
}

TEST_CASE("limit method hits the eigenvalue products at a tenth percent") {
  TimeGrid g(0.0, 1.0, 2000);
  MetricMatrix h = MetricMatrix::identity(1);
  DetResult grow = det_by_limit(h, constant_density(1.0), 1.0,
                                BoundaryFamily::fixed_both_ends(), g);
  REQUIRE(grow.value == Catch::Approx(std::sinh(1.0)).epsilon(1e-3));
  DetResult osc = det_by_limit(h, constant_density(-1.0), 1.0,
                               BoundaryFamily::fixed_both_ends(), g);
  REQUIRE(osc.value == Catch::Approx(std::sin(1.0)).epsilon(1e-3));
  REQUIRE(osc.morse_index == 0);
}

TEST_CASE("negative modes appear beyond each conjugate point") {
  MetricMatrix h = MetricMatrix::identity(1);
  auto index_at = [&](double wT) {
    TimeGrid g(0.0, wT, 600);
    return morse_index(h, constant_density(-1.0), 1.0,
                       BoundaryFamily::fixed_both_ends(), g);
  };
  REQUIRE(index_at(0.5 * pi - 0.1) == 0);
  REQUIRE(index_at(1.5 * pi) == 1);
  REQUIRE(index_at(3.5 * pi) == 3);
  // det sign flips on the odd-index windows
  TimeGrid g(0.0, 3.5 * pi, 2000);
  DetResult r = det_by_limit(h, constant_density(-1.0), 1.0,
                             BoundaryFamily::fixed_both_ends(), g);
  REQUIRE(r.morse_index == 3);
  REQUIRE(r.value < 0.0);
  REQUIRE(r.value == Catch::Approx(std::sin(3.5 * pi) / (3.5 * pi)).epsilon(2e-3));
}

TEST_CASE("jacobi reduction reproduces the oscillator determinants") {
  MetricMatrix h = MetricMatrix::identity(1);
  TimeGrid g(0.0, 1.0, 2000);

  // free pencil: unit determinant
  JacobiBlocks free_blocks = jacobi_blocks_of_form(h, constant_density(0.0), 1.0, g);
  REQUIRE(det_by_jacobi(free_blocks, BoundaryKind::MP).value == Catch::Approx(1.0));
  REQUIRE(det_by_jacobi(free_blocks, BoundaryKind::PP).value == Catch::Approx(1.0));

  // oscillatory sign: K(t_b) = cos(wT), J(t_b)/J0 = sin(wT)/(wT)
  JacobiBlocks osc = jacobi_blocks_of_form(h, constant_density(-1.0), 1.0, g);
  REQUIRE(det_by_jacobi(osc, BoundaryKind::MP).value ==
          Catch::Approx(std::cos(1.0)).margin(1e-9));
  REQUIRE(det_by_jacobi(osc, BoundaryKind::PP).value ==
          Catch::Approx(std::sin(1.0)).margin(1e-9));

  REQUIRE_THROWS_AS(det_by_jacobi(osc, BoundaryKind::PM), std::invalid_argument);
}

TEST_CASE("limit and jacobi methods agree for the pinned-both-ends pencil") {
  MetricMatrix h = MetricMatrix::identity(1);
  for (double a : {1.0, -1.0})
    for (double T : {0.5, 1.0, 2.0}) {
      TimeGrid g(0.0, T, 2000);
      double lim = det_by_limit(h, constant_density(a), 1.0,
                                BoundaryFamily::fixed_both_ends(), g)
                       .value;
      double jac =
          det_by_jacobi(jacobi_blocks_of_form(h, constant_density(a), 1.0, g),
                        BoundaryKind::PP)
              .value;
      REQUIRE(lim == Catch::Approx(jac).epsilon(5e-3));
      REQUIRE(jac == Catch::Approx(dirichlet_reference(a, T)).margin(1e-9));
    }
}

TEST_CASE("log-derivative route integrates the trace to the same value") {
  MetricMatrix h = MetricMatrix::identity(1);
  TimeGrid g(0.0, 1.0, 400);
  REQUIRE(det_by_log_derivative(h, constant_density(-1.0), BoundaryKind::PP, g, 0.0, 10)
              .value == 1.0);
  for (double a : {1.0, -1.0}) {
    double logd = det_by_log_derivative(h, constant_density(a), BoundaryKind::PP, g,
                                        1.0, 50)
                      .value;
    REQUIRE(logd == Catch::Approx(dirichlet_reference(a, 1.0)).epsilon(5e-3));
    double mp = det_by_log_derivative(h, constant_density(a), BoundaryKind::MP, g,
                                      1.0, 50)
                    .value;
    double mp_exact = (a < 0) ? std::cos(1.0) : std::cosh(1.0);
    REQUIRE(mp == Catch::Approx(mp_exact).epsilon(5e-3));
  }
}

TEST_CASE("log-determinant is linear in nu to first order") {
  MetricMatrix h = MetricMatrix::identity(1);
  TimeGrid g(0.0, 1.0, 400);
  double nu = 1e-3;
  double val = det_by_log_derivative(h, constant_density(-1.0), BoundaryKind::PP, g,
                                     nu, 8)
                   .value;
  // Tr(Q/Q0) = -int t(1-t) dt = -1/6 for the unit interval
  REQUIRE(std::log(val) == Catch::Approx(-nu / 6.0).epsilon(1e-2));
}

TEST_CASE("log-derivative route refuses to cross a zero of the determinant") {
  MetricMatrix h = MetricMatrix::identity(1);
  TimeGrid g(0.0, 0.6 * pi, 200);  // K hits zero inside nu in [0,1]
  REQUIRE_THROWS_AS(det_by_log_derivative(h, constant_density(-1.0), BoundaryKind::MP,
                                          g, 1.0, 40),
                    std::runtime_error);
}

TEST_CASE("determinants multiply across an interval split") {
  // pinned-pinned determinant over [0, T+T'] factors into the two
  // junction-pinned sub-determinants times the junction Green ratio
  MetricMatrix h = MetricMatrix::identity(1);
  double T1 = 0.6, T2 = 0.9;
  double a = -1.0;
  TimeGrid gfull(0.0, T1 + T2, 3000);
  double full =
      det_by_limit(h, constant_density(a), 1.0, BoundaryFamily::fixed_both_ends(), gfull)
          .value;

  TimeGrid g1(0.0, T1, 1200), g2(0.0, T2, 1800);
  double d1 =
      det_by_limit(h, constant_density(a), 1.0, BoundaryFamily::fixed_both_ends(), g1).value;
  double d2 =
      det_by_limit(h, constant_density(a), 1.0, BoundaryFamily::fixed_both_ends(), g2).value;

  // junction Green functions by the closed forms; pinning the junction
  // multiplies the determinant by G_0(T,T) / G_nu(T,T)
  double w = 1.0;
  double g_free = T1 * T2 / (T1 + T2);
  double g_pert = std::sin(w * T1) * std::sin(w * T2) / (w * std::sin(w * (T1 + T2)));
  double product = d1 * d2 * g_free / g_pert;
  REQUIRE(full == Catch::Approx(product).epsilon(5e-3));
}

TEST_CASE("refinement halves the error at the expected rate") {
  MetricMatrix h = MetricMatrix::identity(1);
  auto raw = [&](int n) {
    TimeGrid g(0.0, 1.0, n);
    DiscreteKernel m0 =
        pencil_matrix(h, constant_density(0.0), 0.0, g, {0, g.n_steps});
    DiscreteKernel m1 =
        pencil_matrix(h, constant_density(1.0), 1.0, g, {0, g.n_steps});
    auto r0 = m0.ldl();
    auto r1 = m1.ldl();
    return std::exp(r1.log_abs_det - r0.log_abs_det);
  };
  double exact = std::sinh(1.0);
  double e1 = std::abs(raw(100) - exact);
  double e2 = std::abs(raw(200) - exact);
  double e4 = std::abs(raw(400) - exact);
  REQUIRE(e1 / e2 > 3.0);  // second order for the all-pinned family
  REQUIRE(e2 / e4 > 3.0);
  REQUIRE(e1 / e2 < 5.0);
}

TEST_CASE("positive definite pencils keep positive determinants") {
  MetricMatrix h = MetricMatrix::identity(2);
  FormDensity a = [](double t) {
    Mat m(2, 2);
    m << 1.0 + t, 0.2, 0.2, 2.0;
    return m;
  };
  TimeGrid g(0.0, 1.5, 500);
  DetResult r = det_by_limit(h, a, 1.0, BoundaryFamily::fixed_both_ends(), g);
  REQUIRE(r.value > 1.0);
  REQUIRE(r.morse_index == 0);
}
