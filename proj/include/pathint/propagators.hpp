#pragma once

// WKB and exact transition amplitudes: the flat point-to-point kernel, the
// Van Vleck point-to-point assembly and the momentum-to-position variant.

#include "pathint/classical.hpp"
#include "pathint/grid.hpp"
#include "pathint/jacobi.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>

namespace pathint {

using Complex = std::complex<double>;

struct PhysicalConstants {
  double hbar = 1.0;
  double mass = 1.0;
  double planck() const { return 2.0 * pi * hbar; }
};

// (sT)^{-d/2} exp(-pi |x_b - x_a|^2 / (sT)), the product of 1-d kernels.
// Normalized so that it is the delta family as T -> 0 and satisfies the
// semigroup property under convolution.
inline Complex free_amplitude(int d, const Vec& x_a, const Vec& x_b, double T,
                              Regime regime) {
  if (T <= 0.0) throw std::invalid_argument("free_amplitude: T must be positive");
  if (x_a.size() != d || x_b.size() != d)
    throw std::invalid_argument("free_amplitude: endpoint dimension mismatch");
  Complex s = regime.s();
  Complex rs = regime.sqrt_s();
  Complex pref = std::pow(rs * std::sqrt(T), -d);
  return pref * std::exp(-pi * (x_b - x_a).squaredNorm() / (s * T));
}

struct WkbAmplitude {
  Complex value{0.0, 0.0};
  double action = 0.0;
  double vanvleck_det = 0.0;   // det of the Van Vleck matrix (or det K for MP)
  int index_p = 0;             // positive eigenvalues
  int index_q = 0;             // negative eigenvalues
  double prefactor_modulus = 0.0;
  PhysicalConstants constants;
};

namespace detail {

inline void count_signature(const Mat& m, int& p, int& q, double caustic_tol = 1e-10) {
  Mat sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(sym);
  double scale = sym.cwiseAbs().maxCoeff();
  p = q = 0;
  for (int i = 0; i < m.rows(); ++i) {
    double ev = es.eigenvalues()(i);
    if (std::abs(ev) < caustic_tol * std::max(scale, 1.0))
      throw std::runtime_error("wkb: Van Vleck eigenvalue at zero (caustic)");
    (ev > 0 ? p : q)++;
  }
}

}  // namespace detail

// Point-to-point WKB assembly:
//   c h^{-d/2} |det d2S/dxa dxb|^{1/2} exp(i S / hbar),  c = e^{i pi (p-q)/4}.
// Exact for quadratic actions.
inline WkbAmplitude wkb_point_to_point(const ActionSpec& spec, const ClassicalSolution& sol,
                                       const JacobiBlocks& blocks,
                                       PhysicalConstants constants = {}) {
  if (sol.kind != BoundaryKind::PP)
    throw std::invalid_argument("wkb_point_to_point: needs a PP solution");
  WkbAmplitude amp;
  amp.constants = constants;
  amp.action = sol.action;
  Mat vv = blocks.van_vleck();
  amp.vanvleck_det = vv.determinant();
  detail::count_signature(vv, amp.index_p, amp.index_q);
  int d = blocks.dim();
  amp.prefactor_modulus =
      std::pow(constants.planck(), -0.5 * d) * std::sqrt(std::abs(amp.vanvleck_det));
  Complex phase = std::exp(Complex(0.0, sol.action / constants.hbar));
  Complex c = std::polar(1.0, pi * (amp.index_p - amp.index_q) / 4.0);
  amp.value = c * amp.prefactor_modulus * phase;
  return amp;
}

// Momentum-to-position WKB: det(K_eff)^{1/2} exp(i S / hbar) T(x_cl(t_a))
// with K_eff = K(t_b,t_a) + J(t_b,t_a) hess S0 (x_cl(t_a)). The diffusion
// variant uses the reciprocal determinant det(dx_a / dx_b)^{1/2}.
inline WkbAmplitude wkb_momentum_to_position(
    const ActionSpec& spec, const ClassicalSolution& sol, const JacobiBlocks& blocks,
    const std::function<double(const Vec&)>& envelope = {},
    PhysicalConstants constants = {}, bool diffusion_variant = false) {
  if (sol.kind != BoundaryKind::MP)
    throw std::invalid_argument("wkb_momentum_to_position: needs an MP solution");
  WkbAmplitude amp;
  amp.constants = constants;
  amp.action = sol.action;
  int nb = blocks.last();
  Mat k_eff = blocks.K(nb);
  if (spec.hessS0) k_eff += blocks.J(nb) * spec.hessS0(sol.x_start());
  double detk = k_eff.determinant();
  amp.vanvleck_det = detk;
  detail::count_signature(k_eff, amp.index_p, amp.index_q);
  if (diffusion_variant && detk <= 0.0)
    throw std::runtime_error(
        "wkb_momentum_to_position: det K <= 0 needs the oscillatory branch");
  double env = envelope ? envelope(sol.x_start()) : 1.0;
  double root = std::sqrt(std::abs(detk));
  amp.prefactor_modulus = (diffusion_variant ? 1.0 / root : root) * std::abs(env);
  Complex phase = std::exp(Complex(0.0, sol.action / constants.hbar));
  // branch of the square root reported through the negative-eigenvalue count
  Complex branch = std::polar(1.0, -0.5 * pi * amp.index_q);
  amp.value = amp.prefactor_modulus * phase * branch * (env < 0 ? -1.0 : 1.0);
  return amp;
}

}  // namespace pathint
