#pragma once

// Winding-class machinery for the flux-line propagator on the punctured
// plane: the homotopy sum with flux phases, and the flux-average inversion
// recovering per-winding kernels from a family of flux amplitudes.
//
// The per-winding kernel is defined operationally: a wrapped-Gaussian
// angular profile calibrated so the zero-flux sum reproduces the flat
// kernel exactly. The inversion/resummation pair is exact Fourier algebra
// independent of that model.

#include "pathint/grid.hpp"
#include "pathint/propagators.hpp"

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

namespace pathint {

struct AbConfig {
  double flux_fraction = 0.0;  // c = eF/h, dimensionless
  double r_a = 1.0, theta_a = 0.0;
  double r_b = 1.0, theta_b = 0.0;
  double T = 0.4;
  double mass = 1.0;
  int n_max = 24;

  void validate() const {
    if (r_a <= 0.0 || r_b <= 0.0) throw std::invalid_argument("AbConfig: radii must be positive");
    if (n_max < 1) throw std::invalid_argument("AbConfig: n_max must be >= 1");
    if (T <= 0.0) throw std::invalid_argument("AbConfig: T must be positive");
  }

  double delta_theta() const { return theta_b - theta_a; }
  double t_eff() const { return T / mass; }
};

// Flat kernel between the cartesian endpoints (diffusive normalization).
inline Complex ab_free_kernel(const AbConfig& cfg) {
  Vec xa(2), xb(2);
  xa << cfg.r_a * std::cos(cfg.theta_a), cfg.r_a * std::sin(cfg.theta_a);
  xb << cfg.r_b * std::cos(cfg.theta_b), cfg.r_b * std::sin(cfg.theta_b);
  return free_amplitude(2, xa, xb, cfg.t_eff(), Regime::diffusive());
}

// Per-winding kernels P_n = <t_b, r_b, theta_b | t_a, r_a, theta_a + 2 n pi>,
// wrapped-Gaussian angular model, calibrated so sum_n P_n / r_a equals the
// flat kernel exactly.
inline std::vector<Complex> ab_winding_kernels(const AbConfig& cfg) {
  cfg.validate();
  double d0 = cfg.delta_theta();
  double width = pi * cfg.r_a * cfg.r_b / cfg.t_eff();
  auto g = [&](double phi) { return std::exp(-width * phi * phi); };
  double norm = 0.0;
  for (int n = -cfg.n_max; n <= cfg.n_max; ++n) norm += g(d0 - 2.0 * pi * n);
  Complex scale = ab_free_kernel(cfg) * (cfg.r_a / norm);
  std::vector<Complex> p;
  p.reserve(2 * cfg.n_max + 1);
  for (int n = -cfg.n_max; n <= cfg.n_max; ++n) p.push_back(scale * g(d0 - 2.0 * pi * n));
  return p;
}

// Homotopy sum (1/r_a) sum_n e^{i c (dtheta - 2 n pi)} P_n. Fails if the
// truncation tail is not negligible against the running sum.
inline Complex ab_winding_sum_terms(const AbConfig& cfg, const std::vector<Complex>& p) {
  double c = cfg.flux_fraction, d0 = cfg.delta_theta();
  Complex sum{0.0, 0.0};
  Complex edge{0.0, 0.0};
  for (int k = 0; k < static_cast<int>(p.size()); ++k) {
    int n = k - cfg.n_max;
    Complex term = std::polar(1.0, c * (d0 - 2.0 * pi * n)) * p[k] / cfg.r_a;
    sum += term;
    if (std::abs(n) == cfg.n_max) edge += term;
  }
  if (std::abs(edge) > 1e-12 * std::abs(sum))
    throw std::runtime_error("ab_winding_sum: truncation not converged at n_max");
  return sum;
}

inline Complex ab_winding_sum(const AbConfig& cfg) {
  return ab_winding_sum_terms(cfg, ab_winding_kernels(cfg));
}

// Flux-amplitude family on a uniform c-grid of size n_c over [0, 1).
inline std::vector<Complex> ab_flux_family(const AbConfig& cfg, int n_c) {
  if (n_c < 64) throw std::invalid_argument("ab_flux_family: need at least 64 c-nodes");
  std::vector<Complex> p = ab_winding_kernels(cfg);
  std::vector<Complex> fam(n_c);
  for (int j = 0; j < n_c; ++j) {
    AbConfig at = cfg;
    at.flux_fraction = static_cast<double>(j) / n_c;
    fam[j] = ab_winding_sum_terms(at, p);
  }
  return fam;
}

// Inversion: P_n = r_a (1/N) sum_j e^{-i c_j (dtheta - 2 n pi)} K_{c_j}.
// Exact for winding content below the c-grid Nyquist limit; rejects
// families with visible content at the extraction boundary.
inline std::vector<Complex> ab_polar_inversion(const std::vector<Complex>& family,
                                               const AbConfig& cfg, int n_out) {
  int n_c = static_cast<int>(family.size());
  if (n_c < 64) throw std::invalid_argument("ab_polar_inversion: need at least 64 c-nodes");
  if (2 * n_out + 1 > n_c)
    throw std::invalid_argument("ab_polar_inversion: winding range beyond the c-grid");
  double d0 = cfg.delta_theta();
  std::vector<Complex> p(2 * n_out + 1);
  double peak = 0.0, boundary = 0.0;
  for (int k = 0; k < 2 * n_out + 1; ++k) {
    int n = k - n_out;
    Complex acc{0.0, 0.0};
    for (int j = 0; j < n_c; ++j) {
      double cj = static_cast<double>(j) / n_c;
      acc += std::polar(1.0, -cj * (d0 - 2.0 * pi * n)) * family[j];
    }
    p[k] = cfg.r_a * acc / static_cast<double>(n_c);
    peak = std::max(peak, std::abs(p[k]));
    if (std::abs(n) == n_out) boundary = std::max(boundary, std::abs(p[k]));
  }
  if (boundary > 1e-10 * peak && n_out > 1)
    throw std::runtime_error("ab_polar_inversion: aliasing (content at the Nyquist edge)");
  return p;
}

// Re-sums inverted kernels over the same c-grid and reports the max
// relative discrepancy against the input family.
inline double ab_round_trip_error(const std::vector<Complex>& family, const AbConfig& cfg,
                                  int n_out) {
  std::vector<Complex> p = ab_polar_inversion(family, cfg, n_out);
  int n_c = static_cast<int>(family.size());
  double d0 = cfg.delta_theta();
  double worst = 0.0, scale = 0.0;
  for (int j = 0; j < n_c; ++j) scale = std::max(scale, std::abs(family[j]));
  for (int j = 0; j < n_c; ++j) {
    double cj = static_cast<double>(j) / n_c;
    Complex sum{0.0, 0.0};
    for (int k = 0; k < static_cast<int>(p.size()); ++k) {
      int n = k - n_out;
      sum += std::polar(1.0, cj * (d0 - 2.0 * pi * n)) * p[k] / cfg.r_a;
    }
    worst = std::max(worst, std::abs(sum - family[j]) / scale);
  }
  return worst;
}

}  // namespace pathint
