#pragma once

// Functional determinant ratios Det(Q_nu / Q_0) by three routes: the limit
// of finite determinants on refined grids, the Jacobi (Gelfand-Yaglom) block
// reduction, and the logarithmic derivative in nu. Plus the Morse index.

#include "pathint/greens.hpp"
#include "pathint/grid.hpp"
#include "pathint/jacobi.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace pathint {

enum class DetMethod { Limit, Jacobi, LogDerivative };

struct DetResult {
  double value = 1.0;
  int morse_index = 0;
  DetMethod method = DetMethod::Limit;
  int grid_n = 0;
  double err_est = 0.0;
};

namespace detail {

inline double det_ratio_on_grid(const MetricMatrix& h, const FormDensity& a, double nu,
                                const TimeGrid& grid, const std::vector<int>& pinned,
                                int* neg_count = nullptr, bool* singular = nullptr) {
  DiscreteKernel m0 = pencil_matrix(h, a, 0.0, grid, pinned);
  DiscreteKernel m1 = pencil_matrix(h, a, nu, grid, pinned);
  auto r0 = m0.ldl();
  auto r1 = m1.ldl();
  if (r0.singular) throw std::runtime_error("det_by_limit: unperturbed kernel singular");
  if (singular) *singular = r1.singular;
  if (neg_count) *neg_count = r1.negative_eigenvalues;
  return r1.sign * r0.sign * std::exp(r1.log_abs_det - r0.log_abs_det);
}

inline bool both_ends_pinned(const std::vector<int>& pinned, const TimeGrid& grid) {
  bool start = false, end = false;
  for (int p : pinned) {
    if (p == 0) start = true;
    if (p == grid.n_steps) end = true;
  }
  return start && end;
}

}  // namespace detail

// det(M_nu) / det(M_0) on the same free nodes, Richardson extrapolated over
// n and 2n. The shared discretization basis makes the scaling anomaly of
// "determinant of a quadratic form" cancel in the ratio.
inline DetResult det_by_limit(const MetricMatrix& h, const FormDensity& a, double nu,
                              const BoundaryFamily& family, const TimeGrid& grid) {
  std::vector<int> pinned = family.pinned_nodes(grid);
  return [&] {
    DetResult res;
    res.method = DetMethod::Limit;
    res.grid_n = grid.n_steps;
    bool singular = false;
    double coarse = detail::det_ratio_on_grid(h, a, nu, grid, pinned, nullptr, &singular);
    TimeGrid fine = grid.refined();
    std::vector<int> pinned_fine = family.pinned_nodes(fine);
    int neg = 0;
    double refined =
        detail::det_ratio_on_grid(h, a, nu, fine, pinned_fine, &neg, &singular);
    if (singular)
      throw std::runtime_error("det_by_limit: perturbed kernel singular (zero of Delta)");
    int p = detail::both_ends_pinned(pinned, grid) ? 2 : 1;
    double w = std::pow(2.0, p);
    res.value = (w * refined - coarse) / (w - 1.0);
    res.err_est = std::abs(refined - coarse);
    res.morse_index = neg;
    return res;
  }();
}

// Jacobi-block (Gelfand-Yaglom) reduction: Det(Q_nu/Q_0) equals
// det K(nu; t_b,t_a) for the momentum-position kind and
// det J(nu; t_b,t_a) / det J(0; t_b,t_a) with J(0) = T h^{-1} for the
// position-position kind.
inline DetResult det_by_jacobi(const JacobiBlocks& blocks, BoundaryKind kind) {
  DetResult res;
  res.method = DetMethod::Jacobi;
  res.grid_n = blocks.grid.n_steps;
  int nb = blocks.last();
  double T = blocks.grid.length();
  switch (kind) {
    case BoundaryKind::MP: {
      double detk = blocks.K(nb).determinant();
      if (std::abs(detk) < 1e-12)
        throw std::runtime_error("det_by_jacobi: conjugate point (det K ~ 0)");
      res.value = detk;
      break;
    }
    case BoundaryKind::PP: {
      double detj = blocks.J(nb).determinant();
      double detj0 = std::pow(T, blocks.dim()) * blocks.metric.h_inv.determinant();
      if (std::abs(detj) < 1e-12 * std::abs(detj0))
        throw std::runtime_error("det_by_jacobi: conjugate point (det J ~ 0)");
      res.value = detj / detj0;
      break;
    }
    default:
      throw std::invalid_argument("det_by_jacobi: only MP and PP kinds are reduced");
  }
  return res;
}

// Integrates d/dnu ln Det(Q_nu/Q_0) = Tr(Q / Q_nu), with the trace evaluated
// as int tr(a(t) G_nu(t,t)) dt through the block Green's function at each nu.
inline DetResult det_by_log_derivative(const MetricMatrix& h, const FormDensity& a,
                                       BoundaryKind kind, const TimeGrid& grid,
                                       double nu_max, int n_nu) {
  if (n_nu < 2) throw std::invalid_argument("det_by_log_derivative: need n_nu >= 2");
  DetResult res;
  res.method = DetMethod::LogDerivative;
  res.grid_n = grid.n_steps;
  if (nu_max == 0.0) return res;

  auto trace_at = [&](double nu) {
    JacobiBlocks blocks = jacobi_blocks_of_form(h, a, nu, grid);
    int nb = blocks.last();
    double mark = (kind == BoundaryKind::MP) ? blocks.K(nb).determinant()
                                             : blocks.J(nb).determinant();
    if (std::abs(mark) < 1e-12)
      throw std::runtime_error("det_by_log_derivative: crossed a zero of Delta");
    double acc = 0.0;
    for (int i = 0; i <= grid.n_steps; ++i) {
      double t = grid.node(i);
      double val = (a(t) * jacobi_green(blocks, kind, t, t)).trace();
      acc += (i == 0 || i == grid.n_steps) ? 0.5 * val : val;
    }
    return std::pair<double, double>(acc * grid.dt(), mark);
  };

  double log_det = 0.0;
  double prev_trace = 0.0, prev_mark = 1.0;
  double dnu = nu_max / (n_nu - 1);
  for (int j = 0; j < n_nu; ++j) {
    auto [tr, mark] = trace_at(j * dnu);
    if (j > 0) {
      if (mark * prev_mark < 0.0)
        throw std::runtime_error("det_by_log_derivative: crossed a zero of Delta");
      log_det += 0.5 * (tr + prev_trace) * dnu;
    }
    prev_trace = tr;
    prev_mark = mark;
  }
  res.value = std::exp(log_det);
  res.err_est = std::abs(log_det) / (n_nu * n_nu);
  return res;
}

// Negative-eigenvalue count of the discretized perturbed form.
inline int morse_index(const MetricMatrix& h, const FormDensity& a, double nu,
                       const BoundaryFamily& family, const TimeGrid& grid) {
  DiscreteKernel m1 = pencil_matrix(h, a, nu, grid, family.pinned_nodes(grid));
  auto r = m1.ldl();
  if (r.singular)
    throw std::runtime_error("morse_index: eigenvalue at zero (conjugate point)");
  return r.negative_eigenvalues;
}

}  // namespace pathint
