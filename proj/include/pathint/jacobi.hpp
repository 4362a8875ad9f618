#pragma once

// Jacobi matrices J, K, Ktilde, L along a classical path, their Van Vleck
// inverses, the four boundary-kind Green's functions, and the discretized
// second-variation kernel they must invert.

#include "pathint/classical.hpp"
#include "pathint/greens.hpp"
#include "pathint/grid.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace pathint {

// Density a(t) of a local-in-time perturbation Q(xi) = int xi^T a(t) xi dt.
using FormDensity = std::function<Mat(double)>;

// Tangent flows of the Jacobi equation h xidd = w(t) xi, where w = -hess V
// for a mechanical path and w = nu a for the pencil Q0 + nu int xi^T a xi.
inline std::vector<Mat> integrate_jacobi_flow(const MetricMatrix& h, const FormDensity& w,
                                              const TimeGrid& grid) {
  int d = h.dim(), n = grid.n_steps;
  double dt = grid.dt();
  auto a_mat = [&](double t) {
    Mat m = Mat::Zero(2 * d, 2 * d);
    m.block(0, d, d, d) = h.h_inv;
    m.block(d, 0, d, d) = w(t);
    return m;
  };
  std::vector<Mat> phi(n + 1);
  phi[0] = Mat::Identity(2 * d, 2 * d);
  for (int i = 0; i < n; ++i) {
    double t = grid.node(i);
    Mat a1 = a_mat(t), a2 = a_mat(t + 0.5 * dt), a4 = a_mat(t + dt);
    Mat k1 = a1 * phi[i];
    Mat k2 = a2 * (phi[i] + 0.5 * dt * k1);
    Mat k3 = a2 * (phi[i] + 0.5 * dt * k2);
    Mat k4 = a4 * (phi[i] + dt * k3);
    phi[i + 1] = phi[i] + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return phi;
}

// Blocks of the symplectic inverse: Phi^{-1} = [[Kt^T, -J^T], [-L^T, K^T]].
inline Mat symplectic_inverse(const Mat& phi) {
  int d = static_cast<int>(phi.rows()) / 2;
  Mat inv(2 * d, 2 * d);
  inv.block(0, 0, d, d) = phi.block(d, d, d, d).transpose();
  inv.block(0, d, d, d) = -phi.block(0, d, d, d).transpose();
  inv.block(d, 0, d, d) = -phi.block(d, 0, d, d).transpose();
  inv.block(d, d, d, d) = phi.block(0, 0, d, d).transpose();
  return inv;
}

struct JacobiBlocks {
  TimeGrid grid;
  MetricMatrix metric;
  std::vector<Mat> Phi;  // Phi(t_i, t_a), 2d x 2d

  Mat K(int i) const { return Phi[i].block(0, 0, dim(), dim()); }
  Mat J(int i) const { return Phi[i].block(0, dim(), dim(), dim()); }
  Mat L(int i) const { return Phi[i].block(dim(), 0, dim(), dim()); }
  Mat Kt(int i) const { return Phi[i].block(dim(), dim(), dim(), dim()); }
  int dim() const { return metric.dim(); }
  int last() const { return static_cast<int>(Phi.size()) - 1; }

  bool conjugate_at_end(double tol = 1e-10) const {
    double scale = std::pow(grid.length(), dim());
    return std::abs(J(last()).determinant()) < tol * std::max(scale, 1.0) ||
           std::abs(K(last()).determinant()) < tol;
  }

  // inverses at (t_a, t_b) in the sense J(t_b,t_a) M(t_a,t_b) = 1 etc.
  Mat M() const { return J(last()).inverse(); }
  Mat N() const { return K(last()).inverse(); }
  Mat Nt() const { return Kt(last()).inverse(); }
  Mat P() const { return L(last()).inverse(); }

  // Van Vleck matrix d^2 S / dx_b dx_a = [J(t_a,t_b)]^{-1} = -[J(t_b,t_a)^{-1}]^T
  Mat van_vleck() const { return (-J(last()).inverse().transpose()).eval(); }
};

inline JacobiBlocks jacobi_blocks_of_form(const MetricMatrix& h, const FormDensity& a,
                                          double nu, const TimeGrid& grid) {
  FormDensity w = [a, nu](double t) { return (nu * a(t)).eval(); };
  return {grid, h, integrate_jacobi_flow(h, w, grid)};
}

// Blocks along a classical solution: the daughter of the tangent flow the
// solver already integrated.
inline JacobiBlocks jacobi_blocks(const ActionSpec& spec, const ClassicalSolution& sol) {
  if (sol.Phi.empty()) throw std::invalid_argument("jacobi_blocks: solution lacks tangent flow");
  return {sol.grid, spec.h, sol.Phi};
}

// Green's functions of the Jacobi operator for the four boundary kinds,
// expressed through the blocks (theta(0) = 1/2). Node-sampled arguments.
inline Mat jacobi_green(const JacobiBlocks& b, BoundaryKind kind, double t, double s) {
  int d = b.dim();
  int it = b.grid.node_index(t), is = b.grid.node_index(s);
  int nb = b.last();
  Mat phi_b_inv = symplectic_inverse(b.Phi[nb]);  // Phi(t_a, t_b)

  auto based_at_end = [&](int i) { return (b.Phi[i] * phi_b_inv).eval(); };
  auto blk_K = [&](const Mat& m) { return m.block(0, 0, d, d).eval(); };
  auto blk_J = [&](const Mat& m) { return m.block(0, d, d, d).eval(); };
  auto blk_Kt = [&](const Mat& m) { return m.block(d, d, d, d).eval(); };

  double th_st = theta(static_cast<double>(is - it));  // theta(s - t)
  double th_ts = theta(static_cast<double>(it - is));

  Mat term1, term2;
  switch (kind) {
    case BoundaryKind::MP: {
      // K(t,t_a) N(t_a,t_b) J(t_b,s) and J(t,t_b) Nt(t_b,t_a) Kt(t_a,s)
      Mat n_ab = b.N();
      Mat j_tb_s = blk_J((b.Phi[nb] * symplectic_inverse(b.Phi[is])).eval());
      term1 = b.K(it) * n_ab * j_tb_s;
      Mat nt_ba = b.K(nb).transpose().inverse();  // [Kt(t_a,t_b)]^{-1} = [K(t_b,t_a)^T]^{-1}
      Mat kt_ta_s = b.K(is).transpose();          // Kt(t_a, s)
      term2 = blk_J(based_at_end(it)) * nt_ba * kt_ta_s;
      break;
    }
    case BoundaryKind::PM: {
      // J(t,t_a) Nt(t_a,t_b) Kt(t_b,s) and K(t,t_b) N(t_b,t_a) J(t_a,s)
      Mat nt_ab = b.Nt();
      Mat kt_tb_s = blk_Kt((b.Phi[nb] * symplectic_inverse(b.Phi[is])).eval());
      term1 = b.J(it) * nt_ab * kt_tb_s;
      Mat n_ba = b.Kt(nb).transpose().inverse();  // [K(t_a,t_b)]^{-1} = [Kt(t_b,t_a)^T]^{-1}
      Mat j_ta_s = -b.J(is).transpose();          // J(t_a, s)
      term2 = blk_K(based_at_end(it)) * n_ba * j_ta_s;
      break;
    }
    case BoundaryKind::PP: {
      // J(t,t_a) M(t_a,t_b) J(t_b,s) and J(t,t_b) M(t_b,t_a) J(t_a,s)
      Mat m_ab = b.M();
      Mat j_tb_s = blk_J((b.Phi[nb] * symplectic_inverse(b.Phi[is])).eval());
      term1 = b.J(it) * m_ab * j_tb_s;
      Mat m_ba = (-b.J(nb).transpose()).inverse();  // [J(t_a,t_b)]^{-1}
      Mat j_ta_s = -b.J(is).transpose();
      term2 = blk_J(based_at_end(it)) * m_ba * j_ta_s;
      break;
    }
    case BoundaryKind::MM: {
      // K(t,t_a) P(t_a,t_b) Kt(t_b,s) and K(t,t_b) Pt(t_b,t_a) Kt(t_a,s)
      Mat p_ab = b.P();
      Mat kt_tb_s = blk_Kt((b.Phi[nb] * symplectic_inverse(b.Phi[is])).eval());
      term1 = b.K(it) * p_ab * kt_tb_s;
      Mat pt_ba = (-b.L(nb).transpose()).inverse();  // [Lt(t_a,t_b)]^{-1}
      Mat kt_ta_s = b.K(is).transpose();
      term2 = blk_K(based_at_end(it)) * pt_ba * kt_ta_s;
      break;
    }
  }
  return th_st * term1 - th_ts * term2;
}

// Pinned-node pattern of the variation space for each boundary kind:
// position data pins the variation, momentum data leaves it free.
inline std::vector<int> pinned_nodes_for_kind(BoundaryKind kind, const TimeGrid& grid) {
  switch (kind) {
    case BoundaryKind::PP: return {0, grid.n_steps};
    case BoundaryKind::MP: return {grid.n_steps};
    case BoundaryKind::PM: return {0};
    case BoundaryKind::MM: return {};
  }
  return {};
}

// Discretized kernel of the second variation S'' = Q0 + Q along the path,
// with Q(xi) = -int xi^T hessV(x_cl(t)) xi dt mass-lumped on the nodes.
inline DiscreteKernel second_variation_matrix(const ActionSpec& spec,
                                              const ClassicalSolution& sol,
                                              const TimeGrid& grid, BoundaryKind kind) {
  if (grid.n_steps != sol.grid.n_steps)
    throw std::invalid_argument("second_variation_matrix: grid mismatch");
  auto density = [&](double t) {
    int i = grid.node_index(t);
    return (-spec.hessV(sol.x_at(i))).eval();
  };
  return detail::assemble_kernel(pinned_nodes_for_kind(kind, grid), grid, spec.h, density,
                                 true);
}

// Same kernel for an explicit pencil density a(t) (Q = int xi^T a xi dt).
inline DiscreteKernel pencil_matrix(const MetricMatrix& h, const FormDensity& a, double nu,
                                    const TimeGrid& grid,
                                    const std::vector<int>& pinned) {
  auto density = [&](double t) { return (nu * a(t)).eval(); };
  return detail::assemble_kernel(pinned, grid, h, density, true);
}

}  // namespace pathint
