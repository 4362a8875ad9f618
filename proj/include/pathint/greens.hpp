#pragma once

// Closed-form Green's functions of the kinetic form for each pinned family,
// and their brute-force oracle: the inverse of the discretized second
// difference operator on the free nodes.

#include "pathint/grid.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace pathint {

// theta(0) = 1/2 keeps every closed form symmetric on the diagonal.
inline double theta(double x) { return x > 0 ? 1.0 : (x < 0 ? 0.0 : 0.5); }

// Scalar Green's function of -d^2/dt^2 for the requested pinned family.
inline double green_closed_form(const BoundaryFamily& family, const TimeGrid& grid,
                                double t, double u) {
  if (t < grid.t_a - 1e-12 || t > grid.t_b + 1e-12 || u < grid.t_a - 1e-12 ||
      u > grid.t_b + 1e-12)
    throw std::invalid_argument("green_closed_form: arguments outside the grid interval");
  double ta = grid.t_a, tb = grid.t_b;
  switch (family.kind) {
    case Pin::Start:
      return theta(t - u) * (u - ta) + theta(u - t) * (t - ta);
    case Pin::End:
      return theta(t - u) * (tb - t) + theta(u - t) * (tb - u);
    case Pin::Both: {
      double T = tb - ta;
      return theta(t - u) * (t - tb) * (ta - u) / T -
             theta(u - t) * (t - ta) * (tb - u) / (ta - tb);
    }
    case Pin::Interior: {
      double t0 = grid.node(family.interior_node);
      if (t >= t0 && u >= t0) return std::min(t - t0, u - t0);
      if (t <= t0 && u <= t0) return std::min(t0 - t, t0 - u);
      return 0.0;
    }
  }
  return 0.0;
}

// d x d matrix Green's function: G^{ab} = h^{ab} G_scalar.
inline Eigen::MatrixXd green_matrix(const BoundaryFamily& family, const TimeGrid& grid,
                                    const MetricMatrix& h, double t, double u) {
  return h.h_inv * green_closed_form(family, grid, t, u);
}

// Symmetric block tridiagonal matrix on the free nodes of a pinned grid.
// diag[i] couples free node i with itself, off[i] couples i with i+1.
// Where consecutive free nodes are not grid neighbours (interior pin) the
// coupling block is zero and the matrix splits.
struct DiscreteKernel {
  TimeGrid grid;
  MetricMatrix metric;
  std::vector<int> free_nodes;
  std::vector<Eigen::MatrixXd> diag;
  std::vector<Eigen::MatrixXd> off;

  int n_blocks() const { return static_cast<int>(free_nodes.size()); }
  int dim() const { return metric.dim(); }
  int size() const { return n_blocks() * dim(); }

  Eigen::MatrixXd dense() const {
    int d = dim();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(size(), size());
    for (int i = 0; i < n_blocks(); ++i) {
      m.block(i * d, i * d, d, d) = diag[i];
      if (i + 1 < n_blocks()) {
        m.block(i * d, (i + 1) * d, d, d) = off[i];
        m.block((i + 1) * d, i * d, d, d) = off[i].transpose();
      }
    }
    return m;
  }

  // Block Thomas solve; the zero coupling blocks of a split matrix are
  // handled by the same recursion.
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const {
    int nb = n_blocks(), d = dim();
    if (rhs.rows() != size()) throw std::invalid_argument("DiscreteKernel::solve: bad rhs");
    std::vector<Eigen::MatrixXd> s(nb);          // pivot blocks
    std::vector<Eigen::MatrixXd> w(nb);          // s_i^{-1} off_i
    Eigen::MatrixXd y = rhs;
    s[0] = diag[0];
    for (int i = 0; i + 1 < nb; ++i) {
      Eigen::FullPivLU<Eigen::MatrixXd> lu(s[i]);
      if (!lu.isInvertible())
        throw std::runtime_error("DiscreteKernel::solve: singular pivot block");
      w[i] = lu.solve(off[i]);
      y.middleRows((i + 1) * d, d) -=
          off[i].transpose() * lu.solve(y.middleRows(i * d, d));
      s[i + 1] = diag[i + 1] - off[i].transpose() * w[i];
    }
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(rhs.rows(), rhs.cols());
    Eigen::FullPivLU<Eigen::MatrixXd> lun(s[nb - 1]);
    if (!lun.isInvertible())
      throw std::runtime_error("DiscreteKernel::solve: singular pivot block");
    x.middleRows((nb - 1) * d, d) = lun.solve(y.middleRows((nb - 1) * d, d));
    for (int i = nb - 2; i >= 0; --i) {
      Eigen::FullPivLU<Eigen::MatrixXd> lu(s[i]);
      x.middleRows(i * d, d) =
          lu.solve(y.middleRows(i * d, d)) - w[i] * x.middleRows((i + 1) * d, d);
    }
    return x;
  }

  struct LdlResult {
    double log_abs_det = 0.0;
    int sign = 1;
    int negative_eigenvalues = 0;
    bool singular = false;
  };

  // Block LDL^T recursion. By Sylvester's law the inertia of the matrix is
  // the sum of the pivot-block inertias.
  LdlResult ldl(double singular_tol = 1e-10) const {
    LdlResult r;
    int nb = n_blocks();
    Eigen::MatrixXd s = diag[0];
    double scale = 1.0 / grid.dt();
    for (int i = 0; i < nb; ++i) {
      if (i > 0) {
        // full-pivot solve: pivot blocks turn indefinite past conjugate points
        Eigen::FullPivLU<Eigen::MatrixXd> lu(s);
        s = diag[i] - off[i - 1].transpose() * lu.solve(off[i - 1]);
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (s + s.transpose()));
      for (int k = 0; k < s.rows(); ++k) {
        double ev = es.eigenvalues()(k);
        if (std::abs(ev) < singular_tol * scale) r.singular = true;
        if (ev < 0) {
          r.negative_eigenvalues++;
          r.sign = -r.sign;
        }
        r.log_abs_det += std::log(std::abs(ev));
      }
    }
    return r;
  }
};

namespace detail {

// Free-node kernel of Q(z) = sum (dz)^T h (dz)/dt + sum w_i z_i^T a(t_i) z_i,
// with trapezoidal node weights w_i (dt inside, dt/2 at a free endpoint).
template <typename Density>
DiscreteKernel assemble_kernel(const std::vector<int>& pinned, const TimeGrid& grid,
                               const MetricMatrix& h, Density&& a, bool with_density) {
  int d = h.dim();
  double dt = grid.dt();
  std::vector<bool> is_pinned(grid.n_nodes(), false);
  for (int p : pinned) is_pinned[p] = true;

  DiscreteKernel k;
  k.grid = grid;
  k.metric = h;
  for (int i = 0; i < grid.n_nodes(); ++i)
    if (!is_pinned[i]) k.free_nodes.push_back(i);

  for (size_t bi = 0; bi < k.free_nodes.size(); ++bi) {
    int node = k.free_nodes[bi];
    int touching = 0;  // subintervals adjacent to this node
    if (node > 0) touching++;
    if (node < grid.n_steps) touching++;
    Eigen::MatrixXd dblock = touching * h.h / dt;
    if (with_density) {
      double w = (touching == 2) ? dt : 0.5 * dt;
      dblock += w * a(grid.node(node));
    }
    k.diag.push_back(dblock);
    if (bi + 1 < k.free_nodes.size()) {
      bool adjacent = (k.free_nodes[bi + 1] == node + 1);
      k.off.push_back(adjacent ? (-h.h / dt).eval()
                               : Eigen::MatrixXd::Zero(d, d).eval());
    }
  }
  return k;
}

}  // namespace detail

// Second-difference matrix of the kinetic form on the unpinned nodes,
// one-sided closure at free endpoints. Its inverse converges to the
// closed-form Green's function as dt -> 0.
inline DiscreteKernel discretize_kernel(const BoundaryFamily& family, const TimeGrid& grid,
                                        const MetricMatrix& h) {
  auto zero = [](double) { return Eigen::MatrixXd(); };
  return detail::assemble_kernel(family.pinned_nodes(grid), grid, h, zero, false);
}

// Max abs discrepancy between the inverse of the discretized kernel and the
// closed-form Green's function over all free node pairs.
inline double verify_inverse(const DiscreteKernel& kernel, const BoundaryFamily& family) {
  int nb = kernel.n_blocks(), d = kernel.dim();
  Eigen::MatrixXd inv = kernel.solve(Eigen::MatrixXd::Identity(kernel.size(), kernel.size()));
  double worst = 0.0;
  for (int i = 0; i < nb; ++i) {
    double ti = kernel.grid.node(kernel.free_nodes[i]);
    for (int j = 0; j < nb; ++j) {
      double tj = kernel.grid.node(kernel.free_nodes[j]);
      Eigen::MatrixXd g = green_matrix(family, kernel.grid, kernel.metric, ti, tj);
      double err = (inv.block(i * d, j * d, d, d) - g).cwiseAbs().maxCoeff();
      worst = std::max(worst, err);
    }
  }
  return worst;
}

}  // namespace pathint
