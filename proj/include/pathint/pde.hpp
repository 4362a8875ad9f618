#pragma once

// Crank-Nicolson solver for u_t = kappa u_xx + V(x) u on [x_lo, x_hi] with
// homogeneous Dirichlet walls. Serves as the finite-difference oracle for
// the Feynman-Kac estimator (kappa = 1/4pi in the diffusive normalization).

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace pathint {

struct CrankNicolson1d {
  double x_lo = -8.0;
  double x_hi = 8.0;
  int n_nodes = 2000;
  double kappa = 1.0 / (4.0 * 3.14159265358979323846);

  double dx() const { return (x_hi - x_lo) / (n_nodes - 1); }
  double node(int i) const { return x_lo + i * dx(); }

  // Evolves phi to time T with n_t steps; returns the grid solution.
  Eigen::VectorXd solve(const std::function<double(double)>& phi,
                        const std::function<double(double)>& V, double T,
                        int n_t = 2000) const {
    if (T <= 0) throw std::invalid_argument("CrankNicolson1d: T must be positive");
    int n = n_nodes;
    double h = dx(), dt = T / n_t;
    Eigen::VectorXd u(n);
    for (int i = 0; i < n; ++i) u(i) = phi(node(i));
    u(0) = 0.0;
    u(n - 1) = 0.0;

    // interior operator A = kappa D2 + diag(V); CN: (I - dt/2 A) u+ = (I + dt/2 A) u
    int m = n - 2;
    Eigen::VectorXd diagA(m);
    double off = kappa / (h * h);
    for (int i = 0; i < m; ++i) diagA(i) = -2.0 * off + V(node(i + 1));

    // tridiagonal factorization of (I - dt/2 A), Thomas algorithm
    Eigen::VectorXd a(m), b(m), c(m);
    for (int i = 0; i < m; ++i) {
      b(i) = 1.0 - 0.5 * dt * diagA(i);
      a(i) = -0.5 * dt * off;  // sub
      c(i) = -0.5 * dt * off;  // super
    }
    Eigen::VectorXd cp(m), rhs(m), interior(m);
    for (int step = 0; step < n_t; ++step) {
      for (int i = 0; i < m; ++i) {
        double center = (1.0 + 0.5 * dt * diagA(i)) * u(i + 1);
        double lo = 0.5 * dt * off * u(i);
        double hi = 0.5 * dt * off * u(i + 2);
        rhs(i) = center + lo + hi;
      }
      // Thomas solve
      cp(0) = c(0) / b(0);
      rhs(0) = rhs(0) / b(0);
      for (int i = 1; i < m; ++i) {
        double denom = b(i) - a(i) * cp(i - 1);
        cp(i) = c(i) / denom;
        rhs(i) = (rhs(i) - a(i) * rhs(i - 1)) / denom;
      }
      interior(m - 1) = rhs(m - 1);
      for (int i = m - 2; i >= 0; --i) interior(i) = rhs(i) - cp(i) * interior(i + 1);
      u.segment(1, m) = interior;
      u(0) = 0.0;
      u(n - 1) = 0.0;
    }
    return u;
  }

  // Linear interpolation of a grid solution at x.
  double eval(const Eigen::VectorXd& u, double x) const {
    double s = (x - x_lo) / dx();
    int i = static_cast<int>(std::floor(s));
    if (i < 0 || i >= n_nodes - 1)
      throw std::invalid_argument("CrankNicolson1d::eval: x outside the domain");
    double w = s - i;
    return (1.0 - w) * u(i) + w * u(i + 1);
  }
};

}  // namespace pathint
