#pragma once

// Classical boundary-value solver for actions S = int (1/2 xdot^T h xdot - V) dt
// (+ optional initial phase term), with the tangent (monodromy) flow carried
// along for Newton shooting and Jacobi blocks.

#include "pathint/grid.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

namespace pathint {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct ActionSpec {
  MetricMatrix h;                                  // kinetic metric (mass folded in)
  std::function<double(const Vec&)> V;             // potential
  std::function<Vec(const Vec&)> gradV;
  std::function<Mat(const Vec&)> hessV;
  std::function<double(const Vec&)> S0;            // optional initial phase
  std::function<Vec(const Vec&)> gradS0;
  std::function<Mat(const Vec&)> hessS0;

  int dim() const { return h.dim(); }

  static ActionSpec free_particle(int d, double mass = 1.0) {
    ActionSpec s;
    s.h = MetricMatrix::scaled_identity(d, mass);
    s.V = [](const Vec&) { return 0.0; };
    s.gradV = [d](const Vec&) { return Vec::Zero(d); };
    s.hessV = [d](const Vec&) { return Mat::Zero(d, d); };
    return s;
  }

  static ActionSpec harmonic(int d, double omega, double mass = 1.0) {
    ActionSpec s;
    s.h = MetricMatrix::scaled_identity(d, mass);
    double k = mass * omega * omega;
    s.V = [k](const Vec& x) { return 0.5 * k * x.squaredNorm(); };
    s.gradV = [k](const Vec& x) { return (k * x).eval(); };
    s.hessV = [k, d](const Vec&) { return (k * Mat::Identity(d, d)).eval(); };
    return s;
  }
};

enum class BoundaryKind { PP, MP, PM, MM };

struct BoundaryData {
  BoundaryKind kind = BoundaryKind::PP;
  Vec x_a, x_b, p_a, p_b;

  static BoundaryData position_to_position(const Vec& xa, const Vec& xb) {
    return {BoundaryKind::PP, xa, xb, {}, {}};
  }
  static BoundaryData momentum_to_position(const Vec& pa, const Vec& xb) {
    return {BoundaryKind::MP, {}, xb, pa, {}};
  }
  static BoundaryData position_to_momentum(const Vec& xa, const Vec& pb) {
    return {BoundaryKind::PM, xa, {}, {}, pb};
  }
  static BoundaryData momentum_to_momentum(const Vec& pa, const Vec& pb) {
    return {BoundaryKind::MM, {}, {}, pa, pb};
  }
};

// Joint RK4 integration of the Hamilton equations and the 2d x 2d tangent
// flow  Phi(t, t_start), stored at every node in forward time order.
struct HamiltonianFlow {
  Mat X, P;                // (n+1) x d
  std::vector<Mat> Phi;    // (n+1) entries, 2d x 2d, Phi[i] = Phi(t_i, t_start)
  bool backward = false;   // integrated from t_b if true
};

namespace detail {

struct HamState {
  Vec x, p;
  Mat phi;
};

inline HamState ham_rhs(const ActionSpec& spec, const HamState& s, bool with_tangent) {
  int d = spec.dim();
  HamState k;
  k.x = spec.h.h_inv * s.p;
  k.p = -spec.gradV(s.x);
  if (with_tangent) {
    Mat a = Mat::Zero(2 * d, 2 * d);
    a.block(0, d, d, d) = spec.h.h_inv;
    a.block(d, 0, d, d) = -spec.hessV(s.x);
    k.phi = a * s.phi;
  }
  return k;
}

inline HamState ham_axpy(const HamState& s, double c, const HamState& k,
                         bool with_tangent) {
  HamState out;
  out.x = s.x + c * k.x;
  out.p = s.p + c * k.p;
  if (with_tangent) out.phi = s.phi + c * k.phi;
  return out;
}

}  // namespace detail

inline HamiltonianFlow integrate_hamiltonian(const ActionSpec& spec, const Vec& x_start,
                                             const Vec& p_start, const TimeGrid& grid,
                                             bool with_tangent, bool backward = false) {
  int d = spec.dim(), n = grid.n_steps;
  double dt = backward ? -grid.dt() : grid.dt();
  detail::HamState s{x_start, p_start,
                     with_tangent ? Mat::Identity(2 * d, 2 * d) : Mat()};
  HamiltonianFlow out;
  out.backward = backward;
  out.X.resize(n + 1, d);
  out.P.resize(n + 1, d);
  if (with_tangent) out.Phi.assign(n + 1, Mat());
  auto store = [&](int step, const detail::HamState& st) {
    int node = backward ? n - step : step;
    out.X.row(node) = st.x.transpose();
    out.P.row(node) = st.p.transpose();
    if (with_tangent) out.Phi[node] = st.phi;
  };
  store(0, s);
  for (int i = 0; i < n; ++i) {
    using detail::ham_axpy;
    using detail::ham_rhs;
    detail::HamState k1 = ham_rhs(spec, s, with_tangent);
    detail::HamState k2 = ham_rhs(spec, ham_axpy(s, 0.5 * dt, k1, with_tangent), with_tangent);
    detail::HamState k3 = ham_rhs(spec, ham_axpy(s, 0.5 * dt, k2, with_tangent), with_tangent);
    detail::HamState k4 = ham_rhs(spec, ham_axpy(s, dt, k3, with_tangent), with_tangent);
    s.x += dt / 6.0 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x);
    s.p += dt / 6.0 * (k1.p + 2 * k2.p + 2 * k3.p + k4.p);
    if (with_tangent) s.phi += dt / 6.0 * (k1.phi + 2 * k2.phi + 2 * k3.phi + k4.phi);
    if (!s.x.allFinite() || !s.p.allFinite())
      throw std::domain_error("integrate_hamiltonian: trajectory blew up");
    store(i + 1, s);
  }
  return out;
}

struct ClassicalSolution {
  TimeGrid grid;
  BoundaryKind kind = BoundaryKind::PP;
  Mat X, P;              // trajectory and momentum at nodes (forward order)
  std::vector<Mat> Phi;  // tangent flow Phi(t_i, t_a), forward based
  double action = 0.0;
  int newton_iterations = 0;
  double shooting_residual = 0.0;

  Vec x_at(int i) const { return X.row(i).transpose(); }
  Vec p_at(int i) const { return P.row(i).transpose(); }
  Vec x_start() const { return X.row(0).transpose(); }
  Vec x_end() const { return X.row(X.rows() - 1).transpose(); }

  // max interior second-difference residual of h xddot + grad V = 0
  double euler_lagrange_residual(const ActionSpec& spec) const {
    double dt = grid.dt(), worst = 0.0;
    for (int i = 1; i < grid.n_steps; ++i) {
      Vec xdd = (X.row(i + 1) - 2.0 * X.row(i) + X.row(i - 1)).transpose() / (dt * dt);
      worst = std::max(worst, (spec.h.h * xdd + spec.gradV(x_at(i))).norm());
    }
    return worst;
  }
};

namespace detail {

inline double trapezoid_action(const ActionSpec& spec, const TimeGrid& grid, const Mat& X,
                               const Mat& P) {
  double dt = grid.dt(), s = 0.0;
  for (int i = 0; i <= grid.n_steps; ++i) {
    Vec p = P.row(i).transpose();
    Vec xdot = spec.h.h_inv * p;
    double lag = 0.5 * xdot.dot(spec.h.h * xdot) - spec.V(X.row(i).transpose());
    s += (i == 0 || i == grid.n_steps) ? 0.5 * lag * dt : lag * dt;
  }
  if (spec.S0) s += spec.S0(X.row(0).transpose());
  return s;
}

// Rebases a backward-integrated flow so Phi entries become Phi(t_i, t_a).
inline void rebase_forward(HamiltonianFlow& flow) {
  if (!flow.backward || flow.Phi.empty()) return;
  Eigen::FullPivLU<Mat> lu(flow.Phi.front());  // Phi(t_a, t_b)
  for (auto& phi : flow.Phi) phi = phi * lu.inverse();
  flow.backward = false;
}

}  // namespace detail

// Newton shooting. PP and PM shoot forward on the initial momentum; MP and
// MM shoot backward from t_b. When an initial phase S0 is present, MP reads
// its initial momentum condition as p(t_a) = grad S0(x(t_a)).
inline ClassicalSolution solve_classical(const ActionSpec& spec, const BoundaryData& bc,
                                         const TimeGrid& grid, int max_iter = 60,
                                         double tol = 1e-11) {
  int d = spec.dim();
  bool forward = (bc.kind == BoundaryKind::PP || bc.kind == BoundaryKind::PM);
  double T = grid.length();

  Vec shoot;  // forward: p_a; backward: (MP) p_b, (MM) x_b
  switch (bc.kind) {
    case BoundaryKind::PP: shoot = spec.h.h * (bc.x_b - bc.x_a) / T; break;
    case BoundaryKind::PM: shoot = bc.p_b; break;
    case BoundaryKind::MP:
      shoot = bc.p_a.size() ? bc.p_a
                            : (spec.gradS0 ? spec.gradS0(bc.x_b) : Vec::Zero(d));
      break;
    case BoundaryKind::MM: shoot = bc.x_b.size() ? bc.x_b : Vec::Zero(d); break;
  }

  HamiltonianFlow flow;
  double resid_norm = 0.0;
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    Vec x_start, p_start;
    if (forward) {
      x_start = bc.x_a;
      p_start = shoot;
    } else if (bc.kind == BoundaryKind::MP) {
      x_start = bc.x_b;
      p_start = shoot;
    } else {
      x_start = shoot;
      p_start = bc.p_b;
    }
    flow = integrate_hamiltonian(spec, x_start, p_start, grid, true, !forward);

    Vec resid;
    Mat jac;
    const Mat& phi_far = forward ? flow.Phi.back() : flow.Phi.front();
    Mat Kb = phi_far.block(0, 0, d, d);
    Mat Jb = phi_far.block(0, d, d, d);
    Mat Lb = phi_far.block(d, 0, d, d);
    Mat Ktb = phi_far.block(d, d, d, d);
    switch (bc.kind) {
      case BoundaryKind::PP:
        resid = flow.X.row(grid.n_steps).transpose() - bc.x_b;
        jac = Jb;
        break;
      case BoundaryKind::PM:
        resid = flow.P.row(grid.n_steps).transpose() - bc.p_b;
        jac = Ktb;
        break;
      case BoundaryKind::MP: {
        Vec p_ta = flow.P.row(0).transpose();
        Vec x_ta = flow.X.row(0).transpose();
        if (bc.p_a.size()) {
          resid = p_ta - bc.p_a;
          jac = Ktb;
        } else {
          resid = p_ta - spec.gradS0(x_ta);
          jac = Ktb - spec.hessS0(x_ta) * Jb;
        }
        break;
      }
      case BoundaryKind::MM:
        resid = flow.P.row(0).transpose() - bc.p_a;
        jac = Lb;
        break;
    }
    resid_norm = resid.norm();
    if (resid_norm < tol) break;
    Eigen::FullPivLU<Mat> lu(jac);
    if (!lu.isInvertible())
      throw std::runtime_error(
          "solve_classical: singular shooting Jacobian (conjugate point vicinity)");
    shoot -= lu.solve(resid);
    if (!shoot.allFinite()) throw std::runtime_error("solve_classical: shooting diverged");
  }
  if (resid_norm >= std::max(tol, 1e-9))
    throw std::runtime_error("solve_classical: shooting did not converge");

  detail::rebase_forward(flow);
  ClassicalSolution sol;
  sol.grid = grid;
  sol.kind = bc.kind;
  sol.X = flow.X;
  sol.P = flow.P;
  sol.Phi = flow.Phi;
  sol.newton_iterations = iter;
  sol.shooting_residual = resid_norm;
  sol.action = detail::trapezoid_action(spec, grid, flow.X, flow.P);
  return sol;
}

}  // namespace pathint
