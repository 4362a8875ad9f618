#pragma once

// Driven flows dx = X_a(x) dz^a + Y(x) dt on a chart, the multistep
// (ordered product of one-parameter flows) construction of Sigma(T, z),
// and the built-in chart systems: flat translations, the punctured plane in
// polar coordinates, the abelian gauge bundle and the potential clock.

#include "pathint/grid.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pathint {

using Vec = Eigen::VectorXd;
using VecField = std::function<Vec(const Vec&)>;
// closed-form one-parameter flow of a single field: (state, r) -> state
using FlowMap = std::function<Vec(const Vec&, double)>;

enum class StepMethod { Heun, Euler };

struct DrivenSystem {
  int chart_dim = 0;
  int n_fields = 0;
  std::vector<VecField> fields;   // X_1 .. X_d
  VecField drift;                 // Y, may be empty
  std::vector<FlowMap> flows;     // closed-form sigma_a, may be empty
  std::function<bool(const Vec&)> in_domain;   // optional guard
  std::function<Vec(const Vec&)> post_step;    // optional per-step projection
  std::function<double(double)> lipschitz_bound;  // optional k(t) descriptor
  std::string tag;

  bool has_flows() const { return static_cast<int>(flows.size()) == n_fields; }
};

struct FlowResult {
  Eigen::MatrixXd trajectory;  // one row per grid node, chart_dim columns
  Vec endpoint;
  int steps = 0;
  double max_step_error = 0.0;  // Heun's |k2 - k1|/2 estimate
};

enum class FlowDirection { ForwardFromStart, BackwardFromEnd };

namespace detail {

inline Vec eval_rhs(const DrivenSystem& sys, const Vec& x, const Eigen::RowVectorXd& dz,
                    double dt_inc) {
  Vec k = Vec::Zero(sys.chart_dim);
  for (int a = 0; a < sys.n_fields; ++a) k += sys.fields[a](x) * dz(a);
  if (sys.drift) k += sys.drift(x) * dt_inc;
  return k;
}

}  // namespace detail

// Core stepper over an increment sequence. Consuming increments (rather
// than node samples) makes the chain-rule split reproduce the exact same
// floating point operations.
inline FlowResult integrate_increments(const DrivenSystem& sys, const Vec& x0,
                                       const Eigen::MatrixXd& dz, const Vec& dt,
                                       StepMethod method = StepMethod::Heun,
                                       double blowup = 1e8) {
  if (x0.size() != sys.chart_dim)
    throw std::invalid_argument("integrate_increments: x0 has wrong dimension");
  if (dz.cols() != sys.n_fields)
    throw std::invalid_argument("integrate_increments: increment dimension mismatch");
  int n = static_cast<int>(dz.rows());
  FlowResult res;
  res.trajectory.resize(n + 1, sys.chart_dim);
  Vec x = x0;
  res.trajectory.row(0) = x.transpose();
  for (int i = 0; i < n; ++i) {
    if (sys.in_domain && !sys.in_domain(x))
      throw std::domain_error("integrate: trajectory left the chart domain (" + sys.tag + ")");
    Vec k1 = detail::eval_rhs(sys, x, dz.row(i), dt(i));
    if (method == StepMethod::Euler) {
      x += k1;
    } else {
      Vec xe = x + k1;
      if (sys.in_domain && !sys.in_domain(xe))
        throw std::domain_error("integrate: predictor left the chart domain (" + sys.tag + ")");
      Vec k2 = detail::eval_rhs(sys, xe, dz.row(i), dt(i));
      res.max_step_error = std::max(res.max_step_error, 0.5 * (k2 - k1).norm());
      x += 0.5 * (k1 + k2);
    }
    if (sys.post_step) x = sys.post_step(x);
    if (!x.allFinite() || x.norm() > blowup)
      throw std::domain_error("integrate: trajectory blew up (" + sys.tag + ")");
    res.trajectory.row(i + 1) = x.transpose();
  }
  res.endpoint = x;
  res.steps = n;
  return res;
}

// Increments of a sampled path, forward (row i spans [t_i, t_{i+1}]).
inline Eigen::MatrixXd path_increments(const DiscretePath& z) {
  Eigen::MatrixXd dz(z.grid.n_steps, z.dim());
  for (int i = 0; i < z.grid.n_steps; ++i)
    dz.row(i) = z.samples.row(i + 1) - z.samples.row(i);
  return dz;
}

// Trajectory of dx = X_a dz^a + Y dt along the grid of z. Backward direction
// starts at the end node and consumes the increments in reverse with flipped
// sign, realizing the x(t_b) = x_b convention; its trajectory rows are still
// stored in forward node order.
inline FlowResult integrate(const DrivenSystem& sys, const DiscretePath& z, const Vec& x0,
                            FlowDirection dir = FlowDirection::ForwardFromStart,
                            StepMethod method = StepMethod::Heun) {
  Eigen::MatrixXd dz = path_increments(z);
  int n = z.grid.n_steps;
  Vec dt = Vec::Constant(n, z.grid.dt());
  if (dir == FlowDirection::ForwardFromStart) {
    return integrate_increments(sys, x0, dz, dt, method);
  }
  Eigen::MatrixXd rdz(n, dz.cols());
  for (int i = 0; i < n; ++i) rdz.row(i) = -dz.row(n - 1 - i);
  Vec rdt = Vec::Constant(n, -z.grid.dt());
  FlowResult rev = integrate_increments(sys, x0, rdz, rdt, method);
  FlowResult res = rev;
  for (int i = 0; i <= n; ++i) res.trajectory.row(i) = rev.trajectory.row(n - i);
  res.endpoint = res.trajectory.row(0).transpose();
  return res;
}

// Ordered product of closed-form flows: x . s(z(T/n)) . s(z(2T/n)-z(T/n)) ...
// with s applying sigma_1 ... sigma_d in that order. First-order accurate in
// 1/n for non-commuting fields.
inline Vec multistep_sigma(const DrivenSystem& sys, const DiscretePath& z, const Vec& x0,
                           int n_substeps) {
  if (!sys.has_flows())
    throw std::invalid_argument("multistep_sigma: system lacks closed-form flows");
  if (n_substeps < 1) throw std::invalid_argument("multistep_sigma: need n_substeps >= 1");
  double T0 = z.grid.t_a, T = z.grid.length();
  Vec x = x0;
  Eigen::VectorXd prev = z.at(T0);
  for (int k = 1; k <= n_substeps; ++k) {
    Eigen::VectorXd cur = z.at(T0 + k * T / n_substeps);
    for (int a = 0; a < sys.n_fields; ++a) x = sys.flows[a](x, cur(a) - prev(a));
    prev = cur;
  }
  return x;
}

// Splits z at an interior node, composes the two flows and returns the
// endpoint discrepancy against the unsplit flow. The split consumes the
// identical increment sequence, so the discrepancy is exactly zero.
inline double chain_rule_check(const DrivenSystem& sys, const DiscretePath& z, const Vec& x0,
                               double t_c, StepMethod method = StepMethod::Heun) {
  int k = z.grid.node_index(t_c);
  if (k <= 0 || k >= z.grid.n_steps)
    throw std::invalid_argument("chain_rule_check: t_c must be strictly inside");
  Eigen::MatrixXd dz = path_increments(z);
  Vec dt = Vec::Constant(z.grid.n_steps, z.grid.dt());

  FlowResult whole = integrate_increments(sys, x0, dz, dt, method);
  FlowResult first =
      integrate_increments(sys, x0, dz.topRows(k), dt.head(k), method);
  FlowResult second = integrate_increments(sys, first.endpoint,
                                           dz.bottomRows(z.grid.n_steps - k),
                                           dt.tail(z.grid.n_steps - k), method);
  return (second.endpoint - whole.endpoint).norm();
}

// ---- built-in systems ----

// Translations x^a -> x^a + lambda z^a; Sigma(T, z) is x + lambda z(T).
inline DrivenSystem flat_translations(int d, double lambda = 1.0) {
  DrivenSystem sys;
  sys.chart_dim = d;
  sys.n_fields = d;
  sys.tag = "FlatTranslations";
  for (int a = 0; a < d; ++a) {
    sys.fields.push_back([d, a, lambda](const Vec&) {
      Vec e = Vec::Zero(d);
      e(a) = lambda;
      return e;
    });
    sys.flows.push_back([d, a, lambda](const Vec& x, double r) {
      Vec y = x;
      y(a) += lambda * r;
      return y;
    });
  }
  return sys;
}

// Punctured plane in polar coordinates (r, theta), r > 0.
inline DrivenSystem polar_plane(double r_min = 1e-9) {
  DrivenSystem sys;
  sys.chart_dim = 2;
  sys.n_fields = 2;
  sys.tag = "PolarPlane";
  sys.in_domain = [r_min](const Vec& x) { return x(0) > r_min; };
  sys.fields.push_back([](const Vec& x) {
    Vec v(2);
    v << std::cos(x(1)), -std::sin(x(1)) / x(0);
    return v;
  });
  sys.fields.push_back([](const Vec& x) {
    Vec v(2);
    v << std::sin(x(1)), std::cos(x(1)) / x(0);
    return v;
  });
  // closed-form flows: cartesian translations written in polar coordinates,
  // keeping the angle lift continuous
  auto translate = [](const Vec& x, double dx1, double dx2) {
    double c = x(0) * std::cos(x(1)) + dx1;
    double s = x(0) * std::sin(x(1)) + dx2;
    Vec y(2);
    y(0) = std::hypot(c, s);
    double raw = std::atan2(s, c);
    double k = std::round((x(1) - raw) / (2.0 * pi));
    y(1) = raw + 2.0 * pi * k;
    return y;
  };
  sys.flows.push_back([translate](const Vec& x, double r) { return translate(x, r, 0.0); });
  sys.flows.push_back([translate](const Vec& x, double r) { return translate(x, 0.0, r); });
  return sys;
}

// Abelian gauge chart (x^1, x^2, Theta) for the flux line of dimensionless
// strength c: dx = dz, dTheta = c (x^1 dx^2 - x^2 dx^1)/|x|^2.
inline DrivenSystem abelian_gauge(double flux_fraction, double r_min = 1e-9) {
  DrivenSystem sys;
  sys.chart_dim = 3;
  sys.n_fields = 2;
  sys.tag = "AbelianGauge";
  double c = flux_fraction;
  sys.in_domain = [r_min](const Vec& x) {
    return x.head(2).norm() > r_min;
  };
  sys.fields.push_back([c](const Vec& x) {
    Vec v(3);
    double r2 = x(0) * x(0) + x(1) * x(1);
    v << 1.0, 0.0, -c * x(1) / r2;
    return v;
  });
  sys.fields.push_back([c](const Vec& x) {
    Vec v(3);
    double r2 = x(0) * x(0) + x(1) * x(1);
    v << 0.0, 1.0, c * x(0) / r2;
    return v;
  });
  return sys;
}

// Base translations extended with a clock coordinate Theta obeying
// dTheta = V(x) dt, housing the potential for Feynman-Kac.
inline DrivenSystem product_with_clock(int d, const std::function<double(const Vec&)>& V,
                                       double lambda = 1.0) {
  DrivenSystem sys;
  sys.chart_dim = d + 1;
  sys.n_fields = d;
  sys.tag = "ProductWithClock";
  for (int a = 0; a < d; ++a)
    sys.fields.push_back([d, a, lambda](const Vec&) {
      Vec e = Vec::Zero(d + 1);
      e(a) = lambda;
      return e;
    });
  sys.drift = [d, V](const Vec& x) {
    Vec e = Vec::Zero(d + 1);
    e(d) = V(x.head(d));
    return e;
  };
  return sys;
}

inline void write_trajectory_csv(std::ostream& os, const TimeGrid& grid,
                                 const FlowResult& res) {
  os << "t";
  for (int a = 1; a <= res.trajectory.cols(); ++a) os << ",x" << a;
  os << "\n";
  for (int i = 0; i < res.trajectory.rows(); ++i) {
    os << grid.node(i);
    for (int a = 0; a < res.trajectory.cols(); ++a) os << "," << res.trajectory(i, a);
    os << "\n";
  }
}

}  // namespace pathint
