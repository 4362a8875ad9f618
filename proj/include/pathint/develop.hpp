#pragma once

// Cartan development on the orthonormal frame bundle of the round sphere.
// Frame-bundle states are rows (p, e1, e2) in R^9 with p on the unit sphere
// and (e1, e2) an orthonormal tangent pair; the horizontal lift of a chart
// path z in R^2 rolls the sphere along z.

#include "pathint/flow.hpp"
#include "pathint/grid.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace pathint {

using Vec3 = Eigen::Vector3d;

struct FrameS2 {
  Vec3 p;
  Vec3 e1;
  Vec3 e2;

  void validate(double tol = 1e-8) const {
    if (std::abs(p.norm() - 1.0) > tol || std::abs(e1.norm() - 1.0) > tol ||
        std::abs(e2.norm() - 1.0) > tol || std::abs(p.dot(e1)) > tol ||
        std::abs(p.dot(e2)) > tol || std::abs(e1.dot(e2)) > tol)
      throw std::invalid_argument("FrameS2: frame is not orthonormal");
  }

  Vec pack() const {
    Vec x(9);
    x << p, e1, e2;
    return x;
  }
  static FrameS2 unpack(const Vec& x) {
    FrameS2 f;
    f.p = x.segment<3>(0);
    f.e1 = x.segment<3>(3);
    f.e2 = x.segment<3>(6);
    return f;
  }
};

namespace detail {

inline Vec gram_schmidt_s2(const Vec& x) {
  FrameS2 f = FrameS2::unpack(x);
  f.p.normalize();
  f.e1 -= f.p.dot(f.e1) * f.p;
  f.e1.normalize();
  f.e2 -= f.p.dot(f.e2) * f.p + f.e1.dot(f.e2) * f.e1;
  f.e2.normalize();
  return f.pack();
}

// rotation in the (p, e_a) plane by angle r; the other leg is untouched
inline Vec geodesic_flow_s2(const Vec& x, double r, int a) {
  FrameS2 f = FrameS2::unpack(x);
  Vec3& e = (a == 0) ? f.e1 : f.e2;
  Vec3 p_new = f.p * std::cos(r) + e * std::sin(r);
  Vec3 e_new = -f.p * std::sin(r) + e * std::cos(r);
  f.p = p_new;
  e = e_new;
  return f.pack();
}

}  // namespace detail

// Horizontal vector fields on the frame bundle: pdot = e_a and the moving
// frame stays parallel, edot = -(e . pdot) p.
inline DrivenSystem frame_bundle_s2() {
  DrivenSystem sys;
  sys.chart_dim = 9;
  sys.n_fields = 2;
  sys.tag = "FrameBundleS2";
  for (int a = 0; a < 2; ++a)
    sys.fields.push_back([a](const Vec& x) {
      FrameS2 f = FrameS2::unpack(x);
      const Vec3 e = (a == 0) ? f.e1 : f.e2;
      Vec v(9);
      Vec3 de1 = -(f.e1.dot(e)) * f.p;
      Vec3 de2 = -(f.e2.dot(e)) * f.p;
      v << e, de1, de2;
      return v;
    });
  for (int a = 0; a < 2; ++a)
    sys.flows.push_back(
        [a](const Vec& x, double r) { return detail::geodesic_flow_s2(x, r, a); });
  sys.post_step = detail::gram_schmidt_s2;
  return sys;
}

struct DevelopmentResult {
  Eigen::MatrixXd points;  // (n+1) x 3, rows in forward node order
  FrameS2 frame_at_start;
  double max_step_error = 0.0;
};

// Development of a chart path z (pinned at t_b) through the frame at x_b:
// integrates the horizontal lift backward from t_b and projects to the
// sphere. Constant unit zdot drives a great circle.
inline DevelopmentResult develop(const DiscretePath& z, const FrameS2& frame_b,
                                 StepMethod method = StepMethod::Heun) {
  if (z.dim() != 2) throw std::invalid_argument("develop: chart path must be planar");
  frame_b.validate();
  DrivenSystem sys = frame_bundle_s2();
  FlowResult res = integrate(sys, z, frame_b.pack(), FlowDirection::BackwardFromEnd, method);
  DevelopmentResult out;
  out.points.resize(res.trajectory.rows(), 3);
  for (int i = 0; i < res.trajectory.rows(); ++i)
    out.points.row(i) = res.trajectory.row(i).head<3>();
  out.frame_at_start = FrameS2::unpack(res.endpoint);
  out.max_step_error = res.max_step_error;
  return out;
}

// Forward development from t_a for pinned-at-start paths.
inline DevelopmentResult develop_forward(const DiscretePath& z, const FrameS2& frame_a,
                                         StepMethod method = StepMethod::Heun) {
  if (z.dim() != 2) throw std::invalid_argument("develop_forward: chart path must be planar");
  frame_a.validate();
  DrivenSystem sys = frame_bundle_s2();
  FlowResult res = integrate(sys, z, frame_a.pack(), FlowDirection::ForwardFromStart, method);
  DevelopmentResult out;
  out.points.resize(res.trajectory.rows(), 3);
  for (int i = 0; i < res.trajectory.rows(); ++i)
    out.points.row(i) = res.trajectory.row(i).head<3>();
  out.frame_at_start = FrameS2::unpack(res.trajectory.row(0).transpose());
  out.max_step_error = res.max_step_error;
  return out;
}

// Riemannian length^2-type action of the developed path: for the round
// metric this equals the chart action Q0(z) up to discretization.
inline double developed_action(const DevelopmentResult& dev, const TimeGrid& grid) {
  double dt = grid.dt();
  double a = 0.0;
  for (int i = 1; i < dev.points.rows(); ++i) {
    // geodesic increment angle between consecutive points
    Vec3 u = dev.points.row(i - 1);
    Vec3 v = dev.points.row(i);
    double ang = std::atan2(u.cross(v).norm(), u.dot(v));
    a += ang * ang / dt;
  }
  return a;
}

}  // namespace pathint
