#pragma once

// Uniform time grids, pinned path spaces and the basic path algebra:
// quadratic variation, scaling and concatenation.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace pathint {

inline constexpr double pi = 3.14159265358979323846;

struct TimeGrid {
  double t_a = 0.0;
  double t_b = 1.0;
  int n_steps = 2;

  TimeGrid() = default;
  TimeGrid(double a, double b, int n) : t_a(a), t_b(b), n_steps(n) {
    if (!(t_a < t_b)) throw std::invalid_argument("TimeGrid: t_a must be < t_b");
    if (n_steps < 2) throw std::invalid_argument("TimeGrid: n_steps must be >= 2");
  }

  double dt() const { return (t_b - t_a) / n_steps; }
  double length() const { return t_b - t_a; }
  int n_nodes() const { return n_steps + 1; }
  double node(int i) const { return t_a + i * dt(); }

  // Nearest grid node; rejects times that do not sit on the grid.
  int node_index(double t, double tol = 1e-9) const {
    double x = (t - t_a) / dt();
    int i = static_cast<int>(std::lround(x));
    if (i < 0 || i > n_steps || std::abs(x - i) > tol)
      throw std::invalid_argument("TimeGrid: time does not coincide with a grid node");
    return i;
  }

  TimeGrid refined(int factor = 2) const { return TimeGrid(t_a, t_b, n_steps * factor); }
};

// Which nodes of a pinned path space are constrained to zero.
enum class Pin { Start, End, Both, Interior };

struct BoundaryFamily {
  Pin kind = Pin::Both;
  int interior_node = 0;  // only for Pin::Interior

  static BoundaryFamily fixed_at_start() { return {Pin::Start, 0}; }
  static BoundaryFamily fixed_at_end() { return {Pin::End, 0}; }
  static BoundaryFamily fixed_both_ends() { return {Pin::Both, 0}; }
  static BoundaryFamily fixed_at(const TimeGrid& g, double t0) {
    int i = g.node_index(t0);
    return {Pin::Interior, i};
  }

  std::vector<int> pinned_nodes(const TimeGrid& g) const {
    switch (kind) {
      case Pin::Start: return {0};
      case Pin::End: return {g.n_steps};
      case Pin::Both: return {0, g.n_steps};
      case Pin::Interior:
        if (interior_node < 0 || interior_node > g.n_steps)
          throw std::invalid_argument("BoundaryFamily: interior pin off the grid");
        return {interior_node};
    }
    return {};
  }

  bool pins(int node, const TimeGrid& g) const {
    for (int p : pinned_nodes(g))
      if (p == node) return true;
    return false;
  }
};

// Constant metric h_{ab} with inverse and signature (p positive, q negative).
struct MetricMatrix {
  Eigen::MatrixXd h;
  Eigen::MatrixXd h_inv;
  int p = 0;
  int q = 0;

  static MetricMatrix identity(int d) {
    MetricMatrix m;
    m.h = Eigen::MatrixXd::Identity(d, d);
    m.h_inv = m.h;
    m.p = d;
    m.q = 0;
    return m;
  }

  static MetricMatrix scaled_identity(int d, double c) {
    return from(c * Eigen::MatrixXd::Identity(d, d));
  }

  static MetricMatrix from(const Eigen::MatrixXd& h) {
    if (h.rows() != h.cols()) throw std::invalid_argument("MetricMatrix: h must be square");
    if (!h.isApprox(h.transpose(), 1e-12))
      throw std::invalid_argument("MetricMatrix: h must be symmetric");
    MetricMatrix m;
    m.h = h;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    for (int i = 0; i < h.rows(); ++i) {
      double ev = es.eigenvalues()(i);
      if (std::abs(ev) < 1e-14) throw std::invalid_argument("MetricMatrix: h is singular");
      (ev > 0 ? m.p : m.q)++;
    }
    m.h_inv = h.inverse();
    return m;
  }

  int dim() const { return static_cast<int>(h.rows()); }
};

// s = 1 (diffusive) or s = i (oscillatory), with sqrt(s) = 1 resp. e^{i pi/4}.
struct Regime {
  enum Kind { Diffusive, Oscillatory } kind = Diffusive;

  static Regime diffusive() { return {Diffusive}; }
  static Regime oscillatory() { return {Oscillatory}; }

  std::complex<double> s() const {
    return kind == Diffusive ? std::complex<double>(1, 0) : std::complex<double>(0, 1);
  }
  std::complex<double> sqrt_s() const {
    return kind == Diffusive ? std::complex<double>(1, 0)
                             : std::polar(1.0, pi / 4.0);
  }
  bool is_diffusive() const { return kind == Diffusive; }
};

// Vector-valued sampled path on a uniform grid. Row i of `samples` is z(t_i).
struct DiscretePath {
  TimeGrid grid;
  BoundaryFamily family;
  Eigen::MatrixXd samples;  // (n_steps+1) x d

  DiscretePath() = default;
  DiscretePath(const TimeGrid& g, const BoundaryFamily& f, int d)
      : grid(g), family(f), samples(Eigen::MatrixXd::Zero(g.n_nodes(), d)) {}

  int dim() const { return static_cast<int>(samples.cols()); }

  void validate() const {
    if (samples.rows() != grid.n_nodes())
      throw std::invalid_argument("DiscretePath: sample count does not match grid");
    if (!samples.allFinite())
      throw std::invalid_argument("DiscretePath: non-finite samples");
    for (int pnode : family.pinned_nodes(grid))
      if (samples.row(pnode).norm() != 0.0)
        throw std::invalid_argument("DiscretePath: pinned node is not zero");
  }

  // Linear interpolation between nodes (paths are piecewise linear).
  Eigen::VectorXd at(double t) const {
    double x = (t - grid.t_a) / grid.dt();
    int i = static_cast<int>(std::floor(x));
    if (i < 0) i = 0;
    if (i >= grid.n_steps) i = grid.n_steps - 1;
    double w = x - i;
    return (1.0 - w) * samples.row(i).transpose() + w * samples.row(i + 1).transpose();
  }
};

// Grid functional approximating Q0 = \int h zdot zdot dt: sum of
// (dz)^T h (dz) / dt over subintervals. Exact for piecewise-linear paths.
inline double quadratic_variation(const DiscretePath& path, const MetricMatrix& h) {
  path.validate();
  if (h.dim() != path.dim())
    throw std::invalid_argument("quadratic_variation: metric dimension mismatch");
  double dt = path.grid.dt();
  double q = 0.0;
  for (int i = 1; i <= path.grid.n_steps; ++i) {
    Eigen::VectorXd dz = (path.samples.row(i) - path.samples.row(i - 1)).transpose();
    q += dz.dot(h.h * dz) / dt;
  }
  return q;
}

// Bilinear form on increments: Q0(z1, z2) = sum (dz1)^T h (dz2) / dt.
inline double quadratic_variation_bilinear(const DiscretePath& a, const DiscretePath& b,
                                           const MetricMatrix& h) {
  if (a.grid.n_steps != b.grid.n_steps || a.dim() != b.dim())
    throw std::invalid_argument("quadratic_variation_bilinear: incompatible paths");
  double dt = a.grid.dt();
  double q = 0.0;
  for (int i = 1; i <= a.grid.n_steps; ++i) {
    Eigen::VectorXd da = (a.samples.row(i) - a.samples.row(i - 1)).transpose();
    Eigen::VectorXd db = (b.samples.row(i) - b.samples.row(i - 1)).transpose();
    q += da.dot(h.h * db) / dt;
  }
  return q;
}

// z_T(t) = sqrt(T) z(t/T) on [0, T], same node count. Leaves the quadratic
// variation unchanged.
inline DiscretePath scale_path(const DiscretePath& path, double T) {
  if (T <= 0.0) throw std::invalid_argument("scale_path: T must be positive");
  if (std::abs(path.grid.t_a) > 1e-12 || std::abs(path.grid.t_b - 1.0) > 1e-12)
    throw std::invalid_argument("scale_path: path must live on [0,1]");
  DiscretePath out = path;
  out.grid = TimeGrid(0.0, T, path.grid.n_steps);
  out.samples = std::sqrt(T) * path.samples;
  return out;
}

// (z x z')(t) = z(t) for t <= T, z(T) + z'(t-T) after. Both inputs pinned at
// their start; the two grids must share dt so the result stays uniform.
inline DiscretePath concat_paths(const DiscretePath& z, const DiscretePath& z2) {
  if (z.dim() != z2.dim()) throw std::invalid_argument("concat_paths: dimension mismatch");
  if (z.family.kind != Pin::Start || z2.family.kind != Pin::Start)
    throw std::invalid_argument("concat_paths: both paths must be pinned at their start");
  if (std::abs(z.grid.dt() - z2.grid.dt()) > 1e-12 * z.grid.dt())
    throw std::invalid_argument("concat_paths: grids must share the step size");
  TimeGrid g(z.grid.t_a, z.grid.t_a + z.grid.length() + z2.grid.length(),
             z.grid.n_steps + z2.grid.n_steps);
  DiscretePath out(g, BoundaryFamily::fixed_at_start(), z.dim());
  out.samples.topRows(z.grid.n_nodes()) = z.samples;
  Eigen::RowVectorXd zT = z.samples.row(z.grid.n_steps);
  for (int j = 1; j <= z2.grid.n_steps; ++j)
    out.samples.row(z.grid.n_steps + j) = zT + z2.samples.row(j);
  return out;
}

inline void write_path_csv(std::ostream& os, const DiscretePath& path) {
  os << "t";
  for (int a = 1; a <= path.dim(); ++a) os << ",z" << a;
  os << "\n";
  for (int i = 0; i < path.grid.n_nodes(); ++i) {
    os << path.grid.node(i);
    for (int a = 0; a < path.dim(); ++a) os << "," << path.samples(i, a);
    os << "\n";
  }
}

}  // namespace pathint
