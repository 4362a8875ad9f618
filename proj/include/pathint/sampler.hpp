#pragma once

// Monte Carlo realization of the diffusive Gaussian integrator on pinned
// path spaces. Sampled paths have covariance (1/2pi) G^{ab}(t_i, t_j); the
// measure is normalized so E[1] = 1 by construction.

#include "pathint/greens.hpp"
#include "pathint/grid.hpp"
#include "pathint/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

namespace pathint {

using PathFunctional = std::function<std::complex<double>(const DiscretePath&)>;

struct Estimate {
  std::complex<double> mean{0.0, 0.0};
  double std_err = 0.0;
  long samples = 0;
};

class PathSampler {
 public:
  PathSampler(const BoundaryFamily& family, const TimeGrid& grid, const MetricMatrix& h,
              std::uint64_t seed, Regime regime = Regime::diffusive())
      : family_(family), grid_(grid), metric_(h), seed_(seed) {
    if (!regime.is_diffusive())
      throw std::domain_error("PathSampler: the oscillatory integrator is not sampled");
    Eigen::LLT<Eigen::MatrixXd> llt(h.h_inv);
    if (llt.info() != Eigen::Success)
      throw std::invalid_argument("PathSampler: metric must be positive definite");
    chol_hinv_ = llt.matrixL();
  }

  const TimeGrid& grid() const { return grid_; }
  const BoundaryFamily& family() const { return family_; }
  const MetricMatrix& metric() const { return metric_; }

  // Independent increments xi_i ~ N(0, dt/(2 pi) h^{-1}), integrated from the
  // pinned node; for both ends pinned the time mean of the increments is
  // removed first (bridge projection).
  DiscretePath sample(std::uint64_t chunk) const {
    NormalStream rng(seed_, chunk);
    int n = grid_.n_steps, d = metric_.dim();
    double sd = std::sqrt(grid_.dt() / (2.0 * pi));
    Eigen::MatrixXd xi(n, d);
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < d; ++a) xi(i, a) = rng();
    xi = (sd * (chol_hinv_ * xi.transpose())).transpose();

    DiscretePath path(grid_, family_, d);
    switch (family_.kind) {
      case Pin::Both: {
        Eigen::RowVectorXd mean = xi.colwise().mean();
        xi.rowwise() -= mean;
        accumulate_forward(path, xi, 0);
        path.samples.row(n).setZero();  // pin exactly, not to rounding
        break;
      }
      case Pin::Start:
        accumulate_forward(path, xi, 0);
        break;
      case Pin::End:
        accumulate_backward(path, xi, n);
        break;
      case Pin::Interior:
        accumulate_forward(path, xi, family_.interior_node);
        accumulate_backward(path, xi, family_.interior_node);
        break;
    }
    return path;
  }

  std::vector<DiscretePath> sample_paths(long count, std::uint64_t first_chunk = 0) const {
    if (count < 1) throw std::invalid_argument("sample_paths: count must be >= 1");
    std::vector<DiscretePath> out;
    out.reserve(count);
    for (long c = 0; c < count; ++c) out.push_back(sample(first_chunk + c));
    return out;
  }

 private:
  // increments xi row i spans [t_i, t_{i+1}]
  static void accumulate_forward(DiscretePath& p, const Eigen::MatrixXd& xi, int from) {
    for (int i = from + 1; i <= p.grid.n_steps; ++i)
      p.samples.row(i) = p.samples.row(i - 1) + xi.row(i - 1);
  }
  static void accumulate_backward(DiscretePath& p, const Eigen::MatrixXd& xi, int from) {
    for (int i = from - 1; i >= 0; --i)
      p.samples.row(i) = p.samples.row(i + 1) - xi.row(i);
  }

  BoundaryFamily family_;
  TimeGrid grid_;
  MetricMatrix metric_;
  std::uint64_t seed_;
  Eigen::MatrixXd chol_hinv_;
};

// Monte Carlo mean and standard error of F over `count` sampled paths.
inline Estimate expectation(const PathSampler& sampler, const PathFunctional& f,
                            long count) {
  if (count < 1) throw std::invalid_argument("expectation: count must be >= 1");
  std::complex<double> sum{0, 0};
  double sum_sq = 0.0;
  for (long c = 0; c < count; ++c) {
    std::complex<double> v = f(sampler.sample(c));
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw std::runtime_error("expectation: functional returned a non-finite value");
    sum += v;
    sum_sq += std::norm(v);
  }
  Estimate e;
  e.samples = count;
  e.mean = sum / static_cast<double>(count);
  double var = sum_sq / count - std::norm(e.mean);
  e.std_err = std::sqrt(std::max(0.0, var) / count);
  return e;
}

// Cameron-Martin reweighting for a deterministic shift z0:
// E[F(z - z0)] = E[F(z) exp(-pi (2 Q0(z, z0) + Q0(z0)))], equivalently the
// +z0 shift with z0 negated.
inline std::complex<double> translation_weight(const DiscretePath& z,
                                               const DiscretePath& z0,
                                               const MetricMatrix& h) {
  double cross = quadratic_variation_bilinear(z, z0, h);
  double q0 = quadratic_variation(z0, h);
  return std::exp(-pi * (2.0 * cross + q0));
}

struct EndpointFixingResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double abs_err = 0.0;
  double lhs_std_err = 0.0;
  double rhs_std_err = 0.0;
};

// Checks the endpoint-fixing identity relating the pinned-at-start and
// both-ends-pinned integrators: the delta on z(t_b) is realized by a
// Gaussian mollifier with Richardson extrapolation in its width, and the
// right-hand side carries C = det(h^{ab})^{1/2} (t_b - t_a)^{d/2}.
inline EndpointFixingResult endpoint_fixing_check(const TimeGrid& grid,
                                                  const MetricMatrix& h, long count,
                                                  std::uint64_t seed,
                                                  const PathFunctional& f) {
  int d = h.dim();
  double T = grid.length();
  double gbb = green_closed_form(BoundaryFamily::fixed_at_start(), grid, grid.t_b, grid.t_b);
  // per-component width from the component variance (gbb/2pi) h^{-1}_{aa}
  Eigen::VectorXd eps(d);
  for (int a = 0; a < d; ++a) eps(a) = 0.05 * std::sqrt(gbb / (2.0 * pi) * h.h_inv(a, a));

  PathSampler free_end(BoundaryFamily::fixed_at_start(), grid, h, seed);
  auto mollified = [&](double shrink) {
    // product of per-component N(0, (shrink*eps_a)^2) densities at z(t_b)
    PathFunctional g = [&, shrink](const DiscretePath& z) {
      Eigen::VectorXd zb = z.samples.row(z.grid.n_steps).transpose();
      double dens = 1.0;
      for (int a = 0; a < zb.size(); ++a) {
        double w = shrink * eps(a);
        dens *= std::exp(-0.5 * zb(a) * zb(a) / (w * w)) / (std::sqrt(2.0 * pi) * w);
      }
      return f(z) * dens;
    };
    return expectation(free_end, g, count);
  };

  Estimate coarse = mollified(1.0);
  Estimate fine = mollified(0.5);
  // lhs(eps) = L + c eps^2  ->  L ~ (4 fine - coarse) / 3
  EndpointFixingResult r;
  r.lhs = (4.0 * fine.mean.real() - coarse.mean.real()) / 3.0;
  r.lhs_std_err = (4.0 * fine.std_err + coarse.std_err) / 3.0;

  double C = std::sqrt(h.h_inv.determinant()) * std::pow(T, 0.5 * d);
  PathSampler bridge(BoundaryFamily::fixed_both_ends(), grid, h, seed + 1);
  Estimate pinned = expectation(bridge, f, count);
  r.rhs = pinned.mean.real() / C;
  r.rhs_std_err = pinned.std_err / C;
  r.abs_err = std::abs(r.lhs - r.rhs);
  return r;
}

}  // namespace pathint
