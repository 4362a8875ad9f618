#pragma once

// Feynman-Kac estimator: solves du/dT = (1/4pi) Lap u + V u by sampling the
// diffusive integrator, driving the clock-extended flat system and averaging
// exp(clock) * phi(endpoint).

#include "pathint/flow.hpp"
#include "pathint/sampler.hpp"

#include <Eigen/Dense>

#include <complex>
#include <functional>

namespace pathint {

struct FeynmanKacResult {
  double estimate = 0.0;
  double std_err = 0.0;
  long samples = 0;
};

// x0 . Sigma(t, z) for the flat chart is x0 + z(t); the clock coordinate
// accumulates int V dt through the same stepper.
inline FeynmanKacResult feynman_kac(const std::function<double(const Vec&)>& V,
                                    const std::function<double(const Vec&)>& phi,
                                    double T, const Vec& x0, int grid_n, long samples,
                                    std::uint64_t seed) {
  int d = static_cast<int>(x0.size());
  TimeGrid grid(0.0, T, grid_n);
  MetricMatrix h = MetricMatrix::identity(d);
  PathSampler sampler(BoundaryFamily::fixed_at_start(), grid, h, seed);
  DrivenSystem sys = product_with_clock(d, V);

  Vec start(d + 1);
  start << x0, 0.0;
  PathFunctional f = [&](const DiscretePath& z) {
    FlowResult res = integrate(sys, z, start, FlowDirection::ForwardFromStart);
    Vec end = res.endpoint;
    double clock = end(d);
    return std::complex<double>(std::exp(clock) * phi(end.head(d)), 0.0);
  };
  Estimate e = expectation(sampler, f, samples);
  return {e.mean.real(), e.std_err, e.samples};
}

}  // namespace pathint
