#ifndef FRACMILD_MANIFOLD_HPP
#define FRACMILD_MANIFOLD_HPP

#include "fracmild/operators.hpp"

namespace fracmild {

/// Laplace-Beltrami generator on the circle with metric g(theta):
///   L f = g^{-1/2} d/dtheta ( g^{-1/2} df/dtheta ),
/// discretized by second-order central differences in divergence (flux) form
/// so self-adjointness w.r.t. the volume weights sqrt(g) 2pi/N is exact at
/// machine precision. The dense eigendecomposition is cached inside the
/// returned Generator for semigroup application. Constants span the kernel.
Generator build_lb_generator(const CircleMetric& metric, int points);

/// Pointwise Riemannian gradient magnitude ||grad f||_theta = |f'| g^{-1/2}.
Field riemannian_gradient_norm(const Field& f, const CircleMetric& metric);

struct HeatGradientFit {
  double slope = 0.0;    // expected -1/2
  double constant = 0.0; // fitted C with ||grad S_t|| <= C t^{slope}
  double fit_residual = 0.0;
  std::vector<double> t_values;
  std::vector<double> rates;
};

/// Log-log fit of the sup->sup operator norm of grad S_t over t in
/// [1e-3, 1e-1]; the heat semigroup smoothing of Theorem-8.1 type gives
/// slope -1/2. Throws FitError when the data are a poor power law.
HeatGradientFit heat_gradient_fit(const Generator& gen, const CircleMetric& metric);

} // namespace fracmild

#endif
