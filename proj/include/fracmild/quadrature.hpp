#ifndef FRACMILD_QUADRATURE_HPP
#define FRACMILD_QUADRATURE_HPP

#include <functional>
#include <vector>

namespace fracmild {

/// Gauss-Legendre rule on [-1,1]. Nodes ascending; exact for degree 2n-1.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Newton iteration from Chebyshev initial guesses; n >= 1.
const GaussRule& gauss_legendre(int n);

/// Integrate f over [a,b] with a fixed Gauss-Legendre rule.
double gl_integrate(const std::function<double(double)>& f, double a, double b, int n);

/// Adaptive bisection with embedded GL(15)/GL(7) error estimate.
/// `tol` is absolute unless the accumulated magnitude dominates.
double adaptive_integrate(const std::function<double(double)>& f, double a, double b,
                          double tol, int max_depth = 30);

/// log( integral_{v0}^{v1} e^{a v} dv ), v1 > v0 >= 0, any real a.
/// Stable for |a| huge of either sign; result may be -inf when the value
/// underflows.
double log_expdiff(double a, double v0, double v1);

} // namespace fracmild

#endif
