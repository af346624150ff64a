#ifndef FRACMILD_TEST_ORACLES_HPP
#define FRACMILD_TEST_ORACLES_HPP

// Independent reference values for the test suites. Everything here is
// deliberately computed by a route different from the library code it checks.

#include <cmath>
#include <functional>

namespace oracles {

/// E_{1/2}(s) = e^{s^2} erfc(-s), exact identity for the half-order
/// Mittag-Leffler function.
inline double ml_half(double s) { return std::exp(s * s) * std::erfc(-s); }

/// Levy(1/2) subordinator density (2 sqrt(pi))^{-1} x^{-3/2} e^{-1/(4x)}.
inline double levy_half_density(double x) {
  return 0.5 / std::sqrt(M_PI) * std::pow(x, -1.5) * std::exp(-0.25 / x);
}

/// Centered finite difference.
inline double central_diff(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// Heavy-tail remainder of the subordinator density integral:
/// int_X^inf G_beta(1,x) dx = (1/pi) sum_k (-1)^{k+1} Gamma(k beta)/k!
///                             sin(k pi beta) X^{-k beta}.
double stable_density_tail_mass(double beta, double X);

/// Scalar Riccati terminal-value problem f' = -a f + q f^2, f(T) = z,
/// via the Bernoulli substitution w = 1/f.
inline double riccati_backward(double a, double q, double z, double T, double t) {
  const double w = (1.0 / z - q / a) * std::exp(a * (t - T)) + q / a;
  return 1.0 / w;
}

/// Composite adaptive Simpson integration (plain, test-side).
double integrate(const std::function<double(double)>& f, double a, double b, double tol);

} // namespace oracles

#endif
