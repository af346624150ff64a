#include "oracles.hpp"

namespace oracles {

double stable_density_tail_mass(double beta, double X) {
  double sum = 0.0;
  for (int k = 1; k <= 400; ++k) {
    const double term = std::exp(std::lgamma(k * beta) - std::lgamma(k + 1.0) -
                                 k * beta * std::log(X)) *
                        std::sin(k * M_PI * beta) * ((k % 2 == 1) ? 1.0 : -1.0);
    sum += term;
    if (std::abs(term) < 1e-16 * (std::abs(sum) + 1e-300) && k > 4) break;
  }
  return sum / M_PI;
}

namespace {

double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm,
               double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

} // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson(f, a, b, fa, fm, fb, whole, tol, 40);
}

} // namespace oracles
