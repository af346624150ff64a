#include "fracmild/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "fracmild/quadrature.hpp"

namespace fracmild {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Combined series coefficient (-1)^{k+1} sin(k pi beta) = sin(k pi (1-beta)),
// computed from 1-beta so no precision is lost as beta -> 1.
double series_sine(long k, double beta) {
  const double u = std::fmod(static_cast<double>(k) * (1.0 - beta), 2.0);
  return std::sin(kPi * u);
}

// Convergent inverse-power series of the one-sided stable density,
//   G_beta(1,z) = (1/pi) sum_{k>=1} (-1)^{k+1} Gamma(k beta + 1)/k!
//                  sin(k pi beta) z^{-k beta - 1},
// reliable for z >= 1 (no blow-up of intermediate terms there).
// Returns the density value, or a negative sentinel when cancellation is
// detected so the caller can fall back to the integral branch.
double stable_density_series(double beta, double z) {
  const double lz = std::log(z);
  double sum = 0.0, max_abs = 0.0;
  int small_streak = 0;
  for (long k = 1; k <= 20000; ++k) {
    const double lmag = std::lgamma(beta * k + 1.0) - std::lgamma(k + 1.0) -
                        (beta * k + 1.0) * lz;
    if (lmag < -745.0) break;
    const double term = std::exp(lmag) * series_sine(k, beta);
    sum += term;
    max_abs = std::max(max_abs, std::abs(term));
    if (std::abs(term) < 1e-18 * (std::abs(sum) + 1e-300)) {
      if (++small_streak >= 3 && k >= 4) break;
    } else {
      small_streak = 0;
    }
  }
  sum /= kPi;
  if (!(sum > 0.0) || max_abs / (kPi * std::abs(sum) + 1e-300) > 1e12) return -1.0;
  return sum;
}

// log of the Zolotarev kernel A(phi) = [sin(b phi)/sin phi]^{b/(1-b)}
//                                      * sin((1-b) phi)/sin phi.
double log_zolotarev_kernel(double beta, double phi) {
  const double sp = std::sin(phi);
  const double sb = std::sin(beta * phi);
  const double s1 = std::sin((1.0 - beta) * phi);
  return beta / (1.0 - beta) * (std::log(sb) - std::log(sp)) + std::log(s1) -
         std::log(sp);
}

// Non-oscillatory integral branch, valid for all z > 0 but used for z < 1:
//   G_beta(1,z) = beta/((1-beta) pi) z^{1/(beta-1)}
//                 int_0^pi A(phi) exp(-delta A(phi)) dphi,  delta = z^{-beta/(1-beta)}.
// Computed in log form with exp(-delta A0) factored out. The kernel A is
// monotone increasing on (0,pi), so the integrand lives on [0, phi_hi] with
// delta (A(phi_hi)-A0) ~ 745; fixed Gauss panels there beat adaptivity, whose
// error estimates drown in the delta-amplified roundoff of the exponent.
double log_stable_density_integral(double beta, double z) {
  const double lz = std::log(z);
  const double log_delta = -beta / (1.0 - beta) * lz;
  const double logA0 = beta / (1.0 - beta) * std::log(beta) + std::log1p(-beta);
  if (log_delta > 690.0) return kNegInf;
  const double delta = std::exp(log_delta);
  const double A0 = std::exp(logA0);
  const double prefix = std::log(beta / ((1.0 - beta) * kPi)) + lz / (beta - 1.0);
  // I <= pi A0 once delta A0 >= 1, so the result underflows analytically
  if (delta * A0 >= 1.0 && prefix - delta * A0 + std::log(kPi * A0) < -745.0) return kNegInf;

  auto exponent = [&](double phi) { // delta (A(phi) - A0), +inf past overflow
    const double la = log_zolotarev_kernel(beta, phi);
    if (la > 690.0) return std::numeric_limits<double>::infinity();
    return delta * std::max(std::exp(la) - A0, 0.0);
  };
  // bisect the cutoff where the factored exponential underflows
  double lo = 0.0, hi = kPi - 1e-12;
  if (exponent(hi) > 745.0) {
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      (exponent(mid) > 745.0 ? hi : lo) = mid;
    }
  }
  const double phi_hi = hi;

  auto integrand = [&](double phi) {
    if (phi <= 0.0 || phi >= kPi) return 0.0;
    const double la = log_zolotarev_kernel(beta, phi);
    if (la > 690.0) return 0.0;
    const double A = std::exp(la);
    const double e = -delta * std::max(A - A0, 0.0);
    if (e < -745.0) return 0.0;
    return A * std::exp(e);
  };
  const int panels = 48;
  double I = 0.0;
  for (int p = 0; p < panels; ++p)
    I += gl_integrate(integrand, phi_hi * p / panels, phi_hi * (p + 1) / panels, 16);
  if (!(I > 0.0)) return kNegInf;
  return prefix - delta * A0 + std::log(I);
}

} // namespace

double log_stable_density(double beta, double z) {
  if (!(beta > 0.0) || beta >= 1.0) throw DomainError("log_stable_density: beta must be in (0,1)");
  if (!(z > 0.0)) throw DomainError("log_stable_density: z must be positive");
  if (z >= 1.0) {
    const double s = stable_density_series(beta, z);
    if (s > 0.0) return std::log(s);
  }
  return log_stable_density_integral(beta, z);
}

MlQuadTable build_ml_table(FractionalOrder order, const QuadratureSpec& quad) {
  quad.validate();
  const double beta = order.beta;
  if (order.classical())
    throw DomainError("build_ml_table: beta = 1 is the classical branch, no table needed");

  // Panel edges: unit panels away from the origin, geometric refinement
  // (ratio 2^{1/3}) toward y = 0 so the density spike, whose width shrinks
  // like (1-beta) log(1/(1-beta)), stays resolved as beta -> 1.
  const double cut = quad.domain_cut;
  const double w_min = std::min(0.5, std::max(0.125 * (1.0 - beta), std::ldexp(1.0, -22)));
  const double ratio = std::cbrt(2.0);
  std::vector<double> pos;
  for (double w = w_min; w < 2.0; w *= ratio) pos.push_back(w);
  for (double e = 2.0; e < cut - 0.5; e += 1.0) pos.push_back(e);
  pos.push_back(cut);
  std::vector<double> edges;
  for (auto it = pos.rbegin(); it != pos.rend(); ++it) edges.push_back(-*it);
  for (double e : pos) edges.push_back(e);

  const GaussRule& rule = gauss_legendre(quad.node_count);
  MlQuadTable t;
  t.beta = beta;
  const double logbeta = std::log(beta);
  for (size_t p = 0; p + 1 < edges.size(); ++p) {
    const double a = edges[p], b = edges[p + 1];
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    for (int i = 0; i < quad.node_count; ++i) {
      const double y = c + h * rule.nodes[i];
      const double glw = h * rule.weights[i];
      const double z = std::exp(-y / beta);
      const double lg = log_stable_density(beta, z);
      t.y.push_back(y);
      t.x.push_back(std::exp(y));
      t.log_density.push_back(lg);
      const double lwe = std::log(glw) - logbeta - y / beta + lg;
      t.logw_e.push_back(lwe);
      t.logw_d.push_back(lwe + y);
    }
  }
  double s = 0.0;
  for (double lw : t.logw_e) s += std::exp(lw);
  t.weight_sum_e = s;
  if (!(std::abs(s - 1.0) <= 1e-8))
    throw TruncationError("build_ml_table: truncation too small, weights do not "
                          "reproduce E_beta(0) = 1",
                          std::abs(s - 1.0));
  return t;
}

namespace {

using mp50 = boost::multiprecision::cpp_bin_float_50;

double ml_series_impl(double beta, double s, double tol, bool derivative) {
  if (!(tol > 0.0)) throw DomainError("ml_series: tol must be positive");
  if (beta == 1.0) return std::exp(s);

  const mp50 sx(s);
  const mp50 thresh = mp50(std::min(tol, 1e-10)) / 1000;
  mp50 sum = 0, power = 1, max_abs = 0;
  int small_streak = 0;
  bool converged = false;
  const long budget = 4000;
  for (long k = 0; k <= budget; ++k) {
    mp50 term;
    if (!derivative) {
      term = power / boost::math::tgamma(mp50(beta * k + 1.0));
    } else {
      // d/ds sum s^k/Gamma(beta k+1) = sum_{k>=1} k s^{k-1}/Gamma(beta k+1)
      term = (k + 1) * power / boost::math::tgamma(mp50(beta * (k + 1) + 1.0));
    }
    sum += term;
    max_abs = std::max(max_abs, mp50(abs(term)));
    power *= sx;
    if (abs(term) < thresh * std::max(mp50(1), abs(sum)) &&
        static_cast<double>(k) >= std::abs(s)) {
      if (++small_streak >= 2) {
        converged = true;
        break;
      }
    } else {
      small_streak = 0;
    }
  }
  if (!converged)
    throw SeriesBudgetError("ml_series: series budget exceeded at s = " + std::to_string(s));
  if (max_abs > abs(sum) * mp50(1e35) + mp50(1e35))
    throw SeriesBudgetError("ml_series: cancellation exceeds working precision at s = " +
                            std::to_string(s));
  return static_cast<double>(sum);
}

} // namespace

double ml_series(FractionalOrder order, double s, double tol) {
  return ml_series_impl(order.beta, s, tol, false);
}

double ml_series_derivative(FractionalOrder order, double s, double tol) {
  return ml_series_impl(order.beta, s, tol, true);
}

double stable_density(FractionalOrder order, double x) {
  if (order.classical())
    throw DegenerateSubordinatorError(
        "stable_density: degenerate subordinator at beta = 1 (Dirac mass); use the "
        "classical path");
  if (!(x > 0.0)) throw DomainError("stable_density: x must be positive");
  const double beta = order.beta;
  const double c1 = std::cos(kPi * beta / 2.0);
  const double c2 = std::sin(kPi * beta / 2.0);
  const double p_max = std::pow(37.0 / c1, 1.0 / beta); // envelope below 1e-16 past here

  auto f = [&](double p) {
    const double pb = std::pow(p, beta);
    return std::exp(-c1 * pb) * std::cos(p * x - c2 * pb);
  };

  const int n = 12;
  const double eps = 1e-8;
  double sum = eps; // integrand is 1 + O(eps^beta) on [0, eps]
  // dyadic panels toward 0 absorb the p^beta cusp
  for (double a = eps; a < 1.0 && a < p_max;) {
    double b = std::min({2.0 * a, 1.0, p_max});
    sum += gl_integrate(f, a, b, n);
    a = b;
  }
  // oscillation-limited panels outward
  const double osc_w = kPi / (4.0 * std::max(x, 0.05));
  for (double a = 1.0; a < p_max;) {
    double b = std::min(a + std::min(osc_w, std::max(0.5, a / 8.0)), p_max);
    sum += gl_integrate(f, a, b, n);
    a = b;
  }
  return sum / kPi;
}

namespace {

double ml_table_sum(const MlQuadTable& t, double s, const std::vector<double>& logw) {
  // overflow guard: the value itself must be representable
  double m = kNegInf;
  const size_t n = t.x.size();
  for (size_t i = 0; i < n; ++i) m = std::max(m, s * t.x[i] + logw[i]);
  if (m > 700.0)
    throw Error("ml_zolotarev: result exceeds double range at s = " + std::to_string(s));
  double sum = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double e = s * t.x[i] + logw[i];
    if (e > -745.0) sum += std::exp(e);
  }
  // tail-at-truncation check (only bites for s > 0 pushing mass outward)
  const double tail = std::exp(s * t.x[n - 1] + logw[n - 1]);
  if (tail > 1e-9 * std::abs(sum))
    throw TruncationError("ml_zolotarev: truncation too small for s = " + std::to_string(s),
                          tail);
  return sum;
}

} // namespace

double ml_zolotarev(const MlQuadTable& t, double s) { return ml_table_sum(t, s, t.logw_e); }

double ml_zolotarev(FractionalOrder order, double s, const QuadratureSpec& quad) {
  if (order.classical()) return std::exp(s);
  return ml_zolotarev(build_ml_table(order, quad), s);
}

double ml_prime_zolotarev(const MlQuadTable& t, double s) { return ml_table_sum(t, s, t.logw_d); }

double ml_prime_zolotarev(FractionalOrder order, double s, const QuadratureSpec& quad) {
  if (order.classical()) return std::exp(s);
  return ml_prime_zolotarev(build_ml_table(order, quad), s);
}

namespace {

// E_beta(-x) = int_0^inf e^{-r x^{1/beta}} K_beta(r) dr with the spectral
// density K_beta(r) = (1/pi) sin(beta pi) r^{beta-1}
//                     / (r^{2 beta} + 2 r^beta cos(beta pi) + 1).
// The derivative in s follows by differentiating under the integral:
// dE/ds = (1/beta) x^{1/beta - 1} int r e^{-r x^{1/beta}} K_beta(r) dr.
double ml_negative_axis_impl(double beta, double x, bool derivative) {
  if (!(x >= 0.0)) throw DomainError("ml_negative_axis: x must be nonnegative");
  if (beta == 1.0) return std::exp(-x);
  if (x == 0.0 && derivative) return 1.0 / std::tgamma(beta + 1.0);
  const double c = std::cos(kPi * beta);
  const double s = std::sin(kPi * beta);
  const double t = std::pow(x, 1.0 / beta);
  auto f = [&](double u) {
    const double r = std::exp(u);
    const double rb = std::pow(r, beta);
    const double den = rb * rb + 2.0 * rb * c + 1.0;
    double v = rb * std::exp(-r * t) / den; // r^{beta-1} e^{-rt} * r (Jacobian)
    if (derivative) v *= r;
    return v;
  };
  const double probe = adaptive_integrate(f, -80.0, 80.0, 1e-12);
  const double I = adaptive_integrate(f, -80.0, 80.0, 1e-14 * std::max(probe, 1e-30));
  const double base = s / kPi * I;
  if (!derivative) return base;
  return base / beta * std::pow(x, 1.0 / beta - 1.0);
}

} // namespace

double ml_negative_axis(FractionalOrder order, double x) {
  return ml_negative_axis_impl(order.beta, x, false);
}

double ml_negative_axis_derivative(FractionalOrder order, double x) {
  return ml_negative_axis_impl(order.beta, x, true);
}

std::pair<double, double> mellin_check(FractionalOrder order, double omega,
                                       const QuadratureSpec& quad) {
  const double beta = order.beta;
  if (order.classical()) throw DomainError("mellin_check: beta must be in (0,1)");
  if (!(omega < 1.0 + 1.0 / beta))
    throw MellinDivergenceError("mellin_check: Mellin divergence, omega >= 1 + 1/beta");
  MlQuadTable t = build_ml_table(order, quad);
  double lhs = 0.0;
  const double expo = 1.0 - omega + 1.0 / beta;
  for (size_t i = 0; i < t.y.size(); ++i) {
    const double e = t.logw_e[i] + expo * t.y[i];
    if (e > -745.0) lhs += std::exp(e);
  }
  const double rhs =
      std::exp(std::lgamma(1.0 - omega + 1.0 / beta) - std::lgamma(beta - beta * omega + 1.0)) /
      beta;
  return {lhs, rhs};
}

} // namespace fracmild
