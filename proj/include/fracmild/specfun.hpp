#ifndef FRACMILD_SPECFUN_HPP
#define FRACMILD_SPECFUN_HPP

#include <utility>
#include <vector>

#include "fracmild/errors.hpp"

namespace fracmild {

/// Order of the Caputo-Dzherbashyan derivative. beta = 1 selects the
/// classical (exponential) branch everywhere downstream.
struct FractionalOrder {
  double beta;

  explicit FractionalOrder(double b) : beta(b) {
    if (!(b > 0.0) || b > 1.0) throw DomainError("FractionalOrder: beta must be in (0,1]");
  }
  bool classical() const { return beta == 1.0; }
};

/// Quadrature controls for the subordination integrals.
///   node_count            Gauss-Legendre nodes per panel (>= 16)
///   domain_cut            truncation of y in the substitution x = e^y
///   oscillatory_node_count  GL nodes per panel of the density integral
struct QuadratureSpec {
  int node_count = 16;
  double domain_cut = 26.0;
  int oscillatory_node_count = 12;

  void validate() const {
    if (node_count < 16) throw DomainError("QuadratureSpec: node_count must be >= 16");
    if (!(domain_cut > 0.0)) throw DomainError("QuadratureSpec: domain_cut must be positive");
    if (oscillatory_node_count < 4)
      throw DomainError("QuadratureSpec: oscillatory_node_count must be >= 4");
  }
};

/// Precomputed nodes and log-weights of the Zolotarev-Pollard quadrature
///
///   E_beta(s)  = sum_i exp(s*x[i] + logw_e[i])
///   E'_beta(s) = sum_i exp(s*x[i] + logw_d[i])
///
/// after x = e^y with panels refined geometrically toward y = 0 so the
/// density factor stays resolved as beta -> 1. log_density[i] is
/// log G_beta(1, x[i]^{-1/beta}); -inf marks underflowed weights.
struct MlQuadTable {
  double beta = 0.0;
  std::vector<double> y;      // nodes in the substituted variable
  std::vector<double> x;      // e^{y}
  std::vector<double> logw_e; // log weights for E_beta
  std::vector<double> logw_d; // log weights for E'_beta
  std::vector<double> log_density;
  double weight_sum_e = 0.0;  // sum exp(logw_e); should be E_beta(0) = 1
};

/// Build the quadrature table for beta in (0,1).
MlQuadTable build_ml_table(FractionalOrder order, const QuadratureSpec& quad);

/// Mittag-Leffler function by truncated Taylor series (internal 50-digit
/// arithmetic so alternating sums at s < 0 survive the cancellation).
/// Practical negative range depends on beta; s in [-8, 30] is safe for all
/// beta in (0,1], and the full s <= 30 for beta >= 0.8 or s >= 0.
double ml_series(FractionalOrder order, double s, double tol);

/// d/ds of the series, same arithmetic.
double ml_series_derivative(FractionalOrder order, double s, double tol);

/// Stable subordinator density G_beta(1,x) by the oscillatory Fourier
/// integral (1/pi) Re int_0^inf exp(i p x - p^beta e^{i pi beta/2}) dp,
/// truncated where the envelope drops below 1e-16.
double stable_density(FractionalOrder order, double x);

/// Robust evaluation used for quadrature weights: convergent inverse-power
/// series for z >= 1, non-oscillatory Zolotarev integral branch for z < 1.
/// Returns log G_beta(1,z); -inf on underflow.
double log_stable_density(double beta, double z);

/// E_beta(s) via the integral representation over the prebuilt table.
double ml_zolotarev(const MlQuadTable& table, double s);
double ml_zolotarev(FractionalOrder order, double s, const QuadratureSpec& quad);

/// E'_beta(s) via the integral representation.
double ml_prime_zolotarev(const MlQuadTable& table, double s);
double ml_prime_zolotarev(FractionalOrder order, double s, const QuadratureSpec& quad);

/// E_beta(-x) for x >= 0 by the complete-monotonicity (Stieltjes) integral
///   (sin(beta pi)/pi) int_0^inf r^{beta-1} e^{-r x}
///                       / (r^{2 beta} + 2 r^beta cos(beta pi) + 1) dr,
/// a route independent of the subordination quadrature; covers the whole
/// negative axis (spectral multipliers can be arbitrarily large).
double ml_negative_axis(FractionalOrder order, double x);
/// dE_beta/ds at s = -x via the same representation.
double ml_negative_axis_derivative(FractionalOrder order, double x);

/// Mellin identity check: lhs is the quadrature of the normalized integral
/// (1/beta) int_0^inf x^{-omega} G_beta(1, x^{-1/beta}) dx and rhs the closed
/// form Gamma(1-omega+1/beta) / (beta * Gamma(beta - beta*omega + 1));
/// requires omega < 1 + 1/beta.
std::pair<double, double> mellin_check(FractionalOrder order, double omega,
                                       const QuadratureSpec& quad);

} // namespace fracmild

#endif
