#include "fracmild/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "fracmild/errors.hpp"

namespace fracmild {

static GaussRule compute_gauss_legendre(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Chebyshev initial guess for the i-th root of P_n.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) {
        // one polishing step after convergence
        p0 = 1.0;
        p1 = x;
        for (int k = 2; k <= n; ++k) {
          double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        pp = n * (x * p1 - p0) / (x * x - 1.0);
        break;
      }
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    double w = 2.0 / ((1.0 - x * x) * pp * pp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

const GaussRule& gauss_legendre(int n) {
  if (n < 1) throw DomainError("gauss_legendre: n must be >= 1");
  static std::map<int, GaussRule> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gauss_legendre(n)).first;
  return it->second;
}

double gl_integrate(const std::function<double(double)>& f, double a, double b, int n) {
  const GaussRule& r = gauss_legendre(n);
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += r.weights[i] * f(c + h * r.nodes[i]);
  return s * h;
}

namespace {

double adapt_rec(const std::function<double(double)>& f, double a, double b,
                 double whole, double tol, int depth, int max_depth) {
  const double mid = 0.5 * (a + b);
  const double left = gl_integrate(f, a, mid, 15);
  const double right = gl_integrate(f, mid, b, 15);
  const double err = std::abs(left + right - whole);
  // stop at the requested tolerance, at the roundoff floor, or at max depth
  if (!(err > tol) || err <= 5e-15 * (std::abs(left) + std::abs(right)) || depth >= max_depth)
    return left + right;
  return adapt_rec(f, a, mid, left, std::max(0.5 * tol, 1e-300), depth + 1, max_depth) +
         adapt_rec(f, mid, b, right, std::max(0.5 * tol, 1e-300), depth + 1, max_depth);
}

} // namespace

double adaptive_integrate(const std::function<double(double)>& f, double a, double b,
                          double tol, int max_depth) {
  if (!(b > a)) return 0.0;
  const double whole = gl_integrate(f, a, b, 15);
  return adapt_rec(f, a, b, whole, tol, 0, max_depth);
}

double log_expdiff(double a, double v0, double v1) {
  const double d = v1 - v0;
  if (!(d > 0.0)) return -std::numeric_limits<double>::infinity();
  const double ad = std::abs(a) * d;
  if (ad < 1e-10) {
    // integral ~ d * e^{a vmid} to O((ad)^2)
    return std::log(d) + a * 0.5 * (v0 + v1);
  }
  const double top = std::max(a * v0, a * v1);
  // e^{top} (1 - e^{-|a|d}) / |a|
  return top + std::log1p(-std::exp(-ad)) - std::log(std::abs(a));
}

} // namespace fracmild
