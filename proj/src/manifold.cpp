#include "fracmild/manifold.hpp"

#include <cmath>
#include <numbers>

namespace fracmild {

Generator build_lb_generator(const CircleMetric& metric, int points) {
  if (points < 32) throw DomainError("build_lb_generator: N must be >= 32");
  metric.validate_positive();
  GridPtr grid = Grid::circle(metric, points);

  const int n = points;
  const double h = 2.0 * std::numbers::pi / n;
  // flux coefficients 1/sqrt(g) at cell midpoints, exact from the Fourier series
  Eigen::VectorXd mu(n);
  for (int i = 0; i < n; ++i) mu[i] = 1.0 / std::sqrt(metric((i + 0.5) * h));

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  const auto& g = grid->metric_values();
  for (int i = 0; i < n; ++i) {
    const int ip = (i + 1) % n, im = (i + n - 1) % n;
    const double s = 1.0 / (std::sqrt(g[i]) * h * h);
    const double mp = mu[i];          // midpoint between i and i+1
    const double mm = mu[im];         // midpoint between i-1 and i
    A(i, ip) += s * mp;
    A(i, i) -= s * (mp + mm);
    A(i, im) += s * mm;
  }

  SmoothingProfile prof;
  prof.omega = 0.5;
  prof.M = 1.0;  // Markovian sup contraction
  prof.m = 0.0;
  Generator gen = Generator::matrix(grid, A, prof);
  // C1 growth budget from the measured commutator bound
  double cmax = commutator_norm(gen, {1e-3, 1e-2, 1e-1, 1.0});
  gen.smoothing().M1 = 1.0 + cmax;
  gen.smoothing().m1 = 0.0;
  return gen;
}

Field riemannian_gradient_norm(const Field& f, const CircleMetric& metric) {
  if (f.grid->kind() != GridKind::circle && f.grid->kind() != GridKind::torus)
    throw DomainError("riemannian_gradient_norm: periodic 1-D grids only");
  Field fp = gradient1(f);
  Eigen::VectorXd v(f.size());
  for (int i = 0; i < f.size(); ++i)
    v[i] = std::abs(fp.values[i]) / std::sqrt(metric(f.grid->coord(i)));
  return Field(f.grid, std::move(v));
}

HeatGradientFit heat_gradient_fit(const Generator& gen, const CircleMetric& metric) {
  if (gen.is_spectral() || gen.grid()->kind() != GridKind::circle)
    throw DomainError("heat_gradient_fit: Laplace-Beltrami generators only");
  (void)metric;

  const int nt = 12;
  std::vector<double> ts(nt), rs(nt);
  for (int i = 0; i < nt; ++i) ts[i] = 1e-3 * std::pow(100.0, i / double(nt - 1));

  Eigen::MatrixXd D = spectral_derivative_matrix(gen.grid());
  // metric scaling of the gradient magnitude per output node
  Eigen::VectorXd scale = gen.grid()->metric_values().array().rsqrt();
  for (int i = 0; i < nt; ++i) {
    Eigen::MatrixXd M = scale.asDiagonal() * (D * gen.semigroup_matrix(ts[i]));
    rs[i] = M.cwiseAbs().rowwise().sum().maxCoeff(); // sup->sup operator norm
  }

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < nt; ++i) {
    const double lx = std::log(ts[i]), ly = std::log(rs[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double slope = (nt * sxy - sx * sy) / (nt * sxx - sx * sx);
  const double intercept = (sy - slope * sx) / nt;
  double res = 0.0;
  for (int i = 0; i < nt; ++i) {
    const double d = std::log(rs[i]) - (slope * std::log(ts[i]) + intercept);
    res += d * d;
  }
  res = std::sqrt(res / nt);
  if (res > 0.25) throw FitError("heat_gradient_fit: fit unreliable", res);

  HeatGradientFit fit;
  fit.slope = slope;
  fit.constant = std::exp(intercept);
  fit.fit_residual = res;
  fit.t_values = ts;
  fit.rates = rs;
  return fit;
}

} // namespace fracmild
