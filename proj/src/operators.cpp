#include "fracmild/operators.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include "fracmild/fft.hpp"

namespace fracmild {

namespace {

constexpr double kPi = std::numbers::pi;

using CVec = std::vector<std::complex<double>>;

CVec to_complex(const Eigen::VectorXd& v) {
  CVec a(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) a[i] = v[i];
  return a;
}

// 2-D transforms on row-major N x N data: x along rows, then y down columns.
void fft2(CVec& a, int n, bool inverse) {
  CVec row(n), col(n);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) row[x] = a[y * n + x];
    inverse ? ifft(row) : fft(row);
    for (int x = 0; x < n; ++x) a[y * n + x] = row[x];
  }
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) col[y] = a[y * n + x];
    inverse ? ifft(col) : fft(col);
    for (int y = 0; y < n; ++y) a[y * n + x] = col[y];
  }
}

Eigen::VectorXcd transform_forward(const Field& f) {
  const auto& g = *f.grid;
  CVec a = to_complex(f.values);
  if (g.dimension() == 2)
    fft2(a, g.points_per_axis(), false);
  else
    fft(a);
  Eigen::VectorXcd c(a.size());
  for (size_t i = 0; i < a.size(); ++i) c[static_cast<Eigen::Index>(i)] = a[i];
  return c;
}

Field transform_backward(GridPtr grid, const Eigen::VectorXcd& c) {
  CVec a(c.size());
  for (Eigen::Index i = 0; i < c.size(); ++i) a[static_cast<size_t>(i)] = c[i];
  if (grid->dimension() == 2)
    fft2(a, grid->points_per_axis(), true);
  else
    ifft(a);
  Eigen::VectorXd v(c.size());
  for (Eigen::Index i = 0; i < c.size(); ++i) v[i] = a[static_cast<size_t>(i)].real();
  return Field(grid, std::move(v));
}

double torus_multiplier(GeneratorKind kind, double alpha, double k2) {
  if (kind == GeneratorKind::laplacian) return -k2;
  return -std::pow(k2, alpha / 2.0);
}

} // namespace

Generator Generator::torus(GridPtr grid, GeneratorKind kind, double alpha) {
  if (!grid || grid->kind() != GridKind::torus)
    throw DomainError("Generator::torus: torus grid required");
  if (kind == GeneratorKind::matrix) throw DomainError("Generator::torus: spectral kinds only");
  if (kind == GeneratorKind::fractional_laplacian) {
    if (!(alpha > 1.0) || alpha > 2.0)
      throw DomainError("Generator::torus: alpha must be in (1,2]");
    if (alpha == 2.0) kind = GeneratorKind::laplacian; // alpha = 2 aliases the Laplacian
  }
  Generator gen;
  gen.kind_ = kind;
  gen.alpha_ = (kind == GeneratorKind::laplacian) ? 2.0 : alpha;
  gen.grid_ = grid;
  gen.smoothing_ = SmoothingProfile{1.0, 0.0, 1.0, 0.0, 1.0, 1.0 / gen.alpha_, std::nullopt};
  const int n = grid->points_per_axis();
  const double fac = 2.0 * kPi / grid->length();
  gen.eigs_.resize(grid->size());
  if (grid->dimension() == 1) {
    for (int m = 0; m < n; ++m) {
      const double kx = fac * fft_wavenumber(m, n);
      gen.eigs_[m] = torus_multiplier(kind, gen.alpha_, kx * kx);
    }
  } else {
    for (int my = 0; my < n; ++my)
      for (int mx = 0; mx < n; ++mx) {
        const double kx = fac * fft_wavenumber(mx, n);
        const double ky = fac * fft_wavenumber(my, n);
        gen.eigs_[my * n + mx] = torus_multiplier(kind, gen.alpha_, kx * kx + ky * ky);
      }
  }
  return gen;
}

Generator Generator::matrix(GridPtr grid, const Eigen::MatrixXd& A, SmoothingProfile profile) {
  if (!grid) throw DomainError("Generator::matrix: null grid");
  if (A.rows() != grid->size() || A.cols() != grid->size())
    throw DomainError("Generator::matrix: size mismatch with grid");
  const Eigen::VectorXd w = grid->volume_weights();
  // self-adjointness in the weighted inner product: diag(w) A symmetric
  Eigen::MatrixXd WA = w.asDiagonal() * A;
  const double asym = (WA - WA.transpose()).cwiseAbs().maxCoeff();
  const double scale = WA.cwiseAbs().maxCoeff() + 1e-300;
  if (asym > 1e-10 * scale)
    throw DomainError("Generator::matrix: matrix not self-adjoint in the weighted inner product");

  Generator gen;
  gen.kind_ = GeneratorKind::matrix;
  gen.grid_ = grid;
  gen.smoothing_ = profile;
  gen.A_ = A;
  const Eigen::VectorXd ws = w.array().sqrt();
  Eigen::MatrixXd S = ws.asDiagonal() * A * ws.cwiseInverse().asDiagonal();
  S = 0.5 * (S + S.transpose().eval());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  if (es.info() != Eigen::Success) throw Error("Generator::matrix: eigendecomposition failed");
  gen.eigs_ = es.eigenvalues();
  const double emax = gen.eigs_.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < gen.eigs_.size(); ++i)
    if (std::abs(gen.eigs_[i]) <= 1e-9 * emax) gen.eigs_[i] = 0.0; // pin the kernel
  gen.V_ = ws.cwiseInverse().asDiagonal() * es.eigenvectors();
  gen.VtW_ = es.eigenvectors().transpose() * ws.asDiagonal();
  // V^T W V = I by construction; analyze uses VtW directly
  return gen;
}

Generator Generator::scalar(double lambda) {
  Eigen::MatrixXd A(1, 1);
  A(0, 0) = lambda;
  SmoothingProfile prof;
  prof.omega = 0.5;
  prof.m = std::max(0.0, lambda);
  prof.m1 = prof.m;
  return Generator::matrix(Grid::point(), A, prof);
}

Eigen::VectorXcd Generator::analyze(const Field& f) const {
  if (f.grid.get() != grid_.get()) throw DomainError("Generator::analyze: grid mismatch");
  if (is_spectral()) return transform_forward(f);
  Eigen::VectorXd c = VtW_ * f.values;
  return c.cast<std::complex<double>>();
}

Field Generator::synthesize(const Eigen::VectorXcd& c) const {
  if (c.size() != grid_->size()) throw DomainError("Generator::synthesize: size mismatch");
  if (is_spectral()) return transform_backward(grid_, c);
  Eigen::VectorXd v = V_ * c.real();
  return Field(grid_, std::move(v));
}

Field Generator::apply(const Field& f) const {
  if (!is_spectral()) {
    require_same_grid(f, Field(grid_, f.values), "Generator::apply");
    return Field(grid_, A_ * f.values);
  }
  return apply_function(f, [](double lam) { return lam; });
}

Field Generator::apply_function(const Field& f,
                                const std::function<double(double)>& phi) const {
  Eigen::VectorXcd c = analyze(f);
  for (Eigen::Index i = 0; i < c.size(); ++i) c[i] *= phi(eigs_[i]);
  return synthesize(c);
}

const Eigen::MatrixXd& Generator::raw_matrix() const {
  if (is_spectral()) throw DomainError("Generator::raw_matrix: matrix generators only");
  return A_;
}

Eigen::MatrixXd Generator::semigroup_matrix(double t) const {
  if (is_spectral()) throw DomainError("Generator::semigroup_matrix: matrix generators only");
  Eigen::VectorXd e = (eigs_.array() * t).exp();
  return V_ * e.asDiagonal() * VtW_;
}

Generator build_torus_generator(GridPtr grid, GeneratorKind kind, std::optional<double> alpha) {
  if (kind == GeneratorKind::fractional_laplacian && !alpha)
    throw DomainError("build_torus_generator: fractional kind requires alpha");
  return Generator::torus(grid, kind, alpha.value_or(2.0));
}

Field semigroup_apply(const Generator& gen, double t, const Field& f) {
  if (t < 0.0) throw DomainError("semigroup_apply: t must be nonnegative");
  if (t == 0.0) return f;
  return gen.apply_function(f, [t](double lam) { return std::exp(lam * t); });
}

std::vector<Field> gradient(const Field& f) {
  const auto& g = *f.grid;
  if (g.kind() == GridKind::point) return {Field::constant(f.grid, 0.0)};
  const int n = g.points_per_axis();
  const double fac = 2.0 * kPi / g.length();
  if (g.dimension() == 1) {
    CVec a = to_complex(f.values);
    fft(a);
    for (int m = 0; m < n; ++m) {
      int k = fft_wavenumber(m, n);
      if (2 * m == n) k = 0; // odd derivative of the Nyquist mode
      a[m] *= std::complex<double>(0.0, fac * k);
    }
    ifft(a);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = a[i].real();
    return {Field(f.grid, std::move(v))};
  }
  // 2-D
  CVec a = to_complex(f.values);
  fft2(a, n, false);
  CVec ax = a, ay = a;
  for (int my = 0; my < n; ++my)
    for (int mx = 0; mx < n; ++mx) {
      int kx = fft_wavenumber(mx, n);
      int ky = fft_wavenumber(my, n);
      if (2 * mx == n) kx = 0;
      if (2 * my == n) ky = 0;
      ax[my * n + mx] *= std::complex<double>(0.0, fac * kx);
      ay[my * n + mx] *= std::complex<double>(0.0, fac * ky);
    }
  fft2(ax, n, true);
  fft2(ay, n, true);
  Eigen::VectorXd vx(n * n), vy(n * n);
  for (int i = 0; i < n * n; ++i) {
    vx[i] = ax[i].real();
    vy[i] = ay[i].real();
  }
  return {Field(f.grid, std::move(vx)), Field(f.grid, std::move(vy))};
}

Field gradient1(const Field& f) {
  if (f.grid->dimension() > 1) throw DomainError("gradient1: 1-D grids only");
  return gradient(f)[0];
}

Field second_derivative(const Field& f, int i, int j) {
  const auto& g = *f.grid;
  if (g.kind() == GridKind::point) return Field::constant(f.grid, 0.0);
  const int n = g.points_per_axis();
  const double fac = 2.0 * kPi / g.length();
  CVec a = to_complex(f.values);
  if (g.dimension() == 1) {
    if (i != 0 || j != 0) throw DomainError("second_derivative: component out of range");
    fft(a);
    for (int m = 0; m < n; ++m) {
      const int k = fft_wavenumber(m, n);
      a[m] *= -(fac * k) * (fac * k); // even derivative keeps the Nyquist mode
    }
    ifft(a);
    Eigen::VectorXd v(n);
    for (int m = 0; m < n; ++m) v[m] = a[m].real();
    return Field(f.grid, std::move(v));
  }
  fft2(a, n, false);
  for (int my = 0; my < n; ++my)
    for (int mx = 0; mx < n; ++mx) {
      int kx = fft_wavenumber(mx, n);
      int ky = fft_wavenumber(my, n);
      const double ki = (i == 0) ? kx : ky;
      const double kj = (j == 0) ? kx : ky;
      double m2 = -(fac * ki) * (fac * kj);
      if (i != j && (2 * mx == n || 2 * my == n)) m2 = 0.0; // mixed Nyquist
      a[my * n + mx] *= m2;
    }
  fft2(a, n, true);
  Eigen::VectorXd v(n * n);
  for (int m = 0; m < n * n; ++m) v[m] = a[m].real();
  return Field(f.grid, std::move(v));
}

namespace {

// covariant Hessian magnitude |f'' - g'/(2g) f'| / g on the circle
Eigen::VectorXd circle_hessian_norm(const Field& f) {
  const auto& grid = *f.grid;
  const auto& metric = grid.metric();
  Field fp = gradient1(f);
  Field fpp = second_derivative(f);
  const int n = grid.size();
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) {
    const double th = grid.coord(i);
    double gp = 0.0;
    for (const auto& h : metric.harmonics)
      if (h.k != 0)
        gp += h.k * (-h.cos_coeff * std::sin(h.k * th) + h.sin_coeff * std::cos(h.k * th));
    const double g = grid.metric_values()[i];
    out[i] = std::abs(fpp.values[i] - gp / (2.0 * g) * fp.values[i]) / g;
  }
  return out;
}

} // namespace

double norm(const Field& f, NormKind kind) {
  const auto& g = *f.grid;
  if ((kind == NormKind::C2 || kind == NormKind::W2) && g.kind() != GridKind::point &&
      g.points_per_axis() < 16)
    throw DomainError("norm: C2/W2 norms need N >= 16");

  const auto sup = [&](const Eigen::VectorXd& v) { return v.cwiseAbs().maxCoeff(); };
  const auto wl1 = [&](const Eigen::VectorXd& v) {
    return (g.volume_weights().array() * v.array().abs()).sum();
  };

  if (g.kind() == GridKind::point) {
    return std::abs(f.values[0]); // all norms collapse on the scalar grid
  }

  // gradient magnitude per node: |f'| (torus), |f'| g^{-1/2} (circle), vector norm (2-D)
  auto grad_mag = [&]() {
    auto comps = gradient(f);
    Eigen::VectorXd m = comps[0].values.cwiseAbs();
    if (comps.size() == 2)
      m = (comps[0].values.array().square() + comps[1].values.array().square()).sqrt();
    if (g.kind() == GridKind::circle)
      m = (m.array() / g.metric_values().array().sqrt()).matrix();
    return m;
  };

  switch (kind) {
    case NormKind::sup:
      return sup(f.values);
    case NormKind::L1:
      return wl1(f.values);
    case NormKind::C1:
      return sup(f.values) + grad_mag().maxCoeff();
    case NormKind::W1: {
      Eigen::VectorXd m = grad_mag();
      return wl1(f.values) + (g.volume_weights().array() * m.array()).sum();
    }
    case NormKind::C2:
    case NormKind::W2: {
      double lower = norm(f, kind == NormKind::C2 ? NormKind::C1 : NormKind::W1);
      Eigen::VectorXd h2;
      if (g.kind() == GridKind::circle) {
        h2 = circle_hessian_norm(f);
      } else if (g.dimension() == 1) {
        h2 = second_derivative(f).values.cwiseAbs();
      } else {
        Eigen::VectorXd xx = second_derivative(f, 0, 0).values;
        Eigen::VectorXd xy = second_derivative(f, 0, 1).values;
        Eigen::VectorXd yy = second_derivative(f, 1, 1).values;
        h2 = (xx.array().square() + xy.array().square() + yy.array().square()).sqrt();
      }
      if (kind == NormKind::C2) return lower + h2.maxCoeff();
      return lower + (g.volume_weights().array() * h2.array()).sum();
    }
  }
  throw DomainError("norm: unknown kind");
}

namespace {

// exact operator norm of the nodal matrix M for the requested source norm:
// sup->sup is the max abs row sum; weighted-L1 -> L1 is max_j sum_i w_i|M_ij|/w_j.
double matrix_opnorm(const Eigen::MatrixXd& M, const Eigen::VectorXd& w, NormKind from) {
  if (from == NormKind::L1 || from == NormKind::W1 || from == NormKind::W2) {
    double best = 0.0;
    for (Eigen::Index j = 0; j < M.cols(); ++j)
      best = std::max(best, (w.array() * M.col(j).array().abs()).sum() / w[j]);
    return best;
  }
  return M.cwiseAbs().rowwise().sum().maxCoeff();
}

} // namespace

SmoothingFit estimate_smoothing_exponent(const Generator& gen,
                                         std::pair<NormKind, NormKind> norm_pair,
                                         unsigned seed) {
  const auto& grid = gen.grid();
  if (grid->kind() == GridKind::point)
    throw DomainError("estimate_smoothing_exponent: spatial grids only");

  const int nt = 12;
  std::vector<double> ts(nt), rs(nt);
  for (int i = 0; i < nt; ++i) ts[i] = 1e-3 * std::pow(100.0, i / double(nt - 1));

  if (gen.is_spectral()) {
    // unit-mass discrete Dirac; its smoothed gradient's L1 norm is the exact
    // convolution operator norm for both the sup- and L1-pair readings
    Eigen::VectorXd v = Eigen::VectorXd::Zero(grid->size());
    v[0] = 1.0 / grid->volume_weights()[0];
    Field dirac(grid, std::move(v));
    for (int i = 0; i < nt; ++i) {
      Field s = semigroup_apply(gen, ts[i], dirac);
      auto comps = gradient(s);
      double r = 0.0;
      for (const auto& c : comps)
        r += (grid->volume_weights().array() * c.values.array().abs()).sum();
      rs[i] = r;
    }
  } else {
    Eigen::MatrixXd D = spectral_derivative_matrix(grid);
    for (int i = 0; i < nt; ++i) {
      Eigen::MatrixXd M = D * gen.semigroup_matrix(ts[i]);
      rs[i] = matrix_opnorm(M, grid->volume_weights(), norm_pair.first);
    }
  }

  for (int i = 0; i + 1 < nt; ++i)
    if (!(rs[i + 1] < rs[i]))
      throw FitError("estimate_smoothing_exponent: fit unreliable (non-monotone data)",
                     rs[i + 1] - rs[i]);

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
  if (res > 0.25) throw FitError("estimate_smoothing_exponent: fit unreliable", res);

  SmoothingFit fit;
  fit.omega_hat = -slope;
  fit.kappa_hat = std::exp(intercept);
  fit.fit_residual = res;
  fit.t_values = ts;
  fit.rates = rs;
  fit.seed = seed;
  return fit;
}

double adjoint_check(const Generator& gen, const Field& b, const Field& f) {
  return adjoint_check(gen, gen, b, f);
}

double adjoint_check(const Generator& forward, const Generator& backward, const Field& b,
                     const Field& f) {
  Field Ab = forward.apply(b);
  Field Af = backward.apply(f);
  return std::abs(inner(Ab, f) - inner(b, Af));
}

double gradient_duality_defect(const Field& b, const Field& f) {
  if (b.grid->dimension() != 1) throw DomainError("gradient_duality_defect: 1-D grids only");
  Field Db = gradient1(b);
  Field Df = gradient1(f);
  return std::abs(inner_uniform(Db, f) + inner_uniform(b, Df));
}

std::vector<double> commutator_norms(const Generator& gen, const std::vector<double>& ts) {
  const auto& grid = gen.grid();
  std::vector<double> out;
  out.reserve(ts.size());
  if (grid->kind() == GridKind::point) return std::vector<double>(ts.size(), 0.0);
  if (gen.is_spectral()) {
    if (grid->dimension() != 1)
      throw DomainError("commutator_norms: 1-D grids only");
    // convolution operators: one Dirac column determines the full commutator
    Eigen::VectorXd v = Eigen::VectorXd::Zero(grid->size());
    v[0] = 1.0;
    Field dirac(grid, std::move(v));
    Field ddirac = gradient1(dirac);
    for (double t : ts) {
      if (!(t >= 0.0)) throw DomainError("commutator_norms: t must be nonnegative");
      Field a = gradient1(semigroup_apply(gen, t, dirac));
      Field b = semigroup_apply(gen, t, ddirac);
      out.push_back((a.values - b.values).cwiseAbs().sum());
    }
    return out;
  }
  Eigen::MatrixXd D = spectral_derivative_matrix(grid);
  for (double t : ts) {
    if (!(t >= 0.0)) throw DomainError("commutator_norms: t must be nonnegative");
    Eigen::MatrixXd S = gen.semigroup_matrix(t);
    Eigen::MatrixXd C = D * S - S * D;
    out.push_back(C.cwiseAbs().rowwise().sum().maxCoeff());
  }
  return out;
}

double commutator_norm(const Generator& gen, const std::vector<double>& ts) {
  auto v = commutator_norms(gen, ts);
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

Eigen::MatrixXd spectral_derivative_matrix(const GridPtr& grid) {
  if (grid->dimension() != 1 || grid->kind() == GridKind::point)
    throw DomainError("spectral_derivative_matrix: periodic 1-D grids only");
  const int n = grid->size();
  Eigen::MatrixXd D(n, n);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  for (int j = 0; j < n; ++j) {
    e[j] = 1.0;
    D.col(j) = gradient1(Field(grid, e)).values;
    e[j] = 0.0;
  }
  return D;
}

} // namespace fracmild
