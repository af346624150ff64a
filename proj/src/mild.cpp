#include "fracmild/mild.hpp"

#include <cmath>

#include "fracmild/quadrature.hpp"

namespace fracmild {

Curve constant_curve(const TimeGrid& tg, const Field& f) {
  Curve c;
  c.tg = tg;
  c.fields.assign(tg.steps + 1, f);
  return c;
}

Curve reflect_curve(const Curve& c) {
  Curve out;
  out.tg = c.tg;
  out.fields.assign(c.fields.rbegin(), c.fields.rend());
  return out;
}

Field curve_interpolate(const Curve& c, double t) {
  const TimeGrid& tg = c.tg;
  const double h = tg.dt();
  const int n = tg.steps;
  double s = (t - tg.a) / h;
  s = std::clamp(s, 0.0, static_cast<double>(n));
  int j = static_cast<int>(std::floor(s));
  j = std::clamp(j, 0, n - 1);
  // 4-point Lagrange stencil clamped at the ends
  int j0 = std::clamp(j - 1, 0, n - 3);
  const double u = s - j0;
  double w[4];
  w[0] = -(u - 1) * (u - 2) * (u - 3) / 6.0;
  w[1] = u * (u - 2) * (u - 3) / 2.0;
  w[2] = -u * (u - 1) * (u - 3) / 2.0;
  w[3] = u * (u - 1) * (u - 2) / 6.0;
  Eigen::VectorXd v = w[0] * c.fields[j0].values;
  for (int i = 1; i < 4; ++i) v += w[i] * c.fields[j0 + i].values;
  return Field(c.fields[0].grid, std::move(v));
}

double curve_norm(const Curve& c, NormKind kind) {
  double m = 0.0;
  for (const auto& f : c.fields) m = std::max(m, norm(f, kind));
  return m;
}

double curve_distance(const Curve& a, const Curve& b, NormKind kind) {
  if (a.fields.size() != b.fields.size())
    throw DomainError("curve_distance: node count mismatch");
  double m = 0.0;
  for (size_t j = 0; j < a.fields.size(); ++j)
    m = std::max(m, norm(a.fields[j] - b.fields[j], kind));
  return m;
}

namespace {

// measured kernel-Lipschitz ratio of one map-application pair:
// max_t ||Phi(b2)(t)-Phi(b1)(t)|| / int_a^t (t-s)^{-w} ||b2-b1||_{C([a,s])} ds
double kernel_ratio(const Curve& b1, const Curve& b2, const Curve& p1, const Curve& p2,
                    double omega, NormKind kind) {
  const TimeGrid& tg = b1.tg;
  const int n = tg.steps;
  const double h = tg.dt();
  std::vector<double> diff(n + 1), running(n + 1);
  double rmax = 0.0;
  for (int j = 0; j <= n; ++j) {
    diff[j] = norm(b2.fields[j] - b1.fields[j], kind);
    rmax = std::max(rmax, diff[j]);
    running[j] = rmax;
  }
  if (rmax < 1e-300) return 0.0;
  double best = 0.0;
  const double q = 1.0 - omega;
  for (int k = 1; k <= n; ++k) {
    double den = 0.0;
    for (int j = 0; j < k; ++j) {
      const double c =
          (std::pow(h * (k - j), q) - std::pow(h * (k - j - 1), q)) / q;
      den += c * running[j + 1];
    }
    if (den < 1e-300) continue;
    const double num = norm(p2.fields[k] - p1.fields[k], kind);
    best = std::max(best, num / den);
  }
  return best;
}

} // namespace

std::pair<Curve, PicardReport> picard_solve(const std::function<Curve(const Curve&)>& map,
                                            const Curve& initial, const PicardConfig& cfg,
                                            NormKind kind) {
  cfg.validate();
  PicardReport rep;
  rep.final_damping = cfg.damping;
  Curve b = initial;
  double damping = cfg.damping;
  int increases = 0;
  double prev_r = std::numeric_limits<double>::infinity();
  const double ceiling = cfg.iterate_ceiling * std::max(1.0, curve_norm(initial, kind));

  for (int it = 1; it <= cfg.max_iterations; ++it) {
    Curve phi = map(b);
    const double r = curve_distance(phi, b, kind);
    rep.residual_history.push_back(r);
    rep.iterations = it;
    if (curve_norm(phi, kind) > ceiling)
      throw Error("picard_solve: iterates exceed the configured norm ceiling "
                  "(uniform-boundedness monitor)");
    if (r <= cfg.tol) {
      // accept Phi(b) and re-verify with one extra application
      Curve phi2 = map(phi);
      rep.final_residual = curve_distance(phi2, phi, kind);
      rep.reverified = rep.final_residual <= cfg.tol;
      if (rep.reverified) {
        rep.converged = true;
        rep.final_damping = damping;
        return {phi, rep};
      }
      b = phi; // rare: keep iterating from the better point
      prev_r = r;
      continue;
    }
    if (r > prev_r && ++increases >= 2) {
      damping = std::max(0.5 * damping, 0.125);
      ++rep.damping_reductions;
      increases = 0;
    }
    for (int j = 0; j < b.nodes(); ++j)
      b.fields[j].values = (1.0 - damping) * b.fields[j].values + damping * phi.fields[j].values;
    prev_r = r;
  }
  const auto& h = rep.residual_history;
  const bool decreasing = h.size() >= 2 && h.back() < 0.9 * h.front();
  throw NoContractionError(decreasing
                               ? "picard_solve: iteration budget exhausted before tolerance"
                               : "picard_solve: no contraction detected",
                           h, decreasing);
}

MildEngine::MildEngine(const Generator& gen, FractionalOrder order,
                       const SubordinationPlan& plan, const TimeGrid& tg)
    : gen_(&gen), order_(order), plan_(&plan), tg_(tg) {
  if (order.beta != plan.order.beta)
    throw ConfigError("MildEngine: plan/order beta mismatch");
  const auto& eigs = gen.eigenvalues();
  const int modes = static_cast<int>(eigs.size());
  const int n = tg.steps;
  const double h = tg.dt();
  const double beta = order.beta;
  hom_.resize(modes, n + 1);
  ker_.resize(modes, n);
  for (int m = 0; m < modes; ++m) {
    hom_(m, 0) = 1.0;
    for (int k = 1; k <= n; ++k) hom_(m, k) = ml_factor(*plan_, eigs[m], h * k);
    for (int d = 1; d <= n; ++d) {
      const double v_lo = std::pow(h * (d - 1), beta);
      const double v_hi = std::pow(h * d, beta);
      ker_(m, d - 1) = ml_kernel_weight(*plan_, eigs[m], v_lo, v_hi);
    }
  }
}

Curve MildEngine::apply_map(const StepRhs& rhs, const ParamPath& params,
                            const std::vector<double>& alpha, const Field& Y,
                            const Curve& b) const {
  const int n = tg_.steps;
  const int modes = static_cast<int>(gen_->eigenvalues().size());
  const Eigen::VectorXcd Yc = gen_->analyze(Y);

  std::vector<Eigen::VectorXcd> Hc;
  if (rhs) {
    Hc.reserve(n);
    for (int j = 0; j < n; ++j) {
      const double tm = tg_.mid(j);
      Field bm = b.fields[j];
      bm.values = 0.5 * (b.fields[j].values + b.fields[j + 1].values);
      std::vector<Field> grads = gradient(bm);
      const std::vector<double> par = params ? params(tm, b) : alpha;
      Field Hj = rhs(tm, bm, grads, par);
      if (!Hj.finite()) throw Error("MildEngine: nonlinearity produced non-finite values");
      Hc.push_back(gen_->analyze(Hj));
    }
  }

  Curve out;
  out.tg = tg_;
  out.fields.reserve(n + 1);
  out.fields.push_back(Y); // exact pinning of the initial value
  Eigen::VectorXcd acc(modes);
  for (int k = 1; k <= n; ++k) {
    acc = hom_.col(k).array() * Yc.array();
    if (rhs)
      for (int j = 0; j < k; ++j) acc.array() += ker_.col(k - j - 1).array() * Hc[j].array();
    out.fields.push_back(gen_->synthesize(acc));
  }
  return out;
}

std::pair<Curve, PicardReport> MildEngine::solve(const StepRhs& rhs, const ParamPath& params,
                                                 const std::vector<double>& alpha, const Field& Y,
                                                 const PicardConfig& cfg, NormKind curve_norm_kind,
                                                 std::optional<Curve> initial) const {
  const Curve b0 = initial ? *initial : constant_curve(tg_, Y);
  const Curve const_y = constant_curve(tg_, Y);

  // growth-bound instrumentation (Mittag-Leffler Gronwall form)
  const double omega_gen = gen_->smoothing().omega;
  const double omega_eff =
      order_.classical() ? omega_gen : 1.0 - order_.beta * (1.0 - omega_gen);
  Curve phi_y = apply_map(rhs, params, alpha, Y, const_y);
  double initial_gap = curve_distance(phi_y, const_y, curve_norm_kind);

  double measured_L = 0.0;
  std::optional<Curve> prev_b, prev_phi;
  auto instrumented = [&](const Curve& b) {
    Curve phi = apply_map(rhs, params, alpha, Y, b);
    if (prev_b) {
      const double ratio =
          kernel_ratio(*prev_b, b, *prev_phi, phi, omega_eff, curve_norm_kind);
      measured_L = std::max(measured_L, ratio);
    }
    prev_b = b;
    prev_phi = phi;
    return phi;
  };

  auto [curve, rep] = picard_solve(instrumented, b0, cfg, curve_norm_kind);
  rep.initial_gap = initial_gap;
  rep.measured_L = measured_L;
  rep.omega_effective = omega_eff;
  const double z = measured_L * std::tgamma(1.0 - omega_eff) *
                   std::pow(tg_.T - tg_.a, 1.0 - omega_eff);
  double ml = std::numeric_limits<double>::infinity();
  if (z < 200.0) ml = ml_series(FractionalOrder(1.0 - omega_eff), z, 1e-10);
  rep.apriori_bound = ml * initial_gap;
  double dev = 0.0;
  for (int j = 0; j < curve.nodes(); ++j)
    dev = std::max(dev, norm(curve.fields[j] - Y, curve_norm_kind));
  rep.growth_bound_ok = dev <= 1.25 * rep.apriori_bound + 1e-12;
  return {curve, rep};
}

std::pair<Curve, PicardReport> solve_forward_classical(const Generator& gen, const StepRhs& rhs,
                                                       const Field& Y,
                                                       const std::vector<double>& alpha,
                                                       const TimeGrid& tg,
                                                       const PicardConfig& cfg,
                                                       NormKind curve_norm) {
  if (!Y.finite()) throw DomainError("solve_forward_classical: Y must be finite");
  static const SubordinationPlan classical_plan =
      make_subordination_plan(FractionalOrder(1.0), QuadratureSpec{});
  MildEngine engine(gen, FractionalOrder(1.0), classical_plan, tg);
  return engine.solve(rhs, nullptr, alpha, Y, cfg, curve_norm);
}

std::pair<Curve, PicardReport> solve_forward_fractional(
    const Generator& gen, const StepRhs& rhs, const Field& Y, const std::vector<double>& alpha,
    FractionalOrder order, const SubordinationPlan& plan, const TimeGrid& tg,
    const PicardConfig& cfg, NormKind curve_norm, std::optional<Curve> initial) {
  if (!Y.finite()) throw DomainError("solve_forward_fractional: Y must be finite");
  MildEngine engine(gen, order, plan, tg);
  return engine.solve(rhs, nullptr, alpha, Y, cfg, curve_norm, std::move(initial));
}

std::pair<Curve, PicardReport> solve_backward_fractional(
    const Generator& gen, const StepRhs& rhs_b, const Field& Z, const std::vector<double>& alpha,
    FractionalOrder order, const SubordinationPlan& plan, const TimeGrid& tg,
    const PicardConfig& cfg, NormKind curve_norm, std::optional<Curve> initial_reflected) {
  if (!Z.finite()) throw DomainError("solve_backward_fractional: Z must be finite");
  const double a = tg.a, T = tg.T;
  StepRhs reflected;
  if (rhs_b)
    reflected = [rhs_b, a, T](double s, const Field& f, const std::vector<Field>& g,
                              const std::vector<double>& par) {
      Field v = rhs_b(a + T - s, f, g, par);
      v *= -1.0;
      return v;
    };
  MildEngine engine(gen, order, plan, tg);
  auto [curve, rep] =
      engine.solve(reflected, nullptr, alpha, Z, cfg, curve_norm, std::move(initial_reflected));
  return {reflect_curve(curve), rep};
}

std::pair<Curve, PicardReport> solve_anticipating(
    const Generator& gen, const StepRhs& rhs, const ParamPath& u_functional, const Field& Y,
    FractionalOrder order, const SubordinationPlan& plan, const TimeGrid& tg,
    const PicardConfig& cfg, NormKind curve_norm) {
  if (!u_functional) throw DomainError("solve_anticipating: u_functional required");
  MildEngine engine(gen, order, plan, tg);
  return engine.solve(rhs, u_functional, {}, Y, cfg, curve_norm);
}

Curve cd_residual(const Curve& curve, FractionalOrder order, const Generator& gen,
                  const StepRhs& rhs, const std::vector<double>& alpha) {
  const TimeGrid& tg = curve.tg;
  const int n = tg.steps;
  const auto grid = curve.fields[0].grid;
  Curve out;
  out.tg = tg;
  out.fields.assign(n + 1, Field::constant(grid, 0.0));
  const double beta = order.beta;
  const double h = tg.dt();

  for (int k = 1; k < n; ++k) {
    const double t = tg.node(k);
    Eigen::VectorXd cd;
    if (order.classical()) {
      cd = (curve.fields[k + 1].values - curve.fields[k - 1].values) / (2.0 * h);
    } else {
      const double tau = t - tg.a;
      const double inv_gamma_neg = 1.0 / std::tgamma(-beta);
      const double z_min = tau * 1e-10;
      // analytic small-z part with the local slope: b(t-z)-b(t) ~ -b'(t) z
      Eigen::VectorXd slope =
          (curve.fields[std::min(k + 1, n)].values - curve.fields[k - 1].values) / (2.0 * h);
      Eigen::VectorXd integral =
          -slope * std::pow(z_min, 1.0 - beta) / (1.0 - beta);
      // graded panels from z_min to tau
      const int panels = 48;
      const double ratio = std::pow(tau / z_min, 1.0 / panels);
      const GaussRule& rule = gauss_legendre(6);
      double z_lo = z_min;
      for (int p = 0; p < panels; ++p) {
        const double z_hi = (p == panels - 1) ? tau : z_lo * ratio;
        const double c = 0.5 * (z_lo + z_hi), hw = 0.5 * (z_hi - z_lo);
        for (size_t q = 0; q < rule.nodes.size(); ++q) {
          const double z = c + hw * rule.nodes[q];
          const double w = hw * rule.weights[q] * std::pow(z, -1.0 - beta);
          integral += w * (curve_interpolate(curve, t - z).values - curve.fields[k].values);
        }
        z_lo = z_hi;
      }
      cd = inv_gamma_neg * integral +
           (curve.fields[k].values - curve.fields[0].values) /
               (std::tgamma(1.0 - beta) * std::pow(tau, beta));
    }
    Field Ab = gen.apply(curve.fields[k]);
    Eigen::VectorXd res = cd - Ab.values;
    if (rhs) {
      std::vector<Field> grads = gradient(curve.fields[k]);
      Field H = rhs(t, curve.fields[k], grads, alpha);
      res -= H.values;
    }
    out.fields[k] = Field(grid, std::move(res));
  }
  return out;
}

} // namespace fracmild
