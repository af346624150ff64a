#include "fracmild/fbsolver.hpp"

#include <cmath>
#include <random>

namespace fracmild {

void FBProblem::validate() const {
  if (!forward_gen.grid() || !backward_gen.grid())
    throw ConfigError("FBProblem: generators not initialized");
  if (forward_gen.grid().get() != backward_gen.grid().get())
    throw ConfigError("FBProblem: forward and backward generators must share one grid");
  if (Y.grid.get() != forward_gen.grid().get() || Z.grid.get() != backward_gen.grid().get())
    throw ConfigError("FBProblem: Y/Z grid mismatch");
  if (!Y.finite() || !Z.finite()) throw DomainError("FBProblem: Y and Z must be finite");
  controls.validate();
}

PicardConfig fb_default_config() {
  PicardConfig cfg;
  cfg.tol = 1e-8;
  cfg.max_iterations = 200;
  cfg.damping = 0.5; // composite map includes the backward-solve sensitivity
  return cfg;
}

double future_mass_integral(const Curve& forward, double t) {
  const TimeGrid& tg = forward.tg;
  const int n = tg.steps;
  const double h = tg.dt();
  std::vector<double> mass(n + 1);
  for (int j = 0; j <= n; ++j)
    mass[j] = (forward.fields[j].grid->volume_weights().array() *
               forward.fields[j].values.array())
                  .sum();
  if (t >= tg.T) return 0.0;
  t = std::max(t, tg.a);
  const int j0 = std::min(static_cast<int>((t - tg.a) / h), n - 1);
  double acc = 0.0;
  // full trapezoid steps beyond j0+1
  for (int j = j0 + 1; j < n; ++j) acc += 0.5 * h * (mass[j] + mass[j + 1]);
  // partial piece [t, t_{j0+1}] of the linear interpolant
  const double t1 = tg.node(j0 + 1);
  const double u = (t - tg.node(j0)) / h;
  const double m_t = (1.0 - u) * mass[j0] + u * mass[j0 + 1];
  acc += 0.5 * (t1 - t) * (m_t + mass[j0 + 1]);
  return acc;
}

namespace {

// backward nonlinearity with the forward curve frozen
StepRhs make_backward_rhs(const FBProblem& prob, const Curve& forward) {
  const Curve* fw = &forward;
  const FBProblem* pb = &prob;
  return [pb, fw](double t, const Field& f, const std::vector<Field>& grads,
                  const std::vector<double>&) {
    const auto grid = f.grid;
    Eigen::VectorXd v(f.size());
    const double fm = (pb->future_mass_weight != 0.0) ? future_mass_integral(*fw, t) : 0.0;
    for (int i = 0; i < f.size(); ++i) {
      const double x = grid->coord(i);
      const double p = grads[0].values[i];
      double val = hamiltonian_eval(pb->hamiltonian, pb->controls, t, x, p).value;
      if (pb->future_mass_weight != 0.0)
        val += pb->future_mass_weight * (pb->future_shape ? pb->future_shape(x) : 1.0) * fm;
      v[i] = val;
    }
    return Field(grid, std::move(v));
  };
}

// forward drift h(x, m[g], u(t,x,df/dx)) * dg/dx with the control path frozen
StepRhs make_forward_rhs(const FBProblem& prob, std::shared_ptr<std::vector<Field>> u_mid) {
  const FBProblem* pb = &prob;
  const TimeGrid tg = prob.tg;
  return [pb, u_mid, tg](double t, const Field& g, const std::vector<Field>& grads,
                         const std::vector<double>&) {
    const int j = std::clamp(static_cast<int>(std::lround((t - tg.a) / tg.dt() - 0.5)), 0,
                             tg.steps - 1);
    const Field& u = (*u_mid)[j];
    const double m = drift_functional(pb->drift, g);
    Eigen::VectorXd v(g.size());
    for (int i = 0; i < g.size(); ++i)
      v[i] = pb->drift.h(g.grid->coord(i), m, u.values[i]) * grads[0].values[i];
    return Field(g.grid, std::move(v));
  };
}

std::vector<Field> control_path_from_value(const FBProblem& prob, const Curve& f) {
  const int n = prob.tg.steps;
  std::vector<Field> u_mid;
  u_mid.reserve(n);
  for (int j = 0; j < n; ++j) {
    Field fm = f.fields[j];
    fm.values = 0.5 * (f.fields[j].values + f.fields[j + 1].values);
    Field p = gradient1(fm);
    Eigen::VectorXd u(fm.size());
    const double tm = prob.tg.mid(j);
    for (int i = 0; i < fm.size(); ++i)
      u[i] = control_eval(prob.control_map, tm, fm.grid->coord(i), p.values[i]);
    u_mid.push_back(Field(fm.grid, std::move(u)));
  }
  return u_mid;
}

double probe_adjoint_defect(const FBProblem& prob) {
  std::mt19937_64 rng(20240811);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  const auto grid = prob.forward_gen.grid();
  Eigen::VectorXd vb(grid->size()), vf(grid->size());
  for (int i = 0; i < grid->size(); ++i) {
    vb[i] = dist(rng);
    vf[i] = dist(rng);
  }
  Field b(grid, std::move(vb)), f(grid, std::move(vf));
  return adjoint_check(prob.forward_gen, prob.backward_gen, b, f);
}

} // namespace

std::pair<Curve, PicardReport> solve_backward_given_forward(const FBProblem& prob,
                                                            const Curve& forward,
                                                            const PicardConfig& cfg) {
  SubordinationPlan plan = make_subordination_plan(prob.order, prob.quad);
  return solve_backward_fractional(prob.backward_gen, make_backward_rhs(prob, forward), prob.Z,
                                   {}, prob.order, plan, prob.tg, cfg, NormKind::C1);
}

FBSolution solve_fb(const FBProblem& prob, const PicardConfig& cfg, bool detect_horizon) {
  prob.validate();
  SubordinationPlan plan = make_subordination_plan(prob.order, prob.quad);
  MildEngine forward_engine(prob.forward_gen, prob.order, plan, prob.tg);
  MildEngine backward_engine(prob.backward_gen, prob.order, plan, prob.tg);

  PicardConfig inner = cfg;
  inner.tol = cfg.tol / 10.0; // outer composite map evaluated quasi-exactly
  inner.damping = 1.0;

  FBSolution sol;
  sol.report.adjoint_defect = probe_adjoint_defect(prob);

  // one outer evaluation: backward solve, control extraction, forward mild map
  Curve last_backward;
  PicardReport last_backward_rep;
  const double a = prob.tg.a, T = prob.tg.T;
  auto reflect_rhs = [a, T](StepRhs rhs_b) {
    return StepRhs([rhs_b = std::move(rhs_b), a, T](double s, const Field& f,
                                                    const std::vector<Field>& gr,
                                                    const std::vector<double>& par) {
      Field v = rhs_b(a + T - s, f, gr, par);
      v *= -1.0;
      return v;
    });
  };
  auto outer_map = [&](const Curve& g) {
    auto [f, frep] = backward_engine.solve(reflect_rhs(make_backward_rhs(prob, g)), nullptr, {},
                                           prob.Z, inner, NormKind::C1);
    // the engine solved the reflected problem; restore physical orientation
    Curve f_phys = reflect_curve(f);
    last_backward = f_phys;
    last_backward_rep = frep;
    auto u_mid = std::make_shared<std::vector<Field>>(control_path_from_value(prob, f_phys));
    return forward_engine.apply_map(make_forward_rhs(prob, u_mid), nullptr, {}, prob.Y, g);
  };

  const Curve g0 = constant_curve(prob.tg, prob.Y);
  try {
    auto [g, outer_rep] = picard_solve(outer_map, g0, cfg, NormKind::W1);
    sol.forward_curve = g;
    sol.backward_curve = last_backward;
    sol.report.outer = outer_rep;
    sol.report.last_backward = last_backward_rep;
    sol.report.outer_iterations = outer_rep.iterations;
    sol.report.converged = true;
    sol.report.forward_residual = outer_rep.final_residual;
    // backward residual certificate against the final forward curve
    {
      Curve f_reflected = reflect_curve(sol.backward_curve);
      Curve phi = backward_engine.apply_map(reflect_rhs(make_backward_rhs(prob, g)), nullptr, {},
                                            prob.Z, f_reflected);
      sol.report.backward_residual = curve_distance(phi, f_reflected, NormKind::C1);
    }
    const auto& w = prob.Y.grid->volume_weights();
    sol.report.mass_initial = (w.array() * sol.forward_curve.fields.front().values.array()).sum();
    sol.report.mass_final = (w.array() * sol.forward_curve.fields.back().values.array()).sum();
  } catch (const NoContractionError&) {
    sol.report.converged = false;
    if (detect_horizon) {
      HorizonResult hz = horizon_search(prob, cfg);
      if (!hz.no_failure_observed) sol.report.detected_T0 = hz.T0;
    }
    return sol;
  }
  return sol;
}

namespace {

// solve_fb at a shortened horizon keeping the step size roughly fixed
bool attempt_fb(const FBProblem& prob, const PicardConfig& cfg, double T) {
  FBProblem p = prob;
  const double frac = (T - prob.tg.a) / (prob.tg.T - prob.tg.a);
  const int steps = std::max(8, static_cast<int>(std::lround(prob.tg.steps * frac)));
  p.tg = TimeGrid(prob.tg.a, T, steps);
  try {
    FBSolution s = solve_fb(p, cfg, /*detect_horizon=*/false);
    return s.report.converged;
  } catch (const Error&) {
    return false;
  }
}

} // namespace

HorizonResult horizon_search(const std::function<bool(double)>& attempt, double T_max,
                             double rel_width) {
  HorizonResult out;
  auto probe = [&](double T) {
    const bool ok = attempt(T);
    out.probes.push_back({T, ok});
    return ok;
  };
  if (probe(T_max)) {
    out.T0 = T_max;
    out.no_failure_observed = true;
    return out;
  }
  double t_fail = T_max, t_succ = 0.0;
  for (double T = 0.5 * T_max; T > T_max / 1024.0; T *= 0.5) {
    if (probe(T)) {
      t_succ = T;
      break;
    }
    t_fail = T;
  }
  if (t_succ == 0.0)
    throw Error("horizon_search: no succeeding horizon found above T_max/1024");
  while ((t_fail - t_succ) / t_fail > rel_width) {
    const double mid = 0.5 * (t_fail + t_succ);
    if (probe(mid))
      t_succ = mid;
    else
      t_fail = mid;
  }
  out.T0 = 0.5 * (t_succ + t_fail);
  return out;
}

HorizonResult horizon_search(const FBProblem& prob, const PicardConfig& cfg) {
  return horizon_search([&](double T) { return attempt_fb(prob, cfg, T); }, prob.tg.T);
}

} // namespace fracmild
