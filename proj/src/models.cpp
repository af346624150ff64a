#include "fracmild/models.hpp"

#include <cmath>
#include <random>

namespace fracmild {

ControlSet ControlSet::uniform(double lo, double hi, int count, int level) {
  if (count < 1) throw DomainError("ControlSet::uniform: count must be >= 1");
  ControlSet cs;
  cs.refinement_level = level;
  cs.values.resize(count);
  if (count == 1) {
    cs.values[0] = 0.5 * (lo + hi);
  } else {
    for (int i = 0; i < count; ++i) cs.values[i] = lo + (hi - lo) * i / (count - 1);
  }
  return cs;
}

HamiltonianValue hamiltonian_eval(const HamiltonianSpec& spec, const ControlSet& ctrl, double t,
                                  double x, double p) {
  ctrl.validate();
  HamiltonianValue out;
  double best = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < ctrl.values.size(); ++i) {
    const double u = ctrl.values[i];
    const double v = spec.running_cost(t, x, u) + spec.drift_coeff(t, x, u) * p;
    if (v > best) { // strict: lowest-index tie breaking
      best = v;
      out.maximizer = u;
      out.maximizer_index = static_cast<int>(i);
    }
  }
  out.value = best;
  if (spec.mode == HamiltonianSpec::Mode::supinf_separated) {
    spec.inf_controls.validate();
    double worst = std::numeric_limits<double>::infinity();
    for (double v : spec.inf_controls.values)
      worst = std::min(worst, spec.running_cost2(t, x, v) + spec.drift_coeff2(t, x, v) * p);
    out.value += worst + (spec.offset_cost ? spec.offset_cost(x) : 0.0);
  }
  return out;
}

double drift_functional(const DriftSpec& spec, const Field& f) {
  const auto& w = f.grid->volume_weights();
  double m = 0.0;
  if (f.grid->dimension() <= 1) {
    for (int i = 0; i < f.size(); ++i) m += w[i] * spec.observable(f.grid->coord(i)) * f.values[i];
  } else {
    for (int i = 0; i < f.size(); ++i) {
      auto [x, y] = f.grid->coord2(i);
      m += w[i] * spec.observable(x) * f.values[i];
      (void)y;
    }
  }
  return m;
}

double drift_eval(const DriftSpec& spec, double x, const Field& f) {
  return spec.h(x, drift_functional(spec, f), 0.0);
}

double drift_eval(const DriftSpec& spec, double x, const Field& f, double u) {
  return spec.h(x, drift_functional(spec, f), u);
}

double control_eval(const ControlMap& map, double t, double x, double p) {
  double u = map.u(t, x, p);
  if (u < map.lo || u > map.hi) {
    ++map.projections;
    u = std::clamp(u, map.lo, map.hi);
  }
  return u;
}

LipschitzAuditReport lipschitz_audit(const HamiltonianSpec& spec, const ControlSet& ctrl,
                                     int samples, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(0.0, 2.0 * M_PI), up(-3.0, 3.0), ut(0.0, 1.0);
  LipschitzAuditReport rep;
  rep.target = "hamiltonian:" + spec.name;
  rep.samples = samples;
  double maxg = 0.0, maxg2 = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double t = ut(rng), x = ux(rng), p1 = up(rng), p2 = up(rng);
    if (p1 == p2) continue;
    const double h1 = hamiltonian_eval(spec, ctrl, t, x, p1).value;
    const double h2 = hamiltonian_eval(spec, ctrl, t, x, p2).value;
    rep.max_ratio = std::max(rep.max_ratio, std::abs(h1 - h2) / std::abs(p1 - p2));
    for (double u : ctrl.values) maxg = std::max(maxg, std::abs(spec.drift_coeff(t, x, u)));
    if (spec.mode == HamiltonianSpec::Mode::supinf_separated)
      for (double v : spec.inf_controls.values)
        maxg2 = std::max(maxg2, std::abs(spec.drift_coeff2(t, x, v)));
  }
  rep.declared_bound = (spec.budget.L_H > 0.0) ? spec.budget.L_H : maxg + maxg2;
  rep.violation = rep.max_ratio > rep.declared_bound * (1.0 + 1e-12);
  return rep;
}

LipschitzAuditReport lipschitz_audit(const DriftSpec& spec, int samples, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(0.0, 2.0 * M_PI), um(-2.0, 2.0);
  LipschitzAuditReport rep;
  rep.target = "drift:" + spec.name;
  rep.samples = samples;
  rep.declared_bound = spec.L_h;
  for (int i = 0; i < samples; ++i) {
    const double x = ux(rng), m1 = um(rng), m2 = um(rng);
    if (m1 == m2) continue;
    rep.max_ratio = std::max(
        rep.max_ratio, std::abs(spec.h(x, m1, 0.0) - spec.h(x, m2, 0.0)) / std::abs(m1 - m2));
  }
  rep.violation = rep.max_ratio > rep.declared_bound * (1.0 + 1e-12);
  return rep;
}

LipschitzAuditReport lipschitz_audit(const ControlMap& map, int samples, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(0.0, 2.0 * M_PI), up(-3.0, 3.0), ut(0.0, 1.0);
  LipschitzAuditReport rep;
  rep.target = "control:" + map.name;
  rep.samples = samples;
  rep.declared_bound = map.L_u;
  for (int i = 0; i < samples; ++i) {
    const double t = ut(rng), x = ux(rng), p1 = up(rng), p2 = up(rng);
    if (p1 == p2) continue;
    rep.max_ratio =
        std::max(rep.max_ratio, std::abs(control_eval(map, t, x, p1) - control_eval(map, t, x, p2)) /
                                    std::abs(p1 - p2));
  }
  rep.violation = rep.max_ratio > rep.declared_bound * (1.0 + 1e-12);
  return rep;
}

IsaacsValue isaacs_brute_force(const std::function<double(double, double, double)>& J,
                               const std::function<double(double, double, double)>& g,
                               const ControlSet& U, const ControlSet& V, double x, double p) {
  U.validate();
  V.validate();
  IsaacsValue out;
  double supinf = -std::numeric_limits<double>::infinity();
  for (double u : U.values) {
    double inner = std::numeric_limits<double>::infinity();
    for (double v : V.values) inner = std::min(inner, J(x, u, v) + g(x, u, v) * p);
    supinf = std::max(supinf, inner);
  }
  double infsup = std::numeric_limits<double>::infinity();
  for (double v : V.values) {
    double inner = -std::numeric_limits<double>::infinity();
    for (double u : U.values) inner = std::max(inner, J(x, u, v) + g(x, u, v) * p);
    infsup = std::min(infsup, inner);
  }
  out.supinf = supinf;
  out.infsup = infsup;
  out.defect = std::abs(supinf - infsup);
  return out;
}

HamiltonianSpec make_hamiltonian_lq(double u_min, double u_max, double cost_weight) {
  HamiltonianSpec spec;
  spec.name = "lq";
  spec.running_cost = [cost_weight](double, double, double u) { return -0.5 * cost_weight * u * u; };
  spec.drift_coeff = [](double, double, double u) { return u; };
  spec.budget.L_H = std::max(std::abs(u_min), std::abs(u_max));
  return spec;
}

HamiltonianSpec make_hamiltonian_two_point() {
  HamiltonianSpec spec;
  spec.name = "two_point";
  spec.running_cost = [](double, double, double) { return 0.0; };
  spec.drift_coeff = [](double, double, double u) { return u; };
  spec.budget.L_H = 1.0;
  return spec;
}

HamiltonianSpec make_hamiltonian_separated(double j0_level) {
  HamiltonianSpec spec;
  spec.name = "separated";
  spec.mode = HamiltonianSpec::Mode::supinf_separated;
  spec.running_cost = [](double, double, double u) { return -0.5 * u * u; };
  spec.drift_coeff = [](double, double, double u) { return u; };
  spec.running_cost2 = [](double, double, double v) { return 0.25 * v * v; };
  spec.drift_coeff2 = [](double, double, double v) { return 0.5 * v; };
  spec.offset_cost = [j0_level](double x) { return j0_level * std::cos(x); };
  spec.inf_controls = ControlSet::uniform(-1.0, 1.0, 11);
  spec.budget.L_H = 1.5;
  return spec;
}

DriftSpec make_drift_constant(double value) {
  DriftSpec d;
  d.name = "constant";
  d.observable = [](double) { return 1.0; };
  d.h = [value](double, double, double) { return value; };
  d.L_h = 0.0;
  return d;
}

DriftSpec make_drift_mean_attraction(double strength, const std::string& observable,
                                     double control_weight) {
  DriftSpec d;
  d.name = "mean_attraction";
  if (observable == "cos")
    d.observable = [](double x) { return std::cos(x); };
  else if (observable == "sin")
    d.observable = [](double x) { return std::sin(x); };
  else if (observable == "one")
    d.observable = [](double) { return 1.0; };
  else
    throw ConfigError("make_drift_mean_attraction: unknown observable '" + observable + "'");
  d.h = [strength, control_weight](double, double m, double u) {
    return strength * std::tanh(m) + control_weight * u;
  };
  d.L_h = std::abs(strength);
  d.L_hu = std::abs(control_weight);
  return d;
}

ControlMap make_control_clamp(double gain, double lo, double hi) {
  ControlMap m;
  m.name = "clamp_gradient";
  m.u = [gain, lo, hi](double, double, double p) { return std::clamp(gain * p, lo, hi); };
  m.L_u = std::abs(gain);
  m.lo = lo;
  m.hi = hi;
  return m;
}

ControlMap make_control_constant(double value) {
  ControlMap m;
  m.name = "constant";
  m.u = [value](double, double, double) { return value; };
  m.L_u = 0.0;
  m.lo = std::min(value, 0.0) - 1.0;
  m.hi = std::max(value, 0.0) + 1.0;
  return m;
}

} // namespace fracmild
