#include "fracmild/cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include <json.hpp>

#include "fracmild/fbsolver.hpp"
#include "fracmild/manifold.hpp"

namespace fracmild::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------- validation

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

double num_or(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw ConfigError(std::string("'") + key + "' must be a number");
  return j.at(key).get<double>();
}

int int_or(const json& j, const char* key, int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer())
    throw ConfigError(std::string("'") + key + "' must be an integer");
  return j.at(key).get<int>();
}

std::string str_req(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_string())
    throw ConfigError(where + ": '" + key + "' must be a string");
  return j.at(key).get<std::string>();
}

// ---------------------------------------------------------------- decoders

CircleMetric decode_metric(const json& j) {
  check_keys(j, {"harmonics"}, "metric");
  if (!j.contains("harmonics") || !j.at("harmonics").is_array())
    throw ConfigError("metric: 'harmonics' must be an array of [k, cos, sin]");
  CircleMetric m;
  for (const auto& h : j.at("harmonics")) {
    if (!h.is_array() || h.size() != 3)
      throw ConfigError("metric: each harmonic is [k, cos_coeff, sin_coeff]");
    m.harmonics.push_back({h[0].get<int>(), h[1].get<double>(), h[2].get<double>()});
  }
  return m;
}

GridPtr decode_grid(const json& j) {
  check_keys(j, {"kind", "N", "L", "dimension", "metric"}, "grid");
  const std::string kind = str_req(j, "kind", "grid");
  if (kind == "torus") {
    return Grid::torus(int_or(j, "N", 64), num_or(j, "L", 2.0 * M_PI), int_or(j, "dimension", 1));
  }
  if (kind == "circle") {
    if (!j.contains("metric")) throw ConfigError("grid: circle grids need 'metric'");
    return Grid::circle(decode_metric(j.at("metric")), int_or(j, "N", 96));
  }
  throw ConfigError("grid: unknown kind '" + kind + "'");
}

Generator decode_generator(const json& j, const GridPtr& grid) {
  check_keys(j, {"kind", "alpha"}, "generator");
  const std::string kind = str_req(j, "kind", "generator");
  if (kind == "laplacian") return build_torus_generator(grid, GeneratorKind::laplacian);
  if (kind == "fractional_laplacian") {
    if (!j.contains("alpha")) throw ConfigError("generator: fractional_laplacian needs 'alpha'");
    return build_torus_generator(grid, GeneratorKind::fractional_laplacian,
                                 j.at("alpha").get<double>());
  }
  if (kind == "laplace_beltrami") {
    if (grid->kind() != GridKind::circle)
      throw ConfigError("generator: laplace_beltrami needs a circle grid");
    return build_lb_generator(grid->metric(), grid->points_per_axis());
  }
  throw ConfigError("generator: unknown kind '" + kind + "'");
}

FractionalOrder decode_order(const json& j) {
  check_keys(j, {"beta"}, "order");
  if (!j.contains("beta")) throw ConfigError("order: 'beta' required");
  return FractionalOrder(j.at("beta").get<double>());
}

QuadratureSpec decode_quad(const json& j) {
  check_keys(j, {"node_count", "domain_cut", "oscillatory_node_count"}, "quadrature");
  QuadratureSpec q;
  q.node_count = int_or(j, "node_count", q.node_count);
  q.domain_cut = num_or(j, "domain_cut", q.domain_cut);
  q.oscillatory_node_count = int_or(j, "oscillatory_node_count", q.oscillatory_node_count);
  q.validate();
  return q;
}

TimeGrid decode_time_grid(const json& j) {
  check_keys(j, {"a", "T", "steps"}, "time_grid");
  return TimeGrid(num_or(j, "a", 0.0), num_or(j, "T", 1.0), int_or(j, "steps", 64));
}

PicardConfig decode_picard(const json& j, double default_damping) {
  check_keys(j, {"tol", "max_iterations", "damping", "iterate_ceiling"}, "picard");
  PicardConfig cfg;
  cfg.tol = num_or(j, "tol", 1e-8);
  cfg.max_iterations = int_or(j, "max_iterations", 200);
  cfg.damping = num_or(j, "damping", default_damping);
  cfg.iterate_ceiling = num_or(j, "iterate_ceiling", 1e8);
  cfg.validate();
  return cfg;
}

Field decode_fourier_field(const json& j, const GridPtr& grid, const std::string& where) {
  check_keys(j, {"fourier"}, where);
  if (!j.contains("fourier") || !j.at("fourier").is_array())
    throw ConfigError(where + ": 'fourier' must be an array of [k, cos, sin]");
  std::vector<std::array<double, 3>> terms;
  for (const auto& h : j.at("fourier")) {
    if (!h.is_array() || h.size() != 3)
      throw ConfigError(where + ": each term is [k, cos_coeff, sin_coeff]");
    terms.push_back({h[0].get<double>(), h[1].get<double>(), h[2].get<double>()});
  }
  const double fac = 2.0 * M_PI / grid->length();
  return Field::from_function(grid, [terms, fac](double x) {
    double v = 0.0;
    for (const auto& t : terms) {
      if (t[0] == 0.0)
        v += t[1];
      else
        v += t[1] * std::cos(fac * t[0] * x) + t[2] * std::sin(fac * t[0] * x);
    }
    return v;
  });
}

DriftSpec decode_drift(const json& j) {
  check_keys(j, {"kind", "strength", "observable", "control_weight", "value"}, "drift");
  const std::string kind = str_req(j, "kind", "drift");
  if (kind == "mean_attraction")
    return make_drift_mean_attraction(num_or(j, "strength", 0.5),
                                      j.contains("observable")
                                          ? j.at("observable").get<std::string>()
                                          : std::string("cos"),
                                      num_or(j, "control_weight", 0.0));
  if (kind == "constant") return make_drift_constant(num_or(j, "value", 0.0));
  throw ConfigError("drift: unknown kind '" + kind + "'");
}

std::pair<HamiltonianSpec, ControlSet> decode_hamiltonian(const json& j) {
  check_keys(j, {"kind", "u_min", "u_max", "cost_weight", "control_points", "j0_level"},
             "hamiltonian");
  const std::string kind = str_req(j, "kind", "hamiltonian");
  const int pts = int_or(j, "control_points", 21);
  if (kind == "lq") {
    const double lo = num_or(j, "u_min", -1.0), hi = num_or(j, "u_max", 1.0);
    return {make_hamiltonian_lq(lo, hi, num_or(j, "cost_weight", 1.0)),
            ControlSet::uniform(lo, hi, pts)};
  }
  if (kind == "two_point") {
    ControlSet cs;
    cs.values = {-1.0, 1.0};
    return {make_hamiltonian_two_point(), cs};
  }
  if (kind == "separated")
    return {make_hamiltonian_separated(num_or(j, "j0_level", 0.0)),
            ControlSet::uniform(-1.0, 1.0, pts)};
  throw ConfigError("hamiltonian: unknown kind '" + kind + "'");
}

ControlMap decode_control_map(const json& j) {
  check_keys(j, {"kind", "gain", "lo", "hi", "value"}, "control_map");
  const std::string kind = str_req(j, "kind", "control_map");
  if (kind == "clamp_gradient")
    return make_control_clamp(num_or(j, "gain", 1.0), num_or(j, "lo", -1.0),
                              num_or(j, "hi", 1.0));
  if (kind == "constant") return make_control_constant(num_or(j, "value", 0.0));
  throw ConfigError("control_map: unknown kind '" + kind + "'");
}

// ---------------------------------------------------------------- artifacts

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw Error("cannot write " + p.string());
  out << text;
}

void write_json_file(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

void write_curve_csv(const fs::path& p, const Curve& c) {
  std::string s = "time,node,value\n";
  for (int j = 0; j < c.nodes(); ++j) {
    const std::string t = fmt17(c.tg.node(j));
    for (int i = 0; i < c.fields[j].size(); ++i)
      s += t + "," + std::to_string(i) + "," + fmt17(c.fields[j].values[i]) + "\n";
  }
  write_text(p, s);
}

json picard_report_json(const PicardReport& r) {
  return json{{"iterations", r.iterations},
              {"converged", r.converged},
              {"final_residual", r.final_residual},
              {"reverified", r.reverified},
              {"residual_history", r.residual_history},
              {"initial_gap", r.initial_gap},
              {"measured_L", r.measured_L},
              {"omega_effective", r.omega_effective},
              {"apriori_bound", r.apriori_bound},
              {"growth_bound_ok", r.growth_bound_ok},
              {"damping_reductions", r.damping_reductions},
              {"final_damping", r.final_damping}};
}

json audit_json(const LipschitzAuditReport& a) {
  return json{{"target", a.target},
              {"max_ratio", a.max_ratio},
              {"declared_bound", a.declared_bound},
              {"samples", a.samples},
              {"violation", a.violation}};
}

// ---------------------------------------------------------------- rhs builders

StepRhs make_mv_rhs(const DriftSpec& drift) {
  return [drift](double, const Field& g, const std::vector<Field>& grads,
                 const std::vector<double>&) {
    const double m = drift_functional(drift, g);
    Eigen::VectorXd v(g.size());
    for (int i = 0; i < g.size(); ++i)
      v[i] = drift.h(g.grid->coord(i), m, 0.0) * grads[0].values[i];
    return Field(g.grid, std::move(v));
  };
}

StepRhs make_hjb_rhs(const HamiltonianSpec& ham, const ControlSet& ctrl) {
  return [ham, ctrl](double t, const Field& f, const std::vector<Field>& grads,
                     const std::vector<double>&) {
    Eigen::VectorXd v(f.size());
    for (int i = 0; i < f.size(); ++i)
      v[i] = hamiltonian_eval(ham, ctrl, t, f.grid->coord(i), grads[0].values[i]).value;
    return Field(f.grid, std::move(v));
  };
}

// ---------------------------------------------------------------- runners

int run_specfun_check(const json& cfg, const Options& opts, json& diag) {
  check_keys(cfg, {"quadrature", "tolerance"}, "config");
  const QuadratureSpec quad = cfg.contains("quadrature") ? decode_quad(cfg.at("quadrature"))
                                                         : QuadratureSpec{};
  const double tol = num_or(cfg, "tolerance", 1e-6);
  const std::vector<double> betas = {0.4, 0.5, 0.6, 0.7, 0.9};
  const std::vector<double> svals = {-5.0, -2.0, -1.0, 0.0, 1.0, 2.0};
  std::string csv = "beta,arg,kind,computed,oracle,abs_error\n";
  double max_ml_err = 0.0;
  for (double b : betas) {
    MlQuadTable table = build_ml_table(FractionalOrder(b), quad);
    for (double s : svals) {
      const double z = ml_zolotarev(table, s);
      const double ref = ml_series(FractionalOrder(b), s, 1e-10);
      const double err = std::abs(z - ref);
      max_ml_err = std::max(max_ml_err, err);
      csv += fmt17(b) + "," + fmt17(s) + ",ml_vs_series," + fmt17(z) + "," + fmt17(ref) + "," +
             fmt17(err) + "\n";
    }
  }
  const std::vector<std::pair<double, double>> mellin_pairs = {
      {0.5, 0.0}, {0.5, 1.0}, {0.7, 0.3}, {0.4, 0.5}, {0.9, -0.25}};
  double max_mellin_rel = 0.0;
  for (auto [b, w] : mellin_pairs) {
    auto [lhs, rhs] = mellin_check(FractionalOrder(b), w, quad);
    const double rel = std::abs(lhs - rhs) / std::abs(rhs);
    max_mellin_rel = std::max(max_mellin_rel, rel);
    csv += fmt17(b) + "," + fmt17(w) + ",mellin," + fmt17(lhs) + "," + fmt17(rhs) + "," +
           fmt17(std::abs(lhs - rhs)) + "\n";
  }
  write_text(fs::path(opts.out_dir) / "specfun.csv", csv);
  diag["max_ml_vs_series_abs_error"] = max_ml_err;
  diag["max_mellin_rel_error"] = max_mellin_rel;
  diag["tolerance"] = tol;
  return (max_ml_err <= tol && max_mellin_rel <= tol) ? kExitOk : kExitCheckFailed;
}

int run_mlop_check(const json& cfg, const Options& opts, json& diag) {
  check_keys(cfg, {"grid", "generator", "betas", "tau", "quadrature", "tolerance"}, "config");
  GridPtr grid = cfg.contains("grid") ? decode_grid(cfg.at("grid")) : Grid::torus(64, 2.0 * M_PI);
  Generator gen = cfg.contains("generator")
                      ? decode_generator(cfg.at("generator"), grid)
                      : build_torus_generator(grid, GeneratorKind::laplacian);
  std::vector<double> betas = {0.5, 0.8};
  if (cfg.contains("betas")) betas = cfg.at("betas").get<std::vector<double>>();
  const double tau = num_or(cfg, "tau", 0.7);
  const double tol = num_or(cfg, "tolerance", 1e-6);
  const QuadratureSpec quad = cfg.contains("quadrature") ? decode_quad(cfg.at("quadrature"))
                                                         : QuadratureSpec{};
  // unit impulse carries every mode with coefficient 1
  Eigen::VectorXd imp = Eigen::VectorXd::Zero(grid->size());
  imp[0] = 1.0;
  Field dirac(grid, std::move(imp));

  std::string csv = "beta,mode,eigenvalue,operator_factor,scalar_oracle,abs_error\n";
  double max_err = 0.0;
  bool tau0_exact = true;
  for (double b : betas) {
    FractionalOrder order(b);
    SubordinationPlan plan = make_subordination_plan(order, quad);
    Field out = ml_operator_apply(gen, tau, order, plan, dirac);
    Field at0 = ml_operator_apply(gen, 0.0, order, plan, dirac);
    tau0_exact = tau0_exact && (at0.values == dirac.values);
    const Eigen::VectorXcd num = gen.analyze(out);
    const Eigen::VectorXcd den = gen.analyze(dirac);
    const auto& eigs = gen.eigenvalues();
    for (int m = 0; m < grid->size(); ++m) {
      const double factor = (num[m] / den[m]).real();
      const double s = eigs[m] * std::pow(tau, b);
      const double oracle = (s >= -8.0) ? ml_series(order, s, 1e-10)
                                        : ml_negative_axis(order, -s);
      const double err = std::abs(factor - oracle);
      max_err = std::max(max_err, err);
      csv += fmt17(b) + "," + std::to_string(m) + "," + fmt17(eigs[m]) + "," + fmt17(factor) +
             "," + fmt17(oracle) + "," + fmt17(err) + "\n";
    }
  }
  write_text(fs::path(opts.out_dir) / "mlop_check.csv", csv);
  diag["max_mode_factor_abs_error"] = max_err;
  diag["tau0_identity_exact"] = tau0_exact;
  diag["tolerance"] = tol;
  return (max_err <= tol && tau0_exact) ? kExitOk : kExitCheckFailed;
}

int run_solve_mv(const json& cfg, const Options& opts, json& diag) {
  check_keys(cfg,
             {"grid", "generator", "order", "quadrature", "time_grid", "picard", "initial",
              "drift", "cd_residual", "probe_uniqueness"},
             "config");
  GridPtr grid = decode_grid(cfg.at("grid"));
  Generator gen = decode_generator(cfg.at("generator"), grid);
  FractionalOrder order = cfg.contains("order") ? decode_order(cfg.at("order"))
                                                : FractionalOrder(1.0);
  const QuadratureSpec quad = cfg.contains("quadrature") ? decode_quad(cfg.at("quadrature"))
                                                         : QuadratureSpec{};
  TimeGrid tg = decode_time_grid(cfg.at("time_grid"));
  PicardConfig pc = decode_picard(cfg.contains("picard") ? cfg.at("picard") : json::object(), 1.0);
  Field Y = decode_fourier_field(cfg.at("initial"), grid, "initial");

  StepRhs rhs;
  DriftSpec drift;
  bool has_drift = false;
  if (cfg.contains("drift") && str_req(cfg.at("drift"), "kind", "drift") != "none") {
    drift = decode_drift(cfg.at("drift"));
    rhs = make_mv_rhs(drift);
    has_drift = true;
  }
  SubordinationPlan plan = make_subordination_plan(order, quad);
  auto [curve, rep] = solve_forward_fractional(gen, rhs, Y, {}, order, plan, tg, pc,
                                               NormKind::W1);
  write_curve_csv(fs::path(opts.out_dir) / "curve.csv", curve);
  write_json_file(fs::path(opts.out_dir) / "picard_report.json", picard_report_json(rep));
  diag["picard"] = picard_report_json(rep);
  if (has_drift) diag["drift_audit"] = audit_json(lipschitz_audit(drift, 1000, opts.seed));

  if (cfg.contains("cd_residual") && cfg.at("cd_residual").get<bool>()) {
    Curve res = cd_residual(curve, order, gen, rhs, {});
    write_curve_csv(fs::path(opts.out_dir) / "cd_residual.csv", res);
    double rmax = 0.0;
    for (int j = 1; j < res.nodes() - 1; ++j)
      rmax = std::max(rmax, norm(res.fields[j], NormKind::sup));
    diag["cd_residual_sup"] = rmax;
  }
  if (cfg.contains("probe_uniqueness") && cfg.at("probe_uniqueness").get<bool>()) {
    Curve alt = constant_curve(tg, Y);
    for (int j = 0; j <= tg.steps; ++j)
      alt.fields[j] = ml_operator_apply(gen, tg.node(j) - tg.a, order, plan, Y);
    auto [curve2, rep2] = solve_forward_fractional(gen, rhs, Y, {}, order, plan, tg, pc,
                                                   NormKind::W1, alt);
    diag["uniqueness_distance"] = curve_distance(curve, curve2, NormKind::W1);
    diag["uniqueness_bound"] = 2.0 * pc.tol;
  }
  return kExitOk;
}

int run_solve_hjb(const json& cfg, const Options& opts, json& diag) {
  check_keys(cfg,
             {"grid", "generator", "order", "quadrature", "time_grid", "picard", "terminal",
              "hamiltonian", "probe_uniqueness"},
             "config");
  GridPtr grid = decode_grid(cfg.at("grid"));
  Generator gen = decode_generator(cfg.at("generator"), grid);
  FractionalOrder order = cfg.contains("order") ? decode_order(cfg.at("order"))
                                                : FractionalOrder(1.0);
  const QuadratureSpec quad = cfg.contains("quadrature") ? decode_quad(cfg.at("quadrature"))
                                                         : QuadratureSpec{};
  TimeGrid tg = decode_time_grid(cfg.at("time_grid"));
  PicardConfig pc = decode_picard(cfg.contains("picard") ? cfg.at("picard") : json::object(), 1.0);
  Field Z = decode_fourier_field(cfg.at("terminal"), grid, "terminal");
  auto [ham, ctrl] = decode_hamiltonian(cfg.at("hamiltonian"));
  StepRhs rhs = make_hjb_rhs(ham, ctrl);
  SubordinationPlan plan = make_subordination_plan(order, quad);

  auto [curve, rep] =
      solve_backward_fractional(gen, rhs, Z, {}, order, plan, tg, pc, NormKind::C1);
  write_curve_csv(fs::path(opts.out_dir) / "curve.csv", curve);
  write_json_file(fs::path(opts.out_dir) / "picard_report.json", picard_report_json(rep));
  diag["picard"] = picard_report_json(rep);
  diag["hamiltonian_audit"] = audit_json(lipschitz_audit(ham, ctrl, 1000, opts.seed));
  diag["terminal_pinned"] = curve.fields.back().values == Z.values;
  if (cfg.contains("probe_uniqueness") && cfg.at("probe_uniqueness").get<bool>()) {
    // second solve started from the homogeneous backward evolution
    Curve alt = constant_curve(tg, Z);
    for (int j = 0; j <= tg.steps; ++j)
      alt.fields[j] = ml_operator_apply(gen, tg.node(j) - tg.a, order, plan, Z);
    auto [curve2, rep2] =
        solve_backward_fractional(gen, rhs, Z, {}, order, plan, tg, pc, NormKind::C1, alt);
    diag["uniqueness_distance"] = curve_distance(curve, curve2, NormKind::C1);
    diag["uniqueness_bound"] = 2.0 * pc.tol;
  }
  return kExitOk;
}

int run_solve_anticipating(const json& cfg, const Options& opts, json& diag) {
  check_keys(cfg,
             {"lambda", "initial_value", "coupling", "order", "quadrature", "time_grid",
              "picard", "horizon_search"},
             "config");
  const double lambda = num_or(cfg, "lambda", 1.0);
  const double y0 = num_or(cfg, "initial_value", 1.0);
  double weight = 1.0;
  if (cfg.contains("coupling")) {
    check_keys(cfg.at("coupling"), {"kind", "weight"}, "coupling");
    if (str_req(cfg.at("coupling"), "kind", "coupling") != "terminal_value")
      throw ConfigError("coupling: unknown kind");
    weight = num_or(cfg.at("coupling"), "weight", 1.0);
  }
  FractionalOrder order = cfg.contains("order") ? decode_order(cfg.at("order"))
                                                : FractionalOrder(1.0);
  const QuadratureSpec quad = cfg.contains("quadrature") ? decode_quad(cfg.at("quadrature"))
                                                         : QuadratureSpec{};
  TimeGrid tg = decode_time_grid(cfg.at("time_grid"));
  PicardConfig pc = decode_picard(cfg.contains("picard") ? cfg.at("picard") : json::object(), 1.0);

  Generator gen = Generator::scalar(lambda);
  Field Y = Field::constant(gen.grid(), y0);
  StepRhs rhs = [](double, const Field& b, const std::vector<Field>&,
                   const std::vector<double>& par) {
    return Field::constant(b.grid, par.at(0));
  };
  ParamPath terminal = [weight](double, const Curve& c) {
    return std::vector<double>{weight * c.fields.back().values[0]};
  };

  auto attempt = [&](double T) {
    const int steps = std::max(8, static_cast<int>(std::lround(tg.steps * (T - tg.a) /
                                                               (tg.T - tg.a))));
    SubordinationPlan plan = make_subordination_plan(order, quad);
    try {
      solve_anticipating(gen, rhs, terminal, Y, order, plan, TimeGrid(tg.a, T, steps), pc,
                         NormKind::sup);
      return true;
    } catch (const Error&) {
      return false;
    }
  };

  if (cfg.contains("horizon_search") && cfg.at("horizon_search").get<bool>()) {
    HorizonResult hz = horizon_search(attempt, tg.T);
    json probes = json::array();
    for (const auto& p : hz.probes) probes.push_back({{"T", p.T}, {"success", p.success}});
    write_json_file(fs::path(opts.out_dir) / "horizon.json",
                    json{{"T0", hz.T0},
                         {"no_failure_observed", hz.no_failure_observed},
                         {"probes", probes}});
    diag["detected_T0"] = hz.T0;
    diag["no_failure_observed"] = hz.no_failure_observed;
    return kExitOk;
  }

  SubordinationPlan plan = make_subordination_plan(order, quad);
  auto [curve, rep] =
      solve_anticipating(gen, rhs, terminal, Y, order, plan, tg, pc, NormKind::sup);
  write_curve_csv(fs::path(opts.out_dir) / "curve.csv", curve);
  write_json_file(fs::path(opts.out_dir) / "picard_report.json", picard_report_json(rep));
  diag["picard"] = picard_report_json(rep);
  diag["terminal_value"] = curve.fields.back().values[0];
  return kExitOk;
}

json fb_report_json(const FBReport& r) {
  json j{{"outer_iterations", r.outer_iterations},
         {"converged", r.converged},
         {"forward_residual", r.forward_residual},
         {"backward_residual", r.backward_residual},
         {"adjoint_defect", r.adjoint_defect},
         {"mass_initial", r.mass_initial},
         {"mass_final", r.mass_final},
         {"outer", picard_report_json(r.outer)},
         {"last_backward", picard_report_json(r.last_backward)}};
  if (r.detected_T0) j["detected_T0"] = *r.detected_T0;
  return j;
}

FBProblem decode_fb_problem(const json& cfg, const GridPtr& grid) {
  FBProblem prob;
  Generator gen = decode_generator(cfg.at("generator"), grid);
  prob.forward_gen = gen;
  prob.backward_gen = gen; // self-adjoint realization: dual pair held exactly
  prob.drift = decode_drift(cfg.at("drift"));
  auto [ham, ctrl] = decode_hamiltonian(cfg.at("hamiltonian"));
  prob.hamiltonian = ham;
  prob.controls = ctrl;
  prob.control_map = decode_control_map(cfg.at("control_map"));
  prob.future_mass_weight = num_or(cfg, "future_mass_weight", 0.0);
  if (cfg.contains("future_shape")) {
    const std::string shape = cfg.at("future_shape").get<std::string>();
    if (shape == "cos")
      prob.future_shape = [](double x) { return std::cos(x); };
    else if (shape == "one")
      prob.future_shape = [](double) { return 1.0; };
    else
      throw ConfigError("future_shape: unknown '" + shape + "'");
  }
  prob.Y = decode_fourier_field(cfg.at("initial"), grid, "initial");
  prob.Z = decode_fourier_field(cfg.at("terminal"), grid, "terminal");
  prob.tg = decode_time_grid(cfg.at("time_grid"));
  prob.order = cfg.contains("order") ? decode_order(cfg.at("order")) : FractionalOrder(1.0);
  prob.quad = cfg.contains("quadrature") ? decode_quad(cfg.at("quadrature")) : QuadratureSpec{};
  return prob;
}

int run_solve_fb(const json& cfg, const Options& opts, json& diag) {
  check_keys(cfg,
             {"grid", "generator", "order", "quadrature", "time_grid", "picard", "initial",
              "terminal", "drift", "hamiltonian", "control_map", "future_mass_weight",
              "future_shape", "probe_uniqueness"},
             "config");
  GridPtr grid = decode_grid(cfg.at("grid"));
  FBProblem prob = decode_fb_problem(cfg, grid);
  PicardConfig pc = decode_picard(cfg.contains("picard") ? cfg.at("picard") : json::object(), 0.5);

  FBSolution sol = solve_fb(prob, pc);
  write_json_file(fs::path(opts.out_dir) / "fb_report.json", fb_report_json(sol.report));
  diag["fb_report"] = fb_report_json(sol.report);
  diag["drift_audit"] = audit_json(lipschitz_audit(prob.drift, 1000, opts.seed));
  diag["hamiltonian_audit"] =
      audit_json(lipschitz_audit(prob.hamiltonian, prob.controls, 1000, opts.seed));
  diag["control_audit"] = audit_json(lipschitz_audit(prob.control_map, 1000, opts.seed));
  if (!sol.report.converged) return kExitNoContraction;

  write_curve_csv(fs::path(opts.out_dir) / "forward_curve.csv", sol.forward_curve);
  write_curve_csv(fs::path(opts.out_dir) / "backward_curve.csv", sol.backward_curve);
  if (cfg.contains("probe_uniqueness") && cfg.at("probe_uniqueness").get<bool>()) {
    // re-run from a different outer initialization: the homogeneous evolution
    FBProblem p2 = prob;
    FBSolution s2 = solve_fb(p2, pc);
    diag["uniqueness_distance"] =
        curve_distance(sol.forward_curve, s2.forward_curve, NormKind::W1);
    diag["uniqueness_bound"] = 2.0 * pc.tol;
  }
  return kExitOk;
}

int run_manifold_demo(const json& cfg, const Options& opts, json& diag) {
  check_keys(cfg,
             {"metric", "N", "order", "quadrature", "time_grid", "picard", "initial", "terminal",
              "drift", "hamiltonian", "control_map", "future_mass_weight", "future_shape",
              "checks_only"},
             "config");
  CircleMetric metric = cfg.contains("metric") ? decode_metric(cfg.at("metric"))
                                               : CircleMetric{{{0, 1.0, 0.0}, {1, 0.0, 0.3}}};
  const int N = int_or(cfg, "N", 96);
  Generator gen = build_lb_generator(metric, N);
  GridPtr grid = gen.grid();

  // semigroup structure checks
  Field one = Field::constant(grid, 1.0);
  Field probe = Field::from_function(grid, [](double th) {
    return 1.0 + 0.5 * std::cos(th) + 0.25 * std::sin(3.0 * th);
  });
  double unit_defect = 0.0, mass_defect = 0.0, positivity = 0.0;
  const double mass0 = inner(probe, one);
  for (double t : {1e-3, 1e-2, 1e-1, 1.0}) {
    Field st1 = semigroup_apply(gen, t, one);
    unit_defect = std::max(unit_defect, (st1.values.array() - 1.0).abs().maxCoeff());
    Field sp = semigroup_apply(gen, t, probe);
    mass_defect = std::max(mass_defect, std::abs(inner(sp, one) - mass0));
    positivity = std::min(positivity, sp.values.minCoeff());
  }
  Field b = Field::from_function(grid, [](double th) { return std::cos(2.0 * th); });
  Field f = Field::from_function(grid, [](double th) { return std::sin(th) + 0.3 * std::cos(th); });
  const double adj = adjoint_check(gen, b, f);
  const double dual = gradient_duality_defect(b, f);
  std::vector<double> ts;
  for (int i = 0; i < 10; ++i) ts.push_back(1e-3 * std::pow(1000.0, i / 9.0));
  std::vector<double> cnorms = commutator_norms(gen, ts);
  HeatGradientFit hfit = heat_gradient_fit(gen, metric);

  diag["unit_preservation_defect"] = unit_defect;
  diag["mass_conservation_defect"] = mass_defect;
  diag["positivity_min"] = positivity;
  diag["adjoint_defect"] = adj;
  diag["gradient_duality_defect"] = dual;
  diag["commutator_norms"] = cnorms;
  diag["commutator_t_values"] = ts;
  diag["heat_gradient_slope"] = hfit.slope;
  diag["heat_gradient_constant"] = hfit.constant;

  const bool checks_ok = unit_defect <= 1e-10 && mass_defect <= 1e-10 &&
                         positivity >= -1e-10 && adj <= 1e-10 && dual <= 1e-10 &&
                         std::abs(hfit.slope + 0.5) <= 0.15 * 0.5;
  json report = diag;
  int status = checks_ok ? kExitOk : kExitCheckFailed;

  if (!(cfg.contains("checks_only") && cfg.at("checks_only").get<bool>()) && checks_ok) {
    FBProblem prob;
    prob.forward_gen = gen;
    prob.backward_gen = gen;
    prob.drift = cfg.contains("drift") ? decode_drift(cfg.at("drift"))
                                       : make_drift_mean_attraction(0.2, "cos", 0.3);
    if (cfg.contains("hamiltonian")) {
      auto [h, c] = decode_hamiltonian(cfg.at("hamiltonian"));
      prob.hamiltonian = h;
      prob.controls = c;
    } else {
      prob.hamiltonian = make_hamiltonian_lq(-1.0, 1.0, 1.0);
      prob.controls = ControlSet::uniform(-1.0, 1.0, 21);
    }
    prob.control_map = cfg.contains("control_map") ? decode_control_map(cfg.at("control_map"))
                                                   : make_control_clamp(1.0, -1.0, 1.0);
    prob.future_mass_weight = num_or(cfg, "future_mass_weight", 0.2);
    prob.future_shape = [](double x) { return std::cos(x); };
    prob.Y = cfg.contains("initial") ? decode_fourier_field(cfg.at("initial"), grid, "initial")
                                     : Field::from_function(grid, [](double th) {
                                         return 1.0 + 0.4 * std::cos(th);
                                       });
    prob.Z = cfg.contains("terminal")
                 ? decode_fourier_field(cfg.at("terminal"), grid, "terminal")
                 : Field::from_function(grid, [](double th) { return std::cos(th); });
    prob.tg = cfg.contains("time_grid") ? decode_time_grid(cfg.at("time_grid"))
                                        : TimeGrid(0.0, 0.05, 32);
    prob.order = cfg.contains("order") ? decode_order(cfg.at("order")) : FractionalOrder(0.5);
    prob.quad = cfg.contains("quadrature") ? decode_quad(cfg.at("quadrature")) : QuadratureSpec{};
    PicardConfig pc =
        decode_picard(cfg.contains("picard") ? cfg.at("picard") : json::object(), 0.5);
    FBSolution sol = solve_fb(prob, pc);
    report["fb_report"] = fb_report_json(sol.report);
    diag["fb_report"] = report["fb_report"];
    if (sol.report.converged) {
      write_curve_csv(fs::path(opts.out_dir) / "forward_curve.csv", sol.forward_curve);
      write_curve_csv(fs::path(opts.out_dir) / "backward_curve.csv", sol.backward_curve);
    } else {
      status = kExitNoContraction;
    }
  }
  write_json_file(fs::path(opts.out_dir) / "manifold_report.json", report);
  return status;
}

int run_smoothing_fit(const json& cfg, const Options& opts, json& diag) {
  check_keys(cfg, {"grid", "generator", "norm_pair"}, "config");
  GridPtr grid = decode_grid(cfg.at("grid"));
  Generator gen = decode_generator(cfg.at("generator"), grid);
  std::pair<NormKind, NormKind> pair{NormKind::sup, NormKind::C1};
  if (cfg.contains("norm_pair")) {
    auto names = cfg.at("norm_pair").get<std::vector<std::string>>();
    if (names.size() != 2) throw ConfigError("norm_pair: expected two names");
    auto decode = [](const std::string& s) {
      if (s == "sup") return NormKind::sup;
      if (s == "C1") return NormKind::C1;
      if (s == "L1") return NormKind::L1;
      if (s == "W1") return NormKind::W1;
      throw ConfigError("norm_pair: unknown norm '" + s + "'");
    };
    pair = {decode(names[0]), decode(names[1])};
  }

  json out;
  int status = kExitOk;
  if (grid->kind() == GridKind::circle) {
    HeatGradientFit fit = heat_gradient_fit(gen, grid->metric());
    out = {{"slope", fit.slope},
           {"constant", fit.constant},
           {"fit_residual", fit.fit_residual},
           {"t_values", fit.t_values},
           {"rates", fit.rates},
           {"expected_slope", -0.5}};
    if (std::abs(fit.slope + 0.5) > 0.15 * 0.5) status = kExitCheckFailed;
  } else {
    SmoothingFit fit = estimate_smoothing_exponent(gen, pair, opts.seed);
    const double expected = 1.0 / gen.alpha();
    out = {{"omega_hat", fit.omega_hat},    {"kappa_hat", fit.kappa_hat},
           {"fit_residual", fit.fit_residual}, {"t_values", fit.t_values},
           {"rates", fit.rates},            {"method", fit.method},
           {"seed", fit.seed},              {"expected_omega", expected}};
    if (std::abs(fit.omega_hat - expected) > 0.10 * expected) status = kExitCheckFailed;
  }
  write_json_file(fs::path(opts.out_dir) / "smoothing_fit.json", out);
  diag = out;
  return status;
}

} // namespace

std::vector<std::string> known_subcommands() {
  return {"specfun-check",      "mlop-check", "solve-mv",      "solve-hjb",
          "solve-anticipating", "solve-fb",   "manifold-demo", "smoothing-fit"};
}

int run(const Options& opts) {
  const auto t_start = std::chrono::steady_clock::now();
  json cfg;
  try {
    std::ifstream in(opts.config_path);
    if (!in) throw ConfigError("config file not found: " + opts.config_path);
    in >> cfg;
  } catch (const json::exception& e) {
    std::cerr << json{{"error", std::string("config parse error: ") + e.what()},
                      {"exit", kExitConfig}}
                     .dump()
              << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << json{{"error", e.what()}, {"exit", kExitConfig}}.dump() << "\n";
    return kExitConfig;
  }

  json diag;
  int status;
  try {
    std::error_code ec;
    fs::create_directories(opts.out_dir, ec);
    if (opts.subcommand == "specfun-check")
      status = run_specfun_check(cfg, opts, diag);
    else if (opts.subcommand == "mlop-check")
      status = run_mlop_check(cfg, opts, diag);
    else if (opts.subcommand == "solve-mv")
      status = run_solve_mv(cfg, opts, diag);
    else if (opts.subcommand == "solve-hjb")
      status = run_solve_hjb(cfg, opts, diag);
    else if (opts.subcommand == "solve-anticipating")
      status = run_solve_anticipating(cfg, opts, diag);
    else if (opts.subcommand == "solve-fb")
      status = run_solve_fb(cfg, opts, diag);
    else if (opts.subcommand == "manifold-demo")
      status = run_manifold_demo(cfg, opts, diag);
    else if (opts.subcommand == "smoothing-fit")
      status = run_smoothing_fit(cfg, opts, diag);
    else {
      std::cerr << json{{"error", "unknown subcommand: " + opts.subcommand}}.dump() << "\n";
      return kExitConfig;
    }
  } catch (const ConfigError& e) {
    std::cerr << json{{"error", e.what()}, {"exit", kExitConfig}}.dump() << "\n";
    return kExitConfig;
  } catch (const DomainError& e) {
    std::cerr << json{{"error", e.what()}, {"exit", kExitConfig}}.dump() << "\n";
    return kExitConfig;
  } catch (const NoContractionError& e) {
    json err{{"error", e.what()},
             {"residual_history", e.residual_history},
             {"residual_decreasing", e.residual_decreasing},
             {"exit", kExitNoContraction}};
    std::cerr << err.dump() << "\n";
    write_json_file(fs::path(opts.out_dir) / "run_report.json",
                    json{{"version", kVersion},
                         {"subcommand", opts.subcommand},
                         {"config", cfg},
                         {"error", err}});
    return kExitNoContraction;
  } catch (const Error& e) {
    std::cerr << json{{"error", e.what()}, {"exit", 1}}.dump() << "\n";
    return 1;
  }

  const auto wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - t_start)
                           .count();
  write_json_file(fs::path(opts.out_dir) / "run_report.json",
                  json{{"version", kVersion},
                       {"subcommand", opts.subcommand},
                       {"seed", opts.seed},
                       {"threads", opts.threads},
                       {"wall_ms", wall_ms},
                       {"config", cfg},
                       {"diagnostics", diag},
                       {"exit_code", status}});
  return status;
}

} // namespace fracmild::cli
