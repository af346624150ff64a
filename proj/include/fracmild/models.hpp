#ifndef FRACMILD_MODELS_HPP
#define FRACMILD_MODELS_HPP

#include <functional>
#include <string>
#include <vector>

#include "fracmild/grid.hpp"

namespace fracmild {

/// Finite discretization of the compact control set U.
struct ControlSet {
  std::vector<double> values;
  int refinement_level = 0;

  static ControlSet uniform(double lo, double hi, int count, int level = 0);
  void validate() const {
    if (values.empty()) throw DomainError("ControlSet: empty control set");
  }
};

struct LipschitzBudget {
  double L_H = 0.0;      // Lipschitz in (b, p)
  double L_H_prime = 0.0; // linear-growth factor of the Lipschitz constant
  double L_H_par = 0.0;  // Lipschitz in the parameter/control argument
};

/// HJB-Isaacs Hamiltonian built from running cost J(t,x,u) and drift
/// coefficient g(t,x,u); affine in p for each fixed control.
/// supinf_separated adds an inf-part over a second control set plus J0(x).
struct HamiltonianSpec {
  enum class Mode { sup, supinf_separated };
  Mode mode = Mode::sup;
  std::function<double(double, double, double)> running_cost; // J(t,x,u)
  std::function<double(double, double, double)> drift_coeff;  // g(t,x,u)
  // separated inf-part (mode == supinf_separated)
  std::function<double(double, double, double)> running_cost2;
  std::function<double(double, double, double)> drift_coeff2;
  std::function<double(double)> offset_cost; // J0(x)
  ControlSet inf_controls;
  LipschitzBudget budget;
  std::string name = "custom";
};

struct HamiltonianValue {
  double value = 0.0;
  double maximizer = 0.0; // sup-part control (lowest-index tie breaking)
  int maximizer_index = 0;
};

HamiltonianValue hamiltonian_eval(const HamiltonianSpec& spec, const ControlSet& ctrl, double t,
                                  double x, double p);

/// McKean-Vlasov interaction drift: h(x, m, u) with m = int g_obs f dv. The
/// two-argument form h(x, m) of the spec is the u = 0 slice.
struct DriftSpec {
  std::function<double(double)> observable;               // g_obs(x)
  std::function<double(double, double, double)> h;        // h(x, m, u)
  double L_h = 0.0;
  double L_hu = 0.0;
  std::string name = "custom";
};

double drift_functional(const DriftSpec& spec, const Field& f); // m = int g_obs f dv
double drift_eval(const DriftSpec& spec, double x, const Field& f);
double drift_eval(const DriftSpec& spec, double x, const Field& f, double u);

/// Feedback control map u(t,x,p), Lipschitz in p, projected onto [lo,hi].
struct ControlMap {
  std::function<double(double, double, double)> u;
  double L_u = 0.0;
  double lo = -1.0;
  double hi = 1.0;
  mutable long projections = 0; // count of out-of-hull evaluations
  std::string name = "custom";
};

double control_eval(const ControlMap& map, double t, double x, double p);

/// Empirical Lipschitz ratios on random tuples vs declared budgets.
struct LipschitzAuditReport {
  std::string target;
  double max_ratio = 0.0;
  double declared_bound = 0.0;
  int samples = 0;
  bool violation = false;
};

LipschitzAuditReport lipschitz_audit(const HamiltonianSpec& spec, const ControlSet& ctrl,
                                     int samples = 1000, unsigned seed = 12345);
LipschitzAuditReport lipschitz_audit(const DriftSpec& spec, int samples = 1000,
                                     unsigned seed = 12345);
LipschitzAuditReport lipschitz_audit(const ControlMap& map, int samples = 1000,
                                     unsigned seed = 12345);

/// sup_u inf_v vs inf_v sup_u of J(x,u,v) + g(x,u,v) p over the finite sets;
/// the interchange defect is reported, not assumed zero.
struct IsaacsValue {
  double supinf = 0.0;
  double infsup = 0.0;
  double defect = 0.0;
};
IsaacsValue isaacs_brute_force(const std::function<double(double, double, double)>& J,
                               const std::function<double(double, double, double)>& g,
                               const ControlSet& U, const ControlSet& V, double x, double p);

/// Built-in catalog (selected by name from the run config).
HamiltonianSpec make_hamiltonian_lq(double u_min, double u_max, double cost_weight);
HamiltonianSpec make_hamiltonian_two_point();                   // U = {-1,1}, H = |p|
HamiltonianSpec make_hamiltonian_separated(double j0_level);    // sup + inf + J0
DriftSpec make_drift_constant(double value);
DriftSpec make_drift_mean_attraction(double strength, const std::string& observable,
                                     double control_weight = 0.0);
ControlMap make_control_clamp(double gain, double lo, double hi);
ControlMap make_control_constant(double value);

} // namespace fracmild

#endif
