#ifndef FRACMILD_FBSOLVER_HPP
#define FRACMILD_FBSOLVER_HPP

#include "fracmild/mild.hpp"
#include "fracmild/models.hpp"

namespace fracmild {

/// Coupled forward-backward instance: McKean-Vlasov forward equation for the
/// density g driven by A* and drift h(x, m[g], u), HJB backward equation for
/// the value f driven by A with Hamiltonian sup_u[J + g u p] plus an optional
/// coupling to the future mass of the forward curve,
///   H^b(t,x,p,g_{>=t}) = H(t,x,p) + future_mass_weight * shape(x) *
///                        int_t^T mass(g(s)) ds,
/// linked by the feedback control u(t,x,df/dx).
struct FBProblem {
  Generator forward_gen;  // A* role (densities)
  Generator backward_gen; // A role (values)
  DriftSpec drift;
  HamiltonianSpec hamiltonian;
  ControlSet controls;
  ControlMap control_map;
  double future_mass_weight = 0.0;
  std::function<double(double)> future_shape; // default: 1
  Field Y; // initial density
  Field Z; // terminal cost
  TimeGrid tg;
  FractionalOrder order{1.0};
  QuadratureSpec quad;

  void validate() const;
};

struct FBReport {
  int outer_iterations = 0;
  bool converged = false;
  double forward_residual = std::numeric_limits<double>::infinity();
  double backward_residual = std::numeric_limits<double>::infinity();
  std::optional<double> detected_T0;
  PicardReport outer;
  PicardReport last_backward;
  double adjoint_defect = 0.0; // dual-pair consistency on random probes
  double mass_initial = 0.0;   // mass is monitored, not asserted conserved
  double mass_final = 0.0;
};

struct FBSolution {
  Curve forward_curve;  // density g
  Curve backward_curve; // value f
  FBReport report;
};

PicardConfig fb_default_config(); // tol 1e-8, outer damping 0.5

/// Integral of the piecewise-linear interpolant of the forward mass from t to T.
double future_mass_integral(const Curve& forward, double t);

/// Solves the backward equation with the forward curve frozen (it enters
/// H^b through its future values only).
std::pair<Curve, PicardReport> solve_backward_given_forward(const FBProblem& prob,
                                                            const Curve& forward,
                                                            const PicardConfig& cfg);

/// The paper's reduction: the outer unknown is the forward curve; each outer
/// evaluation solves the backward equation, forms the control path, and
/// applies the forward mild map once. Outer loop is picard_solve on this
/// composite. Non-contraction at the given T is reported as the horizon
/// signal; detected_T0 is populated by bracketing when detect_horizon is set.
FBSolution solve_fb(const FBProblem& prob, const PicardConfig& cfg, bool detect_horizon = true);

struct HorizonProbe {
  double T;
  bool success;
};

struct HorizonResult {
  double T0 = 0.0;
  bool no_failure_observed = false;
  std::vector<HorizonProbe> probes;
};

/// Bisection for the largest horizon at which `attempt` succeeds, to the given
/// relative width. Monotonicity of success in T is assumed; every probe is
/// logged.
HorizonResult horizon_search(const std::function<bool(double)>& attempt, double T_max,
                             double rel_width = 0.05);
HorizonResult horizon_search(const FBProblem& prob, const PicardConfig& cfg);

} // namespace fracmild

#endif
