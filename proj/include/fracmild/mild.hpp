#ifndef FRACMILD_MILD_HPP
#define FRACMILD_MILD_HPP

#include <functional>
#include <optional>

#include "fracmild/mlop.hpp"

namespace fracmild {

/// Uniform time grid t_j = a + j (T-a)/steps, j = 0..steps.
struct TimeGrid {
  double a = 0.0;
  double T = 1.0;
  int steps = 8;

  TimeGrid() = default;
  TimeGrid(double a_, double T_, int steps_) : a(a_), T(T_), steps(steps_) {
    if (!(a < T)) throw DomainError("TimeGrid: need a < T");
    if (steps < 8) throw DomainError("TimeGrid: need at least 8 steps");
  }
  double dt() const { return (T - a) / steps; }
  double node(int j) const { return a + dt() * j; }
  double mid(int j) const { return a + dt() * (j + 0.5); }
};

/// Time-indexed family of Fields on a TimeGrid (steps+1 nodes).
struct Curve {
  TimeGrid tg;
  std::vector<Field> fields;

  const Field& at(int j) const { return fields.at(j); }
  Field& at(int j) { return fields.at(j); }
  int nodes() const { return static_cast<int>(fields.size()); }
};

Curve constant_curve(const TimeGrid& tg, const Field& f);
/// s -> a+T-s reflection (re-indexes the fields; the grid is symmetric).
Curve reflect_curve(const Curve& c);
/// Piecewise-cubic (4-point Lagrange) interpolation in time.
Field curve_interpolate(const Curve& c, double t);

/// max over nodes of the Field norm: the C([a,T], B1) realization.
double curve_norm(const Curve& c, NormKind kind);
double curve_distance(const Curve& a, const Curve& b, NormKind kind);

struct PicardConfig {
  double tol = 1e-8;
  int max_iterations = 200;
  double damping = 1.0;
  /// iterate-norm ceiling (times max(1, ||Y||)); aborts with a diagnostic when
  /// exceeded (monitors the uniform-boundedness pre-step that the theory
  /// needs when the Lipschitz constant grows linearly).
  double iterate_ceiling = 1e8;

  void validate() const {
    if (!(tol > 0.0)) throw DomainError("PicardConfig: tol must be positive");
    if (max_iterations < 1) throw DomainError("PicardConfig: max_iterations must be >= 1");
    if (!(damping > 0.0) || damping > 1.0)
      throw DomainError("PicardConfig: damping must be in (0,1]");
  }
};

struct PicardReport {
  int iterations = 0;
  double final_residual = std::numeric_limits<double>::infinity();
  std::vector<double> residual_history;
  bool converged = false;
  bool reverified = false;      // residual re-checked by one extra map application
  double initial_gap = 0.0;     // max_t ||Phi(Y)(t) - Y||
  double measured_L = 0.0;      // max observed kernel-Lipschitz ratio
  double omega_effective = 0.0; // kernel exponent of the contraction estimate
  double apriori_bound = 0.0;   // E_{1-w}(L Gamma(1-w) (T-a)^{1-w}) * initial_gap
  bool growth_bound_ok = true;  // ||b*-Y|| <= 1.25 * apriori_bound held
  int damping_reductions = 0;
  double final_damping = 1.0;
};

/// Damped Picard iteration b <- (1-d) b + d Phi(b) in the given curve norm.
/// Throws NoContractionError when the budget is exhausted; the residual
/// history rides along (this is the T0 signal used by the FB solver).
std::pair<Curve, PicardReport> picard_solve(const std::function<Curve(const Curve&)>& map,
                                            const Curve& initial, const PicardConfig& cfg,
                                            NormKind kind);

/// Nonlinearity sample at a step midpoint: (t, b_mid, grad b_mid, par) -> Field.
using StepRhs =
    std::function<Field(double, const Field&, const std::vector<Field>&, const std::vector<double>&)>;
/// Anticipating parameter path: evaluated on the whole current curve.
using ParamPath = std::function<std::vector<double>(double, const Curve&)>;

/// Precomputed mild propagator for one (generator, order, plan, grid):
/// homogeneous factors E_beta(A (t_k-a)^beta) and the exact product-integration
/// weights of the kernel beta (t-s)^{beta-1} E'_beta(A (t-s)^beta) per step,
/// both diagonal in the generator's basis. beta = 1 is the classical solver.
class MildEngine {
public:
  MildEngine(const Generator& gen, FractionalOrder order, const SubordinationPlan& plan,
             const TimeGrid& tg);

  /// One application of the mild map Phi(b) with the given data.
  Curve apply_map(const StepRhs& rhs, const ParamPath& params,
                  const std::vector<double>& alpha, const Field& Y, const Curve& b) const;

  std::pair<Curve, PicardReport> solve(const StepRhs& rhs, const ParamPath& params,
                                       const std::vector<double>& alpha, const Field& Y,
                                       const PicardConfig& cfg, NormKind curve_norm,
                                       std::optional<Curve> initial = std::nullopt) const;

  const TimeGrid& time_grid() const { return tg_; }
  const Generator& generator() const { return *gen_; }

private:
  const Generator* gen_;
  FractionalOrder order_;
  const SubordinationPlan* plan_;
  TimeGrid tg_;
  Eigen::MatrixXd hom_; // modes x (steps+1)
  Eigen::MatrixXd ker_; // modes x steps, column d-1 is the distance-d weight
};

std::pair<Curve, PicardReport> solve_forward_classical(const Generator& gen, const StepRhs& rhs,
                                                       const Field& Y,
                                                       const std::vector<double>& alpha,
                                                       const TimeGrid& tg,
                                                       const PicardConfig& cfg,
                                                       NormKind curve_norm = NormKind::C1);

std::pair<Curve, PicardReport> solve_forward_fractional(
    const Generator& gen, const StepRhs& rhs, const Field& Y, const std::vector<double>& alpha,
    FractionalOrder order, const SubordinationPlan& plan, const TimeGrid& tg,
    const PicardConfig& cfg, NormKind curve_norm = NormKind::C1,
    std::optional<Curve> initial = std::nullopt);

/// Terminal-value problem via the time reflection s -> a+T-s (right CD maps to
/// left CD); the reflected forward problem carries the negated nonlinearity.
/// rhs_b receives the physical (backward) time; the returned curve satisfies
/// curve(T) = Z exactly.
std::pair<Curve, PicardReport> solve_backward_fractional(
    const Generator& gen, const StepRhs& rhs_b, const Field& Z, const std::vector<double>& alpha,
    FractionalOrder order, const SubordinationPlan& plan, const TimeGrid& tg,
    const PicardConfig& cfg, NormKind curve_norm = NormKind::C1,
    std::optional<Curve> initial_reflected = std::nullopt);

/// Anticipating problem: u_functional consumes the whole current curve each
/// iteration; failure for large horizons is the expected local-well-posedness
/// signal, reported as NoContractionError.
std::pair<Curve, PicardReport> solve_anticipating(
    const Generator& gen, const StepRhs& rhs, const ParamPath& u_functional, const Field& Y,
    FractionalOrder order, const SubordinationPlan& plan, const TimeGrid& tg,
    const PicardConfig& cfg, NormKind curve_norm = NormKind::C1);

/// Residual of the strong (CD-derivative) form at interior nodes: evaluates
/// the singular integral on a graded sub-grid plus the boundary term,
/// subtracts A b + H. Endpoint fields of the returned curve are zero.
Curve cd_residual(const Curve& curve, FractionalOrder order, const Generator& gen,
                  const StepRhs& rhs, const std::vector<double>& alpha);

} // namespace fracmild

#endif
