#ifndef FRACMILD_MLOP_HPP
#define FRACMILD_MLOP_HPP

#include "fracmild/operators.hpp"
#include "fracmild/specfun.hpp"

namespace fracmild {

/// Precomputed subordination quadrature for one fractional order. Nodes and
/// weights are reused across all propagation times and Fields; beta = 1 marks
/// the classical branch (E_1 = exp, no quadrature).
struct SubordinationPlan {
  FractionalOrder order;
  QuadratureSpec quad;
  MlQuadTable table; // empty when classical

  bool classical() const { return order.classical(); }
};

SubordinationPlan make_subordination_plan(FractionalOrder order, const QuadratureSpec& quad);

/// Scalar factors of the operator calculus applied to one eigenvalue:
///   ml_factor          E_beta(lambda tau^beta)
///   ml_prime_factor    E'_beta(lambda tau^beta)
///   ml_kernel_weight   int_{v_lo}^{v_hi} E'_beta(lambda v) dv
/// The last one is the exact per-step product-integration weight of the
/// Volterra kernel beta (t-s)^{beta-1} E'_beta(A (t-s)^beta) after v=(t-s)^beta.
double ml_factor(const SubordinationPlan& plan, double lambda, double tau);
double ml_prime_factor(const SubordinationPlan& plan, double lambda, double tau);
double ml_kernel_weight(const SubordinationPlan& plan, double lambda, double v_lo, double v_hi);

/// E_beta(A tau^beta) f by subordination over the plan nodes; tau = 0 returns
/// f exactly and beta = 1 dispatches to the semigroup.
Field ml_operator_apply(const Generator& gen, double tau, FractionalOrder order,
                        const SubordinationPlan& plan, const Field& f);

/// tau^{beta-1}-free part E'_beta(A tau^beta) f; tau must be positive (the
/// kernel endpoint is handled by product integration in the solvers, never by
/// direct evaluation).
Field ml_prime_operator_apply(const Generator& gen, double tau, FractionalOrder order,
                              const SubordinationPlan& plan, const Field& f);

} // namespace fracmild

#endif
