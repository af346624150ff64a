#include "fracmild/mlop.hpp"

#include <cmath>

#include "fracmild/quadrature.hpp"

namespace fracmild {

SubordinationPlan make_subordination_plan(FractionalOrder order, const QuadratureSpec& quad) {
  quad.validate();
  SubordinationPlan plan{order, quad, {}};
  if (!order.classical()) plan.table = build_ml_table(order, quad);
  return plan;
}

double ml_factor(const SubordinationPlan& plan, double lambda, double tau) {
  if (tau < 0.0) throw DomainError("ml_factor: tau must be nonnegative");
  if (tau == 0.0) return 1.0;
  if (plan.classical()) return std::exp(lambda * tau);
  return ml_zolotarev(plan.table, lambda * std::pow(tau, plan.order.beta));
}

double ml_prime_factor(const SubordinationPlan& plan, double lambda, double tau) {
  if (!(tau > 0.0)) throw DomainError("ml_prime_factor: tau must be positive");
  if (plan.classical()) return std::exp(lambda * tau);
  return ml_prime_zolotarev(plan.table, lambda * std::pow(tau, plan.order.beta));
}

double ml_kernel_weight(const SubordinationPlan& plan, double lambda, double v_lo, double v_hi) {
  if (!(v_hi > v_lo) || v_lo < 0.0)
    throw DomainError("ml_kernel_weight: need 0 <= v_lo < v_hi");
  if (plan.classical()) {
    const double le = log_expdiff(lambda, v_lo, v_hi);
    return (le > -745.0) ? std::exp(le) : 0.0;
  }
  const auto& t = plan.table;
  double sum = 0.0;
  for (size_t i = 0; i < t.x.size(); ++i) {
    if (t.logw_d[i] == -std::numeric_limits<double>::infinity()) continue;
    const double e = t.logw_d[i] + log_expdiff(lambda * t.x[i], v_lo, v_hi);
    if (e > 700.0) throw Error("ml_kernel_weight: result exceeds double range");
    if (e > -745.0) sum += std::exp(e);
  }
  return sum;
}

namespace {

void check_match(const FractionalOrder& order, const SubordinationPlan& plan) {
  if (order.beta != plan.order.beta)
    throw ConfigError("mlop: plan built for beta = " + std::to_string(plan.order.beta) +
                      " used with order beta = " + std::to_string(order.beta));
}

} // namespace

Field ml_operator_apply(const Generator& gen, double tau, FractionalOrder order,
                        const SubordinationPlan& plan, const Field& f) {
  check_match(order, plan);
  if (tau < 0.0) throw DomainError("ml_operator_apply: tau must be nonnegative");
  if (tau == 0.0) return f;
  if (plan.classical()) return semigroup_apply(gen, tau, f);
  const double tb = std::pow(tau, plan.order.beta);
  return gen.apply_function(
      f, [&](double lam) { return ml_zolotarev(plan.table, lam * tb); });
}

Field ml_prime_operator_apply(const Generator& gen, double tau, FractionalOrder order,
                              const SubordinationPlan& plan, const Field& f) {
  check_match(order, plan);
  if (!(tau > 0.0)) throw DomainError("ml_prime_operator_apply: tau must be positive");
  if (plan.classical()) return semigroup_apply(gen, tau, f);
  const double tb = std::pow(tau, plan.order.beta);
  return gen.apply_function(
      f, [&](double lam) { return ml_prime_zolotarev(plan.table, lam * tb); });
}

} // namespace fracmild
