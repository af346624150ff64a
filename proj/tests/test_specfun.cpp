#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fracmild/specfun.hpp"
#include "support/oracles.hpp"

using namespace fracmild;

TEST_CASE("ml_series basic values") {
  CHECK(ml_series(FractionalOrder(1.0), 1.0, 1e-10) == doctest::Approx(std::exp(1.0)).epsilon(1e-12));
  CHECK(ml_series(FractionalOrder(0.5), 0.0, 1e-10) == doctest::Approx(1.0).epsilon(1e-14));
  // E_{1/2}(-1) = e * erfc(1)
  CHECK(ml_series(FractionalOrder(0.5), -1.0, 1e-10) ==
        doctest::Approx(oracles::ml_half(-1.0)).epsilon(1e-9));
  CHECK(std::abs(ml_series(FractionalOrder(0.5), -1.0, 1e-10) - 0.427584) < 1e-6);
}

TEST_CASE("ml_series rejects hopeless cancellation instead of lying") {
  CHECK_THROWS_AS(ml_series(FractionalOrder(0.4), -30.0, 1e-10), SeriesBudgetError);
  CHECK_THROWS_AS(ml_series(FractionalOrder(0.5), 1.0, -1.0), DomainError);
}

TEST_CASE("stable_density against the Levy(1/2) closed form") {
  FractionalOrder half(0.5);
  for (double x : {0.3, 0.7, 1.0, 2.5, 8.0})
    CHECK(stable_density(half, x) == doctest::Approx(oracles::levy_half_density(x)).epsilon(1e-8));
  CHECK(std::abs(stable_density(half, 1.0) - 0.219696) < 1e-6);
}

TEST_CASE("stable_density vanishes at the origin and rejects beta = 1") {
  CHECK(std::abs(stable_density(FractionalOrder(0.7), 1e-4)) <= 1e-10);
  CHECK_THROWS_AS(stable_density(FractionalOrder(1.0), 1.0), DegenerateSubordinatorError);
  CHECK_THROWS_AS(stable_density(FractionalOrder(0.5), -1.0), DomainError);
}

TEST_CASE("stable_density integrates to one") {
  for (double beta : {0.4, 0.7}) {
    FractionalOrder order(beta);
    const double body = oracles::integrate(
        [&](double x) { return x < 1e-8 ? 0.0 : stable_density(order, x); }, 0.0, 10.0, 1e-9);
    const double total = body + oracles::stable_density_tail_mass(beta, 10.0);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("robust density evaluator agrees with the oscillatory integral") {
  for (double beta : {0.4, 0.6, 0.9}) {
    FractionalOrder order(beta);
    for (double z : {0.5, 0.9, 1.0, 1.5, 3.0}) {
      const double a = std::exp(log_stable_density(beta, z));
      const double b = stable_density(order, z);
      CHECK(a == doctest::Approx(b).epsilon(1e-7));
    }
  }
}

TEST_CASE("ml_zolotarev closed forms") {
  QuadratureSpec quad;
  // e^4 erfc(2)
  CHECK(ml_zolotarev(FractionalOrder(0.5), -2.0, quad) ==
        doctest::Approx(oracles::ml_half(-2.0)).epsilon(1e-8));
  CHECK(std::abs(ml_zolotarev(FractionalOrder(0.5), -2.0, quad) - 0.255396) < 1e-6);
  // weights integrate to one
  CHECK(ml_zolotarev(FractionalOrder(0.4), 0.0, quad) == doctest::Approx(1.0).epsilon(1e-9));
  // against the series
  CHECK(std::abs(ml_zolotarev(FractionalOrder(0.7), 1.5, quad) -
                 ml_series(FractionalOrder(0.7), 1.5, 1e-10)) < 1e-6);
}

TEST_CASE("ml_zolotarev matches ml_series across the acceptance sweep") {
  QuadratureSpec quad;
  for (double beta : {0.4, 0.5, 0.6, 0.7, 0.9}) {
    MlQuadTable table = build_ml_table(FractionalOrder(beta), quad);
    for (double s = -5.0; s <= 2.0; s += 0.5) {
      const double z = ml_zolotarev(table, s);
      const double ref = ml_series(FractionalOrder(beta), s, 1e-10);
      CHECK(std::abs(z - ref) <= 1e-6);
    }
  }
}

TEST_CASE("E_beta is one at zero and strictly increasing") {
  QuadratureSpec quad;
  for (double beta : {0.4, 0.6, 0.9}) {
    MlQuadTable table = build_ml_table(FractionalOrder(beta), quad);
    double prev = -std::numeric_limits<double>::infinity();
    for (double s = -6.0; s <= 2.0; s += 0.25) {
      const double v = ml_zolotarev(table, s);
      CHECK(v > prev);
      prev = v;
    }
    CHECK(ml_zolotarev(table, 0.0) == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("ml_prime_zolotarev values and consistency") {
  QuadratureSpec quad;
  // E'_beta(0) = 1/Gamma(beta+1)
  CHECK(ml_prime_zolotarev(FractionalOrder(0.5), 0.0, quad) ==
        doctest::Approx(1.0 / std::tgamma(1.5)).epsilon(1e-8));
  CHECK(std::abs(ml_prime_zolotarev(FractionalOrder(0.5), 0.0, quad) - 1.128379) < 1e-6);
  // series-derivative oracle
  CHECK(ml_prime_zolotarev(FractionalOrder(0.6), -1.0, quad) ==
        doctest::Approx(ml_series_derivative(FractionalOrder(0.6), -1.0, 1e-12)).epsilon(1e-8));
  // matches a centered difference of E_beta
  MlQuadTable table = build_ml_table(FractionalOrder(0.6), quad);
  const double fd =
      oracles::central_diff([&](double s) { return ml_zolotarev(table, s); }, -1.0, 1e-4);
  CHECK(std::abs(ml_prime_zolotarev(table, -1.0) - fd) < 1e-6);
  // classical limit along beta -> 1
  const double e1 = std::exp(-1.0);
  const double d09 = std::abs(ml_prime_zolotarev(FractionalOrder(0.9), -1.0, quad) - e1);
  const double d099 = std::abs(ml_prime_zolotarev(FractionalOrder(0.99), -1.0, quad) - e1);
  CHECK(d099 < d09);
  CHECK(d099 < 0.02);
}

TEST_CASE("mellin identity closed forms and quadrature") {
  QuadratureSpec quad;
  auto [lhs0, rhs0] = mellin_check(FractionalOrder(0.5), 0.0, quad);
  CHECK(rhs0 == doctest::Approx(4.513517).epsilon(1e-6));
  CHECK(std::abs(lhs0 - rhs0) / rhs0 < 1e-6);
  auto [lhs1, rhs1] = mellin_check(FractionalOrder(0.5), 1.0, quad);
  CHECK(rhs1 == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::abs(lhs1 - rhs1) / rhs1 < 1e-6);
  for (auto [b, w] : std::vector<std::pair<double, double>>{
           {0.7, 0.3}, {0.4, 0.5}, {0.9, -0.25}}) {
    auto [lhs, rhs] = mellin_check(FractionalOrder(b), w, quad);
    CHECK(std::abs(lhs - rhs) / std::abs(rhs) < 1e-6);
  }
  CHECK_THROWS_AS(mellin_check(FractionalOrder(0.5), 3.0, quad), MellinDivergenceError);
}

TEST_CASE("quadrature stability: refining the rule does not move converged values") {
  QuadratureSpec coarse;
  QuadratureSpec fine;
  fine.node_count = 32;
  fine.domain_cut = 30.0;
  for (double beta : {0.5, 0.8}) {
    for (double s : {-3.0, -1.0, 0.5}) {
      const double a = ml_zolotarev(FractionalOrder(beta), s, coarse);
      const double b = ml_zolotarev(FractionalOrder(beta), s, fine);
      CHECK(std::abs(a - b) < 1e-8);
    }
  }
}

TEST_CASE("ml_negative_axis spectral route agrees with series and erfc identity") {
  for (double x : {0.5, 2.0, 5.0})
    CHECK(ml_negative_axis(FractionalOrder(0.6), x) ==
          doctest::Approx(ml_series(FractionalOrder(0.6), -x, 1e-12)).epsilon(1e-9));
  CHECK(ml_negative_axis(FractionalOrder(0.5), 4.0) ==
        doctest::Approx(oracles::ml_half(-4.0)).epsilon(1e-9));
  // large argument: asymptotic leading term E_beta(-x) ~ 1/(x Gamma(1-beta))
  const double x = 2048.0;
  const double v = ml_negative_axis(FractionalOrder(0.5), x);
  CHECK(v == doctest::Approx(1.0 / (x * std::tgamma(0.5))).epsilon(2e-3));
  CHECK(ml_negative_axis_derivative(FractionalOrder(0.7), 1.0) ==
        doctest::Approx(ml_series_derivative(FractionalOrder(0.7), -1.0, 1e-12)).epsilon(1e-9));
}

TEST_CASE("subordination table stays accurate near the classical limit") {
  QuadratureSpec quad;
  for (double beta : {0.9, 0.99, 0.999}) {
    MlQuadTable table = build_ml_table(FractionalOrder(beta), quad);
    CHECK(std::abs(table.weight_sum_e - 1.0) <= 1e-8);
    for (double s : {-2.0, -1.0, -0.25}) {
      const double ref = ml_negative_axis(FractionalOrder(beta), -s);
      CHECK(std::abs(ml_zolotarev(table, s) - ref) < 1e-7);
    }
  }
}
