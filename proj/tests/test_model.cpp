#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "rndrace/error.hpp"
#include "rndrace/model.hpp"
#include "rndrace/solver.hpp"

using namespace rndrace;
using doctest::Approx;

namespace {

ModelParams make(double alpha, double h, double mu, double p1, double p2, double c) {
  return ModelParams{alpha, h, mu, p1, p2, c};
}

// Cutoffs of the reference example, from an independent 30-digit evaluation.
constexpr double kT1 = 0.101748258769634616;
constexpr double kT2 = 0.293536307070821901;

}  // namespace

TEST_SUITE("model") {

TEST_CASE("params validation") {
  CHECK_NOTHROW(reference_params().validate());
  CHECK_THROWS_WITH_AS(make(1.2, 1, .5, 1, .2, .8).validate(), "alpha must lie in (0,1)",
                       ValidationError);
  CHECK_THROWS_AS(make(0.0, 1, .5, 1, .2, .8).validate(), ValidationError);
  CHECK_THROWS_AS(make(0.5, -1, .5, 1, .2, .8).validate(), ValidationError);
  CHECK_THROWS_AS(make(0.5, 1, 0, 1, .2, .8).validate(), ValidationError);
  CHECK_THROWS_AS(make(0.5, 1, .5, 1, .2, std::nan("")).validate(), ValidationError);
  CHECK_THROWS_AS(make(0.5, 1, .5, 1, std::numeric_limits<double>::infinity(), .8).validate(),
                  ValidationError);
}

TEST_CASE("check_assumptions on the reference example") {
  const auto r = check_assumptions(reference_params());
  CHECK(r.a1_holds);
  CHECK(r.a1_margin == Approx(0.16).epsilon(1e-14));
  CHECK(r.a2_holds);
  CHECK(r.a2_margin == Approx(0.9).epsilon(1e-14));
  // Direct 30-digit evaluation of the A3 inequality.
  CHECK(r.a3_margin == Approx(-0.840212064539138016).epsilon(1e-12));
  CHECK_FALSE(r.a3_holds);
  const auto low_cost = check_assumptions(reference_params(0.2));
  CHECK(low_cost.a3_margin == Approx(3.24830926933317622).epsilon(1e-12));
  CHECK(low_cost.a3_holds);
}

TEST_CASE("check_assumptions flags violations without throwing") {
  const auto r = check_assumptions(make(0.8, 1, .5, 0.1, 1, .8));
  CHECK_FALSE(r.a2_holds);
  CHECK(r.a2_margin == Approx(-0.4));
  CHECK_FALSE(r.a3_holds);
  const auto costly = check_assumptions(make(0.8, 1, .5, 1, .2, 5));
  CHECK_FALSE(costly.a1_holds);
  CHECK(costly.a1_margin < 0);
}

TEST_CASE("A3 limit at equal rates is continuous") {
  const auto eq = check_assumptions(make(0.8, 1, 1, 1, 0.2, 0.3));
  const auto lo = check_assumptions(make(0.8, 1, 1 - 1e-5, 1, 0.2, 0.3));
  const auto hi = check_assumptions(make(0.8, 1, 1 + 1e-5, 1, 0.2, 0.3));
  CHECK(std::isfinite(eq.a3_margin));
  CHECK(eq.a3_margin == Approx(0.5 * (lo.a3_margin + hi.a3_margin)).epsilon(1e-6));
}

TEST_CASE("spillover_integral examples") {
  const auto p = reference_params();
  CHECK(spillover_integral(0.0, p) == 0.0);
  CHECK(spillover_integral(1.0, make(0.8, 1, 1, 1, .2, .8)) ==
        Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(std::abs(spillover_integral(0.191788, p) - oracle::spillover(0.191788, p)) < 1e-10);
  CHECK_THROWS_AS(spillover_integral(-0.1, p), DomainError);
}

TEST_CASE("spillover_integral matches quadrature across rate pairs") {
  const std::vector<std::pair<double, double>> rates{
      {1, 0.5}, {0.5, 1}, {1, 1}, {1, 1 + 1e-6}, {1, 1 - 1e-6}, {3, 0.2}, {0.2, 3}, {2, 2}};
  for (const auto& [h, mu] : rates) {
    const auto p = make(0.5, h, mu, 1, 0.1, 0.1);
    for (int i = 0; i <= 100; ++i) {
      const double tau = 0.1 * i;
      CAPTURE(h);
      CAPTURE(mu);
      CAPTURE(tau);
      CHECK(std::abs(spillover_integral(tau, p) - oracle::spillover(tau, p)) < 1e-9);
    }
  }
}

TEST_CASE("spillover_integral is continuous across the equal-rate switch") {
  for (double tau : {0.3, 1.0, 4.0}) {
    const double at = spillover_integral(tau, make(0.5, 1, 1, 1, .1, .1));
    for (double gap : {-2e-9, -5e-10, 5e-10, 2e-9, 1e-8}) {
      const auto p = make(0.5, 1, 1 + gap, 1, .1, .1);
      const double v = spillover_integral(tau, p);
      CHECK(std::abs(v - oracle::spillover(tau, p)) < 1e-13);
      // The exact sensitivity to mu is below tau^2 e^{-tau}.
      CHECK(std::abs(v - at) <= std::abs(gap) * tau * tau * std::exp(-tau) + 1e-15);
    }
  }
}

TEST_CASE("belief_disclose_region examples") {
  const auto p = reference_params();
  CHECK(belief_disclose_region(0.0, p) == Approx(0.8).epsilon(1e-15));
  const double e = 0.8 * std::exp(-0.206);
  CHECK(belief_disclose_region(0.103, p) == Approx(e / (e + 0.2)).epsilon(1e-14));
  CHECK(belief_disclose_region(0.103, p) == Approx(0.7650).epsilon(1e-4));
  const double far = belief_disclose_region(10.0, p);
  CHECK(far > 0.0);
  CHECK(far < 1e-7);
  const double huge = belief_disclose_region(1e3, p);
  CHECK(std::isfinite(huge));
  CHECK(huge >= 0.0);
}

TEST_CASE("belief_withhold_region examples") {
  const auto p = reference_params();
  CHECK(belief_withhold_region(0.103, 0.103, p) ==
        Approx(belief_disclose_region(0.103, p)).epsilon(1e-14));
  CHECK(belief_withhold_region(0.294, 0.103, p) < belief_disclose_region(0.103, p));
  CHECK(belief_withhold_region(0.294, 0.103, p) ==
        Approx(oracle::belief_withhold(0.294, 0.103, p)).epsilon(1e-12));
  CHECK(belief_withhold_region(0.0, 0.0, p) == Approx(0.8).epsilon(1e-15));
  CHECK_THROWS_AS(belief_withhold_region(0.1, 0.2, p), DomainError);
  const double huge = belief_withhold_region(1e3, 0.5, p);
  CHECK(std::isfinite(huge));
  CHECK(huge >= 0.0);
}

TEST_CASE("beliefs are continuous at the disclose boundary") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 50; ++i) {
    const auto p = oracle::draw_valid_params(rng);
    const double t1 = 0.1 + 2.0 * i / 50.0;
    CHECK(std::abs(belief_withhold_region(t1, t1, p) - belief_disclose_region(t1, p)) < 1e-12);
  }
}

TEST_CASE("beliefs strictly decrease on fine grids") {
  std::mt19937_64 rng(12);
  for (int draw = 0; draw < 50; ++draw) {
    const auto p = oracle::draw_valid_params(rng, draw % 5 == 0);
    const double horizon = 8.0 / p.stage1_rate;
    const double t1 = 0.3 * horizon;
    double prev_d = 2.0, prev_w = 2.0;
    for (int i = 0; i < 1000; ++i) {
      const double t = horizon * i / 999.0;
      const double d = belief_disclose_region(t, p);
      const double w = belief_withhold_region(t1 + t, t1, p);
      REQUIRE(d < prev_d);
      REQUIRE(w < prev_w);
      prev_d = d;
      prev_w = w;
    }
  }
}

TEST_CASE("disclose_payoff examples") {
  const auto p = reference_params();
  CHECK(disclose_payoff(0.05, kT1, p) == Approx(1.1).epsilon(1e-15));
  CHECK(disclose_payoff(kT1, kT1, p) == Approx(1.1).epsilon(1e-15));
  CHECK(disclose_payoff(std::nextafter(kT1, 1.0), kT1, p) == Approx(1.1).epsilon(1e-12));
  CHECK(disclose_payoff(0.2, 0.103, p) < 1.1);
  CHECK(disclose_payoff(0.2, 0.103, p) == Approx(oracle::disclose_payoff(0.2, 0.103, p)).epsilon(1e-12));
}

TEST_CASE("withhold_payoff examples") {
  const auto p = reference_params();
  CHECK(withhold_payoff(0.4, 0.4, 0.4, p) == Approx(1.2).epsilon(1e-14));
  const double delta = withhold_length(p);
  CHECK(withhold_payoff(kT1, kT1, kT1 + delta, p) == Approx(1.1).epsilon(1e-12));
  for (double t : {kT1, 0.15, 0.2, 0.25, kT2}) {
    CAPTURE(t);
    CHECK(withhold_payoff(t, kT1, kT2, p) ==
          Approx(oracle::withhold_payoff(t, kT1, kT2, p)).epsilon(1e-11));
  }
  CHECK_THROWS_AS(withhold_payoff(0.05, kT1, kT2, p), DomainError);
  CHECK_THROWS_AS(withhold_payoff(0.5, kT1, kT2, p), DomainError);
}

TEST_CASE("early_withhold_payoff matches the oracle and meets disclosure at t1") {
  const auto p = reference_params();
  for (double t : {0.0, 0.03, 0.07, kT1}) {
    CAPTURE(t);
    CHECK(early_withhold_payoff(t, kT1, kT2, p) ==
          Approx(oracle::early_withhold_payoff(t, kT1, kT2, p)).epsilon(1e-11));
  }
  CHECK(early_withhold_payoff(kT1, kT1, kT2, p) == Approx(1.1).epsilon(1e-12));
  CHECK(early_withhold_payoff(0.0, kT1, kT2, p) < 1.1);
}

TEST_CASE("indifference at the cutoff on random draws") {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 100; ++i) {
    const auto p = oracle::draw_valid_params(rng, i % 7 == 0);
    const double t1 = 0.05 + 0.02 * i;
    const double delta = withhold_length(p);
    CHECK(std::abs(withhold_payoff(t1, t1, t1 + delta, p) - (p.reward1 + 0.5 * p.reward2)) < 1e-9);
  }
}

TEST_CASE("withhold_minus_disclose equals the payoff difference") {
  std::mt19937_64 rng(14);
  for (int i = 0; i < 40; ++i) {
    const auto p = oracle::draw_valid_params(rng, i % 8 == 0);
    const double t1 = 0.1 * i;
    for (double span : {0.0, 0.05, 0.5, 2.0}) {
      const double t2 = t1 + span;
      for (double f : {0.0, 0.3, 0.7, 1.0}) {
        const double t = t1 + f * span;
        const double direct = withhold_payoff(t, t1, t2, p) - disclose_payoff(t, t1, p);
        CHECK(std::abs(withhold_minus_disclose(t, t1, t2, p) - direct) < 1e-9);
      }
    }
  }
}

TEST_CASE("withhold_minus_disclose sign on the withhold region") {
  const auto p = reference_params();
  CHECK(std::abs(withhold_minus_disclose(kT1, kT1, kT2, p)) < 1e-12);
  for (int i = 1; i <= 200; ++i) {
    const double t = std::min(kT2, kT1 + (kT2 - kT1) * i / 200.0);
    REQUIRE(withhold_minus_disclose(t, kT1, kT2, p) > 0.0);
  }
  const double at_exit = oracle::withhold_payoff(kT2, kT1, kT2, p) -
                         oracle::disclose_payoff(kT2, kT1, p);
  CHECK(withhold_minus_disclose(kT2, kT1, kT2, p) == Approx(at_exit).epsilon(1e-10));
  CHECK_THROWS_AS(withhold_minus_disclose(0.0, kT1, kT2, p), DomainError);
}

TEST_CASE("stay_rate_disclose_region examples") {
  const auto p = reference_params();
  CHECK(stay_rate_disclose_region(0.0, p) == Approx(0.96).epsilon(1e-14));
  CHECK(stay_rate_disclose_region(0.0, p) > p.cost_rate);
  CHECK(stay_rate_disclose_region(50.0, p) < 1e-30);
  CHECK(std::isfinite(stay_rate_disclose_region(1e3, p)));
}

TEST_CASE("stay_rate_withhold_region examples") {
  const auto p = reference_params();
  CHECK(std::abs(stay_rate_withhold_region(kT2, kT1, kT2, p) - p.cost_rate) < 1e-8);
  CHECK(stay_rate_withhold_region(kT1 + 1e-6, kT1, kT2, p) > p.cost_rate);
  for (double t : {0.12, 0.2, kT2}) {
    CHECK(stay_rate_withhold_region(t, kT1, kT2, p) ==
          Approx(oracle::stay_rate_withhold(t, kT1, kT2, p)).epsilon(1e-11));
  }
  CHECK_THROWS_AS(stay_rate_withhold_region(kT1, kT1, kT2, p), DomainError);
  CHECK_THROWS_AS(stay_rate_withhold_region(kT2 + 0.01, kT1, kT2, p), DomainError);
}

TEST_CASE("stay_rate_withhold_region at equal rates matches the nearby limit") {
  const auto at = make(0.8, 1, 1, 1, 0.2, 0.3);
  auto near = [&](double mu) { return make(0.8, 1, mu, 1, 0.2, 0.3); };
  for (double t : {0.3, 0.6, 1.0}) {
    const double r = stay_rate_withhold_region(t, 0.2, 1.2, at);
    CHECK(std::isfinite(r));
    const double avg = 0.5 * (stay_rate_withhold_region(t, 0.2, 1.2, near(1 - 1e-6)) +
                              stay_rate_withhold_region(t, 0.2, 1.2, near(1 + 1e-6)));
    CHECK(std::abs(r - avg) < 1e-7);
    CHECK(std::abs(r - stay_rate_withhold_region(t, 0.2, 1.2, near(1 + 1e-6))) < 1e-5);
  }
}

TEST_CASE("stay_rate_after_exit examples") {
  const auto p = reference_params();
  const double at_exit = stay_rate_after_exit(0.0, kT1, kT2, p);
  CHECK(std::abs(at_exit - p.cost_rate) < 1e-8);
  CHECK(std::abs(at_exit - stay_rate_withhold_region(kT2, kT1, kT2, p)) < 1e-10);
  CHECK(stay_rate_after_exit(0.1, kT1, kT2, p) < p.cost_rate);
  CHECK(stay_rate_after_exit(1.0, kT1, kT2, p) < stay_rate_after_exit(0.1, kT1, kT2, p));
  for (double dt : {0.05, 0.5, 3.0}) {
    CHECK(stay_rate_after_exit(dt, kT1, kT2, p) ==
          Approx(oracle::stay_rate_after_exit(dt, kT1, kT2, p)).epsilon(1e-11));
  }
  CHECK_THROWS_AS(stay_rate_after_exit(-0.1, kT1, kT2, p), DomainError);
}

TEST_CASE("incentive properties at solved equilibria") {
  std::mt19937_64 rng(15);
  int checked = 0;
  for (int i = 0; i < 60; ++i) {
    const auto p = oracle::draw_valid_params(rng, i % 6 == 0);
    const auto eq = solve_equilibrium(p);
    CAPTURE(to_string(p));
    CHECK(std::abs(stay_rate_after_exit(0.0, eq.t1, eq.t2, p) -
                   stay_rate_withhold_region(eq.t2, eq.t1, eq.t2, p)) < 1e-10);
    double prev = stay_rate_after_exit(0.0, eq.t1, eq.t2, p);
    for (int k = 1; k <= 500; ++k) {
      const double dt = 5.0 / p.stage2_rate * k / 500.0;
      const double r = stay_rate_after_exit(dt, eq.t1, eq.t2, p);
      REQUIRE(r < prev);
      prev = r;
    }
    if (eq.a3_verified && eq.t2 > eq.t1) {
      ++checked;
      double last = std::numeric_limits<double>::infinity();
      for (int k = 1; k <= 200; ++k) {
        const double t = std::min(eq.t2, eq.t1 + (eq.t2 - eq.t1) * k / 200.0);
        const double r = stay_rate_withhold_region(t, eq.t1, eq.t2, p);
        REQUIRE(r <= last + 1e-12);
        last = r;
      }
    }
  }
  CHECK(checked > 5);
}

}  // TEST_SUITE
