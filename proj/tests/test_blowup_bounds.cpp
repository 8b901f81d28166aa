#include "doctest.h"

#include "lifespan/blowup_bounds.hpp"
#include "lifespan/duhamel.hpp"

#include <cmath>
#include <sstream>

using namespace lifespan;

namespace {

double H_bump3(double s, double eps) { return s >= 1 ? 0.0 : -eps * std::pow(1 - s * s, 4) / 8; }

}  // namespace

TEST_CASE("slicing levels") {
  const auto s = make_slicing_levels(1.0, 10);
  CHECK(s.l[0] == 1);
  CHECK(s.l[1] == 1.5);
  CHECK(s.l[10] == doctest::Approx(2 - std::pow(2.0, -10)));
  // Sigma_{j+1} is inside Sigma_j and Sigma_inf inside all of them.
  for (double r = 0.5; r < 8; r += 0.37)
    for (double t = r; t < 2 * r + 0.1; t += 0.11) {
      for (int j = 0; j < 10; ++j)
        if (s.in_sigma(j + 1, r, t)) CHECK(s.in_sigma(j, r, t));
      if (s.in_sigma_infinity(r, t)) CHECK(s.in_sigma(10, r, t));
    }
  CHECK_THROWS_AS(s.in_sigma(11, 1, 2), std::out_of_range);
}

TEST_CASE("first-step constants for bump(1,1,3)") {
  const auto g = make_bump(1, 1, 3);
  const auto c1 = first_step_constants(g, 0.1, 1.5);
  const auto c2 = first_step_constants(g, 0.02, 1.5);
  CHECK(c1.M0 == doctest::Approx(c2.M0).epsilon(1e-12));
  CHECK(c1.a == doctest::Approx(1.0 / 512));
  CHECK(c1.b == doctest::Approx(std::sqrt(1 - std::pow(2.0, -0.25))).epsilon(1e-2));
  for (int k = 0; k <= 100; ++k) {
    const double s = c1.a + (c1.b - c1.a) * k / 100;
    CHECK(H_bump3(s, 0.1) <= -2 * c1.M0 * 0.1 * (1 - 1e-6));
  }
  CHECK(c1.M == doctest::Approx(0.5 * std::pow(18.0, -1.5) * (c1.b - c1.a) * (1 - c1.b) *
                                std::pow(c1.M0, 1.5)));
  CHECK_THROWS_AS(first_step_constants(zero_profile(1), 0.1, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(first_step_constants(g, 0.0, 1.5), std::invalid_argument);
}

TEST_CASE("subcritical sequences match their closed forms") {
  for (double p : {1.3, 1.5, 1.7}) {
    const double eps = 0.05, M = 1e-3;
    const auto tab = build_sequences(p, eps, M, 40);
    REQUIRE(tab.rows.size() == 41);
    CHECK(tab.rows[0].a == 1);
    CHECK(tab.rows[0].b == doctest::Approx(2 * (p - 1)));
    CHECK(tab.rows[1].a == doctest::Approx(p + 2));
    CHECK(tab.rows[0].log_coef == doctest::Approx(std::log(M * std::pow(eps, p))));
    long double a = 1, b = 2 * (p - 1), lD = std::log(M) + p * std::log(eps);
    for (const auto& row : tab.rows) {
      const long double pj = std::pow((long double)p, row.j);
      CHECK(row.a == doctest::Approx(double((pj * (p + 1) - 2) / (p - 1))).epsilon(1e-10));
      CHECK(row.b == doctest::Approx(double(2 * (pj * p - 1))).epsilon(1e-10));
      CHECK(row.log_coef == doctest::Approx(double(lD)).epsilon(1e-10));
      CHECK(row.closed_log_coef == doctest::Approx(row.log_coef).epsilon(1e-10));
      a = p * a + 2;
      b = p * b + 2 * (p - 1);
      lD = -p * std::log(18.0L) - std::log(2 * a * a) + p * lD;
    }
  }
}

TEST_CASE("critical sequences match their closed forms") {
  const double p = strauss_exponent(5), eps = 0.5, M = 1e-2;
  const auto tab = build_sequences(p, eps, M, 40);
  CHECK(tab.regime == SequenceRegime::Critical);
  CHECK(tab.rows[0].a == 0);
  CHECK(tab.rows[0].log_coef == doctest::Approx(std::log(M * std::pow(eps, p))));
  long double d = 0, lE = std::log(M) + p * std::log(eps);
  for (const auto& row : tab.rows) {
    const long double pj = std::pow((long double)p, row.j);
    CHECK(row.a == doctest::Approx(double((pj - 1) / (p - 1))).epsilon(1e-10));
    CHECK(row.b == doctest::Approx(2 * p - 3));
    CHECK(row.log_coef == doctest::Approx(double(lE)).epsilon(1e-10));
    d = p * d + 1;
    lE = -p * std::log(18.0L) - (row.j + 3) * std::log(2.0L) - std::log(d) + p * lE;
  }
  CHECK_THROWS_AS(build_sequences(2.5, eps, M, 5), std::domain_error);
  CHECK_THROWS_AS(build_sequences(1.5, eps, M, 61), std::invalid_argument);
  CHECK_THROWS_AS(build_sequences(1.5, eps, 0, 5), std::invalid_argument);
}

TEST_CASE("q converges to the telescoped closed form") {
  for (double p : {1.3, 1.5, 1.9}) {
    const double logF = -p * std::log(18.0) - std::log(2.0) + 2 * std::log((p - 1) / (p + 1));
    const double closed = logF / (p - 1) - 2 * p * std::log(p) / ((p - 1) * (p - 1));
    CHECK(convergence_constant_q(p, SequenceRegime::Subcritical) ==
          doctest::Approx(closed).epsilon(1e-10));
    const double s40 = q_partial_sum(p, SequenceRegime::Subcritical, 400);
    const double s30 = q_partial_sum(p, SequenceRegime::Subcritical, 300);
    CHECK(std::abs(s40 - s30) < 1e-12);
  }
  const double p = strauss_exponent(5);
  const double logG = -p * std::log(18.0) + std::log(p - 1) - std::log(8 * p);
  const double closed = logG / (p - 1) - std::log(2 * p) / ((p - 1) * (p - 1));
  CHECK(convergence_constant_q(p, SequenceRegime::Critical) ==
        doctest::Approx(closed).epsilon(1e-10));
  CHECK(std::abs(q_partial_sum(p, SequenceRegime::Critical, 400) -
                 q_partial_sum(p, SequenceRegime::Critical, 300)) < 1e-12);
}

TEST_CASE("envelopes vanish on the inner edge of their sets") {
  const auto lv = make_slicing_levels(1, 8);
  const auto sub = build_sequences(1.5, 0.1, 1e-3, 8);
  const auto e0 = envelope(3, 3.0, 4.0, sub, lv);
  CHECK(e0.applicable);
  CHECK(e0.value == 0);
  CHECK_FALSE(envelope(3, 3.0, 3.5, sub, lv).applicable);
  CHECK(envelope(3, 3.0, 5.0, sub, lv).value > 0);

  const auto crit = build_sequences(strauss_exponent(5), 0.5, 1e-2, 8);
  const double d = lv.l[4];
  const auto e4 = envelope(4, 4.0, 4.0 + d, crit, lv);
  CHECK(e4.applicable);
  CHECK(e4.value == 0);
  CHECK_FALSE(envelope(4, 4.0, 4.0 + 1.2, crit, lv).applicable);
  CHECK(envelope(0, 4.0, 5.2, crit, lv).value > 0);
  CHECK_THROWS_AS(envelope(9, 4.0, 5.0, crit, lv), std::out_of_range);
}

TEST_CASE("J functional, B and the upper bound") {
  const double p = 1.5, M = 1e-4;
  const double q = convergence_constant_q(p, SequenceRegime::Subcritical);
  const double eps0 = upper_epsilon0(p, M, q, 1);
  const double eps = eps0 / 2;
  const double Tup = upper_bound_lifespan(eps, p, M, q, 1);
  CHECK(upper_bound_lifespan(eps0, p, M, q, 1) == doctest::Approx(8));
  CHECK(Tup > 8);
  const double e = 2 * p * (p - 1) / gamma(p, 5);
  CHECK(std::log(upper_bound_lifespan(eps / 2, p, M, q, 1) / Tup) / std::log(0.5) ==
        doctest::Approx(-e));
  CHECK_THROWS_AS(upper_bound_lifespan(2 * eps0, p, M, q, 1), std::domain_error);
  // J(tau/2, tau) >= 0 once tau is beyond the bound.
  for (double f : {1.0001, 2.0, 10.0})
    CHECK(J_functional(f * Tup / 2, f * Tup, p, eps, M, q, 1) >= 0);
  double prev = -INFINITY;
  for (double tau = 2.5; tau < 100; tau *= 1.3) {
    const double J = J_functional(tau / 2, tau, p, eps, M, q, 1);
    CHECK(J > prev);
    prev = J;
  }
  CHECK(J_functional(1, 1.5, p, eps, M, q, 1) == -INFINITY);

  const double pc = strauss_exponent(5);
  const double qc = convergence_constant_q(pc, SequenceRegime::Critical);
  const double ec = upper_epsilon0(pc, 1e-2, qc, 1);
  CHECK(upper_bound_lifespan(ec, pc, 1e-2, qc, 1) == doctest::Approx(16));
  const double tc = upper_bound_lifespan(ec * 0.9, pc, 1e-2, qc, 1);
  CHECK(J_functional(tc * 0.6, tc * 1.2, pc, ec * 0.9, 1e-2, qc, 1) > 0);
}

TEST_CASE("envelopes diverge where J is positive") {
  const double p = 1.5, M = 1e-4;
  const double q = convergence_constant_q(p, SequenceRegime::Subcritical);
  const double eps = upper_epsilon0(p, M, q, 1) / 2;
  const double tau = 4 * upper_bound_formula(eps, p, M, q);
  const auto tab = build_sequences(p, eps, M, kMaxSequenceLength);
  const auto lv = make_slicing_levels(1, kMaxSequenceLength);
  double prev = -INFINITY;
  for (int j = 20; j <= kMaxSequenceLength; j += 10) {
    const auto e = envelope(j, tau / 2, tau, tab, lv);
    CHECK(e.log_value > prev);
    prev = e.log_value;
  }
  CHECK(envelope(kMaxSequenceLength, tau / 2, tau, tab, lv).overflow);
  CHECK(std::isfinite(prev));
}

TEST_CASE("lattice solution dominates the first step and the envelopes") {
  const double p = 1.5, eps = 0.05;
  const auto g = make_bump(1, 1, 4);
  const auto fs = first_step_constants(g, eps, p);
  const Lattice lat = make_lattice(1.0 / 16, 24, 1);
  const auto sol = causal_march(linear_solution(zero_profile(1), g, eps, lat), p, 24);
  REQUIRE(sol.status == SolveStatus::Converged);
  const auto first = first_step_check(sol.field, p, eps, fs.M);
  CHECK(first.nodes_checked > 0);
  CHECK(first.violations == 0);
  const auto tab = build_sequences(p, eps, fs.M, 5);
  const auto lv = make_slicing_levels(1, 5);
  const auto rep = domination_check(sol.field, tab, lv, 5);
  CHECK(rep.pass);
  CHECK(rep.levels.size() == 6);
  std::ostringstream os;
  write_domination_csv(os, rep);
  CHECK(os.str().rfind("j,nodes_checked", 0) == 0);
  // The zero field fails as soon as the bound is positive.
  CHECK(first_step_check(CharField(lat), p, eps, fs.M).violations > 0);
}

TEST_CASE("sequence CSV") {
  std::ostringstream os;
  write_sequence_csv(os, build_sequences(1.5, 0.1, 1e-3, 2));
  CHECK(os.str().rfind("j,a_j,b_j,logD_j", 0) == 0);
  std::ostringstream oc;
  write_sequence_csv(oc, build_sequences(strauss_exponent(5), 0.1, 1e-3, 2));
  CHECK(oc.str().rfind("j,d_j,logE_j", 0) == 0);
}
