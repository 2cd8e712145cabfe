#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <string>

#include "kslab/bounds.hpp"
#include "kslab/lane_emden.hpp"
#include "kslab/radial.hpp"
#include "kslab/util.hpp"
#include "oracle_values.hpp"
#include "test_support.hpp"

using namespace kslab;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
const double inf = std::numeric_limits<double>::infinity();
}

TEST_CASE("planar C0 constant") {
  // C = e M / (8 pi), C0 = C/(1-C).  At M = 4 pi / e the ratio C is 1/2.
  CHECK_THAT(c0_small_mass(2, 4.0 * pi / std::exp(1.0)), WithinRel(1.0, 1e-12));

  // Vanishing-mass limit: C0 ~ e M / (8 pi).
  double tiny = 1e-8;
  CHECK_THAT(c0_small_mass(2, tiny), WithinRel(std::exp(1.0) * tiny / (8.0 * pi), 1e-6));

  // Monotone increasing in M up to the pole.
  CHECK(c0_small_mass(2, 2.0) < c0_small_mass(2, 4.0));

  double P = c0_pole(2);
  CHECK_THAT(P, WithinRel(8.0 * pi / std::exp(1.0), 1e-15));
  CHECK(c0_small_mass(2, P * (1.0 - 1e-6)) > 1e5);
  CHECK_THROWS_AS(c0_small_mass(2, P), invalid_input);
  CHECK_THROWS_WITH(c0_small_mass(2, P * (1.0 + 1e-12)), ContainsSubstring("formula inapplicable"));
}

TEST_CASE("multid C0 hand values at M = omega_d") {
  // d = 3: C = 2^3 * 1 / (4 * 2 * 5) = 1/5, so C0 = (1/5)/(4/5) = 1/4.
  CHECK_THAT(c0_small_mass(3, omega_d(3)), WithinRel(0.25, 1e-12));

  // d = 4: C = 2^2 * 2 / (4 * 3 * 6) = 1/9, so C0 = (1/9)/(8/9) = 1/8.
  CHECK_THAT(c0_small_mass(4, omega_d(4)), WithinRel(0.125, 1e-12));

  // d = 5: C = 2^(5/3) * 3 / (4 * 4 * 7) = cbrt(32) * 3 / 112.
  double C5 = std::cbrt(32.0) * 3.0 / 112.0;
  CHECK_THAT(c0_small_mass(5, omega_d(5)), WithinRel(C5 / (1.0 - C5), 1e-12));

  // Mass scaling enters only through (M/omega_d)^(2/d).
  double C_at_8om = std::pow(2.0, 3.0) / 40.0 * std::pow(8.0, 2.0 / 3.0);
  CHECK_THAT(c0_small_mass(3, 8.0 * omega_d(3)), WithinRel(C_at_8om / (1.0 - C_at_8om), 1e-12));
}

TEST_CASE("C0 pole locations") {
  CHECK_THAT(c0_pole(2), WithinAbs(9.2458, 1e-4));
  CHECK_THAT(c0_pole(3), WithinAbs(46.8321, 1e-3));
  CHECK_THAT(c0_pole(4), WithinAbs(399.719, 1e-2));
  CHECK_THAT(c0_pole(5), WithinAbs(2496.02, 1e-1));
  for (int d = 2; d <= 5; ++d) {
    double P = c0_pole(d);
    CHECK_NOTHROW(c0_small_mass(d, P * (1.0 - 1e-9)));
    CHECK_THROWS_AS(c0_small_mass(d, P * (1.0 + 1e-9)), invalid_input);
  }
  CHECK_THROWS_AS(c0_pole(1), invalid_input);
  CHECK_THROWS_AS(c0_small_mass(2, 0.0), invalid_input);
  CHECK_THROWS_AS(c0_small_mass(2, -1.0), invalid_input);
  CHECK_THROWS_AS(c0_small_mass(2, inf), invalid_input);
}

TEST_CASE("small-mass thresholds") {
  CHECK(epsilon_threshold(2) == 8.0 * pi / (2.0 + std::exp(1.0)));
  CHECK_THAT(epsilon_threshold(2), WithinRel(oracle::epsilon_2, 1e-15));

  // The planar closed form and the generic root finder agree.
  CHECK_THAT(epsilon_threshold_numeric(2), WithinAbs(epsilon_threshold(2), 1e-10));

  CHECK_THAT(epsilon_threshold(3), WithinRel(oracle::epsilon_3, 1e-9));
  CHECK_THAT(epsilon_threshold(4), WithinRel(oracle::epsilon_4, 1e-9));
  CHECK_THAT(epsilon_threshold(5), WithinRel(oracle::epsilon_5, 1e-9));

  for (int d = 2; d <= 5; ++d) {
    double eps = epsilon_threshold(d);
    CHECK(eps > 0.0);
    CHECK(eps < c0_pole(d));

    // At the root the coefficient vanishes: C1^2 = 2d/(d-1)^2.
    auto at_root = small_mass_constants(d, eps);
    CHECK_THAT(at_root.C1 * at_root.C1, WithinRel(2.0 * d / ((d - 1.0) * (d - 1.0)), 1e-9));
    CHECK_THAT(at_root.coefficient, WithinAbs(0.0, 1e-9));

    auto below = small_mass_constants(d, 0.9 * eps);
    CHECK(below.threshold_ok);
    CHECK(below.coefficient > 0.0);
    auto above = small_mass_constants(d, 1.1 * eps);
    CHECK_FALSE(above.threshold_ok);
    CHECK(above.coefficient < 0.0);
  }
  CHECK_THROWS_AS(epsilon_threshold(1), invalid_input);
}

TEST_CASE("small-mass constants structure") {
  auto smc = small_mass_constants(2, 2.0);
  CHECK(smc.d == 2);
  CHECK(smc.M == 2.0);
  CHECK_THAT(smc.C1, WithinRel(2.0 / (2.0 * pi) * (smc.C0 + 1.0), 1e-15));
  CHECK_THAT(smc.coefficient, WithinRel(1.0 - 0.25 * smc.C1 * smc.C1, 1e-15));

  // d > 2 ties C1 to the instrumented prefactor, clipped by max(1, C0).
  auto smc3 = small_mass_constants(3, 0.005);
  CHECK(smc3.C0 < 1.0);
  CHECK(smc3.C1 > 0.0);
  CHECK(smc3.threshold_ok);
  auto smc3b = small_mass_constants(3, 0.02);
  CHECK(smc3b.C1 > smc3.C1);
}

TEST_CASE("comparison envelope for the pressure Laplacian minimum") {
  CHECK(delta_comparison(1.0, 2.0, -inf) == -0.5);
  CHECK(delta_comparison(10.0, 1.0, -1.0) == -0.1);
  CHECK(delta_comparison(1.0, 1.0, -0.2) == -0.2);

  // Envelope is nondecreasing in t and tends to zero from below.
  double prev = -inf;
  for (double t : {0.1, 1.0, 10.0, 1e4, 1e8}) {
    double v = delta_comparison(t, 3.0, -inf);
    CHECK(v < 0.0);
    CHECK(v >= prev);
    prev = v;
  }
  CHECK(delta_comparison(1e12, 1.0, -inf) > -1e-11);

  CHECK_THROWS_AS(delta_comparison(0.0, 1.0, -1.0), invalid_input);
  CHECK_THROWS_AS(delta_comparison(-1.0, 1.0, -1.0), invalid_input);
  CHECK_THROWS_AS(delta_comparison(1.0, 0.0, -1.0), invalid_input);
  CHECK_THROWS_AS(delta_comparison(1.0, -2.0, -1.0), invalid_input);
  CHECK_THROWS_AS(delta_comparison(1.0, 1.0, std::numeric_limits<double>::quiet_NaN()),
                  invalid_input);
}

TEST_CASE("planar Q inequality chain on snapshots") {
  RadialGrid grid{2, 20.0, 8192};

  SECTION("small-mass gaussian") {
    auto rho = testsupport::gaussian_field(grid, 4.0, 1.0);
    auto vd = v_and_delta(rho);
    auto rep = check_q_inequality_2d(rho, vd.delta);
    CHECK(rep.spread_vs_l1.pass);
    CHECK(rep.l1_vs_delta.pass);
    CHECK(rep.q > 0.0);
    CHECK(rep.lap_l1 > 0.0);
    CHECK(rep.spread_vs_l1.margin > 0.0);
    CHECK(rep.spread_vs_l1.lhs == rep.q);
    CHECK_THAT(rep.spread_vs_l1.rhs, WithinRel(rep.lap_l1 / (4.0 * pi), 1e-15));
  }

  SECTION("stationary aggregation profile") {
    auto rho = make_field(grid);
    double lambda = 2.0;
    for (int i = 0; i < grid.n; ++i)
      rho.values[i] = liouville_density(lambda, grid.center(i));
    auto vd = v_and_delta(rho);
    auto rep = check_q_inequality_2d(rho, vd.delta);
    CHECK(rep.spread_vs_l1.pass);
    CHECK(rep.l1_vs_delta.pass);
  }

  SECTION("zero field") {
    auto rho = make_field(grid);
    auto rep = check_q_inequality_2d(rho, 0.0);
    CHECK(rep.q == 0.0);
    CHECK(rep.lap_l1 == 0.0);
    CHECK(rep.spread_vs_l1.pass);
    CHECK(rep.l1_vs_delta.pass);
  }

  SECTION("rejects non-planar fields and NaN delta") {
    RadialGrid g3{3, 5.0, 64};
    auto rho3 = testsupport::gaussian_field(g3, 1.0, 1.0);
    CHECK_THROWS_AS(check_q_inequality_2d(rho3, -1.0), invalid_input);
    auto rho2 = testsupport::gaussian_field(grid, 1.0, 1.0);
    CHECK_THROWS_AS(check_q_inequality_2d(rho2, std::numeric_limits<double>::quiet_NaN()),
                    invalid_input);
  }
}

TEST_CASE("pointwise Laplacian lower bound checker") {
  SECTION("stationary profile in d = 3") {
    auto prof = direct_profile(3);
    RadialGrid grid{3, 14.0, 4096};
    auto rho = prof.density(grid);
    auto vd = v_and_delta(rho);
    auto rep = check_laplacian_lower(rho, vd.delta);
    CHECK(rep.dbar == std::max(std::abs(vd.delta), max_value(rho)));
    CHECK(rep.worst_margin > -1e-3 * max_value(rho));
    CHECK(rep.index >= 0);
    CHECK(rep.r_at_worst > 0.0);
  }

  SECTION("gaussians across dimensions") {
    for (int d : {2, 3, 4, 5}) {
      RadialGrid grid{d, 12.0, 4096};
      auto rho = testsupport::gaussian_field(grid, 1.0, 1.5);
      auto vd = v_and_delta(rho);
      auto rep = check_laplacian_lower(rho, vd.delta);
      CHECK(rep.worst_margin > -1e-6 * max_value(rho));
    }
  }

  SECTION("constant positive field has zero Laplacian") {
    RadialGrid grid{3, 4.0, 128};
    auto rho = make_field(grid);
    for (auto& v : rho.values) v = 2.0;
    auto rep = check_laplacian_lower(rho, -1.0);
    CHECK(rep.worst_margin >= 0.0);
    CHECK(rep.dbar == 2.0);
  }

  SECTION("NaN delta rejected") {
    RadialGrid grid{3, 4.0, 64};
    auto rho = testsupport::gaussian_field(grid, 1.0, 1.0);
    CHECK_THROWS_AS(check_laplacian_lower(rho, std::numeric_limits<double>::quiet_NaN()),
                    invalid_input);
  }
}

TEST_CASE("subcritical Q exponent") {
  CHECK(subcritical_q_exponent(3) == 13.0 / 15.0);
  CHECK(subcritical_q_exponent(4) == 20.0 / 24.0);
  CHECK_THAT(subcritical_q_exponent(4), WithinRel(5.0 / 6.0, 1e-15));
  for (int d = 3; d <= 12; ++d) {
    double e = subcritical_q_exponent(d);
    CHECK(e < 1.0);
    CHECK(e > 0.5);
  }
  CHECK_THROWS_AS(subcritical_q_exponent(2), invalid_input);
}

TEST_CASE("barrier optimization behind the multid sup bound") {
  // The radial barrier alpha r^(2-d) + beta r^2 is minimized in closed form;
  // the bound evaluates it at r = (alpha/beta)^(1/d) instead, which costs at
  // most 6 percent.  Normalized to alpha = beta = 1: minimize r^(2-d) + r^2.
  for (int d : {3, 4, 5, 6}) {
    auto g = [d](double logr) {
      double r = std::exp(logr);
      return std::pow(r, 2.0 - d) + r * r;
    };
    double found = golden_min(g, -5.0, 5.0, 200).value;
    double closed = d / 2.0 * std::pow(2.0 / (d - 2.0), (d - 2.0) / d);
    CHECK_THAT(found, WithinRel(closed, 1e-10));
    double ratio = 2.0 / closed;
    CHECK(ratio >= 1.0);
    CHECK(ratio <= 1.06);
    if (d == 4) CHECK_THAT(ratio, WithinRel(1.0, 1e-12));
  }
}

TEST_CASE("inequality report JSON line") {
  auto rep = make_report("a <= b", 1.0, 2.0);
  CHECK(rep.margin == 1.0);
  CHECK(rep.pass);
  CHECK(to_json_line(rep) ==
        "{\"inequality\":\"a <= b\",\"lhs\":1,\"rhs\":2,\"margin\":1,\"pass\":true}");

  auto fail = make_report("x <= y", 0.5, 0.25);
  CHECK_FALSE(fail.pass);
  CHECK(fail.margin == -0.25);
  CHECK(to_json_line(fail) ==
        "{\"inequality\":\"x <= y\",\"lhs\":0.5,\"rhs\":0.25,\"margin\":-0.25,\"pass\":false}");
}
