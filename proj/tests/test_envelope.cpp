#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "dro/envelope.hpp"
#include "dro/fuzz.hpp"
#include "dro/transport.hpp"
#include "helpers.hpp"

using namespace dro;

TEST_SUITE("envelope") {
  TEST_CASE("two-line row envelope") {
    LossVector loss{{0.0, 1.0}};
    const PLConvexFunction phi = row_envelope(loss, {0.0, 1.0});
    REQUIRE(phi.breakpoints == std::vector<double>{0.0, 1.0});
    CHECK(phi.values == std::vector<double>{1.0, 0.0});
    CHECK(phi.slopes == std::vector<double>{-1.0});
    CHECK(phi.tail_slope == 0.0);
    CHECK(phi.eval(0.5) == 0.5);
    CHECK(phi.eval(3.0) == 0.0);
    CHECK(phi.slope_after(0.0) == -1.0);
    CHECK(phi.slope_after(1.0) == 0.0);
  }

  TEST_CASE("unreachable columns never enter, not even at zero penalty") {
    LossVector loss{{0.0, 5.0}};
    const PLConvexFunction phi = row_envelope(loss, {0.0, kInf});
    CHECK(phi.eval(0.0) == 0.0);
    CHECK(phi.eval(2.0) == 0.0);
    CHECK(phi.tail_slope == 0.0);
  }

  TEST_CASE("preallocation hint does not change the result") {
    LossVector loss{{0.0, 0.5, 2.0}};
    const PLConvexFunction a = row_envelope(loss, {0.0, 1.0, 2.0});
    const PLConvexFunction b = row_envelope(loss, {0.0, 1.0, 2.0}, 25.0);
    CHECK(a.breakpoints == b.breakpoints);
    CHECK(a.values == b.values);
    CHECK(a.slopes == b.slopes);
    CHECK(a.tail_slope == b.tail_slope);
  }

  TEST_CASE("weighted envelope of the three-point instance") {
    const DroProblem p = dro_test::line_problem({0.0, 1.0, 2.0}, {0.0, 0.5, 2.0}, {0, 1},
                                                {0.5, 0.5}, 0.5);
    const PLConvexFunction g = envelope_G(p);
    CHECK(g.eval(0.0) == 2.0);
    CHECK(g.eval(1.0) == 0.5);
    CHECK(g.eval(2.0) == 0.25);
    CHECK(g.tail_slope == 0.0);
    CHECK(std::is_sorted(g.slopes.begin(), g.slopes.end()));
  }

  TEST_CASE("dual minimization on the unit-mass two-point ball") {
    const DualResult d = dual_value(dro_test::two_point(0.3));
    CHECK(d.value == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(d.lambda_star == 1.0);
    CHECK_FALSE(d.radius_zero_warning);
  }

  TEST_CASE("flat minimum reports the smallest minimizer") {
    const DualResult d = dual_value(dro_test::two_point(1.0));
    CHECK(d.value == 1.0);
    CHECK(d.lambda_star == 0.0);
  }

  TEST_CASE("zero radius carries a warning") {
    const DualResult d = dual_value(dro_test::two_point(0.0));
    CHECK(d.value == 0.0);
    CHECK(d.radius_zero_warning);
  }

  TEST_CASE("steep-step instances hit the ramp identity exactly") {
    // Value must be min(radius / eps, 1) with equality in floating point:
    // the breakpoint 1/eps, the products, and the ratios all round to the
    // same doubles on both sides for these decimal pairs.
    for (double eps : {0.1, 0.01, 0.001}) {
      for (double rho : {eps / 2.0, eps, 2.0 * eps, 1.0}) {
        const DroProblem p = dro_test::kink_problem(eps, rho);
        const DualResult d = dual_value(p);
        const double expect = std::min(rho / eps, 1.0);
        CHECK(d.value == expect);
      }
    }
  }

  TEST_CASE("saturated penalty returns the nominal expectation exactly") {
    const DroProblem p = dro_test::line_problem({0.0, 1.0, 2.0}, {0.4, -0.2, 0.9}, {0, 1, 2},
                                                {0.25, 0.5, 0.25}, 0.1);
    double fmax = 0.9, fmin = -0.2, cmin = 1.0;
    const double lam = (fmax - fmin) / cmin;
    const PLConvexFunction g = envelope_G(p);
    double nominal = 0.0;
    for (std::size_t i = 0; i < p.nominal.size(); ++i)
      nominal += p.nominal.weights[i] * p.loss.values[p.nominal.support[i]];
    CHECK(g.eval(lam) == nominal);
    CHECK(g.eval(2.0 * lam) == nominal);
  }

  TEST_CASE("radius sweep is nondecreasing and midpoint-concave") {
    const DroProblem p = dro_test::line_problem({0.0, 1.0, 2.0}, {0.0, 0.5, 2.0}, {0, 1},
                                                {0.5, 0.5}, 0.5);
    const std::vector<double> grid{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
    const auto curve = robust_curve(p, grid);
    REQUIRE(curve.size() == grid.size());
    for (std::size_t k = 0; k + 1 < curve.size(); ++k) {
      CHECK(curve[k].second <= curve[k + 1].second + 1e-12);
    }
    // Uniform grid: interior points dominate the average of their neighbors.
    for (std::size_t k = 1; k + 1 < curve.size(); ++k) {
      CHECK(curve[k].second >=
            0.5 * (curve[k - 1].second + curve[k + 1].second) - 1e-12);
    }
  }

  TEST_CASE("radius grid validation") {
    const DroProblem p = dro_test::two_point(0.3);
    CHECK_THROWS_AS(robust_curve(p, {0.0, 0.5}), DroError);
    CHECK_THROWS_AS(robust_curve(p, {0.5, 0.1}), DroError);
  }

  TEST_CASE("random instances keep the envelope laws") {
    Rng rng(123);
    for (int trial = 0; trial < 25; ++trial) {
      const DroProblem p = random_metric_problem(rng, 6, 8);
      const PLConvexFunction g = envelope_G(p);
      CHECK(g.tail_slope == 0.0);
      for (std::size_t k = 0; k + 1 < g.slopes.size(); ++k)
        CHECK(g.slopes[k] <= g.slopes[k + 1] + 1e-9);
      // Direct scan oracle at a handful of penalties.
      for (double lam : {0.0, 0.37, 1.0, 4.2}) {
        double direct = 0.0;
        for (std::size_t i = 0; i < p.nominal.size(); ++i) {
          double vmax = -kInf;
          for (std::size_t j = 0; j < p.loss.size(); ++j) {
            if (!std::isfinite(p.cost.entries[i][j])) continue;
            vmax = std::max(vmax, p.loss.values[j] - lam * p.cost.entries[i][j]);
          }
          direct += p.nominal.weights[i] * vmax;
        }
        CHECK(g.eval(lam) == doctest::Approx(direct).epsilon(1e-10));
      }
      const DualResult d = dual_value(p);
      const PrimalResult pr = primal_worst_case(p);
      CHECK(std::abs(pr.value - d.value) <= 1e-7 * (1.0 + std::abs(d.value)));
    }
  }
}
