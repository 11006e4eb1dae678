#include <doctest.h>

#include <cmath>
#include <vector>

#include "dro/chance.hpp"
#include "dro/fuzz.hpp"

using namespace dro;

namespace {

ChanceInstance hand_instance(double rho, double beta) {
  ChanceInstance inst;
  inst.weights = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  inst.unsafe_distance = {1.5, 0.5, 0.0};
  inst.p = 1.0;
  inst.rho = rho;
  inst.beta = beta;
  return validate_chance(inst);
}

}  // namespace

TEST_SUITE("chance") {
  TEST_CASE("hand instance worst-case probability") {
    const ChanceValue v = chance_robust_value(hand_instance(0.1, 0.6));
    CHECK(std::abs(v.value - 8.0 / 15.0) <= 1e-12);
    CHECK(v.lambda_star == 2.0);
    CHECK_FALSE(v.radius_zero_warning);
  }

  TEST_CASE("tolerance placement around the hand value") {
    CHECK(chance_feasible(hand_instance(0.1, 0.6)));
    CHECK_FALSE(chance_feasible(hand_instance(0.1, 0.5)));
  }

  TEST_CASE("zero radius reports the nominal unsafe mass with a warning") {
    const ChanceInstance inst = hand_instance(0.0, 0.5);
    const ChanceValue v = chance_robust_value(inst);
    CHECK(v.radius_zero_warning);
    CHECK(std::abs(v.value - 1.0 / 3.0) <= 1e-12);
  }

  TEST_CASE("every atom unsafe pins the probability at one") {
    ChanceInstance inst;
    inst.weights = {0.25, 0.75};
    inst.unsafe_distance = {0.0, 0.0};
    inst.p = 2.0;
    inst.beta = 0.9;
    for (double rho : {0.0, 1e-8, 0.5, 3.0}) {
      inst.rho = rho;
      const ChanceValue v = chance_robust_value(validate_chance(inst));
      CHECK(v.value == 1.0);
      CHECK(v.lambda_star == 0.0);
      CHECK_FALSE(chance_feasible(validate_chance(inst)));
    }
  }

  TEST_CASE("mean-distance radius is always infeasible") {
    // E[d] = 2/3 for the hand instance.
    for (double beta : {0.3, 0.6, 0.95}) {
      CHECK_FALSE(chance_feasible(hand_instance(2.0 / 3.0, beta)));
      CHECK_FALSE(chance_feasible(hand_instance(0.7, beta)));
    }
  }

  TEST_CASE("bottleneck variant counts reachable atoms") {
    ChanceInstance inst = hand_instance(0.4, 0.5);
    inst.p = kInf;
    SUBCASE("below the middle distance") {
      const ChanceLinfResult r = chance_linf(validate_chance(inst));
      CHECK(std::abs(r.value - 1.0 / 3.0) <= 1e-12);
      CHECK(r.infeasibility_threshold == 0.0);
      CHECK(r.feasible);
    }
    SUBCASE("the boundary atom counts") {
      inst.rho = 0.5;
      const ChanceLinfResult r = chance_linf(validate_chance(inst));
      CHECK(std::abs(r.value - 2.0 / 3.0) <= 1e-12);
      CHECK_FALSE(r.feasible);
    }
  }

  TEST_CASE("small balls far from the unsafe set are harmless") {
    ChanceInstance inst;
    inst.weights = {0.5, 0.5};
    inst.unsafe_distance = {1.5, 0.5};
    inst.p = kInf;
    inst.rho = 0.4;
    inst.beta = 0.05;
    const ChanceLinfResult r = chance_linf(validate_chance(inst));
    CHECK(r.value == 0.0);
    CHECK(r.feasible);
    CHECK(r.infeasibility_threshold == 0.5);
  }

  TEST_CASE("finite-order routine rejects the bottleneck order") {
    ChanceInstance inst = hand_instance(0.1, 0.5);
    inst.p = kInf;
    CHECK_THROWS_AS(chance_robust_value(validate_chance(inst)), DroError);
  }

  TEST_CASE("validation rejects malformed instances") {
    ChanceInstance inst = hand_instance(0.1, 0.5);
    SUBCASE("negative distance") {
      inst.unsafe_distance[1] = -0.5;
      CHECK_THROWS_AS(validate_chance(inst), DroError);
    }
    SUBCASE("weights off") {
      inst.weights = {0.5, 0.5, 0.5};
      CHECK_THROWS_AS(validate_chance(inst), DroError);
    }
    SUBCASE("tolerance out of range") {
      inst.beta = 1.0;
      CHECK_THROWS_AS(validate_chance(inst), DroError);
    }
    SUBCASE("order below one") {
      inst.p = 0.5;
      CHECK_THROWS_AS(validate_chance(inst), DroError);
    }
    SUBCASE("negative radius") {
      inst.rho = -0.1;
      CHECK_THROWS_AS(validate_chance(inst), DroError);
    }
  }

  TEST_CASE("feasibility agrees with the worst-case value") {
    Rng rng(4242);
    int checked = 0;
    for (int trial = 0; trial < 120; ++trial) {
      const ChanceInstance inst = random_chance_instance(rng);
      const ChanceValue v = chance_robust_value(inst);
      if (std::abs(v.value - inst.beta) <= 1e-9) continue; // genuine tie
      ++checked;
      CHECK(chance_feasible(inst) == (v.value <= inst.beta));
    }
    CHECK(checked > 100);
  }

  TEST_CASE("worst-case probability grows with the radius") {
    Rng rng(515);
    for (int trial = 0; trial < 30; ++trial) {
      ChanceInstance inst = random_chance_instance(rng);
      double prev_finite = -1.0, prev_linf = -1.0;
      for (double scale : {0.25, 0.5, 1.0, 2.0}) {
        ChanceInstance scaled = inst;
        scaled.rho = scale * inst.rho;
        const double finite = chance_robust_value(scaled).value;
        CHECK(finite >= prev_finite - 1e-12);
        prev_finite = finite;
        scaled.p = kInf;
        const double linf = chance_linf(scaled).value;
        CHECK(linf >= prev_linf);
        prev_linf = linf;
      }
    }
  }

  TEST_CASE("half-line distances") {
    const std::vector<double> pts{-1.0, 0.5, 2.0};
    CHECK(distances_to_halfline(pts, 1.0, true) == std::vector<double>{2.0, 0.5, 0.0});
    CHECK(distances_to_halfline(pts, 1.0, false) == std::vector<double>{0.0, 0.0, 1.0});
  }

  TEST_CASE("box distances under the three norms") {
    const std::vector<std::vector<double>> pts{{2.0, 2.0}, {0.5, 0.5}, {-1.0, 0.5}};
    const std::vector<double> lo{0.0, 0.0}, hi{1.0, 1.0};
    const auto euc = distances_to_box(pts, lo, hi, MetricKind::euclidean);
    CHECK(euc[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(euc[1] == 0.0);
    CHECK(euc[2] == 1.0);
    CHECK(distances_to_box(pts, lo, hi, MetricKind::chebyshev)[0] == 1.0);
    CHECK(distances_to_box(pts, lo, hi, MetricKind::manhattan)[0] == 2.0);
    CHECK_THROWS_AS(distances_to_box(pts, lo, hi, MetricKind::explicit_matrix), DroError);
    CHECK_THROWS_AS(distances_to_box(pts, {0.0}, hi, MetricKind::euclidean), DroError);
  }
}
