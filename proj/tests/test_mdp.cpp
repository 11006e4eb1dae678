#include <doctest.h>

#include <cmath>
#include <cstddef>
#include <vector>

#include "dro/fuzz.hpp"
#include "dro/mdp.hpp"

using namespace dro;

namespace {

// Two-state chain: the second stage shapes the cost-to-go to [0, 1], the
// first stage pays nothing, and each state's kernel stays put.
RobustMdp chain_mdp() {
  RobustMdp mdp;
  mdp.num_states = 2;
  mdp.actions_per_state = {1, 1};
  mdp.horizon = 2;
  mdp.stage_costs = {{{0.0}, {0.0}}, {{0.0}, {1.0}}};
  mdp.kernels = {{{{0}, {1.0}}}, {{{1}, {1.0}}}};
  mdp.radii = {{0.3}, {0.3}};
  mdp.cost.entries = {{0.0, 1.0}, {1.0, 0.0}};
  mdp.cost.diagonal_map = {0, 1};
  return validate_mdp(std::move(mdp));
}

Errc code_of(void (*mutate)(RobustMdp&)) {
  RobustMdp mdp = chain_mdp();
  mutate(mdp);
  try {
    validate_mdp(std::move(mdp));
  } catch (const DroError& e) {
    return e.code();
  }
  return Errc::ParseError; // sentinel meaning "did not throw"
}

// Plain backward induction with the exact nominal expectation, no adversary.
std::vector<double> nominal_values(const RobustMdp& mdp) {
  std::vector<double> v(mdp.num_states, 0.0);
  for (std::size_t t = mdp.horizon; t-- > 0;) {
    std::vector<double> cur(mdp.num_states, 0.0);
    for (std::size_t s = 0; s < mdp.num_states; ++s) {
      double best = kInf;
      for (std::size_t a = 0; a < mdp.actions_per_state[s]; ++a) {
        double q = mdp.stage_costs[t][s][a];
        const DiscreteDistribution& k = mdp.kernels[s][a];
        for (std::size_t i = 0; i < k.size(); ++i) q += k.weights[i] * v[k.support[i]];
        best = std::min(best, q);
      }
      cur[s] = best;
    }
    v = std::move(cur);
  }
  return v;
}

RobustMdp scaled_radii(RobustMdp mdp, double scale) {
  for (auto& per_state : mdp.radii)
    for (double& r : per_state) r *= scale;
  return mdp;
}

}  // namespace

TEST_SUITE("mdp") {
  TEST_CASE("one stage with no future returns the stage costs") {
    RobustMdp mdp = chain_mdp();
    mdp.horizon = 1;
    mdp.stage_costs = {{{3.0}, {5.0}}};
    mdp = validate_mdp(std::move(mdp));
    const MdpSolution sol = dr_value_iteration(mdp);
    CHECK(sol.values.size() == 2);
    CHECK(sol.values[0] == std::vector<double>{3.0, 5.0});
    CHECK(sol.values[1] == std::vector<double>{0.0, 0.0});
    CHECK(sol.policy == std::vector<std::vector<std::size_t>>{{0, 0}});
    CHECK(sol.max_backup_gap == 0.0);
  }

  TEST_CASE("two-stage chain pays the transport budget once") {
    const RobustMdp mdp = chain_mdp();
    const MdpSolution sol = dr_value_iteration(mdp);
    CHECK(sol.values[1] == std::vector<double>{0.0, 1.0});
    // From the cheap state the adversary ships 0.3 of the mass one unit away.
    CHECK(sol.values[0][0] == 0.3);
    CHECK(sol.values[0][1] == 1.0);
    CHECK(sol.values[2] == std::vector<double>{0.0, 0.0});
  }

  TEST_CASE("verified backups agree with the transport plans") {
    const MdpSolution sol = dr_value_iteration(chain_mdp(), /*verify=*/true);
    CHECK(sol.max_backup_gap <= 1e-12);
  }

  TEST_CASE("verified backups stay tight on random instances") {
    Rng rng(515);
    for (int trial = 0; trial < 8; ++trial) {
      const RobustMdp mdp = random_mdp(rng, 6, 3, 4, 1.0);
      const MdpSolution sol = dr_value_iteration(mdp, /*verify=*/true);
      CHECK(sol.max_backup_gap <= 1e-7);
    }
  }

  TEST_CASE("tiny budgets collapse to the nominal recursion") {
    const RobustMdp mdp = chain_mdp();
    const std::vector<double> nominal = nominal_values(mdp);
    CHECK(nominal == std::vector<double>{0.0, 1.0});
    for (double rho : {1e-3, 1e-6, 1e-9}) {
      RobustMdp small = mdp;
      small.radii = {{rho}, {rho}};
      const MdpSolution sol = dr_value_iteration(small);
      double gap = 0.0;
      for (std::size_t s = 0; s < small.num_states; ++s)
        gap = std::max(gap, std::abs(sol.values[0][s] - nominal[s]));
      // The cheap state's backup sits on the unit-slope segment, so the
      // deviation equals the budget itself.
      CHECK(gap == rho);
      CHECK(gap <= 10.0 * rho);
    }
  }

  TEST_CASE("values grow with the budget and start at the nominal floor") {
    Rng rng(3131);
    for (int trial = 0; trial < 5; ++trial) {
      const RobustMdp mdp = random_mdp(rng, 4, 2, 3, 1.0);
      const std::vector<double> nominal = nominal_values(mdp);
      std::vector<double> prev;
      for (double scale : {0.0, 0.5, 1.0, 2.0}) {
        const MdpSolution sol = dr_value_iteration(scaled_radii(mdp, scale));
        const std::vector<double>& cur = sol.values[0];
        if (scale == 0.0)
          for (std::size_t s = 0; s < cur.size(); ++s)
            CHECK(std::abs(cur[s] - nominal[s]) <= 1e-9 * (1.0 + std::abs(nominal[s])));
        if (!prev.empty())
          for (std::size_t s = 0; s < cur.size(); ++s)
            CHECK(cur[s] >= prev[s] - 1e-12 * (1.0 + std::abs(cur[s])));
        prev = cur;
      }
    }
  }

  TEST_CASE("equal backups break toward the lowest action index") {
    RobustMdp mdp;
    mdp.num_states = 1;
    mdp.actions_per_state = {3};
    mdp.horizon = 1;
    mdp.stage_costs = {{{2.0, 2.0, 2.0}}};
    mdp.kernels = {{{{0}, {1.0}}, {{0}, {1.0}}, {{0}, {1.0}}}};
    mdp.radii = {{0.1, 0.1, 0.1}};
    mdp.cost.entries = {{0.0}};
    mdp.cost.diagonal_map = {0};
    mdp = validate_mdp(std::move(mdp));
    CHECK(dr_value_iteration(mdp).policy[0][0] == 0);
    mdp.stage_costs = {{{2.0, 1.5, 1.5}}};
    const MdpSolution sol = dr_value_iteration(mdp);
    CHECK(sol.policy[0][0] == 1);
    CHECK(sol.values[0][0] == 1.5);
  }

  TEST_CASE("zero-weight kernel atoms are dropped at validation") {
    RobustMdp mdp = chain_mdp();
    mdp.kernels[0][0] = {{0, 1}, {1.0, 0.0}};
    mdp = validate_mdp(std::move(mdp));
    CHECK(mdp.kernels[0][0].support == std::vector<std::size_t>{0});
    CHECK(mdp.kernels[0][0].weights == std::vector<double>{1.0});
  }

  TEST_CASE("shape and sign violations are rejected") {
    CHECK(code_of([](RobustMdp& m) { m.horizon = 0; }) == Errc::ShapeMismatch);
    CHECK(code_of([](RobustMdp& m) { m.actions_per_state = {1}; }) == Errc::ShapeMismatch);
    CHECK(code_of([](RobustMdp& m) { m.actions_per_state = {1, 0}; }) == Errc::ShapeMismatch);
    CHECK(code_of([](RobustMdp& m) { m.stage_costs.pop_back(); }) == Errc::ShapeMismatch);
    CHECK(code_of([](RobustMdp& m) { m.stage_costs[0][1][0] = kInf; }) == Errc::ShapeMismatch);
    CHECK(code_of([](RobustMdp& m) { m.kernels[0][0].weights = {0.9}; }) ==
          Errc::WeightsNotNormalized);
    CHECK(code_of([](RobustMdp& m) { m.kernels[0][0].support = {5}; }) == Errc::ShapeMismatch);
    CHECK(code_of([](RobustMdp& m) {
            m.kernels[0][0] = {{0, 1}, {1.5, -0.5}};
          }) == Errc::NegativeWeight);
    CHECK(code_of([](RobustMdp& m) { m.radii[1][0] = -0.1; }) == Errc::ShapeMismatch);
    CHECK(code_of([](RobustMdp& m) { m.radii[1][0] = kInf; }) == Errc::ShapeMismatch);
    CHECK(code_of([](RobustMdp& m) { m.cost.entries = {{0.0, 1.0}}; }) == Errc::ShapeMismatch);
    CHECK(code_of([](RobustMdp& m) { m.cost.entries[0][1] = -2.0; }) == Errc::NegativeCost);
    CHECK(code_of([](RobustMdp& m) { m.cost.entries[1][1] = 0.25; }) ==
          Errc::MissingDiagonalZero);
  }
}
