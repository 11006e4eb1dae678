#pragma once

#include <cstdint>
#include <random>

#include "dro/chance.hpp"
#include "dro/globalized.hpp"
#include "dro/mdp.hpp"
#include "dro/problem.hpp"

namespace dro {

/// Deterministic random source for the self-test generators. Doubles are
/// derived from raw engine output so streams are reproducible bit-for-bit
/// for a given seed, independent of the standard library's distribution
/// implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi);
  int uniform_int(int lo, int hi); // inclusive bounds
  bool bernoulli(double prob);

 private:
  std::mt19937_64 engine_;
};

/// Random planar metric instance: up to `max_candidates` distinct points,
/// a nominal distribution over a subset of them, costs d^p for p in {1, 2},
/// about 10% of off-diagonal entries forbidden, losses uniform in [-1, 1],
/// and a radius uniform in (0, max finite cost).
DroProblem random_metric_problem(Rng& rng, int max_support = 20, int max_candidates = 30);

/// Random chance instance with positive-probability ties avoided.
ChanceInstance random_chance_instance(Rng& rng, int max_atoms = 20);

/// Random two-layer instance; when `shared_cost` both layers use one metric.
GlobalizedInstance random_globalized_instance(Rng& rng, bool shared_cost, int max_support = 8,
                                              int max_candidates = 10);

/// Random finite-horizon robust MDP within the given size bounds.
RobustMdp random_mdp(Rng& rng, int max_states = 6, int max_actions = 3, int max_horizon = 4,
                     double radius_scale = 1.0);

}  // namespace dro
