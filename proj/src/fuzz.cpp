#include "dro/fuzz.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

namespace dro {

double Rng::uniform(double lo, double hi) {
  const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  return lo + u * (hi - lo);
}

int Rng::uniform_int(int lo, int hi) {
  const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  return lo + static_cast<int>(u * (static_cast<double>(hi - lo) + 1.0));
}

bool Rng::bernoulli(double prob) {
  const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  return u < prob;
}

namespace {

PointSet random_planar_points(Rng& rng, int count) {
  PointSet points;
  std::vector<std::vector<double>> coords;
  for (int i = 0; i < count; ++i) {
    points.labels.push_back("x" + std::to_string(i));
    coords.push_back({rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)});
  }
  points.coords = std::move(coords);
  return points;
}

std::vector<std::size_t> random_subset(Rng& rng, int universe, int take) {
  std::vector<std::size_t> idx(static_cast<std::size_t>(universe));
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (int i = 0; i < take; ++i) {
    const int j = rng.uniform_int(i, universe - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  idx.resize(static_cast<std::size_t>(take));
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::vector<double> random_weights(Rng& rng, std::size_t count) {
  std::vector<double> w(count);
  double sum = 0.0;
  for (double& v : w) {
    v = rng.uniform(0.05, 1.0);
    sum += v;
  }
  for (double& v : w) v /= sum;
  return w;
}

}  // namespace

DroProblem random_metric_problem(Rng& rng, int max_support, int max_candidates) {
  const int m = rng.uniform_int(2, max_candidates);
  const int n = rng.uniform_int(1, std::min(max_support, m));

  DroProblem problem;
  problem.points = random_planar_points(rng, m);
  const double p = rng.bernoulli(0.5) ? 1.0 : 2.0;
  const CostMatrix square =
      cost_from_metric(problem.points, MetricSpec::named(MetricKind::euclidean), p);

  problem.nominal.support = random_subset(rng, m, n);
  problem.nominal.weights = random_weights(rng, static_cast<std::size_t>(n));
  problem.cost = rows_for_support(square, problem.nominal.support);

  problem.loss.values.resize(static_cast<std::size_t>(m));
  for (double& f : problem.loss.values) f = rng.uniform(-1.0, 1.0);

  // Forbid roughly 10% of the off-diagonal moves, keeping one positive-cost
  // column alive in row 0 so a nonempty radius range survives.
  std::size_t keep = problem.cost.diagonal_map[0];
  for (std::size_t j = 0; j < static_cast<std::size_t>(m); ++j)
    if (problem.cost.entries[0][j] > problem.cost.entries[0][keep]) keep = j;
  for (std::size_t i = 0; i < problem.cost.rows(); ++i)
    for (std::size_t j = 0; j < static_cast<std::size_t>(m); ++j) {
      if (j == problem.cost.diagonal_map[i] || (i == 0 && j == keep)) continue;
      if (rng.bernoulli(0.1)) problem.cost.entries[i][j] = kInf;
    }

  double max_cost = 0.0;
  for (const auto& row : problem.cost.entries)
    for (double c : row)
      if (c < kInf && c > max_cost) max_cost = c;
  if (max_cost == 0.0) max_cost = 1e-6;
  do {
    problem.radius = rng.uniform(0.0, max_cost);
  } while (problem.radius == 0.0);

  return validate_problem(std::move(problem));
}

ChanceInstance random_chance_instance(Rng& rng, int max_atoms) {
  ChanceInstance instance;
  const int k = rng.uniform_int(1, max_atoms);
  instance.weights = random_weights(rng, static_cast<std::size_t>(k));
  instance.unsafe_distance.resize(static_cast<std::size_t>(k));
  for (double& d : instance.unsafe_distance)
    d = rng.bernoulli(0.3) ? 0.0 : rng.uniform(0.05, 2.0);
  instance.p = rng.bernoulli(0.5) ? 1.0 : 2.0;
  do {
    instance.rho = rng.uniform(0.0, 1.2);
  } while (instance.rho == 0.0);
  instance.beta = rng.uniform(0.05, 0.95);
  return validate_chance(std::move(instance));
}

GlobalizedInstance random_globalized_instance(Rng& rng, bool shared_cost, int max_support,
                                              int max_candidates) {
  const int m = rng.uniform_int(2, max_candidates);
  const int n = rng.uniform_int(1, std::min(max_support, m));

  GlobalizedInstance instance;
  instance.base.points = random_planar_points(rng, m);
  // Order one keeps the triangle inequality, which the shared-cost identity
  // relies on.
  instance.inner_cost =
      cost_from_metric(instance.base.points, MetricSpec::named(MetricKind::euclidean), 1.0);

  instance.base.nominal.support = random_subset(rng, m, n);
  instance.base.nominal.weights = random_weights(rng, static_cast<std::size_t>(n));
  if (shared_cost) {
    instance.base.cost = rows_for_support(instance.inner_cost, instance.base.nominal.support);
  } else {
    const PointSet other = random_planar_points(rng, m);
    const CostMatrix outer =
        cost_from_metric(other, MetricSpec::named(MetricKind::euclidean), 1.0);
    instance.base.cost = rows_for_support(outer, instance.base.nominal.support);
  }

  instance.base.loss.values.resize(static_cast<std::size_t>(m));
  for (double& f : instance.base.loss.values) f = rng.uniform(-1.0, 1.0);

  instance.base.radius = rng.uniform(0.05, 0.8);
  instance.theta = rng.uniform(0.05, 0.8);
  return validate_globalized(std::move(instance));
}

RobustMdp random_mdp(Rng& rng, int max_states, int max_actions, int max_horizon,
                     double radius_scale) {
  RobustMdp mdp;
  const int S = rng.uniform_int(2, max_states);
  mdp.num_states = static_cast<std::size_t>(S);
  mdp.horizon = static_cast<std::size_t>(rng.uniform_int(1, max_horizon));

  const PointSet states = random_planar_points(rng, S);
  mdp.cost = cost_from_metric(states, MetricSpec::named(MetricKind::euclidean), 1.0);

  mdp.actions_per_state.resize(mdp.num_states);
  for (std::size_t s = 0; s < mdp.num_states; ++s)
    mdp.actions_per_state[s] = static_cast<std::size_t>(rng.uniform_int(1, max_actions));

  mdp.stage_costs.resize(mdp.horizon);
  for (auto& stage : mdp.stage_costs) {
    stage.resize(mdp.num_states);
    for (std::size_t s = 0; s < mdp.num_states; ++s) {
      stage[s].resize(mdp.actions_per_state[s]);
      for (double& g : stage[s]) g = rng.uniform(0.0, 5.0);
    }
  }

  mdp.kernels.resize(mdp.num_states);
  mdp.radii.resize(mdp.num_states);
  for (std::size_t s = 0; s < mdp.num_states; ++s) {
    mdp.kernels[s].resize(mdp.actions_per_state[s]);
    mdp.radii[s].resize(mdp.actions_per_state[s]);
    for (std::size_t a = 0; a < mdp.actions_per_state[s]; ++a) {
      const int take = rng.uniform_int(1, S);
      mdp.kernels[s][a].support = random_subset(rng, S, take);
      mdp.kernels[s][a].weights = random_weights(rng, static_cast<std::size_t>(take));
      mdp.radii[s][a] = radius_scale * rng.uniform(0.01, 0.4);
    }
  }
  return validate_mdp(std::move(mdp));
}

}  // namespace dro
