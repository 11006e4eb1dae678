#pragma once

#include <cstddef>
#include <vector>

#include "dro/problem.hpp"

namespace dro {

/// Finite-horizon robust MDP. Each (state, action) pair owns a nominal
/// transition kernel and a transport-ball radius; the Bellman backup
/// replaces the expectation with the worst case over that ball.
struct RobustMdp {
  std::size_t num_states = 0;
  std::vector<std::size_t> actions_per_state; // |A(s)| >= 1
  std::size_t horizon = 0;                    // T
  /// stage_costs[t][s][a] for t = 0..T-1 (stage t+1 in one-based terms).
  std::vector<std::vector<std::vector<double>>> stage_costs;
  /// kernels[s][a]: nominal next-state distribution.
  std::vector<std::vector<DiscreteDistribution>> kernels;
  /// radii[s][a] > 0: per-pair transport budget.
  std::vector<std::vector<double>> radii;
  /// State-to-state transport cost, square with zero diagonal.
  CostMatrix cost;
};

RobustMdp validate_mdp(RobustMdp mdp);

struct MdpSolution {
  /// values[t] is the optimal robust cost-to-go at stage t+1, t = 0..T;
  /// values[T] is the terminal zero vector.
  std::vector<std::vector<double>> values;
  /// policy[t][s]: lowest-index action attaining the stage-t backup.
  std::vector<std::vector<std::size_t>> policy;
  /// Verify mode only: the largest |dual - primal| over all backups.
  double max_backup_gap = 0.0;
};

/// Backward induction from the zero terminal value. Each backup minimizes
/// over actions the stage cost plus the worst-case expected cost-to-go over
/// the pair's transport ball (evaluated by the exact dual). In verify mode
/// every backup is cross-checked against the primal LP.
MdpSolution dr_value_iteration(const RobustMdp& mdp, bool verify = false);

}  // namespace dro
