#include "dro/mdp.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "dro/envelope.hpp"
#include "dro/transport.hpp"

namespace dro {

namespace {

[[noreturn]] void fail(Errc code, const std::string& what) { throw DroError(code, what); }

DiscreteDistribution validate_kernel(const DiscreteDistribution& kernel, std::size_t num_states,
                                     const std::string& where) {
  if (kernel.support.size() != kernel.weights.size() || kernel.support.empty())
    fail(Errc::ShapeMismatch, "kernel support and weights differ at " + where);
  DiscreteDistribution out;
  double sum = 0.0;
  for (std::size_t i = 0; i < kernel.support.size(); ++i) {
    const double w = kernel.weights[i];
    if (kernel.support[i] >= num_states)
      fail(Errc::ShapeMismatch, "kernel support outside the state space at " + where);
    if (std::isnan(w) || w < 0.0) fail(Errc::NegativeWeight, "kernel weights must be nonnegative");
    if (w == 0.0) continue;
    out.support.push_back(kernel.support[i]);
    out.weights.push_back(w);
    sum += w;
  }
  if (out.support.empty() || std::abs(sum - 1.0) > 1e-12)
    fail(Errc::WeightsNotNormalized, "kernel weights must sum to one at " + where);
  if (sum != 1.0) {
    for (double& w : out.weights) w /= sum;
    // Pin the tail weight so renormalizing twice is a no-op; serialization
    // round-trips re-validate the same kernel.
    double head = 0.0;
    for (std::size_t i = 0; i + 1 < out.weights.size(); ++i) head += out.weights[i];
    if (1.0 - head > 0.0) out.weights.back() = 1.0 - head;
  }
  return out;
}

}  // namespace

RobustMdp validate_mdp(RobustMdp mdp) {
  const std::size_t S = mdp.num_states;
  const std::size_t T = mdp.horizon;
  if (S == 0 || T == 0) fail(Errc::ShapeMismatch, "need at least one state and one stage");
  if (mdp.actions_per_state.size() != S)
    fail(Errc::ShapeMismatch, "one action count per state required");
  for (std::size_t a : mdp.actions_per_state)
    if (a == 0) fail(Errc::ShapeMismatch, "every state needs at least one action");

  if (mdp.stage_costs.size() != T) fail(Errc::ShapeMismatch, "one stage-cost table per stage");
  for (const auto& stage : mdp.stage_costs) {
    if (stage.size() != S) fail(Errc::ShapeMismatch, "stage costs must cover every state");
    for (std::size_t s = 0; s < S; ++s) {
      if (stage[s].size() != mdp.actions_per_state[s])
        fail(Errc::ShapeMismatch, "stage costs must cover every action");
      for (double g : stage[s])
        if (!std::isfinite(g)) fail(Errc::ShapeMismatch, "stage costs must be finite");
    }
  }

  if (mdp.kernels.size() != S || mdp.radii.size() != S)
    fail(Errc::ShapeMismatch, "kernels and radii must cover every state");
  for (std::size_t s = 0; s < S; ++s) {
    if (mdp.kernels[s].size() != mdp.actions_per_state[s] ||
        mdp.radii[s].size() != mdp.actions_per_state[s])
      fail(Errc::ShapeMismatch, "kernels and radii must cover every action");
    for (std::size_t a = 0; a < mdp.actions_per_state[s]; ++a) {
      const std::string where =
          "state " + std::to_string(s) + ", action " + std::to_string(a);
      mdp.kernels[s][a] = validate_kernel(mdp.kernels[s][a], S, where);
      const double rho = mdp.radii[s][a];
      if (std::isnan(rho) || rho < 0.0 || !(rho < kInf))
        fail(Errc::ShapeMismatch, "radii must be finite and nonnegative at " + where);
    }
  }

  if (mdp.cost.rows() != S || mdp.cost.diagonal_map.size() != S)
    fail(Errc::ShapeMismatch, "transport cost must be square over the states");
  for (std::size_t s = 0; s < S; ++s) {
    if (mdp.cost.entries[s].size() != S)
      fail(Errc::ShapeMismatch, "transport cost must be square over the states");
    for (double c : mdp.cost.entries[s])
      if (std::isnan(c) || c < 0.0) fail(Errc::NegativeCost, "costs must be nonnegative");
    if (mdp.cost.diagonal_map[s] >= S || mdp.cost.entries[s][mdp.cost.diagonal_map[s]] != 0.0)
      fail(Errc::MissingDiagonalZero, "every state needs a zero-cost match to itself");
  }
  return mdp;
}

MdpSolution dr_value_iteration(const RobustMdp& mdp, bool verify) {
  const std::size_t S = mdp.num_states;
  const std::size_t T = mdp.horizon;

  MdpSolution sol;
  sol.values.assign(T + 1, std::vector<double>(S, 0.0));
  sol.policy.assign(T, std::vector<std::size_t>(S, 0));

  PointSet states;
  states.labels.resize(S);
  for (std::size_t s = 0; s < S; ++s) states.labels[s] = "s" + std::to_string(s);

  for (std::size_t t = T; t-- > 0;) {
    const std::vector<double>& next = sol.values[t + 1];
    for (std::size_t s = 0; s < S; ++s) {
      double best = kInf;
      std::size_t best_action = 0;
      for (std::size_t a = 0; a < mdp.actions_per_state[s]; ++a) {
        DroProblem ball;
        ball.points = states;
        ball.nominal = mdp.kernels[s][a];
        ball.cost = rows_for_support(mdp.cost, ball.nominal.support);
        ball.loss.values = next;
        ball.radius = mdp.radii[s][a];

        const DualResult dual = dual_value(ball);
        if (verify) {
          const PrimalResult primal = primal_worst_case(ball);
          const double gap = std::abs(dual.value - primal.value);
          if (gap > sol.max_backup_gap) sol.max_backup_gap = gap;
        }
        const double q = mdp.stage_costs[t][s][a] + dual.value;
        if (q < best) {
          best = q;
          best_action = a;
        }
      }
      sol.values[t][s] = best;
      sol.policy[t][s] = best_action;
    }
  }
  return sol;
}

}  // namespace dro
