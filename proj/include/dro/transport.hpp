#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "dro/problem.hpp"

namespace dro {

/// Joint mass matrix together with its intended marginals. Row sums and
/// column sums must match the marginals within 1e-9 and total mass is one.
struct Coupling {
  std::vector<std::vector<double>> mass;
  std::vector<double> row_marginal;
  std::vector<double> col_marginal;

  std::size_t rows() const { return mass.size(); }
  std::size_t cols() const { return mass.empty() ? 0 : mass.front().size(); }
};

/// Optimal value plus the attaining coupling and its column marginal (the
/// worst-case distribution over candidate points).
struct PrimalResult {
  double value = 0.0;
  Coupling coupling;
  DiscreteDistribution worst_case;
};

/// Result of the transport LP; `coupling` is absent when no finite-cost
/// coupling with the required marginals exists and `value` is +inf.
struct KantorovichResult {
  double value = 0.0;
  std::optional<Coupling> coupling;
};

/// Minimum expected transport cost between mu and nu. `cost` rows are
/// indexed by point ids on mu's side and columns by point ids on nu's side;
/// mu/nu address it through their support indices. Exact to 1e-9 via a
/// dense transportation simplex started from a max-flow feasible plan.
KantorovichResult kantorovich_cost(const DiscreteDistribution& mu,
                                   const DiscreteDistribution& nu,
                                   const CostMatrix& cost);

/// Smallest threshold t among the distinct finite cost values such that a
/// coupling of mu and nu supported on {cost <= t} exists; +inf if none.
/// Feasibility at each probe is a max-flow check on the admissible arcs.
double max_transport_cost(const DiscreteDistribution& mu,
                          const DiscreteDistribution& nu,
                          const CostMatrix& cost);

/// Worst-case expected loss over the transport-budget ball: maximizes the
/// coupling's expected loss subject to the nominal row marginals and
/// total cost <= radius. Solved exactly by a parametric penalty search with
/// at most one fractionally split row.
PrimalResult primal_worst_case(const DroProblem& problem);

/// Penalized counterpart: maximizes expected loss minus lambda times the
/// transport cost over couplings with nominal first marginal. Row-separable;
/// ties pick the lowest column index.
PrimalResult primal_soft(const DroProblem& problem, double lambda);

}  // namespace dro
