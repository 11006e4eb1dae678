#pragma once

#include <vector>

#include "dro/problem.hpp"

namespace dro {

/// Robust chance constraint data: nominal atom weights, the distance from
/// each atom to the unsafe set, the transport order, the ball radius, and
/// the violation tolerance. Atoms inside the unsafe set have distance 0.
struct ChanceInstance {
  std::vector<double> weights;
  std::vector<double> unsafe_distance;
  double p = 1.0; // kInf selects the bottleneck-ball variant
  double rho = 0.0;
  double beta = 0.5;
};

ChanceInstance validate_chance(ChanceInstance instance);

struct ChanceValue {
  double value = 0.0;       // worst-case probability of landing in the unsafe set
  double lambda_star = 0.0; // smallest minimizing transport penalty
  bool radius_zero_warning = false;
};

/// Worst-case unsafe probability over the order-p ball: exact piecewise-
/// linear minimization over the penalty of
///   lambda * rho^p + sum_i w_i (1 - lambda d_i^p)_+,
/// whose breakpoints are lambda = d_i^{-p}. Requires p < inf.
ChanceValue chance_robust_value(const ChanceInstance& instance);

/// Feasibility of the chance constraint via its tail-average reformulation
///   rho^p <= -beta * CVaR_beta(-d^p),
/// where CVaR here is the density-bounded form min_a { a + E[(Y-a)_+]/beta }
/// (this is the form under which the reformulation is an identity; it is a
/// different normalization from the portfolio CVaR in risk.hpp). Agrees with
/// chance_robust_value(instance) <= beta.
bool chance_feasible(const ChanceInstance& instance);

struct ChanceLinfResult {
  double value = 0.0;  // nominal mass within distance rho of the unsafe set
  bool feasible = false;
  /// Distance from the nominal support to the unsafe set (the smallest atom
  /// distance). Reported for diagnostics: at or beyond it some nominal mass
  /// can always be pushed into the unsafe set.
  double infeasibility_threshold = 0.0;
};

/// Bottleneck-ball variant (p = inf): the worst case moves exactly the atoms
/// within distance rho, so the value is their total mass.
ChanceLinfResult chance_linf(const ChanceInstance& instance);

/// Distance from each scalar point to the half-line [boundary, +inf) when
/// unsafe_above, otherwise to (-inf, boundary].
std::vector<double> distances_to_halfline(const std::vector<double>& points,
                                          double boundary, bool unsafe_above);

/// Distance from each point in R^d to the axis-aligned box [lo, hi] under
/// the named norm (per-coordinate overshoots aggregated by the norm).
std::vector<double> distances_to_box(const std::vector<std::vector<double>>& points,
                                     const std::vector<double>& lo,
                                     const std::vector<double>& hi,
                                     MetricKind norm);

}  // namespace dro
