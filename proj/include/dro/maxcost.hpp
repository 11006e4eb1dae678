#pragma once

#include <cstddef>
#include <vector>

#include "dro/problem.hpp"

namespace dro {

/// Per-row choice and its expectation for the bottleneck-ball problems.
/// value == sum_i p_i * loss[per_row_argmax[i]] to within 1e-12, and every
/// chosen column satisfies the ball constraint of the query.
struct MaxCostResult {
  double value = 0.0;
  std::vector<std::size_t> per_row_argmax;
};

/// Worst-case expected loss over the bottleneck-cost ball: per nominal atom,
/// the best loss among columns with cost <= radius. Ties pick the lowest
/// column index. The zero-cost diagonal keeps every row feasible.
MaxCostResult linf_robust(const DroProblem& problem);

/// Strict-ball variant: columns with cost < radius (exact comparison, no
/// epsilon; the strict and non-strict values genuinely differ at thresholds
/// and that distinction is the point). Requires radius > 0.
MaxCostResult linf_robust_strict(const DroProblem& problem);

/// Penalized counterpart: sup over radii of linf_robust(radius) - lambda *
/// radius. The objective is a step function minus a linear term, so the sup
/// is attained at 0 or at a realized finite cost value; the scan is exact.
double linf_soft(const DroProblem& problem, double lambda);

/// Independent check of linf_robust: the row-separable LP that maximizes
/// expected loss over couplings with nominal first marginal and zero mass on
/// arcs costing more than the radius.
double linf_primal_oracle(const DroProblem& problem);

}  // namespace dro
